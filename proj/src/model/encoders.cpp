#include "pmfgn/model/encoders.hpp"

#include "pmfgn/error.hpp"

namespace pmfgn::model {

using nn::Expr;

ImageEncoder ImageEncoder::create(nn::ParameterStore& store, const ModelDims& dims) {
  ImageEncoder enc;
  enc.conv1_w = store.add("image.conv1.W", dims.conv1, kPatch * kPatch);
  enc.conv1_b = store.add("image.conv1.b", dims.conv1, 1);
  enc.conv2_w = store.add("image.conv2.W", dims.conv2, dims.conv1);
  enc.conv2_b = store.add("image.conv2.b", dims.conv2, 1);
  enc.proj = nn::Affine::create(store, "image.proj", dims.conv2, dims.d);
  return enc;
}

Expr ImageEncoder::encode(nn::Graph& g, const signal::PatchGrid& grid) const {
  const int size = static_cast<int>(grid.pixels.rows());
  if (size != corpus::kImageSize || grid.pixels.cols() != size) throw ValidationError("image grid must be 64x64");
  nn::Matrix flat(1, size * size);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) flat(0, y * size + x) = grid.pixels(y, x);

  const int s1 = size / kPatch;  // 16
  Expr patches = nn::patchify(g.constant(std::move(flat)), size, size, kPatch);
  Expr c1 = nn::tanh(nn::add_colwise(nn::matmul(g.param(conv1_w), patches), g.param(conv1_b)));
  Expr p1 = nn::avg_pool(c1, s1, s1, 2);  // 8x8
  Expr c2 = nn::tanh(nn::add_colwise(nn::matmul(g.param(conv2_w), p1), g.param(conv2_b)));
  Expr p2 = nn::avg_pool(c2, s1 / 2, s1 / 2, 2);  // 4x4
  return proj(g, p2);
}

AudioEncoder AudioEncoder::create(nn::ParameterStore& store, const ModelDims& dims) {
  AudioEncoder enc;
  enc.gru = nn::Gru::create(store, "audio.gru", dims.n_mfcc, dims.d_audio);
  enc.proj = nn::Affine::create(store, "audio.proj", dims.d_audio, dims.d);
  return enc;
}

Expr AudioEncoder::encode(nn::Graph& g, const signal::FrameMatrix& frames) const {
  if (frames.rows() == 0) throw ValidationError("audio encoder needs at least one frame");
  if (frames.cols() != gru.in) {
    throw ValidationError("audio frames have " + std::to_string(frames.cols()) + " coefficients, expected " +
                          std::to_string(gru.in));
  }
  Expr h = nn::zeros(g, gru.hidden);
  std::vector<Expr> hs;
  hs.reserve(frames.rows());
  for (Eigen::Index j = 0; j < frames.rows(); ++j) {
    h = gru.step(g, g.constant(frames.row(j).transpose()), h);
    hs.push_back(h);
  }
  return proj(g, nn::concat_cols(hs));
}

TextMatchEncoder TextMatchEncoder::create(nn::ParameterStore& store, const ModelDims& dims, int input_vocab) {
  TextMatchEncoder enc;
  enc.vocab = input_vocab;
  enc.embedding = store.add("text.embedding", input_vocab, dims.e_in, nn::Init::StandardNormal);
  enc.speech_gru = nn::Gru::create(store, "text.speech_gru", dims.e_in, dims.d_text);
  enc.speech_proj = nn::Affine::create(store, "text.speech_proj", dims.d_text, dims.d);
  enc.question_gru = nn::Gru::create(store, "text.question_gru", dims.e_in, dims.d_text);
  enc.question_proj = nn::Affine::create(store, "text.question_proj", dims.d_text, dims.d);
  enc.w = store.add("text.attn.w", dims.d, 1);
  enc.w_q = store.add("text.attn.Wq", dims.d, dims.d);
  enc.w_t = store.add("text.attn.Wt", dims.d, dims.d);
  enc.w_m = store.add("text.attn.Wm", dims.d, dims.d);
  enc.match = nn::Lstm::create(store, "text.match_lstm", 2 * dims.d, dims.d);
  enc.out = nn::Affine::create(store, "text.out", dims.d, dims.d);
  return enc;
}

Expr TextMatchEncoder::states(nn::Graph& g, const nn::Gru& gru, const nn::Affine& p,
                              std::span<const int> tokens) const {
  Expr h = nn::zeros(g, gru.hidden);
  std::vector<Expr> hs;
  hs.reserve(tokens.size());
  for (int tok : tokens) {
    if (tok < 0 || tok >= vocab) {
      throw ValidationError("input token index " + std::to_string(tok) + " outside vocabulary of size " +
                            std::to_string(vocab));
    }
    h = gru.step(g, g.lookup(embedding, tok), h);
    hs.push_back(h);
  }
  return p(g, nn::concat_cols(hs));
}

Expr TextMatchEncoder::encode(nn::Graph& g, std::span<const int> speech, std::span<const int> question,
                              TextMatchTrace* trace) const {
  if (speech.empty() || question.empty()) throw ValidationError("speech and question must be nonempty");
  Expr ht = states(g, speech_gru, speech_proj, speech);
  Expr hq = states(g, question_gru, question_proj, question);

  Expr wq_hq = nn::matmul(g.param(w_q), hq);
  Expr wt_ht = nn::matmul(g.param(w_t), ht);
  Expr wv = g.param(w);
  Expr wm = g.param(w_m);

  nn::Lstm::State state{nn::zeros(g, match.hidden), nn::zeros(g, match.hidden)};
  std::vector<Expr> outs;
  outs.reserve(speech.size());
  for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(speech.size()); ++k) {
    Expr bias = nn::add(nn::column(wt_ht, k), nn::matmul(wm, state.h));
    Expr energy = nn::matmul_tn(nn::tanh(nn::add_colwise(wq_hq, bias)), wv);  // L_q x 1
    Expr alpha = nn::softmax(energy);
    Expr c = nn::matmul(hq, alpha);
    if (trace) {
      trace->alpha.push_back(alpha.value());
      trace->context.push_back(c.value());
    }
    state = match.step(g, nn::concat_rows({c, nn::column(ht, k)}), state);
    outs.push_back(state.h);
  }
  return out(g, nn::concat_cols(outs));
}

}  // namespace pmfgn::model
