#include <doctest.h>

#include <cmath>

#include "pmfgn/error.hpp"
#include "pmfgn/model/encoders.hpp"
#include "unit/helpers.hpp"

using namespace pmfgn;
using namespace pmfgn::model;
using nn::Matrix;

namespace {

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Scalar-loop GRU cell reading the stored weights.
std::vector<double> manual_gru(const nn::ParameterStore& s, const nn::Gru& c, const std::vector<double>& x,
                               const std::vector<double>& h) {
  const Matrix &wx = s.value(c.wx), &wh = s.value(c.wh), &bx = s.value(c.bx), &bh = s.value(c.bh);
  const int n = c.hidden;
  auto gx = [&](int row) {
    double v = bx(row, 0);
    for (std::size_t j = 0; j < x.size(); ++j) v += wx(row, j) * x[j];
    return v;
  };
  auto gh = [&](int row) {
    double v = bh(row, 0);
    for (std::size_t j = 0; j < h.size(); ++j) v += wh(row, j) * h[j];
    return v;
  };
  std::vector<double> out(n);
  for (int u = 0; u < n; ++u) {
    const double r = sig(gx(u) + gh(u));
    const double z = sig(gx(n + u) + gh(n + u));
    const double cand = std::tanh(gx(2 * n + u) + r * gh(2 * n + u));
    out[u] = (1 - z) * cand + z * h[u];
  }
  return out;
}

struct LstmState {
  std::vector<double> h, c;
};

LstmState manual_lstm(const nn::ParameterStore& s, const nn::Lstm& cell, const std::vector<double>& x,
                      const LstmState& prev) {
  const Matrix &wx = s.value(cell.wx), &wh = s.value(cell.wh), &b = s.value(cell.b);
  const int n = cell.hidden;
  auto pre = [&](int row) {
    double v = b(row, 0);
    for (std::size_t j = 0; j < x.size(); ++j) v += wx(row, j) * x[j];
    for (std::size_t j = 0; j < prev.h.size(); ++j) v += wh(row, j) * prev.h[j];
    return v;
  };
  LstmState out{std::vector<double>(n), std::vector<double>(n)};
  for (int u = 0; u < n; ++u) {
    const double i = sig(pre(u)), f = sig(pre(n + u)), g = std::tanh(pre(2 * n + u)), o = sig(pre(3 * n + u));
    out.c[u] = f * prev.c[u] + i * g;
    out.h[u] = o * std::tanh(out.c[u]);
  }
  return out;
}

std::vector<double> manual_affine(const nn::ParameterStore& s, const nn::Affine& a, const std::vector<double>& x) {
  std::vector<double> y(a.out);
  for (int r = 0; r < a.out; ++r) {
    y[r] = s.value(a.bias)(r, 0);
    for (int c = 0; c < a.in; ++c) y[r] += s.value(a.weight)(r, c) * x[c];
  }
  return y;
}

std::vector<double> col(const Matrix& m, Eigen::Index j) {
  return std::vector<double>(m.col(j).data(), m.col(j).data() + m.rows());
}

void randomize(nn::ParameterStore& store, std::uint64_t seed, double scale = 1.0) {
  nn::Rng rng(seed);
  for (auto id : store.ids()) {
    Matrix& v = store.value(id);
    for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = rng.uniform(-scale, scale);
  }
}

ModelDims tiny_dims() {
  ModelDims d = micro_dims();
  d.d = 2;
  d.d_audio = 2;
  d.d_text = 2;
  d.e_in = 2;
  return d;
}

signal::PatchGrid grid_of(std::uint64_t seed) {
  corpus::Image img;
  nn::Rng rng(seed);
  for (int i = 0; i < 64 * 64; ++i) img.data.push_back(static_cast<std::uint8_t>(rng.index(256)));
  return signal::preprocess_image(img);
}

}  // namespace

TEST_CASE("2-unit GRU matches the manual cell") {
  nn::ParameterStore store;
  nn::Gru gru = nn::Gru::create(store, "g", 3, 2);
  randomize(store, 1);
  const std::vector<double> x = {0.3, -1.2, 0.8}, h = {0.5, -0.25};
  nn::Graph g(store);
  Matrix xv(3, 1), hv(2, 1);
  xv << x[0], x[1], x[2];
  hv << h[0], h[1];
  const Matrix out = gru.step(g, g.constant(xv), g.constant(hv)).value();
  const auto want = manual_gru(store, gru, x, h);
  for (int u = 0; u < 2; ++u) CHECK(std::abs(out(u, 0) - want[u]) < 1e-12);
}

TEST_CASE("2-unit LSTM matches the manual cell") {
  nn::ParameterStore store;
  nn::Lstm lstm = nn::Lstm::create(store, "l", 3, 2);
  randomize(store, 2);
  const LstmState prev{{0.1, -0.4}, {0.7, 0.2}};
  const std::vector<double> x = {1.0, 0.5, -0.5};
  nn::Graph g(store);
  Matrix xv(3, 1), hv(2, 1), cv(2, 1);
  xv << x[0], x[1], x[2];
  hv << prev.h[0], prev.h[1];
  cv << prev.c[0], prev.c[1];
  const auto st = lstm.step(g, g.constant(xv), {g.constant(hv), g.constant(cv)});
  const auto want = manual_lstm(store, lstm, x, prev);
  for (int u = 0; u < 2; ++u) {
    CHECK(std::abs(st.h.value()(u, 0) - want.h[u]) < 1e-12);
    CHECK(std::abs(st.c.value()(u, 0) - want.c[u]) < 1e-12);
  }
}

TEST_CASE("image encoder shape and zero weights") {
  nn::ParameterStore store;
  ModelDims dims = micro_dims();
  ImageEncoder enc = ImageEncoder::create(store, dims);
  nn::Rng rng(3);
  store.initialize(rng);
  {
    nn::Graph g(store);
    const Matrix f = enc.encode(g, grid_of(1)).value();
    CHECK(f.rows() == dims.d);
    CHECK(f.cols() == 16);
    CHECK(f.allFinite());
  }
  for (auto id : store.ids()) store.value(id).setZero();
  nn::Graph g(store);
  CHECK(enc.encode(g, grid_of(1)).value().isZero());
}

TEST_CASE("image features respond only to their own area") {
  nn::ParameterStore store;
  ImageEncoder enc = ImageEncoder::create(store, micro_dims());
  nn::Rng rng(4);
  store.initialize(rng);
  for (int area = 0; area < 16; area += 5) {
    CAPTURE(area);
    signal::PatchGrid a = grid_of(9), b = a;
    const int r0 = (area / 4) * 16, c0 = (area % 4) * 16;
    for (int r = r0; r < r0 + 16; ++r)
      for (int c = c0; c < c0 + 16; ++c) b.pixels(r, c) = 1.0 - b.pixels(r, c);
    nn::Graph g(store);
    const Matrix fa = enc.encode(g, a).value(), fb = enc.encode(g, b).value();
    for (int j = 0; j < 16; ++j) {
      if (j == area)
        CHECK((fa.col(j) - fb.col(j)).norm() > 0.0);
      else
        CHECK(fa.col(j) == fb.col(j));
    }
  }
}

TEST_CASE("image encoder rejects a wrong grid") {
  nn::ParameterStore store;
  ImageEncoder enc = ImageEncoder::create(store, micro_dims());
  signal::PatchGrid bad;
  bad.pixels = Eigen::MatrixXd::Zero(32, 32);
  nn::Graph g(store);
  CHECK_THROWS_AS(enc.encode(g, bad), ValidationError);
}

TEST_CASE("audio encoder shape, causality and errors") {
  nn::ParameterStore store;
  ModelDims dims = micro_dims();
  AudioEncoder enc = AudioEncoder::create(store, dims);
  nn::Rng rng(5);
  store.initialize(rng);
  signal::FrameMatrix frames = Eigen::MatrixXd::Random(20, 13);
  nn::Graph g(store);
  const Matrix f = enc.encode(g, frames).value();
  CHECK(f.rows() == dims.d);
  CHECK(f.cols() == 20);

  signal::FrameMatrix poked = frames;
  poked.row(9).array() += 0.5;  // frame 10
  const Matrix p = enc.encode(g, poked).value();
  CHECK(p.leftCols(9) == f.leftCols(9));
  CHECK((p.col(9) - f.col(9)).norm() > 0.0);

  CHECK_THROWS_AS(enc.encode(g, signal::FrameMatrix(0, 13)), ValidationError);
  CHECK_THROWS_AS(enc.encode(g, signal::FrameMatrix::Zero(3, 12)), ValidationError);
}

TEST_CASE("single-frame 2-unit audio encoder matches manual evaluation") {
  nn::ParameterStore store;
  AudioEncoder enc = AudioEncoder::create(store, tiny_dims());
  randomize(store, 6, 0.5);
  signal::FrameMatrix frame(1, 13);
  for (int k = 0; k < 13; ++k) frame(0, k) = 0.1 * (k - 6);
  nn::Graph g(store);
  const Matrix f = enc.encode(g, frame).value();
  const auto h = manual_gru(store, enc.gru, col(frame.transpose(), 0), {0.0, 0.0});
  const auto want = manual_affine(store, enc.proj, h);
  for (int u = 0; u < 2; ++u) CHECK(std::abs(f(u, 0) - want[u]) < 1e-12);
}

TEST_CASE("text match with one question token attends to it fully") {
  nn::ParameterStore store;
  TextMatchEncoder enc = TextMatchEncoder::create(store, micro_dims(), 10);
  nn::Rng rng(7);
  store.initialize(rng);
  const std::vector<int> speech = {4, 5, 6, 7}, question = {8};
  TextMatchTrace trace;
  nn::Graph g(store);
  const Matrix f = enc.encode(g, speech, question, &trace).value();
  CHECK(f.cols() == 4);
  const Matrix hq = enc.states(g, enc.question_gru, enc.question_proj, question).value();
  REQUIRE(trace.alpha.size() == 4);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(trace.alpha[k](0, 0) == 1.0);
    CHECK(trace.context[k] == hq.col(0));
  }
}

TEST_CASE("zero attention vector gives uniform weights") {
  nn::ParameterStore store;
  TextMatchEncoder enc = TextMatchEncoder::create(store, micro_dims(), 10);
  nn::Rng rng(8);
  store.initialize(rng);
  store.value(enc.w).setZero();
  const std::vector<int> speech = {4, 5, 6}, question = {7, 8, 9, 4};
  TextMatchTrace trace;
  nn::Graph g(store);
  enc.encode(g, speech, question, &trace);
  const Matrix hq = enc.states(g, enc.question_gru, enc.question_proj, question).value();
  const Matrix mean = hq.rowwise().mean();
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK((trace.alpha[k].array() == 0.25).all());
    CHECK((trace.context[k] - mean).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("2x2 text match micro-instance matches a brute-force oracle") {
  nn::ParameterStore store;
  TextMatchEncoder enc = TextMatchEncoder::create(store, tiny_dims(), 6);
  randomize(store, 9);
  const std::vector<int> speech = {4, 5}, question = {5, 2};
  TextMatchTrace trace;
  nn::Graph g(store);
  const Matrix out = enc.encode(g, speech, question, &trace).value();

  auto encode_seq = [&](const nn::Gru& gru, const nn::Affine& proj, const std::vector<int>& toks) {
    std::vector<std::vector<double>> hs;
    std::vector<double> h(2, 0.0);
    for (int t : toks) {
      h = manual_gru(store, gru, col(store.value(enc.embedding).transpose(), t), h);
      hs.push_back(manual_affine(store, proj, h));
    }
    return hs;
  };
  const auto ht = encode_seq(enc.speech_gru, enc.speech_proj, speech);
  const auto hq = encode_seq(enc.question_gru, enc.question_proj, question);
  const Matrix &w = store.value(enc.w), &wq = store.value(enc.w_q), &wt = store.value(enc.w_t),
               &wm = store.value(enc.w_m);

  LstmState st{{0.0, 0.0}, {0.0, 0.0}};
  for (int k = 0; k < 2; ++k) {
    double e[2];
    for (int j = 0; j < 2; ++j) {
      e[j] = 0.0;
      for (int r = 0; r < 2; ++r) {
        double pre = 0.0;
        for (int c = 0; c < 2; ++c) pre += wq(r, c) * hq[j][c] + wt(r, c) * ht[k][c] + wm(r, c) * st.h[c];
        e[j] += w(r, 0) * std::tanh(pre);
      }
    }
    const double z = std::exp(e[0]) + std::exp(e[1]);
    const double a[2] = {std::exp(e[0]) / z, std::exp(e[1]) / z};
    std::vector<double> c = {a[0] * hq[0][0] + a[1] * hq[1][0], a[0] * hq[0][1] + a[1] * hq[1][1]};
    for (int j = 0; j < 2; ++j) CHECK(std::abs(trace.alpha[k](j, 0) - a[j]) < 1e-12);
    for (int r = 0; r < 2; ++r) CHECK(std::abs(trace.context[k](r, 0) - c[r]) < 1e-12);
    st = manual_lstm(store, enc.match, {c[0], c[1], ht[k][0], ht[k][1]}, st);
    const auto y = manual_affine(store, enc.out, st.h);
    for (int r = 0; r < 2; ++r) CHECK(std::abs(out(r, k) - y[r]) < 1e-12);
  }
}

TEST_CASE("text match attention weights are distributions") {
  nn::ParameterStore store;
  TextMatchEncoder enc = TextMatchEncoder::create(store, micro_dims(), 12);
  nn::Rng rng(10);
  store.initialize(rng);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> speech, question;
    for (std::size_t i = 0, n = 1 + rng.index(7); i < n; ++i) speech.push_back(static_cast<int>(rng.index(12)));
    for (std::size_t i = 0, n = 1 + rng.index(5); i < n; ++i) question.push_back(static_cast<int>(rng.index(12)));
    TextMatchTrace trace;
    nn::Graph g(store);
    const Matrix f = enc.encode(g, speech, question, &trace).value();
    CHECK(f.cols() == static_cast<Eigen::Index>(speech.size()));
    for (const auto& a : trace.alpha) {
      CHECK(std::abs(a.sum() - 1.0) < 1e-12);
      CHECK(a.minCoeff() >= 0.0);
    }
  }
}

TEST_CASE("text match rejects bad tokens and empty sequences") {
  nn::ParameterStore store;
  TextMatchEncoder enc = TextMatchEncoder::create(store, micro_dims(), 10);
  nn::Graph g(store);
  const std::vector<int> ok = {4}, bad = {10}, empty;
  CHECK_THROWS_AS(enc.encode(g, ok, bad), ValidationError);
  CHECK_THROWS_AS(enc.encode(g, empty, ok), ValidationError);
}

TEST_CASE("encoder gradients match finite differences") {
  ModelDims dims = micro_dims();
  SUBCASE("audio") {
    nn::ParameterStore store;
    AudioEncoder enc = AudioEncoder::create(store, dims);
    nn::Rng rng(11);
    store.initialize(rng);
    signal::FrameMatrix frames = Eigen::MatrixXd::Random(4, 13);
    CHECK(testing::max_grad_error(store, [&](nn::Graph& g) { return testing::probe(g, enc.encode(g, frames)); }) <
          1e-4);
  }
  SUBCASE("text") {
    nn::ParameterStore store;
    TextMatchEncoder enc = TextMatchEncoder::create(store, dims, 8);
    nn::Rng rng(12);
    store.initialize(rng);
    const std::vector<int> s = {4, 5, 6}, q = {7, 4};
    CHECK(testing::max_grad_error(store, [&](nn::Graph& g) { return testing::probe(g, enc.encode(g, s, q)); }) <
          1e-4);
  }
  SUBCASE("image") {
    nn::ParameterStore store;
    ImageEncoder enc = ImageEncoder::create(store, dims);
    nn::Rng rng(13);
    store.initialize(rng);
    const auto grid = grid_of(2);
    CHECK(testing::max_grad_error(store, [&](nn::Graph& g) { return testing::probe(g, enc.encode(g, grid)); }) <
          1e-4);
  }
}
