#include "pmfgn/training/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "pmfgn/corpus/vocabulary.hpp"
#include "pmfgn/model/dataset.hpp"
#include "pmfgn/nn/rng.hpp"
#include "pmfgn/training/config.hpp"
#include "pmfgn/training/trainer.hpp"

namespace pmfgn::training {

double relative_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

corpus::Corpus micro_corpus(std::uint64_t seed) {
  nn::Rng rng(seed);
  struct Spec {
    const char* teacher;
    corpus::Tokens feedback;
    std::vector<int> labels;
  };
  const std::vector<Spec> specs = {
      {"A", {"hello", ".", "cannot", "see", "."}, {0, 0, 1, 1, 1}},
      {"B", {"hi", ".", "no", "sound", "!"}, {0, 0, 2, 2, 2}},
      {"A", {"hello", ".", "off", "topic", "."}, {0, 0, 3, 3, 3}},
  };
  const corpus::Tokens words = {"add", "sum", "time", "clock", "um", "so"};
  corpus::Corpus out;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    corpus::AssignmentRecord r;
    r.id = "micro" + std::to_string(i);
    r.teacher_id = specs[i].teacher;
    r.image.data.resize(static_cast<std::size_t>(corpus::kImageSize) * corpus::kImageSize);
    for (auto& px : r.image.data) px = static_cast<std::uint8_t>(rng.index(256));
    r.audio.samples.resize(2400);  // three 50 ms frames
    for (auto& s : r.audio.samples) s = static_cast<std::int16_t>(rng.uniform(-8000.0, 8000.0));
    for (int k = 0; k < 3; ++k) r.speech_tokens.push_back(words[rng.index(words.size())]);
    for (int k = 0; k < 2; ++k) r.question_tokens.push_back(words[rng.index(words.size())]);
    r.feedback_tokens = specs[i].feedback;
    r.modality_labels = specs[i].labels;
    r.references = {r.feedback_tokens};
    out.push_back(std::move(r));
  }
  return out;
}

GradCheckReport grad_check(std::uint64_t seed, const GradCheckOptions& options) {
  const corpus::Corpus data = micro_corpus(seed);
  const auto [vin, vout] = corpus::build_vocabularies(data, 1);
  TrainConfig tc;
  tc.dims = model::micro_dims();
  tc.ablation = options.ablation;
  model::Model m(make_model_config(tc, vin.size(), vout.size(), teacher_ids(data)));
  m.initialize(nn::mix_seed(seed, 11));
  const auto examples = model::prepare_dataset(data, vin, vout, m.config());

  std::vector<const model::Example*> batch;
  std::vector<std::vector<int>> routes;
  for (const auto& ex : examples) {
    batch.push_back(&ex);
    routes.push_back(training_routes(ex.inputs, options.ablation, nn::mix_seed(seed, 12)));
  }
  auto objective = [&] {
    nn::Gradients scratch(m.params());
    return batch_gradients(m, batch, routes, options.alpha, 1, scratch).objective;
  };

  nn::Gradients analytic(m.params());
  batch_gradients(m, batch, routes, options.alpha, 1, analytic);
  if (options.corrupt) options.corrupt(m.params(), analytic);

  auto& store = m.params();
  const int groups = static_cast<int>(store.size());
  const int per_group = std::max(2, (options.samples + groups - 1) / groups);
  nn::Rng rng(nn::mix_seed(seed, 13));
  GradCheckReport report;
  for (nn::ParamId id : store.ids()) {
    nn::Matrix& value = store.value(id);
    GroupError ge;
    ge.name = store.name(id);
    ge.max_abs_grad = analytic[id].cwiseAbs().maxCoeff();
    const auto size = static_cast<std::size_t>(value.size());
    std::vector<std::size_t> picks(size);
    for (std::size_t i = 0; i < size; ++i) picks[i] = i;
    rng.shuffle(picks);
    picks.resize(std::min<std::size_t>(size, per_group));
    for (std::size_t flat : picks) {
      double& theta = value.data()[flat];
      const double saved = theta;
      theta = saved + options.step;
      const double up = objective();
      theta = saved - options.step;
      const double down = objective();
      theta = saved;
      const double numeric = (up - down) / (2 * options.step);
      const double err = relative_error(analytic[id].data()[flat], numeric, options.floor);
      ge.max_rel_error = std::max(ge.max_rel_error, err);
      ++ge.sampled;
    }
    report.sampled += ge.sampled;
    if (ge.max_rel_error >= report.max_rel_error) {
      report.max_rel_error = ge.max_rel_error;
      report.worst_group = ge.name;
    }
    report.groups.push_back(std::move(ge));
  }
  return report;
}

}  // namespace pmfgn::training
