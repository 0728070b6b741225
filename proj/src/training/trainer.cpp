#include "pmfgn/training/trainer.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "pmfgn/eval/evaluate.hpp"
#include "pmfgn/nn/parallel.hpp"

namespace pmfgn::training {

using model::Example;

Adam::Adam(const nn::ParameterStore& store, const TrainConfig& c)
    : lr_(c.lr), beta1_(c.beta1), beta2_(c.beta2), eps_(c.eps) {
  for (nn::ParamId id : store.ids()) {
    const auto& v = store.value(id);
    m_.push_back(nn::Matrix::Zero(v.rows(), v.cols()));
    v_.push_back(nn::Matrix::Zero(v.rows(), v.cols()));
  }
}

void Adam::step(nn::ParameterStore& store, const nn::Gradients& grads) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (nn::ParamId id : store.ids()) {
    const nn::Matrix& g = grads[id];
    nn::Matrix& m = m_[id.index];
    nn::Matrix& v = v_[id.index];
    m = beta1_ * m + (1.0 - beta1_) * g;
    v = beta2_ * v + (1.0 - beta2_) * g.cwiseProduct(g);
    store.value(id).array() -= lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + eps_);
  }
}

std::vector<int> training_routes(const model::RecordInputs& in, model::Ablation ablation, std::uint64_t seed) {
  if (ablation != model::Ablation::NoLabel) return in.labels;
  nn::Rng rng(seed);
  const int sentences = in.sentence.empty() ? 0 : in.sentence.back();
  std::vector<int> picked(sentences);
  for (auto& p : picked) p = static_cast<int>(rng.index(4));
  std::vector<int> routes(in.targets.size(), 0);
  for (std::size_t t = 0; t + 1 < in.targets.size(); ++t) routes[t] = picked[in.sentence[t]];
  return routes;
}

LossParts batch_gradients(const model::Model& m, std::span<const Example* const> batch,
                          std::span<const std::vector<int>> routes, double alpha, int workers,
                          nn::Gradients& grads) {
  if (batch.empty()) throw ValidationError("empty batch");
  const bool supervise = m.config().ablation != model::Ablation::NoLabel;
  const double weight = 1.0 / static_cast<double>(batch.size());
  const int w = std::max(1, std::min<int>(workers, static_cast<int>(batch.size())));
  std::vector<nn::Gradients> local;
  for (int k = 1; k < w; ++k) local.emplace_back(m.params());
  std::vector<LossParts> parts(w);

  nn::parallel_chunks(batch.size(), w, [&](int k, std::size_t begin, std::size_t end) {
    nn::Gradients& target = k == 0 ? grads : local[k - 1];
    for (std::size_t i = begin; i < end; ++i) {
      nn::Graph g(m.params());
      auto res = m.sequence_nll(g, batch[i]->inputs, routes[i], supervise);
      nn::Expr loss = res.nll;
      double gate = 0.0;
      if (supervise) {
        gate = res.gate_nll.scalar();
        loss = nn::add(loss, nn::scale(res.gate_nll, alpha));
      }
      g.backward(loss, target, weight);
      parts[k].j += res.nll.scalar();
      parts[k].j_gate += gate;
      parts[k].tokens += static_cast<long>(batch[i]->inputs.targets.size());
      parts[k].objective += loss.scalar() * weight;
    }
  });

  LossParts total;
  for (int k = 0; k < w; ++k) {
    if (k > 0) grads.add(local[k - 1]);
    total.j += parts[k].j;
    total.j_gate += parts[k].j_gate;
    total.tokens += parts[k].tokens;
    total.objective += parts[k].objective;
  }
  return total;
}

double clip_global_norm(nn::Gradients& grads, double max_norm) {
  const double norm = std::sqrt(grads.squared_norm());
  if (max_norm > 0 && norm > max_norm) grads.scale(max_norm / norm);
  return norm;
}

std::string largest_gradient_group(const nn::ParameterStore& store, const nn::Gradients& grads) {
  std::string best;
  double best_norm = -1.0;
  for (nn::ParamId id : store.ids()) {
    const double n = grads[id].norm();
    if (!std::isfinite(n)) return store.name(id);
    if (n > best_norm) {
      best_norm = n;
      best = store.name(id);
    }
  }
  return best;
}

std::vector<std::string> teacher_ids(const corpus::Corpus& corpus) {
  std::set<std::string> ids;
  for (const auto& r : corpus) ids.insert(r.teacher_id);
  return {ids.begin(), ids.end()};
}

Checkpoint train(const TrainConfig& config, const corpus::Corpus& train_set, const corpus::Corpus& val_set,
                 const TrainOptions& options) {
  config.validate();
  if (train_set.empty()) throw ValidationError("training split is empty");
  if (val_set.empty()) throw ValidationError("validation split is empty");

  Checkpoint ck;
  ck.train_config = config;
  std::tie(ck.input_vocab, ck.output_vocab) = corpus::build_vocabularies(train_set, config.min_count);
  const auto mc =
      make_model_config(config, ck.input_vocab.size(), ck.output_vocab.size(), teacher_ids(train_set));
  ck.model = std::make_shared<model::Model>(mc);
  model::Model& m = *ck.model;
  m.initialize(nn::mix_seed(config.seed, 1));

  const auto train_ex = model::prepare_dataset(train_set, ck.input_vocab, ck.output_vocab, mc, config.workers);
  const auto val_ex = model::prepare_dataset(val_set, ck.input_vocab, ck.output_vocab, mc, config.workers);

  nn::Rng order_rng(nn::mix_seed(config.seed, 2));
  const std::uint64_t route_seed = nn::mix_seed(config.seed, 3);
  Adam adam(m.params(), config);
  nn::Gradients grads(m.params());
  std::vector<nn::Matrix> best;
  double best_ppl = std::numeric_limits<double>::infinity();
  int bad_epochs = 0;

  const std::size_t n = train_ex.size();
  std::vector<std::size_t> order(n);
  long step = 0;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    order_rng.shuffle(order);
    EpochStats stats;
    stats.epoch = epoch;
    long tokens = 0;
    double nll = 0.0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t end = std::min(n, start + config.batch_size);
      std::vector<const Example*> batch;
      std::vector<std::vector<int>> routes;
      for (std::size_t i = start; i < end; ++i) {
        const Example& ex = train_ex[order[i]];
        batch.push_back(&ex);
        routes.push_back(training_routes(ex.inputs, mc.ablation, nn::mix_seed(route_seed, epoch * n + order[i])));
      }
      grads.set_zero();
      m.set_mixture_override(step < config.mixture_warmup_steps ? std::optional<double>(0.5) : std::nullopt);
      ++step;
      const LossParts parts = batch_gradients(m, batch, routes, config.alpha, config.workers, grads);
      if (!std::isfinite(parts.objective) || !grads.all_finite()) {
        throw TrainingDiverged("non-finite loss in epoch " + std::to_string(epoch) +
                               "; largest gradient in parameter group '" +
                               largest_gradient_group(m.params(), grads) + "'");
      }
      if (config.clip_norm > 0) clip_global_norm(grads, config.clip_norm);
      adam.step(m.params(), grads);
      stats.train_objective += parts.objective * static_cast<double>(batch.size());
      nll += parts.j;
      tokens += parts.tokens;
    }
    stats.train_objective /= static_cast<double>(n);
    stats.train_nll_per_token = nll / static_cast<double>(tokens);
    m.set_mixture_override(std::nullopt);
    stats.val_perplexity = eval::perplexity(m, val_ex, config.workers);
    ck.val_history.push_back(stats.val_perplexity);
    stats.improved = stats.val_perplexity < best_ppl;
    if (stats.improved) {
      best_ppl = stats.val_perplexity;
      best.clear();
      for (nn::ParamId id : m.params().ids()) best.push_back(m.params().value(id));
      ck.epoch = epoch;
      bad_epochs = 0;
    } else {
      ++bad_epochs;
    }
    if (options.on_epoch) options.on_epoch(stats);
    if (config.target_perplexity > 0 && stats.val_perplexity < config.target_perplexity) break;
    if (bad_epochs >= config.patience) break;
  }
  if (!best.empty()) {
    for (nn::ParamId id : m.params().ids()) m.params().value(id) = best[id.index];
  }
  ck.rng_state = order_rng.state();
  return ck;
}

Checkpoint train(const TrainConfig& config, const corpus::CorpusSplits& splits, const TrainOptions& options) {
  return train(config, splits.train, splits.val, options);
}

}  // namespace pmfgn::training
