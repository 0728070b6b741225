// Acceptance runner. `pmfgn_acceptance N` checks criterion N, no argument
// checks all eight. One PASS/FAIL line per criterion; exit 1 if any fail.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "pmfgn/cli/cli.hpp"
#include "pmfgn/corpus/corpus_io.hpp"
#include "pmfgn/corpus/split.hpp"
#include "pmfgn/corpus/synth.hpp"
#include "pmfgn/eval/evaluate.hpp"
#include "pmfgn/eval/metrics.hpp"
#include "pmfgn/nn/rng.hpp"
#include "pmfgn/training/gradcheck.hpp"
#include "pmfgn/training/trainer.hpp"

using namespace pmfgn;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// Laptop-scale sizes used wherever a trained model is needed.
model::ModelDims desk_dims() {
  model::ModelDims d;
  d.d = 32;
  d.d_h = 48;
  d.e = d.e_in = d.d_audio = d.d_text = 32;
  d.conv1 = 4;
  d.conv2 = 8;
  d.per_hidden1 = d.per_hidden2 = 32;
  return d;
}

training::TrainConfig desk_config(std::uint64_t seed) {
  training::TrainConfig c;
  c.dims = desk_dims();
  c.seed = seed;
  c.max_epochs = 20;
  return c;
}

corpus::Corpus synth(int n, std::uint64_t seed, int variants = 2) {
  corpus::SynthSpec s;
  s.n_records = n;
  s.seed = seed;
  s.variants_per_condition = variants;
  return corpus::synth_generate(s);
}

std::vector<model::Example> prepare(const training::Checkpoint& ck, const corpus::Corpus& c) {
  return model::prepare_dataset(c, ck.input_vocab, ck.output_vocab, ck.model->config());
}

Verdict gradient_integrity() {
  const auto t0 = Clock::now();
  const auto r = training::grad_check(1);
  const double secs = seconds_since(t0);
  bool covered = true;
  bool per_teacher = false;
  for (const auto& g : r.groups) {
    covered = covered && g.sampled > 0;
    if (g.name.rfind("personal.", 0) == 0 && g.name.find(".H1") != std::string::npos) per_teacher = true;
  }
  const bool pass = r.max_rel_error < 1e-4 && covered && per_teacher && secs < 120;
  return {pass, "max_rel_error " + num(r.max_rel_error) + " (< 1e-4) groups " + std::to_string(r.groups.size()) +
                    (covered ? " all sampled" : " some unsampled") + " worst " + r.worst_group + " " + num(secs) +
                    " s (< 120)"};
}

Verdict distribution_invariants() {
  const auto c = synth(60, 5);
  const auto [vin, vout] = corpus::build_vocabularies(c);
  model::ModelConfig cfg;
  cfg.dims = desk_dims();
  cfg.input_vocab = vin.size();
  cfg.output_vocab = vout.size();
  cfg.teachers = training::teacher_ids(c);
  const auto data = model::prepare_dataset(c, vin, vout, cfg);

  nn::Rng rng(17);
  double sum_err = 0, mix_err = 0, gate_err = 0, r_lo = 1, r_hi = 0;
  int steps = 0, models = 0;
  while (steps < 1000) {
    model::Model m(cfg);
    m.initialize(100 + models++);
    for (const auto& ex : data) {
      if (steps >= 1000) break;
      std::vector<int> routes(ex.inputs.targets.size());
      for (auto& r : routes) r = static_cast<int>(rng.index(4));
      nn::Graph g(m.params());
      const auto res = m.sequence_nll(g, ex.inputs, routes, true);
      for (const auto& st : res.steps) {
        if (steps == 1000) break;
        ++steps;
        sum_err = std::max(sum_err, std::abs(st.p.sum() - 1.0));
        mix_err = std::max(mix_err, (st.p - (st.r * st.p_gen + (1 - st.r) * st.p_per)).cwiseAbs().maxCoeff());
        gate_err = std::max(gate_err, std::abs(st.s.sum() - 1.0));
        r_lo = std::min(r_lo, st.r);
        r_hi = std::max(r_hi, st.r);
      }
    }
  }
  const bool pass = sum_err < 1e-12 && mix_err <= 1e-15 && gate_err < 1e-12 && r_lo > 0 && r_hi < 1;
  return {pass, "steps " + std::to_string(steps) + " |sum P - 1| " + num(sum_err) + " mixture " + num(mix_err) +
                    " |sum s - 1| " + num(gate_err) + " r in [" + num(r_lo) + ", " + num(r_hi) + "]"};
}

Verdict overfit() {
  const auto t0 = Clock::now();
  const auto c = synth(20, 1, 1);
  auto tc = desk_config(1);
  tc.max_epochs = 500;
  tc.patience = 500;
  const auto ck = training::train(tc, c, c);
  const auto ex = prepare(ck, c);
  const double ppl = eval::perplexity(*ck.model, ex);
  const auto gens = eval::generate(*ck.model, ck.output_vocab, ex, tc.max_decode_len);
  int exact = 0;
  for (std::size_t i = 0; i < ex.size(); ++i) exact += gens[i].tokens == ex[i].feedback;
  const double secs = seconds_since(t0);
  const bool pass = ppl < 1.1 && exact >= 18 && secs < 600;
  return {pass, "perplexity " + num(ppl) + " (< 1.1) exact " + std::to_string(exact) + "/20 (>= 18) epochs " +
                    std::to_string(ck.val_history.size()) + " " + num(secs) + " s (< 600)"};
}

Verdict gate_learning() {
  const auto c = synth(2000, 3);
  const auto splits = corpus::split_corpus(c, {}, 1);
  auto tc = desk_config(1);
  tc.max_epochs = 10;
  const auto ck = training::train(tc, splits);
  const auto test = prepare(ck, splits.test);
  const double acc = eval::gate_accuracy(*ck.model, test);
  model::Model fresh(ck.model->config());
  fresh.initialize(99);
  const double chance = eval::gate_accuracy(fresh, test);
  return {acc >= 0.95, "held-out gate_accuracy " + num(acc) + " (>= 0.95) untrained " + num(chance) + " test records " +
                           std::to_string(test.size())};
}

Verdict ablation_directions() {
  const auto c = synth(600, 7);
  const std::array<model::Ablation, 4> abl = {model::Ablation::None, model::Ablation::NoLabel, model::Ablation::NoPlm,
                                              model::Ablation::FixedR};
  std::array<int, 4> wins{};
  std::ostringstream runs;
  const int n_seeds = 5;
  for (std::uint64_t seed = 1; seed <= n_seeds; ++seed) {
    const auto splits = corpus::split_corpus(c, {}, seed);
    std::array<eval::MetricSet, 4> m;
    for (std::size_t k = 0; k < abl.size(); ++k) {
      auto tc = desk_config(seed);
      tc.ablation = abl[k];
      const auto ck = training::train(tc, splits);
      m[k] = eval::evaluate_all(*ck.model, ck.output_vocab, prepare(ck, splits.test), tc.max_decode_len).overall;
    }
    const auto& full = m[0];
    wins[0] += full.bleu_1 > m[1].bleu_1;
    wins[1] += full.distinct_1 > m[2].distinct_1 && full.distinct_2 > m[2].distinct_2;
    wins[2] += full.bleu_1 >= m[2].bleu_1;
    wins[3] += m[3].bleu_1 <= m[2].bleu_1;
    runs << " | seed " << seed << " bleu_1 full " << num(full.bleu_1) << " no_label " << num(m[1].bleu_1)
         << " no_plm " << num(m[2].bleu_1) << " fixed_r " << num(m[3].bleu_1) << " dist_12 full " << num(full.dist_12)
         << " no_plm " << num(m[2].dist_12);
    std::cout << "  criterion 5 seed " << seed << " done" << std::endl;
  }
  const char* names[] = {"full>no_label BLEU-1", "full>no_plm Dist-1,2", "full>=no_plm BLEU-1",
                         "fixed_r<=no_plm BLEU-1"};
  bool pass = true;
  std::string detail;
  for (int k = 0; k < 4; ++k) {
    const bool ok = 2 * wins[k] > n_seeds;
    pass = pass && ok;
    detail += std::string(names[k]) + " " + std::to_string(wins[k]) + "/5 " + (ok ? "ok" : "not reproduced") + "; ";
  }
  return {pass, detail + runs.str()};
}

Verdict personalization() {
  corpus::SynthSpec spec;
  spec.n_records = 600;
  spec.seed = 7;
  const auto c = corpus::synth_generate(spec);
  const auto styles = corpus::resolved_styles(spec);
  std::map<std::string, std::set<std::string>> own;
  std::set<std::string> all;
  for (const auto& s : styles) {
    own[s.teacher_id] = {s.markers.begin(), s.markers.end()};
    all.insert(s.markers.begin(), s.markers.end());
  }
  const auto splits = corpus::split_corpus(c, {}, 1);
  const auto ck = training::train(desk_config(1), splits);
  const auto test = prepare(ck, splits.test);
  const auto& teachers = ck.model->config().teachers;

  long differ = 0, hits = 0, marked = 0, outputs = 0, with_markers = 0;
  auto count = [&](const eval::Generation& g) {
    long here = 0;
    for (const auto& tok : g.tokens)
      if (all.contains(tok)) {
        ++here;
        hits += own.at(g.teacher_id).contains(tok);
      }
    marked += here;
    with_markers += here > 0;
    ++outputs;
  };
  for (const auto& ex : test) {
    const std::span<const model::Example> one(&ex, 1);
    const auto idx = std::find(teachers.begin(), teachers.end(), ex.teacher_id) - teachers.begin();
    const std::string other = teachers[(idx + 1) % teachers.size()];
    const auto a = eval::generate(*ck.model, ck.output_vocab, one, 40, 1, ex.teacher_id).front();
    const auto b = eval::generate(*ck.model, ck.output_vocab, one, 40, 1, other).front();
    differ += a.tokens != b.tokens;
    count(a);
    count(b);
  }
  const double frac = static_cast<double>(differ) / test.size();
  const double precision = marked ? static_cast<double>(hits) / marked : 0.0;
  const bool pass = teachers.size() >= 4 && frac >= 0.5 && precision >= 0.8;
  return {pass, "teachers " + std::to_string(teachers.size()) + " differing " + std::to_string(differ) + "/" +
                    std::to_string(test.size()) + " (>= 50%) marker precision " + num(precision) + " (>= 0.8) over " +
                    std::to_string(marked) + " markers, " + std::to_string(with_markers) + "/" +
                    std::to_string(outputs) + " outputs carry markers"};
}

Verdict metric_oracles() {
  std::ifstream in(std::string(PMFGN_FIXTURES) + "/metrics.jsonl");
  if (!in) return {false, "fixture missing"};
  double worst = 0;
  int cases = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    const auto cands = j.at("candidates").get<std::vector<corpus::Tokens>>();
    const auto refs = j.at("references").get<std::vector<std::vector<corpus::Tokens>>>();
    auto diff = [&](double got, const char* key) { worst = std::max(worst, std::abs(got - j.at(key).get<double>())); };
    diff(eval::bleu(cands, refs, 1), "bleu_1");
    diff(eval::bleu(cands, refs, 2), "bleu_2");
    diff(eval::bleu(cands, refs, 3), "bleu_3");
    diff(eval::rouge_l(cands, refs), "rouge_l");
    diff(eval::distinct_n(cands, 1), "distinct_1");
    diff(eval::distinct_n(cands, 2), "distinct_2");
    double nll = 0;
    const auto probs = j.at("token_probs").get<std::vector<double>>();
    for (double p : probs) nll -= std::log(p);
    diff(eval::perplexity_from_nll(nll, static_cast<long>(probs.size())), "perplexity");
    ++cases;
  }
  return {cases == 10 && worst < 1e-9, "cases " + std::to_string(cases) + "/10 max abs diff " + num(worst) + " (< 1e-9)"};
}

Verdict determinism() {
  const auto dir = fs::temp_directory_path() / "pmfgn_acceptance_det";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const nlohmann::json cfg = {{"n_records", 60}, {"d", 16},          {"d_h", 16},        {"e", 16},
                              {"e_in", 16},      {"d_audio", 16},    {"d_text", 16},     {"per_hidden1", 16},
                              {"per_hidden2", 16}, {"max_epochs", 3}, {"seed", 5}};
  corpus::write_file(dir / "cfg.json", cfg.dump());
  auto run = [&](std::vector<std::string> args) {
    std::ostringstream out, err;
    args.insert(args.end(), {"--config", (dir / "cfg.json").string()});
    const int code = cli::run(args, out, err);
    if (code != 0) throw std::runtime_error(args[0] + " failed: " + err.str());
  };
  const std::string corpus_dir = (dir / "corpus").string();
  run({"synth", "--out", corpus_dir});
  std::array<std::string, 2> bytes;
  for (int i = 0; i < 2; ++i) {
    const auto ckpt = (dir / ("m" + std::to_string(i) + ".ckpt")).string();
    const auto gen = (dir / ("g" + std::to_string(i) + ".jsonl")).string();
    run({"train", "--corpus", corpus_dir, "--out", ckpt});
    run({"generate", "--ckpt", ckpt, "--corpus", corpus_dir, "--out", gen});
    bytes[i] = corpus::read_file(gen);
  }
  const bool pass = !bytes[0].empty() && bytes[0] == bytes[1];
  return {pass, std::to_string(bytes[0].size()) + " bytes, runs " + (bytes[0] == bytes[1] ? "identical" : "differ")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::array<std::function<Verdict()>, 8> criteria = {gradient_integrity, distribution_invariants, overfit,
                                                            gate_learning,      ablation_directions,     personalization,
                                                            metric_oracles,     determinism};
  std::vector<int> which;
  if (argc > 1) {
    const int n = std::atoi(argv[1]);
    if (n < 1 || n > 8) {
      std::cerr << "usage: pmfgn_acceptance [1-8]\n";
      return 2;
    }
    which.push_back(n);
  } else {
    for (int n = 1; n <= 8; ++n) which.push_back(n);
  }
  bool all = true;
  for (int n : which) {
    const auto t0 = Clock::now();
    Verdict v;
    try {
      v = criteria[n - 1]();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    all = all && v.pass;
    std::cout << "criterion " << n << " " << (v.pass ? "PASS" : "FAIL") << " " << v.detail << " [" << num(seconds_since(t0))
              << " s]" << std::endl;
  }
  return all ? 0 : 1;
}
