#include "pmfgn/cli/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include "pmfgn/corpus/corpus_io.hpp"
#include "pmfgn/corpus/split.hpp"
#include "pmfgn/error.hpp"
#include "pmfgn/eval/evaluate.hpp"
#include "pmfgn/training/checkpoint.hpp"
#include "pmfgn/training/gradcheck.hpp"
#include "pmfgn/training/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace pmfgn::cli {

namespace {

const std::set<std::string> kSynthKeys = {"n_records",       "n_teachers",        "blank_image",
                                          "silent_audio",    "irrelevant_text",   "variants_per_condition",
                                          "n_topics",        "words_per_topic",   "n_fillers",
                                          "min_audio_seconds", "max_audio_seconds", "teacher_style_templates"};
const std::set<std::string> kTrainKeys = {
    "lr",          "beta1",     "beta2",   "eps",       "batch_size",     "alpha",          "patience",
    "max_epochs",  "ablation",  "fixed_r", "clip_norm", "workers",        "min_count",      "max_decode_len",
    "target_perplexity", "mixture_warmup_steps", "train_ratio", "val_ratio", "test_ratio", "d",   "d_h",            "e",
    "e_in",        "d_audio",   "d_text",  "K",         "conv1",          "conv2",          "per_hidden1",
    "per_hidden2", "n_mfcc"};
const std::set<std::string> kPathKeys = {"corpus", "ckpt", "out", "report", "split"};

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("config key '") + key + "' has the wrong type");
  }
}

json subset(const json& j, const std::set<std::string>& keys) {
  json out = json::object();
  for (const auto& [k, v] : j.items())
    if (keys.contains(k)) out[k] = v;
  return out;
}

corpus::TeacherStyle style_from_json(const json& j) {
  corpus::TeacherStyle s;
  s.teacher_id = j.at("teacher_id").get<std::string>();
  for (const auto& [cond, lists] : j.at("templates").items()) {
    s.templates[corpus::condition_from_name(cond)] = lists.get<std::vector<corpus::Tokens>>();
  }
  if (j.contains("markers")) s.markers = j.at("markers").get<std::vector<std::string>>();
  return s;
}

std::string error_line(const std::string& kind, const std::string& message) {
  std::string flat = message;
  for (char& c : flat)
    if (c == '\n' || c == '\r') c = ' ';
  return json{{"error", kind}, {"message", flat}}.dump();
}

void ensure_parent(const fs::path& p) {
  const fs::path parent = p.parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

void require_corpus(const std::string& dir) {
  if (dir.empty()) throw ValidationError("--corpus is required");
  if (!fs::is_regular_file(fs::path(dir) / "manifest.jsonl")) {
    throw ValidationError("corpus directory '" + dir + "' has no manifest.jsonl");
  }
}

void require_file(const std::string& path, const char* flag) {
  if (path.empty()) throw ValidationError(std::string(flag) + " is required");
  if (!fs::is_regular_file(path)) throw ValidationError(std::string(flag) + " '" + path + "' does not exist");
}

void require_out(const std::string& path, const char* flag) {
  if (path.empty()) throw ValidationError(std::string(flag) + " is required");
}

corpus::SplitRatios ratios_of(const training::TrainConfig& c) { return {c.train_ratio, c.val_ratio, c.test_ratio}; }

const corpus::Corpus& pick_split(const corpus::CorpusSplits& s, const corpus::Corpus& all, const std::string& name) {
  if (name == "train") return s.train;
  if (name == "val") return s.val;
  if (name == "test") return s.test;
  if (name == "all") return all;
  throw ValidationError("unknown split '" + name + "' (expected train, val, test or all)");
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << v;
  return os.str();
}

}  // namespace

corpus::SynthSpec synth_spec_from_json(const json& j, corpus::SynthSpec s) {
  if (!j.is_object()) throw ValidationError("synth spec must be a JSON object");
  for (const auto& [k, _] : j.items()) {
    if (!kSynthKeys.contains(k) && k != "seed") throw ValidationError("unknown synth spec key '" + k + "'");
  }
  read(j, "n_records", s.n_records);
  read(j, "n_teachers", s.n_teachers);
  read(j, "blank_image", s.defect_rates.blank_image);
  read(j, "silent_audio", s.defect_rates.silent_audio);
  read(j, "irrelevant_text", s.defect_rates.irrelevant_text);
  read(j, "variants_per_condition", s.variants_per_condition);
  read(j, "n_topics", s.n_topics);
  read(j, "words_per_topic", s.words_per_topic);
  read(j, "n_fillers", s.n_fillers);
  read(j, "min_audio_seconds", s.min_audio_seconds);
  read(j, "max_audio_seconds", s.max_audio_seconds);
  read(j, "seed", s.seed);
  if (j.contains("teacher_style_templates")) {
    try {
      s.teacher_styles.clear();
      for (const auto& t : j.at("teacher_style_templates")) s.teacher_styles.push_back(style_from_json(t));
    } catch (const json::exception& e) {
      throw ValidationError(std::string("SynthSpec.teacher_style_templates is malformed: ") + e.what());
    }
  }
  return s;
}

CliConfig parse_config(const json& j) {
  if (!j.is_object()) throw ValidationError("config must be a flat JSON object");
  for (const auto& [k, _] : j.items()) {
    if (k != "seed" && !kSynthKeys.contains(k) && !kTrainKeys.contains(k) && !kPathKeys.contains(k)) {
      throw ValidationError("unknown config key '" + k + "'");
    }
  }
  CliConfig c;
  json synth = subset(j, kSynthKeys);
  json train = subset(j, kTrainKeys);
  if (j.contains("seed")) {
    synth["seed"] = j["seed"];
    train["seed"] = j["seed"];
  }
  c.synth = synth_spec_from_json(synth);
  c.train = training::train_config_from_json(train);
  read(j, "corpus", c.corpus);
  read(j, "ckpt", c.ckpt);
  read(j, "out", c.out);
  read(j, "report", c.report);
  read(j, "split", c.split);
  return c;
}

CliConfig load_config(const std::string& path) {
  const std::string text = corpus::read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Personalized multimodal feedback generation"};
  app.require_subcommand(1);

  std::string config_path, spec_path, corpus_dir, ckpt, out_path, report, split, ablation, teacher, seeds_arg;
  std::uint64_t seed = 0;
  int workers = 0, max_epochs = 0, max_len = 0, samples = 240;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "flat JSON config file");
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--workers", workers, "record-level worker threads")->check(CLI::PositiveNumber);
  };

  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  common(synth);
  synth->add_option("--spec", spec_path, "synth spec JSON");
  synth->add_option("--out", out_path, "output corpus directory");

  auto* train = app.add_subcommand("train", "train a model");
  common(train);
  train->add_option("--corpus", corpus_dir, "corpus directory");
  train->add_option("--out", out_path, "checkpoint path");
  train->add_option("--ablation", ablation, "none, no_label, no_plm, fixed_r or one_hop");
  train->add_option("--max-epochs", max_epochs, "epoch limit")->check(CLI::PositiveNumber);

  auto* gen = app.add_subcommand("generate", "greedy generation to JSON lines");
  common(gen);
  gen->add_option("--ckpt", ckpt, "checkpoint path");
  gen->add_option("--corpus", corpus_dir, "corpus directory");
  gen->add_option("--split", split, "train, val, test or all");
  gen->add_option("--out", out_path, "output JSONL path");
  gen->add_option("--teacher", teacher, "condition every record on this teacher");
  gen->add_option("--max-len", max_len, "maximum generated tokens")->check(CLI::PositiveNumber);

  auto* evaluate = app.add_subcommand("evaluate", "compute the evaluation report");
  common(evaluate);
  evaluate->add_option("--ckpt", ckpt, "checkpoint path");
  evaluate->add_option("--corpus", corpus_dir, "corpus directory");
  evaluate->add_option("--split", split, "train, val, test or all");
  evaluate->add_option("--report", report, "report JSON path");
  evaluate->add_option("--max-len", max_len, "maximum generated tokens")->check(CLI::PositiveNumber);

  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient check on the micro model");
  common(gradcheck);
  gradcheck->add_option("--samples", samples, "sampled scalars")->check(CLI::PositiveNumber);

  auto* suite = app.add_subcommand("ablate-suite", "train and evaluate every ablation");
  common(suite);
  suite->add_option("--corpus", corpus_dir, "corpus directory");
  suite->add_option("--out", out_path, "output directory");
  suite->add_option("--seeds", seeds_arg, "comma-separated training seeds");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    CLI::App* failing = &app;
    for (auto* sub : app.get_subcommands()) failing = sub;
    err << failing->help();
    err << error_line("usage", e.what()) << "\n";
    return 2;
  }

  auto* sub = app.get_subcommands().front();
  auto was_set = [&](const char* name) { return sub->get_option_no_throw(name) && sub->count(name) > 0; };

  try {
    CliConfig cfg = config_path.empty() ? CliConfig{} : load_config(config_path);
    if (was_set("--seed")) {
      cfg.synth.seed = seed;
      cfg.train.seed = seed;
    }
    if (was_set("--workers")) cfg.train.workers = workers;
    if (was_set("--corpus")) cfg.corpus = corpus_dir;
    if (was_set("--ckpt")) cfg.ckpt = ckpt;
    if (was_set("--out")) cfg.out = out_path;
    if (was_set("--report")) cfg.report = report;
    if (was_set("--split")) cfg.split = split;
    if (was_set("--ablation")) cfg.train.ablation = model::ablation_from_name(ablation);
    if (was_set("--max-epochs")) cfg.train.max_epochs = max_epochs;
    if (was_set("--max-len")) cfg.train.max_decode_len = max_len;

    if (sub == synth) {
      if (!spec_path.empty()) {
        json j;
        try {
          j = json::parse(corpus::read_file(spec_path));
        } catch (const json::exception& e) {
          throw ValidationError("spec '" + spec_path + "' is not valid JSON: " + e.what());
        }
        cfg.synth = synth_spec_from_json(j, cfg.synth);
        if (was_set("--seed")) cfg.synth.seed = seed;
      }
      require_out(cfg.out, "--out");
      corpus::validate(cfg.synth);
      const auto data = corpus::synth_generate(cfg.synth);
      corpus::save_corpus(data, cfg.out);
      out << "wrote " << data.size() << " records to " << cfg.out << "\n";
      return 0;
    }

    if (sub == train) {
      require_corpus(cfg.corpus);
      require_out(cfg.out, "--out");
      cfg.train.validate();
      const auto data = corpus::load_corpus(cfg.corpus);
      const auto splits = corpus::split_corpus(data, ratios_of(cfg.train), cfg.train.seed);
      training::TrainOptions opts;
      opts.on_epoch = [&](const training::EpochStats& s) {
        out << "epoch " << s.epoch << " objective " << fmt(s.train_objective) << " nll_per_token "
            << fmt(s.train_nll_per_token) << " val_perplexity " << fmt(s.val_perplexity)
            << (s.improved ? " *" : "") << "\n";
        out.flush();
      };
      const auto ck = training::train(cfg.train, splits, opts);
      ensure_parent(cfg.out);
      training::save_checkpoint(ck, cfg.out);
      out << "saved checkpoint (epoch " << ck.epoch << ") to " << cfg.out << "\n";
      return 0;
    }

    if (sub == gen || sub == evaluate) {
      require_file(cfg.ckpt, "--ckpt");
      require_corpus(cfg.corpus);
      if (sub == gen) require_out(cfg.out, "--out");
      if (sub == evaluate) require_out(cfg.report, "--report");
      const auto ck = training::load_checkpoint(cfg.ckpt);
      const int w = was_set("--workers") ? workers : 1;
      const int len = was_set("--max-len") ? max_len : ck.train_config.max_decode_len;
      const auto data = corpus::load_corpus(cfg.corpus);
      const auto splits = corpus::split_corpus(data, ratios_of(ck.train_config), ck.train_config.seed);
      const auto& part = pick_split(splits, data, cfg.split);
      const auto examples =
          model::prepare_dataset(part, ck.input_vocab, ck.output_vocab, ck.model->config(), w);
      if (sub == gen) {
        const auto gens = eval::generate(*ck.model, ck.output_vocab, examples, len, w,
                                         teacher.empty() ? std::nullopt : std::optional<std::string>(teacher));
        std::string text;
        for (const auto& g : gens) text += eval::to_json(g).dump() + "\n";
        ensure_parent(cfg.out);
        corpus::write_file(cfg.out, text);
        out << "wrote " << gens.size() << " generations to " << cfg.out << "\n";
      } else {
        const auto rep = eval::evaluate_all(*ck.model, ck.output_vocab, examples, len, w);
        ensure_parent(cfg.report);
        corpus::write_file(cfg.report, eval::to_json(rep).dump(2) + "\n");
        out << eval::to_json(rep).dump() << "\n";
      }
      return 0;
    }

    if (sub == gradcheck) {
      const auto t0 = std::chrono::steady_clock::now();
      training::GradCheckOptions opts;
      opts.samples = samples;
      const std::uint64_t s = was_set("--seed") ? seed : 1;
      const auto rep = training::grad_check(s, opts);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      for (const auto& g : rep.groups) {
        out << std::left << std::setw(28) << g.name << " sampled " << g.sampled << " max_rel_error "
            << std::scientific << std::setprecision(3) << g.max_rel_error << std::defaultfloat << "\n";
      }
      out << "groups " << rep.groups.size() << " sampled " << rep.sampled << " max_rel_error " << std::scientific
          << std::setprecision(3) << rep.max_rel_error << std::defaultfloat << " worst " << rep.worst_group
          << " seconds " << std::fixed << std::setprecision(2) << secs << std::defaultfloat << "\n";
      return 0;
    }

    if (sub == suite) {
      require_corpus(cfg.corpus);
      require_out(cfg.out, "--out");
      cfg.train.validate();
      std::vector<std::uint64_t> seeds;
      if (seeds_arg.empty()) {
        seeds.push_back(cfg.train.seed);
      } else {
        std::stringstream ss(seeds_arg);
        std::string item;
        while (std::getline(ss, item, ',')) {
          try {
            seeds.push_back(std::stoull(item));
          } catch (const std::exception&) {
            throw ValidationError("--seeds must be a comma-separated list of integers");
          }
        }
      }
      const auto data = corpus::load_corpus(cfg.corpus);
      fs::create_directories(cfg.out);
      ordered_json summary = ordered_json::array();
      std::string table = "| ablation | bleu_1 | bleu_2 | bleu_3 | rouge_l | dist_12 | perplexity | gate_accuracy |\n"
                          "|---|---|---|---|---|---|---|---|\n";
      for (model::Ablation a : model::all_ablations()) {
        eval::MetricSet mean;
        ordered_json runs = ordered_json::array();
        for (std::uint64_t s : seeds) {
          training::TrainConfig tc = cfg.train;
          tc.ablation = a;
          tc.seed = s;
          const auto splits = corpus::split_corpus(data, ratios_of(tc), s);
          const auto ck = training::train(tc, splits);
          const std::string name = model::ablation_name(a);
          training::save_checkpoint(ck, fs::path(cfg.out) / (name + "_seed" + std::to_string(s) + ".ckpt"));
          const auto test = model::prepare_dataset(splits.test, ck.input_vocab, ck.output_vocab,
                                                   ck.model->config(), tc.workers);
          const auto rep = eval::evaluate_all(*ck.model, ck.output_vocab, test, tc.max_decode_len, tc.workers);
          ordered_json run = eval::to_json(rep);
          run["seed"] = s;
          runs.push_back(run);
          const auto& m = rep.overall;
          mean.bleu_1 += m.bleu_1 / seeds.size();
          mean.bleu_2 += m.bleu_2 / seeds.size();
          mean.bleu_3 += m.bleu_3 / seeds.size();
          mean.rouge_l += m.rouge_l / seeds.size();
          mean.dist_12 += m.dist_12 / seeds.size();
          mean.perplexity += m.perplexity / seeds.size();
          mean.gate_accuracy += m.gate_accuracy / seeds.size();
        }
        const std::string name = model::ablation_name(a);
        table += "| " + name + " | " + fmt(mean.bleu_1) + " | " + fmt(mean.bleu_2) + " | " + fmt(mean.bleu_3) + " | " +
                 fmt(mean.rouge_l) + " | " + fmt(mean.dist_12) + " | " + fmt(mean.perplexity) + " | " +
                 fmt(mean.gate_accuracy) + " |\n";
        summary.push_back({{"ablation", name}, {"runs", runs}});
      }
      corpus::write_file(fs::path(cfg.out) / "ablations.md", table);
      corpus::write_file(fs::path(cfg.out) / "ablations.json", summary.dump(2) + "\n");
      out << table;
      return 0;
    }
  } catch (const ValidationError& e) {
    err << error_line("validation", e.what()) << "\n";
    return 1;
  } catch (const FormatError& e) {
    err << error_line("format", e.what()) << "\n";
    return 1;
  } catch (const training::TrainingDiverged& e) {
    err << error_line("diverged", e.what()) << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << error_line("runtime", e.what()) << "\n";
    return 1;
  }
  return 0;
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace pmfgn::cli
