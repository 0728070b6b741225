#include <doctest.h>

#include <sstream>

#include <json.hpp>

#include "pmfgn/cli/cli.hpp"
#include "pmfgn/corpus/corpus_io.hpp"
#include "pmfgn/corpus/split.hpp"
#include "pmfgn/error.hpp"
#include "unit/helpers.hpp"

using namespace pmfgn;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// Micro sizes so every subcommand finishes in seconds.
fs::path tiny_config(const fs::path& dir) {
  const nlohmann::json j = {{"n_records", 24}, {"n_teachers", 2}, {"d", 8},          {"d_h", 12},
                            {"e", 6},          {"e_in", 6},       {"d_audio", 7},     {"d_text", 9},
                            {"K", 2},          {"conv1", 3},      {"conv2", 4},       {"per_hidden1", 5},
                            {"per_hidden2", 4}, {"max_epochs", 2}, {"batch_size", 4},  {"lr", 0.01},
                            {"max_decode_len", 8}, {"seed", 3},   {"mixture_warmup_steps", 4}};
  corpus::write_file(dir / "cfg.json", j.dump());
  return dir / "cfg.json";
}

std::string last_line(const std::string& s) {
  auto end = s.find_last_not_of('\n');
  auto start = s.rfind('\n', end);
  return s.substr(start == std::string::npos ? 0 : start + 1, end - (start == std::string::npos ? 0 : start + 1) + 1);
}

}  // namespace

TEST_CASE("usage errors exit 2 with a parsable line") {
  auto r = invoke({"train", "--no-such-flag"});
  CHECK(r.code == 2);
  const auto j = nlohmann::json::parse(last_line(r.err));
  CHECK(j.at("error") == "usage");
  CHECK(r.err.find("--corpus") != std::string::npos);

  CHECK(invoke({"frobnicate"}).code == 2);
  CHECK(invoke({}).code == 2);
  CHECK(invoke({"--help"}).code == 0);
}

TEST_CASE("runtime errors exit 1 with a parsable line") {
  const auto dir = testing::temp_dir("cli_err");
  auto r = invoke({"train", "--corpus", (dir / "nowhere").string(), "--out", (dir / "m.ckpt").string()});
  CHECK(r.code == 1);
  CHECK(r.out.empty());
  const auto j = nlohmann::json::parse(last_line(r.err));
  CHECK(j.contains("error"));
  CHECK(j.contains("message"));

  corpus::write_file(dir / "bad.json", R"({"n_records": 10, "colour": "blue"})");
  r = invoke({"synth", "--config", (dir / "bad.json").string(), "--out", (dir / "c").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("colour") != std::string::npos);

  r = invoke({"train", "--corpus", (dir / "c").string(), "--out", (dir / "m.ckpt").string(), "--ablation", "half"});
  CHECK(r.code == 1);
}

TEST_CASE("unknown config keys are rejected") {
  CHECK_THROWS_AS(cli::parse_config({{"learning_rate", 0.1}}), ValidationError);
  const auto c = cli::parse_config({{"lr", 0.1}, {"n_records", 9}, {"seed", 4}, {"split", "val"}});
  CHECK(c.train.lr == 0.1);
  CHECK(c.synth.n_records == 9);
  CHECK(c.train.seed == 4);
  CHECK(c.synth.seed == 4);
  CHECK(c.split == "val");
}

TEST_CASE("gradcheck subcommand reports the error and exits 0") {
  auto r = invoke({"gradcheck", "--seed", "1", "--samples", "60"});
  CHECK(r.code == 0);
  const auto line = last_line(r.out);
  CHECK(line.find("max_rel_error") != std::string::npos);
  std::istringstream in(line.substr(line.find("max_rel_error") + 14));
  double err = 1.0;
  in >> err;
  CHECK(err < 1e-4);
}

TEST_CASE("synth, train, generate and evaluate round trip") {
  const auto dir = testing::temp_dir("cli_rt");
  const auto cfg = tiny_config(dir);
  const std::string corpus_dir = (dir / "corpus").string();
  REQUIRE(invoke({"synth", "--config", cfg.string(), "--out", corpus_dir}).code == 0);
  auto a = corpus::load_corpus(corpus_dir);
  CHECK(a.size() == 24);

  // Flags win over the config file.
  REQUIRE(invoke({"synth", "--config", cfg.string(), "--out", (dir / "c2").string(), "--seed", "9"}).code == 0);
  CHECK_FALSE(corpus::load_corpus(dir / "c2") == a);

  const std::string ckpt = (dir / "m.ckpt").string();
  auto t = invoke({"train", "--config", cfg.string(), "--corpus", corpus_dir, "--out", ckpt});
  REQUIRE(t.code == 0);
  CHECK(t.out.find("epoch 2") != std::string::npos);

  auto g1 = invoke({"generate", "--ckpt", ckpt, "--corpus", corpus_dir, "--out", (dir / "g1.jsonl").string()});
  auto g2 = invoke({"generate", "--ckpt", ckpt, "--corpus", corpus_dir, "--out", (dir / "g2.jsonl").string()});
  REQUIRE(g1.code == 0);
  REQUIRE(g2.code == 0);
  const std::string lines = corpus::read_file(dir / "g1.jsonl");
  CHECK(lines == corpus::read_file(dir / "g2.jsonl"));
  std::istringstream ls(lines);
  std::string line;
  int n = 0;
  while (std::getline(ls, line)) {
    const auto j = nlohmann::json::parse(line);
    for (const char* k : {"id", "teacher_id", "tokens", "modality_trace", "r_trace"}) CHECK(j.contains(k));
    ++n;
  }
  CHECK(n == static_cast<int>(corpus::split_corpus(a, {}, 3).test.size()));

  auto e = invoke({"evaluate", "--ckpt", ckpt, "--corpus", corpus_dir, "--report", (dir / "r.json").string()});
  REQUIRE(e.code == 0);
  const auto rep = nlohmann::json::parse(corpus::read_file(dir / "r.json"));
  for (const char* k : {"perplexity", "bleu_1", "bleu_2", "bleu_3", "rouge_l", "dist_12", "gate_accuracy"})
    CHECK(rep.contains(k));
  CHECK(rep.at("per_teacher").size() == 2);

  auto bad = invoke({"generate", "--ckpt", ckpt, "--corpus", corpus_dir, "--out", (dir / "x").string(), "--split", "dev"});
  CHECK(bad.code == 1);

  // Same config and seed, same checkpoint bytes.
  REQUIRE(invoke({"train", "--config", cfg.string(), "--corpus", corpus_dir, "--out", (dir / "m2.ckpt").string()}).code ==
          0);
  CHECK(corpus::read_file(ckpt) == corpus::read_file(dir / "m2.ckpt"));
}

TEST_CASE("ablate-suite emits five rows") {
  const auto dir = testing::temp_dir("cli_suite");
  const auto cfg = tiny_config(dir);
  const std::string corpus_dir = (dir / "corpus").string();
  REQUIRE(invoke({"synth", "--config", cfg.string(), "--out", corpus_dir}).code == 0);
  auto r = invoke({"ablate-suite", "--config", cfg.string(), "--corpus", corpus_dir, "--out", (dir / "abl").string(),
                "--seeds", "1,2"});
  REQUIRE(r.code == 0);
  const std::string table = corpus::read_file(dir / "abl" / "ablations.md");
  std::istringstream in(table);
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(in, line))
    if (line.rfind("| ", 0) == 0 && line.find("ablation") == std::string::npos) rows.push_back(line);
  REQUIRE(rows.size() == 5);
  const char* names[] = {"none", "no_label", "no_plm", "fixed_r", "one_hop"};
  for (int i = 0; i < 5; ++i) CHECK(rows[i].rfind(std::string("| ") + names[i] + " |", 0) == 0);
  const auto j = nlohmann::json::parse(corpus::read_file(dir / "abl" / "ablations.json"));
  CHECK(j.size() == 5);
  CHECK(j[0].at("runs").size() == 2);
  CHECK(fs::exists(dir / "abl" / "fixed_r_seed2.ckpt"));

  auto bad = invoke({"ablate-suite", "--corpus", corpus_dir, "--out", (dir / "abl2").string(), "--seeds", "1,x"});
  CHECK(bad.code == 1);
}
