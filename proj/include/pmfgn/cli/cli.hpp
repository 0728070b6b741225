#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "pmfgn/corpus/synth.hpp"
#include "pmfgn/training/config.hpp"

namespace pmfgn::cli {

// Flat configuration shared by every subcommand: synth keys, training keys
// and paths. Unknown keys are rejected.
struct CliConfig {
  corpus::SynthSpec synth;
  training::TrainConfig train;
  std::string corpus;
  std::string ckpt;
  std::string out;
  std::string report;
  std::string split = "test";
};

CliConfig parse_config(const nlohmann::json& j);
CliConfig load_config(const std::string& path);

corpus::SynthSpec synth_spec_from_json(const nlohmann::json& j, corpus::SynthSpec base = {});

// Exit codes: 0 success, 1 runtime failure, 2 usage error. Errors are a
// single JSON line on `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int main(int argc, char** argv);

}  // namespace pmfgn::cli
