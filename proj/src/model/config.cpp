#include "pmfgn/model/config.hpp"

#include <algorithm>

#include "pmfgn/error.hpp"

namespace pmfgn::model {

namespace {
const std::vector<std::pair<Ablation, std::string>> kNames = {
    {Ablation::None, "none"},         {Ablation::NoLabel, "no_label"}, {Ablation::NoPlm, "no_plm"},
    {Ablation::FixedR, "fixed_r"},    {Ablation::OneHop, "one_hop"},
};
}

std::string ablation_name(Ablation a) {
  for (const auto& [v, n] : kNames)
    if (v == a) return n;
  return "none";
}

Ablation ablation_from_name(const std::string& name) {
  for (const auto& [v, n] : kNames)
    if (n == name) return v;
  throw ValidationError("unknown ablation '" + name + "' (expected none, no_label, no_plm, fixed_r, one_hop)");
}

const std::vector<Ablation>& all_ablations() {
  static const std::vector<Ablation> all = {Ablation::None, Ablation::NoLabel, Ablation::NoPlm, Ablation::FixedR,
                                            Ablation::OneHop};
  return all;
}

void ModelDims::validate() const {
  auto positive = [](int v, const char* name) {
    if (v < 1) throw ValidationError(std::string("model dimension '") + name + "' must be >= 1");
  };
  positive(d, "d");
  positive(d_h, "d_h");
  positive(e, "e");
  positive(e_in, "e_in");
  positive(d_audio, "d_audio");
  positive(d_text, "d_text");
  positive(hops, "K");
  positive(conv1, "conv1");
  positive(conv2, "conv2");
  positive(per_hidden1, "per_hidden1");
  positive(per_hidden2, "per_hidden2");
  positive(n_mfcc, "n_mfcc");
}

ModelDims micro_dims() {
  ModelDims m;
  m.d = 8;
  m.d_h = 12;
  m.e = 6;
  m.e_in = 6;
  m.d_audio = 7;
  m.d_text = 9;
  m.hops = 2;
  m.conv1 = 3;
  m.conv2 = 4;
  m.per_hidden1 = 5;
  m.per_hidden2 = 4;
  return m;
}

int ModelConfig::teacher_index(const std::string& teacher_id) const {
  auto it = std::find(teachers.begin(), teachers.end(), teacher_id);
  if (it == teachers.end()) throw ValidationError("unknown teacher '" + teacher_id + "'");
  return static_cast<int>(it - teachers.begin());
}

void ModelConfig::validate() const {
  dims.validate();
  if (input_vocab < 5) throw ValidationError("input vocabulary must contain at least one non-reserved token");
  if (output_vocab < 5) throw ValidationError("output vocabulary must contain at least one non-reserved token");
  if (teachers.empty()) throw ValidationError("model needs at least one teacher");
  if (!(fixed_r > 0.0 && fixed_r < 1.0)) throw ValidationError("fixed_r must lie in (0,1)");
}

}  // namespace pmfgn::model
