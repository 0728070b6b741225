#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pmfgn/corpus/types.hpp"
#include "pmfgn/model/config.hpp"
#include "pmfgn/nn/parameters.hpp"

namespace pmfgn::training {

struct GradCheckOptions {
  int samples = 240;  // total sampled scalars, spread over every group
  double step = 1e-5;
  double alpha = 0.5;
  // Denominator floor of the relative error. A loss near 10 evaluated in
  // float64 gives central differences with ~1e-10 absolute noise at h=1e-5.
  double floor = 1e-5;
  model::Ablation ablation = model::Ablation::None;
  // Test hook applied to the analytic gradients before comparison.
  std::function<void(const nn::ParameterStore&, nn::Gradients&)> corrupt;
};

struct GroupError {
  std::string name;
  int sampled = 0;
  double max_rel_error = 0.0;
  double max_abs_grad = 0.0;
};

struct GradCheckReport {
  std::vector<GroupError> groups;  // one per parameter tensor, store order
  int sampled = 0;
  double max_rel_error = 0.0;
  std::string worst_group;
};

// Three records, two teachers, |V_out| <= 20, feedback length <= 5.
corpus::Corpus micro_corpus(std::uint64_t seed);

// Central differences of mean(J + alpha J') over micro_corpus against the
// analytic gradient, on a micro_dims() model.
GradCheckReport grad_check(std::uint64_t seed, const GradCheckOptions& options = {});

// |a - n| / max(|a|, |n|, floor)
double relative_error(double analytic, double numeric, double floor);

}  // namespace pmfgn::training
