#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "pmfgn/eval/metrics.hpp"
#include "pmfgn/model/dataset.hpp"

namespace pmfgn::eval {

// Teacher-forced, label-routed pass over one record.
struct ForcedStats {
  double nll = 0.0;  // includes the EOS step
  long tokens = 0;
  long gate_correct = 0;  // argmax(s) == label over the feedback tokens
  long gate_total = 0;
};
ForcedStats teacher_forced(const model::Model& m, const model::RecordInputs& in);
ForcedStats teacher_forced(const model::Model& m, std::span<const model::Example> data, int workers = 1);

double perplexity(const model::Model& m, std::span<const model::Example> data, int workers = 1);
double gate_accuracy(const model::Model& m, std::span<const model::Example> data, int workers = 1);

struct Generation {
  std::string id;
  std::string teacher_id;
  Tokens tokens;
  std::vector<int> modality_trace;
  std::vector<double> r_trace;
};
nlohmann::ordered_json to_json(const Generation& g);

// Greedy generation per record, conditioned on the record's own teacher
// unless teacher_id is given.
std::vector<Generation> generate(const model::Model& m, const corpus::Vocabulary& output_vocab,
                                 std::span<const model::Example> data, int max_len, int workers = 1,
                                 const std::optional<std::string>& teacher_id = std::nullopt);

struct MetricSet {
  long records = 0;
  double perplexity = 0.0;
  double bleu_1 = 0.0, bleu_2 = 0.0, bleu_3 = 0.0;
  double rouge_l = 0.0;
  double distinct_1 = 0.0, distinct_2 = 0.0;
  double dist_12 = 0.0;  // mean of Distinct-1 and Distinct-2, x100
  double gate_accuracy = 0.0;
};

struct EvalReport {
  MetricSet overall;
  std::map<std::string, MetricSet> per_teacher;
};
nlohmann::ordered_json to_json(const EvalReport& r);

// Metrics of generated outputs against the examples' references, plus
// teacher-forced perplexity and gate accuracy.
MetricSet score(const model::Model& m, std::span<const model::Example> data, std::span<const Generation> gens,
                int workers = 1);

EvalReport evaluate_all(const model::Model& m, const corpus::Vocabulary& output_vocab,
                        std::span<const model::Example> data, int max_len, int workers = 1,
                        std::vector<Generation>* generations = nullptr);

}  // namespace pmfgn::eval
