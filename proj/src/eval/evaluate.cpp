#include "pmfgn/eval/evaluate.hpp"

#include "pmfgn/error.hpp"
#include "pmfgn/nn/parallel.hpp"

namespace pmfgn::eval {

using model::Example;
using model::Model;

ForcedStats teacher_forced(const Model& m, const model::RecordInputs& in) {
  nn::Graph g(m.params());
  const auto res = m.sequence_nll(g, in, in.labels, false);
  ForcedStats st;
  st.nll = res.nll.scalar();
  st.tokens = static_cast<long>(in.targets.size());
  const std::size_t feedback = in.targets.size() - 1;
  for (std::size_t t = 0; t < feedback; ++t) {
    st.gate_correct += model::argmax(res.steps[t].s) == in.labels[t];
    ++st.gate_total;
  }
  return st;
}

ForcedStats teacher_forced(const Model& m, std::span<const Example> data, int workers) {
  if (data.empty()) throw ValidationError("evaluation split is empty");
  std::vector<ForcedStats> per(data.size());
  nn::parallel_for(data.size(), workers, [&](std::size_t i) { per[i] = teacher_forced(m, data[i].inputs); });
  ForcedStats total;
  for (const auto& s : per) {
    total.nll += s.nll;
    total.tokens += s.tokens;
    total.gate_correct += s.gate_correct;
    total.gate_total += s.gate_total;
  }
  return total;
}

double perplexity(const Model& m, std::span<const Example> data, int workers) {
  const ForcedStats st = teacher_forced(m, data, workers);
  return perplexity_from_nll(st.nll, st.tokens);
}

double gate_accuracy(const Model& m, std::span<const Example> data, int workers) {
  const ForcedStats st = teacher_forced(m, data, workers);
  return st.gate_total == 0 ? 0.0 : static_cast<double>(st.gate_correct) / st.gate_total;
}

nlohmann::ordered_json to_json(const Generation& g) {
  nlohmann::ordered_json j;
  j["id"] = g.id;
  j["teacher_id"] = g.teacher_id;
  j["tokens"] = g.tokens;
  j["modality_trace"] = g.modality_trace;
  j["r_trace"] = g.r_trace;
  return j;
}

std::vector<Generation> generate(const Model& m, const corpus::Vocabulary& output_vocab,
                                 std::span<const Example> data, int max_len, int workers,
                                 const std::optional<std::string>& teacher_id) {
  const int forced = teacher_id ? m.config().teacher_index(*teacher_id) : -1;
  std::vector<Generation> out(data.size());
  nn::parallel_for(data.size(), workers, [&](std::size_t i) {
    const Example& ex = data[i];
    const int teacher = forced >= 0 ? forced : ex.inputs.teacher;
    const model::Decoded dec = m.decode_greedy(ex.inputs, teacher, max_len);
    Generation& g = out[i];
    g.id = ex.inputs.id;
    g.teacher_id = m.config().teachers[teacher];
    g.tokens = output_vocab.decode(dec.tokens);
    g.modality_trace = dec.modality_trace;
    g.r_trace = dec.r_trace;
  });
  return out;
}

MetricSet score(const Model& m, std::span<const Example> data, std::span<const Generation> gens, int workers) {
  if (data.size() != gens.size()) throw ValidationError("one generation per example is required");
  if (data.empty()) throw ValidationError("evaluation split is empty");
  std::vector<Tokens> cands;
  std::vector<std::vector<Tokens>> refs;
  for (std::size_t i = 0; i < data.size(); ++i) {
    cands.push_back(gens[i].tokens);
    refs.push_back(data[i].references);
  }
  MetricSet s;
  s.records = static_cast<long>(data.size());
  const ForcedStats forced = teacher_forced(m, data, workers);
  s.perplexity = perplexity_from_nll(forced.nll, forced.tokens);
  s.gate_accuracy = forced.gate_total == 0 ? 0.0 : static_cast<double>(forced.gate_correct) / forced.gate_total;
  s.bleu_1 = bleu(cands, refs, 1);
  s.bleu_2 = bleu(cands, refs, 2);
  s.bleu_3 = bleu(cands, refs, 3);
  s.rouge_l = rouge_l(std::span<const Tokens>(cands), refs);
  s.distinct_1 = distinct_n(cands, 1);
  s.distinct_2 = distinct_n(cands, 2);
  s.dist_12 = 100.0 * (s.distinct_1 + s.distinct_2) / 2.0;
  return s;
}

namespace {
nlohmann::ordered_json metrics_json(const MetricSet& s) {
  nlohmann::ordered_json j;
  j["records"] = s.records;
  j["perplexity"] = s.perplexity;
  j["bleu_1"] = s.bleu_1;
  j["bleu_2"] = s.bleu_2;
  j["bleu_3"] = s.bleu_3;
  j["rouge_l"] = s.rouge_l;
  j["distinct_1"] = s.distinct_1;
  j["distinct_2"] = s.distinct_2;
  j["dist_12"] = s.dist_12;
  j["gate_accuracy"] = s.gate_accuracy;
  return j;
}
}  // namespace

nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json j = metrics_json(r.overall);
  nlohmann::ordered_json per = nlohmann::ordered_json::object();
  for (const auto& [t, s] : r.per_teacher) per[t] = metrics_json(s);
  j["per_teacher"] = per;
  return j;
}

EvalReport evaluate_all(const Model& m, const corpus::Vocabulary& output_vocab, std::span<const Example> data,
                        int max_len, int workers, std::vector<Generation>* generations) {
  auto gens = generate(m, output_vocab, data, max_len, workers);
  EvalReport report;
  report.overall = score(m, data, gens, workers);
  std::map<std::string, std::vector<std::size_t>> by_teacher;
  for (std::size_t i = 0; i < data.size(); ++i) by_teacher[data[i].teacher_id].push_back(i);
  for (const auto& [t, idx] : by_teacher) {
    std::vector<Example> sub;
    std::vector<Generation> sub_gens;
    for (std::size_t i : idx) {
      sub.push_back(data[i]);
      sub_gens.push_back(gens[i]);
    }
    report.per_teacher[t] = score(m, sub, sub_gens, workers);
  }
  if (generations) *generations = std::move(gens);
  return report;
}

}  // namespace pmfgn::eval
