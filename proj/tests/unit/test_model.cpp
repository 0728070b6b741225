#include <doctest.h>

#include <cmath>

#include "pmfgn/error.hpp"
#include "unit/helpers.hpp"
#include "unit/scalar_oracle.hpp"

using namespace pmfgn;
using namespace pmfgn::model;

namespace {

Model make_model(const testing::MicroSetup& s, std::uint64_t seed = 5) {
  Model m(s.config);
  m.initialize(seed);
  return m;
}

double nll(const Model& m, const RecordInputs& in, const std::vector<int>& routes) {
  nn::Graph g(m.params());
  return m.sequence_nll(g, in, routes, true).nll.scalar();
}

}  // namespace

TEST_CASE("uniform output distributions give L ln|V|") {
  auto s = testing::micro_setup();
  s.config.output_vocab = 10;
  Model m = make_model(s);
  for (const char* name : {"decoder.out.W", "decoder.out.b", "personal.out.W", "personal.out.b"})
    m.params().value(m.params().find(name)).setZero();
  RecordInputs in = s.data[0].inputs;
  in.targets = {4, 7, 9, corpus::Vocabulary::kEos};
  in.labels = {0, 1, 3, 0};
  in.sentence = {0, 0, 0, 1};
  CHECK(std::abs(nll(m, in, in.labels) - 4 * std::log(10.0)) < 1e-12);
}

TEST_CASE("certain predictions give zero loss") {
  auto s = testing::micro_setup();
  Model m = make_model(s);
  m.params().value(m.params().find("decoder.out.b"))(5, 0) = 800.0;
  m.params().value(m.params().find("personal.out.b"))(5, 0) = 800.0;
  RecordInputs in = s.data[1].inputs;
  in.targets = {5, 5, 5};
  in.labels = {0, 0, 0};
  CHECK(nll(m, in, in.labels) < 1e-12);
}

TEST_CASE("teacher-forced loss matches the scalar oracle") {
  for (Ablation a : {Ablation::None, Ablation::FixedR, Ablation::NoPlm, Ablation::OneHop}) {
    CAPTURE(ablation_name(a));
    auto s = testing::micro_setup(a);
    Model m = make_model(s, 17);
    for (const auto& ex : s.data) {
      const RecordInputs& in = ex.inputs;
      // Exercise every route, not only the labelled ones.
      std::vector<int> routes(in.targets.size());
      for (std::size_t t = 0; t < routes.size(); ++t) routes[t] = static_cast<int>((t + in.labels[t]) % 4);
      nn::Graph g(m.params());
      const auto res = m.sequence_nll(g, in, routes, true);
      const auto want = testing::scalar::teacher_forced(m, in, routes);
      CHECK(std::abs(res.nll.scalar() - want.j) < 1e-10);
      CHECK(std::abs(res.gate_nll.scalar() - want.j_gate) < 1e-10);
    }
  }
}

TEST_CASE("per-step distributions satisfy the mixture invariants") {
  auto s = testing::micro_setup();
  Model m = make_model(s, 23);
  for (const auto& ex : s.data) {
    nn::Graph g(m.params());
    const auto res = m.sequence_nll(g, ex.inputs, ex.inputs.labels, true);
    for (const auto& st : res.steps) {
      CHECK(std::abs(st.p.sum() - 1.0) < 1e-12);
      CHECK(std::abs(st.p_gen.sum() - 1.0) < 1e-12);
      CHECK(std::abs(st.p_per.sum() - 1.0) < 1e-12);
      CHECK(std::abs(st.s.sum() - 1.0) < 1e-12);
      CHECK(st.p.minCoeff() >= 0.0);
      CHECK(st.r > 0.0);
      CHECK(st.r < 1.0);
      CHECK((st.p - (st.r * st.p_gen + (1 - st.r) * st.p_per)).cwiseAbs().maxCoeff() <= 1e-15);
    }
  }
}

TEST_CASE("mixture override holds r and leaves w_r out of the graph") {
  auto s = testing::micro_setup();
  Model m = make_model(s);
  m.set_mixture_override(0.5);
  nn::Gradients grads(m.params());
  {
    nn::Graph g(m.params());
    const auto res = m.sequence_nll(g, s.data[0].inputs, s.data[0].inputs.labels, true);
    for (const auto& st : res.steps) CHECK(st.r == 0.5);
    g.backward(res.nll, grads);
  }
  CHECK(grads[m.w_r].isZero());
  m.set_mixture_override(std::nullopt);
  nn::Graph g(m.params());
  const auto res = m.sequence_nll(g, s.data[0].inputs, s.data[0].inputs.labels, true);
  CHECK(res.steps[0].r != 0.5);
}

TEST_CASE("sequence_nll validates routes") {
  auto s = testing::micro_setup();
  Model m = make_model(s);
  nn::Graph g(m.params());
  std::vector<int> routes = s.data[0].inputs.labels;
  routes.pop_back();
  CHECK_THROWS_AS(m.sequence_nll(g, s.data[0].inputs, routes, true), ValidationError);
  routes = s.data[0].inputs.labels;
  routes[0] = 4;
  CHECK_THROWS_AS(m.sequence_nll(g, s.data[0].inputs, routes, true), ValidationError);
}

TEST_CASE("greedy decoding") {
  auto s = testing::micro_setup();
  Model m = make_model(s, 31);
  const RecordInputs& in = s.data[0].inputs;

  const Decoded a = m.decode_greedy(in, 0, 8), b = m.decode_greedy(in, 0, 8);
  CHECK(a.tokens == b.tokens);
  CHECK(a.modality_trace == b.modality_trace);
  CHECK(a.r_trace == b.r_trace);
  CHECK(a.modality_trace.size() == a.r_trace.size());
  CHECK(a.tokens.size() <= 8);

  CHECK_THROWS_AS(m.decode_greedy(in, 0, 0), ValidationError);
  CHECK_THROWS_WITH(m.decode_greedy(in, 2, 4), "unknown teacher");

  m.params().value(m.params().find("decoder.out.b"))(6, 0) = 50.0;
  m.params().value(m.params().find("personal.out.b"))(6, 0) = 50.0;
  CHECK(m.decode_greedy(in, 1, 1).tokens == std::vector<int>{6});
  CHECK(m.decode_greedy(in, 1, 7).tokens == std::vector<int>(7, 6));

  m.params().value(m.params().find("decoder.out.b"))(corpus::Vocabulary::kEos, 0) = 90.0;
  m.params().value(m.params().find("personal.out.b"))(corpus::Vocabulary::kEos, 0) = 90.0;
  const Decoded stop = m.decode_greedy(in, 1, 7);
  CHECK(stop.tokens.empty());
  CHECK(stop.modality_trace.size() == 1);
}

TEST_CASE("ablations change the model structure") {
  {
    auto s = testing::micro_setup(Ablation::NoPlm);
    Model m = make_model(s);
    for (auto id : m.params().ids()) CHECK(m.params().name(id).rfind("personal.", 0) != 0);
    CHECK_FALSE(m.params().contains("mixture.w_r"));
    for (double r : m.decode_greedy(s.data[0].inputs, 0, 5).r_trace) CHECK(r == 1.0);
  }
  {
    auto s = testing::micro_setup(Ablation::FixedR);
    Model m = make_model(s);
    CHECK(m.params().contains("personal.A.H1"));
    CHECK_FALSE(m.params().contains("mixture.w_r"));
    const auto dec = m.decode_greedy(s.data[0].inputs, 1, 6);
    REQUIRE_FALSE(dec.r_trace.empty());
    for (double r : dec.r_trace) CHECK(r == 0.7);
  }
  {
    auto s = testing::micro_setup(Ablation::OneHop);
    Model m = make_model(s);
    for (const char* q : {"gate.image.Q", "gate.audio.Q", "gate.text.Q"})
      CHECK(m.params().value(m.params().find(q)).rows() == 1);
    nn::Graph g(m.params());
    const Encoded enc = m.encode(g, s.data[0].inputs);
    for (int k = 0; k < 3; ++k) CHECK(enc.aspects[k].cols() == 1);
  }
  {
    auto s = testing::micro_setup(Ablation::NoLabel);
    Model m = make_model(s);
    CHECK(m.params().contains("mixture.w_r"));
    CHECK(m.params().value(m.params().find("gate.text.Q")).rows() == s.config.dims.hops);
  }
  CHECK(ablation_from_name("fixed_r") == Ablation::FixedR);
  CHECK_THROWS_AS(ablation_from_name("two_hop"), ValidationError);
}

TEST_CASE("the general routing constant does not depend on the state") {
  auto s = testing::micro_setup();
  Model m = make_model(s);
  nn::Graph g(m.params());
  const Encoded enc = m.encode(g, s.data[0].inputs);
  const auto a = m.step(g, enc, nn::zeros(g, s.config.dims.d_h), 1, 1, 0, 0);
  const auto b = m.step(g, enc, g.constant(nn::Matrix::Constant(s.config.dims.d_h, 1, 0.3)), 1, 1, 0, 0);
  CHECK(a.z_tilde.value() == m.params().value(m.gate.z0));
  CHECK(b.z_tilde.value() == a.z_tilde.value());
}

TEST_CASE("prepared inputs append EOS with a general label") {
  auto s = testing::micro_setup();
  for (const auto& ex : s.data) {
    const auto& in = ex.inputs;
    CHECK(in.targets.back() == corpus::Vocabulary::kEos);
    CHECK(in.labels.back() == 0);
    CHECK(in.targets.size() == ex.feedback.size() + 1);
    CHECK(in.labels.size() == in.targets.size());
    CHECK(in.sentence.back() > in.sentence.front());
  }
  ModelConfig bad = s.config;
  bad.teachers = {"A"};
  CHECK_THROWS(prepare_dataset(s.corpus, s.vin, s.vout, bad));
}
