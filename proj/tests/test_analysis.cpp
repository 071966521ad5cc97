#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "sirl/analysis.hpp"
#include "sirl/rng.hpp"

using namespace sirl;
using Eigen::VectorXd;

namespace {

/// Test-only environment: reward 1 per step, fixed episode length.
class FixedRewardEnv : public Environment {
 public:
  explicit FixedRewardEnv(int length) : length_(length) {}
  EnvSpec spec() const override {
    return {1, EnvSpec::ActionKind::discrete, 2, 0, length_};
  }
  Eigen::VectorXd reset(std::uint64_t) override {
    steps_ = 0;
    done_ = false;
    return VectorXd::Zero(1);
  }
  StepResult step(int) override {
    if (done_) throw std::logic_error("step after done");
    ++steps_;
    done_ = steps_ >= length_;
    return {VectorXd::Zero(1), 1.0, done_};
  }

 private:
  int length_;
  int steps_ = 0;
  bool done_ = true;
};

EnvFactory fixed_factory(int length) {
  return [length]() { return std::make_unique<FixedRewardEnv>(length); };
}

DecisionTree simple_tree() {
  return DecisionTree::parse("Node(1.0*x1 < 0.5, Leaf#0[q=1 0], Leaf#1[q=0 1])");
}

// 3-input stump usable on the lander: brake when falling fast.
DecisionTree lander_tree() {
  return DecisionTree::parse(
      "Node(0.0*x1 + 1.0*x2 + 0.0*x3 < -0.8, Leaf#0[q=0 1], Leaf#1[q=1 0])");
}

}  // namespace

TEST_CASE("evaluate on a constant-reward environment") {
  DecisionTree t = simple_tree();
  EvalStats st = evaluate(t, fixed_factory(10), 50, 1);
  CHECK(st.mean == 10.0);
  CHECK(st.stddev == 0.0);
  REQUIRE(st.returns.size() == 50);

  EvalStats one = evaluate(t, fixed_factory(7), 1, 1);
  CHECK(one.mean == 7.0);
  CHECK(one.stddev == 0.0);
  CHECK(one.returns.size() == 1);
}

TEST_CASE("evaluate statistics match the dumped returns") {
  DecisionTree t = lander_tree();
  EnvFactory factory = []() { return make_lander1d(); };
  EvalStats st = evaluate(t, factory, 25, 3);
  double mean = 0.0;
  for (double r : st.returns) mean += r;
  mean /= st.returns.size();
  CHECK(st.mean == doctest::Approx(mean).epsilon(1e-9));
}

TEST_CASE("evaluate does not mutate the tree") {
  DecisionTree t = simple_tree();
  t.set_instrumented(true);
  const std::string before = t.serialize();
  evaluate(t, fixed_factory(5), 10, 1);
  CHECK(t.serialize() == before);
  CHECK(t.visits(0) == 0);
}

TEST_CASE("evaluate is deterministic in the seed") {
  DecisionTree t = lander_tree();
  EnvFactory factory = []() { return make_lander1d(); };
  EvalStats a = evaluate(t, factory, 10, 42);
  EvalStats b = evaluate(t, factory, 10, 42);
  CHECK(a.returns == b.returns);
}

TEST_CASE("sweep emits one row per value in input order") {
  DecisionTree t = simple_tree();
  SweepSpec spec;
  spec.node_id = 0;
  spec.coefficient = 0;
  spec.values = {0.5, -1.0, 2.0};
  spec.episodes_per_value = 3;
  spec.seed = 9;

  std::vector<SweepRow> rows = sweep(t, spec, fixed_factory(6));
  REQUIRE(rows.size() == 3);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].value == spec.values[i]);
    CHECK(rows[i].mean == 6.0);
  }
}

TEST_CASE("sweeping the original value reproduces evaluate exactly") {
  DecisionTree t = lander_tree();
  EnvFactory factory = []() { return make_lander1d(); };

  SweepSpec spec;
  spec.node_id = 0;
  spec.coefficient = -1;  // bias, original value -0.8
  spec.values = {-3.0, -0.8, 3.0};
  spec.episodes_per_value = 8;
  spec.seed = 4;
  std::vector<SweepRow> rows = sweep(t, spec, factory);

  // same seed derivation as the sweep row: rank 1 in sorted order
  EvalStats direct =
      evaluate(t, factory, 8, derive_seed(4, Stream::sweep_row, 1));
  CHECK(rows[1].mean == direct.mean);
  CHECK(rows[1].stddev == direct.stddev);
}

TEST_CASE("permuting sweep values permutes rows without changing pairs") {
  DecisionTree t = lander_tree();
  EnvFactory factory = []() { return make_lander1d(); };

  SweepSpec spec;
  spec.node_id = 0;
  spec.coefficient = 1;
  spec.values = {0.0, 1.0, -2.0, 0.25};
  spec.episodes_per_value = 5;
  spec.seed = 31;
  std::vector<SweepRow> forward = sweep(t, spec, factory);

  SweepSpec shuffled = spec;
  shuffled.values = {0.25, -2.0, 1.0, 0.0};
  std::vector<SweepRow> backward = sweep(t, shuffled, factory);

  for (const SweepRow& row : forward) {
    auto match = std::find_if(backward.begin(), backward.end(),
                              [&](const SweepRow& r) { return r.value == row.value; });
    REQUIRE(match != backward.end());
    CHECK(match->mean == row.mean);
    CHECK(match->stddev == row.stddev);
  }
}

TEST_CASE("sweep does not touch the input tree and validates the target") {
  DecisionTree t = simple_tree();
  const std::string before = t.serialize();

  SweepSpec spec;
  spec.node_id = 0;
  spec.coefficient = 0;
  spec.values = {9.0};
  spec.episodes_per_value = 1;
  sweep(t, spec, fixed_factory(3));
  CHECK(t.serialize() == before);

  spec.coefficient = 5;
  CHECK_THROWS_AS(sweep(t, spec, fixed_factory(3)), std::out_of_range);
  spec.coefficient = 0;
  spec.node_id = 1;  // a leaf
  CHECK_THROWS_AS(sweep(t, spec, fixed_factory(3)), std::invalid_argument);
  spec.node_id = 7;
  CHECK_THROWS_AS(sweep(t, spec, fixed_factory(3)), std::out_of_range);
}

TEST_CASE("sweep csv shape") {
  std::vector<SweepRow> rows{{0.5, 1.0, 0.25}};
  const std::string csv = sweep_csv(rows);
  CHECK(csv.substr(0, 15) == "value,mean,std\n");
  CHECK(csv.find("0.5,1,0.25") != std::string::npos);
}

TEST_CASE("prune_with_traces removes a dead branch guarded by 0*x < 0") {
  // true side of the root is unreachable: 0 < 0 is false
  DecisionTree t = DecisionTree::parse(
      "Node(0.0*x1 + 0.0*x2 + 0.0*x3 < 0.0, Leaf#0[q=9 9], "
      "Node(0.0*x1 + 1.0*x2 + 0.0*x3 < -0.8, Leaf#1[q=0 1], Leaf#2[q=1 0]))");

  EnvFactory factory = []() { return make_lander1d(); };
  auto [pruned, report] = prune_with_traces(t, factory, 20, 0.005, 1);

  REQUIRE(report.prune.removed.size() == 1);
  CHECK(report.prune.removed[0].node_id == 1);
  CHECK(report.nodes_before == 5);
  CHECK(report.nodes_after == 3);
  CHECK(report.mac_after <= report.mac_before);
  CHECK(pruned.structure_text() ==
        "Node(0.0*x1 + 1.0*x2 + 0.0*x3 < -0.8, Leaf#1, Leaf#2)");
}

TEST_CASE("prune_with_traces leaves fully visited trees alone") {
  DecisionTree t = simple_tree();
  EnvFactory factory = fixed_factory(4);  // observation is always 0: one leaf visited...
  // use an environment that exercises both branches instead
  EnvFactory lander = []() { return make_lander1d(); };
  DecisionTree alt = DecisionTree::parse(
      "Node(0.0*x1 + 1.0*x2 + 0.0*x3 < -0.5, Leaf#0[q=1 0], Leaf#1[q=0 1])");
  auto [pruned, report] = prune_with_traces(alt, lander, 30, 0.005, 2);
  CHECK(report.prune.removed.empty());
  CHECK(pruned.same_structure(alt));
  CHECK(report.mac_after == report.mac_before);
  (void)t;
  (void)factory;
}

TEST_CASE("trace episode emits one row per step") {
  DecisionTree t = simple_tree();
  FixedRewardEnv env(4);
  const std::string csv = trace_episode(t, env, 0);
  CHECK(csv.substr(0, 31) == "step,obs1,action,reward,done\n0,");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);  // header + 4 steps
  CHECK(csv.find(",1,1\n") != std::string::npos);        // final done row
}
