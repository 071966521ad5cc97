#include "sirl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sirl/rng.hpp"

namespace sirl {

namespace {

double greedy_return(const DecisionTree& tree, Environment& env, std::uint64_t episode_seed) {
  Eigen::VectorXd s = env.reset(episode_seed);
  double total = 0.0;
  bool done = false;
  while (!done) {
    StepResult step = env.step(tree.greedy_action(s));
    total += step.reward;
    done = step.done;
    s = std::move(step.obs);
  }
  return total;
}

EvalStats stats_from(std::vector<double> returns) {
  EvalStats st;
  st.returns = std::move(returns);
  const double n = static_cast<double>(st.returns.size());
  st.mean = std::accumulate(st.returns.begin(), st.returns.end(), 0.0) / n;
  double ss = 0.0;
  for (double r : st.returns) ss += (r - st.mean) * (r - st.mean);
  st.stddev = std::sqrt(ss / n);
  return st;
}

}  // namespace

EvalStats evaluate(const DecisionTree& tree, const EnvFactory& env_factory, int n_episodes,
                   std::uint64_t seed) {
  if (n_episodes < 1) throw std::invalid_argument("evaluate: n_episodes must be >= 1");
  DecisionTree local = tree;  // visit instrumentation stays inside this scope
  local.set_instrumented(false);
  std::vector<double> returns(n_episodes);
  for (int ep = 0; ep < n_episodes; ++ep) {
    auto env = env_factory();
    returns[ep] = greedy_return(local, *env, derive_seed(seed, Stream::eval_episode, ep));
  }
  return stats_from(std::move(returns));
}

std::vector<SweepRow> sweep(const DecisionTree& tree, const SweepSpec& spec,
                            const EnvFactory& env_factory) {
  if (spec.values.empty()) throw std::invalid_argument("sweep: empty value list");
  if (spec.episodes_per_value < 1) {
    throw std::invalid_argument("sweep: episodes_per_value must be >= 1");
  }
  const ObliqueSplit& target = tree.split_at(spec.node_id);  // validates node
  if (spec.coefficient < -1 || spec.coefficient >= target.weights.size()) {
    throw std::out_of_range("sweep: coefficient index out of range");
  }

  // Seed by rank in sorted value order, not input position, so permuting
  // the list cannot change any row's result.
  std::vector<std::size_t> order(spec.values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return spec.values[a] < spec.values[b];
  });
  std::vector<std::uint64_t> row_seed(spec.values.size());
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    row_seed[order[rank]] = derive_seed(spec.seed, Stream::sweep_row, rank);
  }

  std::vector<SweepRow> rows(spec.values.size());
  for (std::size_t i = 0; i < spec.values.size(); ++i) {
    DecisionTree variant = tree;
    ObliqueSplit& split = variant.split_at(spec.node_id);
    if (spec.coefficient < 0) {
      split.bias = spec.values[i];
    } else {
      split.weights[spec.coefficient] = spec.values[i];
    }
    EvalStats st = evaluate(variant, env_factory, spec.episodes_per_value, row_seed[i]);
    rows[i] = {spec.values[i], st.mean, st.stddev};
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "value,mean,std\n";
  for (const SweepRow& r : rows) {
    out += format_weight(r.value) + "," + format_q(r.mean) + "," + format_q(r.stddev) + "\n";
  }
  return out;
}

std::pair<DecisionTree, PruneTraceReport> prune_with_traces(const DecisionTree& tree,
                                                            const EnvFactory& env_factory,
                                                            int n_episodes, double threshold,
                                                            std::uint64_t seed) {
  if (n_episodes < 1) throw std::invalid_argument("prune_with_traces: n_episodes must be >= 1");

  DecisionTree traced = tree;
  traced.reset_visits();
  traced.set_instrumented(true);
  for (int ep = 0; ep < n_episodes; ++ep) {
    auto env = env_factory();
    greedy_return(traced, *env, derive_seed(seed, Stream::eval_episode, ep));
  }
  traced.set_instrumented(false);

  auto [pruned, prune_report] = prune(traced, threshold);

  PruneTraceReport report;
  report.prune = std::move(prune_report);
  report.nodes_before = tree.node_count();
  report.nodes_after = pruned.node_count();
  report.mac_before = tree.mac_per_decision();
  report.mac_after = pruned.mac_per_decision();
  report.mean_before = evaluate(tree, env_factory, n_episodes, seed).mean;
  report.mean_after = evaluate(pruned, env_factory, n_episodes, seed).mean;
  return {std::move(pruned), std::move(report)};
}

std::string PruneTraceReport::text() const {
  std::string s;
  s += "nodes removed: " + std::to_string(prune.removed.size()) + "\n";
  for (const auto& r : prune.removed) {
    s += "  node " + std::to_string(r.node_id) + " (parent " + std::to_string(r.parent_id) +
         " bypassed), visit ratio " + format_q(r.ratio) + "\n";
  }
  s += "leaf pairs merged: " + std::to_string(prune.merged.size()) + "\n";
  for (const auto& m : prune.merged) {
    s += "  node " + std::to_string(m.node_id) + " collapsed, greedy action " +
         std::to_string(m.greedy_action) + "\n";
  }
  s += "node count: " + std::to_string(nodes_before) + " -> " + std::to_string(nodes_after) + "\n";
  s += "MACs per decision: " + std::to_string(mac_before) + " -> " + std::to_string(mac_after) +
       "\n";
  s += "greedy mean return: " + format_q(mean_before) + " -> " + format_q(mean_after) + "\n";
  return s;
}

std::string trace_episode(const DecisionTree& tree, Environment& env, std::uint64_t seed) {
  const int n = env.spec().n_inputs;
  std::string out = "step";
  for (int i = 1; i <= n; ++i) out += ",obs" + std::to_string(i);
  out += ",action,reward,done\n";

  Eigen::VectorXd s = env.reset(seed);
  bool done = false;
  for (int step_idx = 0; !done; ++step_idx) {
    const int action = tree.greedy_action(s);
    StepResult step = env.step(action);
    out += std::to_string(step_idx);
    for (int i = 0; i < n; ++i) out += "," + format_q(s[i]);
    out += "," + std::to_string(action) + "," + format_q(step.reward) + "," +
           (step.done ? "1" : "0") + "\n";
    done = step.done;
    s = std::move(step.obs);
  }
  return out;
}

}  // namespace sirl
