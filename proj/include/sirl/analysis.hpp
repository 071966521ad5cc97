#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sirl/dtree.hpp"
#include "sirl/envs.hpp"

namespace sirl {

struct EvalStats {
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
  std::vector<double> returns;
};

/// Greedy rollouts (no exploration, no Q-updates) on fresh environments with
/// per-episode seeds derived from `seed`. The given tree is never mutated.
EvalStats evaluate(const DecisionTree& tree, const EnvFactory& env_factory, int n_episodes,
                   std::uint64_t seed);

/// One coefficient of one split swept over a list of values.
struct SweepSpec {
  int node_id = 0;          // internal node, preorder id
  int coefficient = -1;     // 0-based input index, or -1 for the bias
  std::vector<double> values;
  int episodes_per_value = 100;
  std::uint64_t seed = 0;
};

struct SweepRow {
  double value = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
};

/// Evaluate a clone of the tree per value, original untouched. Rows come back
/// in input order; each row's seed derives from the value's rank in sorted
/// order, so permuting the value list permutes rows without changing any
/// (value, mean) pair.
std::vector<SweepRow> sweep(const DecisionTree& tree, const SweepSpec& spec,
                            const EnvFactory& env_factory);

std::string sweep_csv(const std::vector<SweepRow>& rows);

struct PruneTraceReport {
  PruneReport prune;
  int nodes_before = 0, nodes_after = 0;
  int mac_before = 0, mac_after = 0;
  double mean_before = 0.0, mean_after = 0.0;
  std::string text() const;
};

/// Run `n_episodes` greedy episodes with visit instrumentation, apply
/// visit-ratio pruning, and evaluate before/after on a fixed seed set.
std::pair<DecisionTree, PruneTraceReport> prune_with_traces(const DecisionTree& tree,
                                                            const EnvFactory& env_factory,
                                                            int n_episodes = 100,
                                                            double threshold = 0.005,
                                                            std::uint64_t seed = 0);

/// One greedy episode with a per-step CSV trace `step,obs...,action,reward,done`.
std::string trace_episode(const DecisionTree& tree, Environment& env, std::uint64_t seed);

}  // namespace sirl
