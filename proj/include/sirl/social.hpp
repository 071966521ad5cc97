#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sirl/dtree.hpp"
#include "sirl/envs.hpp"
#include "sirl/evolution.hpp"
#include "sirl/grammar.hpp"

namespace sirl {

struct SocialConfig {
  int collaborative_episodes = 0;  // e_c, per generation
  int individual_episodes = 1;     // e_i, per agent per generation
  int collab_parallel = 1;         // e_p parallel collaborative processes
  int collab_iterations = 0;       // i episodes per process; e_p * i == e_c
  QLearnParams q;
  bool carry_q = true;             // exact genotype clones keep learned Q-values
  bool greedy_proposals = false;   // collaborative proposals without exploration
  std::uint64_t seed = 0;
  int workers = 0;                 // thread cap, 0 = hardware

  void validate() const;
};

/// Exact episode accounting, the unit of training cost.
struct EpisodeLedger {
  std::int64_t collaborative = 0;
  std::int64_t individual = 0;
  std::int64_t total() const { return collaborative + individual; }
};

struct NoValidSolutionError : std::runtime_error {
  NoValidSolutionError() : std::runtime_error("no genotype translated to a valid tree") {}
};

/// Uniform selection from the proposal list, duplicates counted, so an
/// action's chance equals its share of proposals. A single proposal is
/// returned directly without consuming randomness.
int vote(std::span<const int> proposals, std::mt19937_64& rng);

/// Shared-environment learning: per step every agent proposes an action
/// (epsilon-greedy unless greedy_proposals), one proposal is voted in and
/// executed, and every agent Q-updates on the same transition. Each episode
/// counts once in the ledger regardless of the number of agents.
void collaborative_phase(std::span<DecisionTree* const> agents, Environment& env, int episodes,
                         const QLearnParams& q, EpisodeLedger& ledger, std::mt19937_64& act_rng,
                         std::mt19937_64& env_rng, bool greedy_proposals = false);

/// Private refinement: episodes of epsilon-greedy Q-learning on a fresh
/// environment; returns the mean undiscounted episode return (the fitness).
/// Per-episode returns are appended to `returns_out` when given.
double individual_phase(DecisionTree& agent, const EnvFactory& env_factory, int episodes,
                        const QLearnParams& q, EpisodeLedger& ledger, std::mt19937_64& act_rng,
                        std::mt19937_64& env_rng, std::vector<double>* returns_out = nullptr);

/// Collaborative phase split across e_p workers. Each worker receives deep
/// copies of every agent plus its own derived streams, runs `iterations`
/// episodes, and each agent is then replaced by the leaf-wise average of its
/// worker copies. Deterministic for fixed seeds regardless of scheduling.
/// When `worker_dump` is given, the per-worker trained copies are stored
/// there (indexed [worker][agent]) before merging.
void parallel_collaborative(std::span<DecisionTree* const> agents, const EnvFactory& env_factory,
                            int e_p, int iterations, const QLearnParams& q, EpisodeLedger& ledger,
                            std::uint64_t master_seed, std::uint64_t generation, int worker_cap,
                            bool greedy_proposals = false,
                            std::vector<std::vector<DecisionTree>>* worker_dump = nullptr);

struct GenerationRecord {
  int generation = 0;
  double best_fitness = 0.0;   // best valid fitness this generation
  double mean_fitness = 0.0;   // mean over valid individuals
  int invalid_count = 0;
  std::int64_t collab_episodes = 0;      // cumulative
  std::int64_t individual_episodes = 0;  // cumulative
  std::int64_t total_episodes = 0;       // cumulative
  double wall_seconds = 0.0;
};

/// Called after each generation with that generation's best agent.
using GenerationHook =
    std::function<void(const GenerationRecord&, const DecisionTree& best_of_generation)>;

struct TrainResult {
  DecisionTree best_tree;
  Genotype best_genotype;
  double best_fitness = 0.0;
  EpisodeLedger ledger;
  std::vector<GenerationRecord> log;
};

/// The full outer loop: evolve genotypes, translate to trees (incomplete
/// translations get the invalid sentinel and sit out), run the collaborative
/// phase, score each agent in its individual phase, and track the best-ever
/// agent, replaced only when strictly better.
TrainResult train(const Grammar& grammar, const EnvFactory& env_factory, const EvoParams& evo,
                  const SocialConfig& soc, const GenerationHook& hook = {});

/// Episode budget implied by a configuration, assuming every genotype
/// translates: generations * (e_c + p * e_i).
std::int64_t planned_total_episodes(const EvoParams& evo, const SocialConfig& soc);

/// Cost/experience comparison against a non-social baseline where each of
/// the p agents trains alone for baseline_episodes per generation.
struct BudgetReport {
  std::int64_t population_size = 0;
  std::int64_t collaborative_episodes = 0;
  std::int64_t individual_episodes = 0;
  std::int64_t baseline_episodes = 0;
  std::int64_t social_cost_per_gen = 0;      // e_c + p * e_i
  std::int64_t baseline_cost_per_gen = 0;    // p * baseline_episodes
  double cost_reduction_pct = 0.0;
  std::int64_t social_experience_per_agent = 0;    // e_c + e_i
  std::int64_t baseline_experience_per_agent = 0;  // baseline_episodes
  bool social_cheaper = false;          // e_i + e_c / p < baseline_episodes (exact)
  bool social_more_experience = false;  // e_c + e_i > baseline_episodes

  std::string text() const;
  std::string csv() const;
};

BudgetReport budget_report(const EvoParams& evo, const SocialConfig& soc, int baseline_episodes);

}  // namespace sirl
