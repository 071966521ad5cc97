#include "sirl/social.hpp"

#include <chrono>
#include <cmath>
#include <unordered_map>

#include "sirl/parallel.hpp"
#include "sirl/rng.hpp"

namespace sirl {

void SocialConfig::validate() const {
  if (collaborative_episodes < 0) throw std::invalid_argument("collab_episodes must be >= 0");
  if (individual_episodes < 1) throw std::invalid_argument("individual_episodes must be >= 1");
  if (collab_parallel < 1) throw std::invalid_argument("collab_parallel must be >= 1");
  if (collab_iterations < 0) throw std::invalid_argument("collab_iterations must be >= 0");
  if (std::int64_t(collab_parallel) * collab_iterations != collaborative_episodes) {
    throw std::invalid_argument("collab_parallel * collab_iterations must equal collab_episodes");
  }
  if (!(q.alpha > 0.0 && q.alpha <= 1.0)) throw std::invalid_argument("alpha must be in (0, 1]");
  if (!(q.gamma >= 0.0 && q.gamma <= 1.0)) throw std::invalid_argument("gamma must be in [0, 1]");
  if (!(q.epsilon >= 0.0 && q.epsilon <= 1.0)) {
    throw std::invalid_argument("epsilon must be in [0, 1]");
  }
  if (workers < 0) throw std::invalid_argument("workers must be >= 0");
}

int vote(std::span<const int> proposals, std::mt19937_64& rng) {
  if (proposals.empty()) throw std::invalid_argument("vote: empty proposal list");
  if (proposals.size() == 1) return proposals[0];
  std::uniform_int_distribution<std::size_t> pick(0, proposals.size() - 1);
  return proposals[pick(rng)];
}

namespace {

// Epsilon-greedy proposal from an already-routed leaf; draw order matches
// DecisionTree::act so a lone agent behaves exactly like solo Q-learning.
int propose_at_leaf(const DecisionTree& tree, int leaf_id, double epsilon,
                    std::mt19937_64& rng) {
  if (epsilon > 0.0) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    if (u01(rng) < epsilon) {
      return std::uniform_int_distribution<int>(0, tree.n_actions() - 1)(rng);
    }
  }
  return tree.greedy_of_leaf(leaf_id);
}

// In-place update of the (already routed) current leaf; one route per step.
inline void q_step(DecisionTree& tree, int leaf, int action, double reward, int leaf_next,
                   const QLearnParams& p) {
  double target = reward;
  if (leaf_next >= 0) target += p.gamma * tree.leaf_q(leaf_next).maxCoeff();
  double& q = tree.leaf_q(leaf)[action];
  q += p.alpha * (target - q);
}

}  // namespace

void collaborative_phase(std::span<DecisionTree* const> agents, Environment& env, int episodes,
                         const QLearnParams& q, EpisodeLedger& ledger, std::mt19937_64& act_rng,
                         std::mt19937_64& env_rng, bool greedy_proposals) {
  if (episodes <= 0) return;
  if (agents.empty()) throw std::invalid_argument("collaborative_phase: no agents");

  const double eps = greedy_proposals ? 0.0 : q.epsilon;
  const std::size_t n = agents.size();
  std::vector<int> proposals(n);
  std::vector<int> leaf(n);
  std::vector<int> leaf_next(n);

  for (int ep = 0; ep < episodes; ++ep) {
    Eigen::VectorXd s = env.reset(env_rng());
    for (std::size_t i = 0; i < n; ++i) leaf[i] = agents[i]->route(s);

    bool done = false;
    while (!done) {
      for (std::size_t i = 0; i < n; ++i) {
        proposals[i] = propose_at_leaf(*agents[i], leaf[i], eps, act_rng);
      }
      const int action = vote(proposals, act_rng);
      StepResult step = env.step(action);
      done = step.done;

      for (std::size_t i = 0; i < n; ++i) {
        leaf_next[i] = done ? -1 : agents[i]->route(step.obs);
        q_step(*agents[i], leaf[i], action, step.reward, leaf_next[i], q);
        leaf[i] = leaf_next[i];
      }
    }
    ledger.collaborative += 1;
  }
}

double individual_phase(DecisionTree& agent, const EnvFactory& env_factory, int episodes,
                        const QLearnParams& q, EpisodeLedger& ledger, std::mt19937_64& act_rng,
                        std::mt19937_64& env_rng, std::vector<double>* returns_out) {
  if (episodes < 1) throw std::invalid_argument("individual_phase: episodes must be >= 1");

  auto env = env_factory();
  double sum = 0.0;
  for (int ep = 0; ep < episodes; ++ep) {
    Eigen::VectorXd s = env->reset(env_rng());
    int leaf = agent.route(s);
    double episode_return = 0.0;
    bool done = false;
    while (!done) {
      const int action = propose_at_leaf(agent, leaf, q.epsilon, act_rng);
      StepResult step = env->step(action);
      done = step.done;
      episode_return += step.reward;
      const int leaf_next = done ? -1 : agent.route(step.obs);
      q_step(agent, leaf, action, step.reward, leaf_next, q);
      leaf = leaf_next;
    }
    sum += episode_return;
    if (returns_out) returns_out->push_back(episode_return);
    ledger.individual += 1;
  }
  return sum / episodes;
}

void parallel_collaborative(std::span<DecisionTree* const> agents, const EnvFactory& env_factory,
                            int e_p, int iterations, const QLearnParams& q, EpisodeLedger& ledger,
                            std::uint64_t master_seed, std::uint64_t generation, int worker_cap,
                            bool greedy_proposals,
                            std::vector<std::vector<DecisionTree>>* worker_dump) {
  if (e_p < 1) throw std::invalid_argument("parallel_collaborative: e_p must be >= 1");
  if (iterations < 0) throw std::invalid_argument("parallel_collaborative: iterations must be >= 0");
  if (iterations == 0 || agents.empty()) return;

  std::vector<std::vector<DecisionTree>> copies(e_p);
  for (int w = 0; w < e_p; ++w) {
    copies[w].reserve(agents.size());
    for (const DecisionTree* agent : agents) copies[w].push_back(*agent);
  }

  parallel_for(e_p, worker_cap, [&](int w) {
    auto env = env_factory();
    auto act_rng = make_rng(master_seed, Stream::collab_actions, generation, w);
    auto env_rng = make_rng(master_seed, Stream::collab_env, generation, w);
    std::vector<DecisionTree*> ptrs;
    ptrs.reserve(copies[w].size());
    for (DecisionTree& t : copies[w]) ptrs.push_back(&t);
    EpisodeLedger local;  // per-worker; the shared ledger is bumped once below
    collaborative_phase(ptrs, *env, iterations, q, local, act_rng, env_rng, greedy_proposals);
  });
  ledger.collaborative += std::int64_t(e_p) * iterations;

  if (worker_dump) *worker_dump = copies;

  std::vector<DecisionTree> column;
  column.reserve(e_p);
  for (std::size_t k = 0; k < agents.size(); ++k) {
    column.clear();
    for (int w = 0; w < e_p; ++w) column.push_back(std::move(copies[w][k]));
    *agents[k] = average_trees(column);
  }
}

std::int64_t planned_total_episodes(const EvoParams& evo, const SocialConfig& soc) {
  return std::int64_t(evo.generations) *
         (soc.collaborative_episodes +
          std::int64_t(evo.population_size) * soc.individual_episodes);
}

TrainResult train(const Grammar& grammar, const EnvFactory& env_factory, const EvoParams& evo,
                  const SocialConfig& soc, const GenerationHook& hook) {
  evo.validate();
  soc.validate();

  const EnvSpec env_spec = env_factory()->spec();
  if (env_spec.kind != EnvSpec::ActionKind::discrete) {
    throw std::invalid_argument("train: environment factory must produce discrete-action envs");
  }
  const int n_inputs = env_spec.n_inputs;
  const int n_actions = env_spec.n_discrete;
  if (grammar.n_inputs() != 0 && grammar.n_inputs() != n_inputs) {
    throw std::invalid_argument("train: grammar is built for " +
                                std::to_string(grammar.n_inputs()) + " inputs, environment has " +
                                std::to_string(n_inputs));
  }

  const std::uint64_t master = soc.seed;
  auto evo_rng = make_rng(master, Stream::evolution);
  std::vector<Individual> pop = init_pop(evo, evo_rng);

  TrainResult result;
  bool have_best = false;
  EpisodeLedger& ledger = result.ledger;

  auto genotype_key = [](const Genotype& g) {
    return std::string(reinterpret_cast<const char*>(g.data()),
                       g.size() * sizeof(Genotype::value_type));
  };
  std::unordered_map<std::string, DecisionTree> learned;  // previous generation, by genotype

  for (int gen = 0; gen < evo.generations; ++gen) {
    const auto t0 = std::chrono::steady_clock::now();
    if (gen > 0) pop = update_pop(pop, evo, evo_rng);

    // Translate and build agents; exact clones keep their learned Q-values.
    const int p = evo.population_size;
    std::vector<DecisionTree> trees(p);
    std::vector<bool> valid(p, false);
    int invalid_count = 0;
    for (int idx = 0; idx < p; ++idx) {
      Individual& ind = pop[idx];
      ind.phenotype = translate(ind.genotype, grammar);
      if (!ind.phenotype->complete) {
        ind.fitness = Fitness::invalid();
        ++invalid_count;
        continue;
      }
      valid[idx] = true;
      if (soc.carry_q) {
        auto hit = learned.find(genotype_key(ind.genotype));
        if (hit != learned.end()) {
          trees[idx] = hit->second;
          continue;
        }
      }
      trees[idx] = DecisionTree::parse_expression(ind.phenotype->text, n_inputs, n_actions);
      auto q_rng = make_rng(master, Stream::q_init, gen, idx);
      trees[idx].init_q_uniform(q_rng);
    }

    std::vector<DecisionTree*> agents;
    for (int idx = 0; idx < p; ++idx) {
      if (valid[idx]) agents.push_back(&trees[idx]);
    }

    if (soc.collaborative_episodes > 0 && !agents.empty()) {
      parallel_collaborative(agents, env_factory, soc.collab_parallel, soc.collab_iterations,
                             soc.q, ledger, master, gen, soc.workers, soc.greedy_proposals);
    }

    // Individual phase; distinct individuals are independent given their
    // derived streams, so they can run on parallel workers.
    std::vector<double> fitness(p, 0.0);
    std::vector<std::int64_t> episodes(p, 0);
    parallel_for(p, soc.workers, [&](int idx) {
      if (!valid[idx]) return;
      EpisodeLedger local;
      auto act_rng = make_rng(master, Stream::ind_actions, gen, idx);
      auto env_rng = make_rng(master, Stream::ind_env, gen, idx);
      fitness[idx] = individual_phase(trees[idx], env_factory, soc.individual_episodes, soc.q,
                                      local, act_rng, env_rng);
      episodes[idx] = local.individual;
    });

    int gen_best = -1;
    double fitness_sum = 0.0;
    for (int idx = 0; idx < p; ++idx) {
      if (!valid[idx]) continue;
      pop[idx].fitness = Fitness::of(fitness[idx]);
      ledger.individual += episodes[idx];
      fitness_sum += fitness[idx];
      if (gen_best < 0 || fitness[idx] > fitness[gen_best]) gen_best = idx;
    }

    if (gen_best >= 0 && (!have_best || fitness[gen_best] > result.best_fitness)) {
      result.best_tree = trees[gen_best];
      result.best_genotype = pop[gen_best].genotype;
      result.best_fitness = fitness[gen_best];
      have_best = true;
    }

    if (soc.carry_q) {
      learned.clear();
      for (int idx = 0; idx < p; ++idx) {
        if (valid[idx]) learned.emplace(genotype_key(pop[idx].genotype), trees[idx]);
      }
    }

    const int n_valid = p - invalid_count;
    GenerationRecord record;
    record.generation = gen;
    record.best_fitness = gen_best >= 0 ? fitness[gen_best] : std::nan("");
    record.mean_fitness = n_valid > 0 ? fitness_sum / n_valid : std::nan("");
    record.invalid_count = invalid_count;
    record.collab_episodes = ledger.collaborative;
    record.individual_episodes = ledger.individual;
    record.total_episodes = ledger.total();
    record.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.log.push_back(record);
    if (hook && gen_best >= 0) hook(record, trees[gen_best]);
  }

  if (!have_best) throw NoValidSolutionError();
  return result;
}

BudgetReport budget_report(const EvoParams& evo, const SocialConfig& soc, int baseline_episodes) {
  if (baseline_episodes < 1) {
    throw std::invalid_argument("budget_report: baseline_episodes must be >= 1");
  }
  BudgetReport r;
  r.population_size = evo.population_size;
  r.collaborative_episodes = soc.collaborative_episodes;
  r.individual_episodes = soc.individual_episodes;
  r.baseline_episodes = baseline_episodes;
  r.social_cost_per_gen =
      r.collaborative_episodes + r.population_size * r.individual_episodes;
  r.baseline_cost_per_gen = r.population_size * r.baseline_episodes;
  r.cost_reduction_pct =
      100.0 * (1.0 - double(r.social_cost_per_gen) / double(r.baseline_cost_per_gen));
  r.social_experience_per_agent = r.collaborative_episodes + r.individual_episodes;
  r.baseline_experience_per_agent = baseline_episodes;
  // e_i + e_c / p < baseline, compared without division to keep it exact.
  r.social_cheaper = r.social_cost_per_gen < r.baseline_cost_per_gen;
  r.social_more_experience = r.social_experience_per_agent > r.baseline_experience_per_agent;
  return r;
}

namespace {

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

}  // namespace

std::string BudgetReport::text() const {
  std::string s;
  s += "population size:              " + std::to_string(population_size) + "\n";
  s += "collaborative episodes (e_c): " + std::to_string(collaborative_episodes) + "\n";
  s += "individual episodes (e_i):    " + std::to_string(individual_episodes) + "\n";
  s += "baseline episodes per agent:  " + std::to_string(baseline_episodes) + "\n";
  s += "cost per generation:          " + std::to_string(social_cost_per_gen) + " social vs " +
       std::to_string(baseline_cost_per_gen) + " baseline\n";
  s += "cost reduction:               " + pct(cost_reduction_pct) + "%\n";
  s += "experience per agent:         " + std::to_string(social_experience_per_agent) +
       " social vs " + std::to_string(baseline_experience_per_agent) + " baseline\n";
  s += std::string("social is cheaper:            ") + (social_cheaper ? "yes" : "no") + "\n";
  s += std::string("social sees more episodes:    ") + (social_more_experience ? "yes" : "no") +
       "\n";
  return s;
}

std::string BudgetReport::csv() const {
  std::string s =
      "p,e_c,e_i,baseline_e,social_cost_per_gen,baseline_cost_per_gen,cost_reduction_pct,"
      "social_experience,baseline_experience,social_cheaper,social_more_experience\n";
  s += std::to_string(population_size) + "," + std::to_string(collaborative_episodes) + "," +
       std::to_string(individual_episodes) + "," + std::to_string(baseline_episodes) + "," +
       std::to_string(social_cost_per_gen) + "," + std::to_string(baseline_cost_per_gen) + "," +
       pct(cost_reduction_pct) + "," + std::to_string(social_experience_per_agent) + "," +
       std::to_string(baseline_experience_per_agent) + "," + (social_cheaper ? "1" : "0") + "," +
       (social_more_experience ? "1" : "0") + "\n";
  return s;
}

}  // namespace sirl
