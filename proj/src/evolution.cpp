#include "sirl/evolution.hpp"

#include <tuple>

namespace sirl {

namespace {

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument(std::string(name) + " must be in [0, 1]");
  }
}

}  // namespace

void EvoParams::validate() const {
  if (population_size < 1) throw std::invalid_argument("population_size must be >= 1");
  if (generations < 1) throw std::invalid_argument("generations must be >= 1");
  if (genotype_length < 1) throw std::invalid_argument("genotype_length must be >= 1");
  if (tournament_size < 1) throw std::invalid_argument("tournament_size must be >= 1");
  if (gene_value_max < 1) throw std::invalid_argument("gene_value_max must be >= 1");
  check_probability(crossover_prob, "crossover_prob");
  check_probability(mutation_prob, "mutation_prob");
  check_probability(mutation_rate, "mutation_rate");
}

std::vector<Individual> init_pop(const EvoParams& params, std::mt19937_64& rng) {
  params.validate();
  std::uniform_int_distribution<std::uint32_t> gene(0, params.gene_value_max - 1);
  std::vector<Individual> pop(params.population_size);
  for (Individual& ind : pop) {
    ind.genotype.resize(params.genotype_length);
    for (auto& g : ind.genotype) g = gene(rng);
  }
  return pop;
}

Individual tournament_select(std::span<const Individual> pop, int k, std::mt19937_64& rng) {
  if (pop.empty()) throw std::invalid_argument("tournament_select: empty population");
  if (k < 1) throw std::invalid_argument("tournament_select: k must be >= 1");

  std::uniform_int_distribution<std::size_t> pick(0, pop.size() - 1);
  std::size_t best = pick(rng);
  for (int i = 1; i < k; ++i) {
    std::size_t challenger = pick(rng);
    if (pop[challenger].fitness.better_than(pop[best].fitness)) best = challenger;
  }
  return pop[best];
}

std::pair<Genotype, Genotype> one_point_crossover(const Genotype& a, const Genotype& b,
                                                  std::mt19937_64& rng) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("one_point_crossover: genotype lengths differ");
  }
  Genotype ca = a;
  Genotype cb = b;
  if (a.size() >= 2) {
    std::uniform_int_distribution<std::size_t> cut_dist(1, a.size() - 1);
    const std::size_t cut = cut_dist(rng);
    for (std::size_t i = cut; i < a.size(); ++i) std::swap(ca[i], cb[i]);
  }
  return {std::move(ca), std::move(cb)};
}

Genotype mutate(const Genotype& g, double mutation_rate, std::uint32_t gene_value_max,
                std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_int_distribution<std::uint32_t> gene(0, gene_value_max - 1);
  Genotype out = g;
  for (auto& value : out) {
    if (u01(rng) < mutation_rate) value = gene(rng);
  }
  return out;
}

std::vector<Individual> update_pop(std::span<const Individual> pop, const EvoParams& params,
                                   std::mt19937_64& rng) {
  params.validate();
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  std::vector<Individual> next;
  next.reserve(params.population_size);
  while (int(next.size()) < params.population_size) {
    Genotype a = tournament_select(pop, params.tournament_size, rng).genotype;
    Genotype b = tournament_select(pop, params.tournament_size, rng).genotype;
    if (u01(rng) < params.crossover_prob) {
      std::tie(a, b) = one_point_crossover(a, b, rng);
    }
    if (u01(rng) < params.mutation_prob) {
      a = mutate(a, params.mutation_rate, params.gene_value_max, rng);
    }
    if (u01(rng) < params.mutation_prob) {
      b = mutate(b, params.mutation_rate, params.gene_value_max, rng);
    }
    next.push_back({std::move(a), Fitness::unevaluated(), std::nullopt});
    if (int(next.size()) < params.population_size) {
      next.push_back({std::move(b), Fitness::unevaluated(), std::nullopt});
    }
  }
  return next;
}

}  // namespace sirl
