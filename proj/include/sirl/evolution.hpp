#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sirl/grammar.hpp"

namespace sirl {

/// Fitness value with the two non-numeric states the outer loop needs:
/// not-yet-evaluated, and the sentinel for untranslatable genotypes, which
/// compares worse than every finite value.
class Fitness {
 public:
  static Fitness unevaluated() { return Fitness(State::unevaluated, 0.0); }
  static Fitness invalid() { return Fitness(State::invalid, 0.0); }
  static Fitness of(double v) { return Fitness(State::value, v); }

  bool is_unevaluated() const { return state_ == State::unevaluated; }
  bool is_invalid() const { return state_ == State::invalid; }
  bool is_value() const { return state_ == State::value; }

  double value() const {
    if (!is_value()) throw std::logic_error("Fitness: no numeric value");
    return value_;
  }

  /// Strict comparison; unevaluated operands are a contract violation.
  bool better_than(const Fitness& other) const {
    if (is_unevaluated() || other.is_unevaluated()) {
      throw std::logic_error("Fitness: comparing unevaluated fitness");
    }
    if (is_invalid()) return false;
    if (other.is_invalid()) return true;
    return value_ > other.value_;
  }

 private:
  enum class State { unevaluated, invalid, value };
  Fitness(State s, double v) : state_(s), value_(v) {}
  State state_;
  double value_;
};

struct Individual {
  Genotype genotype;
  Fitness fitness = Fitness::unevaluated();
  std::optional<TranslationResult> phenotype;
};

struct EvoParams {
  int population_size = 500;
  int generations = 100;
  double crossover_prob = 0.1;
  double mutation_prob = 0.9;  // per individual
  double mutation_rate = 0.05; // per gene, within a mutated individual
  std::uint32_t gene_value_max = 40000;
  int tournament_size = 2;
  int genotype_length = 1000;

  void validate() const;
};

/// population_size individuals, genes uniform in [0, gene_value_max).
std::vector<Individual> init_pop(const EvoParams& params, std::mt19937_64& rng);

/// Draw k with replacement, return a copy of the best; ties keep the first
/// drawn. Every drawn fitness must be evaluated.
Individual tournament_select(std::span<const Individual> pop, int k, std::mt19937_64& rng);

/// Cut point uniform in [1, length - 1]; children swap suffixes. Genotypes
/// of length < 2 have no interior cut and are returned unchanged.
std::pair<Genotype, Genotype> one_point_crossover(const Genotype& a, const Genotype& b,
                                                  std::mt19937_64& rng);

/// Each gene independently redrawn from [0, gene_value_max) with probability
/// mutation_rate.
Genotype mutate(const Genotype& g, double mutation_rate, std::uint32_t gene_value_max,
                std::mt19937_64& rng);

/// Next generation of the same size: tournament parents, one-point crossover
/// with probability crossover_prob, per-child mutation gate with probability
/// mutation_prob. Children start unevaluated. Best-ever tracking lives with
/// the caller; nothing is force-inserted here.
std::vector<Individual> update_pop(std::span<const Individual> pop, const EvoParams& params,
                                   std::mt19937_64& rng);

}  // namespace sirl
