#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sirl/config.hpp"

using namespace sirl;

TEST_CASE("config parses keys, comments, and blanks") {
  RunConfig cfg = RunConfig::from_string(
      "# a comment\n"
      "environment=cartpole\n"
      "\n"
      "seed = 42\n"
      "population_size=64\n"
      "generations=30\n"
      "collab_parallel=4\n"
      "collab_iterations=50\n"
      "individual_episodes=3\n"
      "epsilon=0.05\n"
      "carry_q=false\n");
  CHECK(cfg.environment == "cartpole");
  CHECK(cfg.social.seed == 42);
  CHECK(cfg.seed_was_set);
  CHECK(cfg.evo.population_size == 64);
  CHECK(cfg.social.collaborative_episodes == 200);  // derived from e_p * i
  CHECK(cfg.social.collab_parallel == 4);
  CHECK(cfg.social.collab_iterations == 50);
  CHECK_FALSE(cfg.social.carry_q);
  cfg.validate();
}

TEST_CASE("defaults mirror the reference hyperparameters") {
  RunConfig cfg = RunConfig::from_string("environment=cartpole\ncollab_episodes=100\n");
  CHECK(cfg.evo.population_size == 500);
  CHECK(cfg.evo.generations == 100);
  CHECK(cfg.evo.genotype_length == 1000);
  CHECK(cfg.evo.gene_value_max == 40000);
  CHECK(cfg.evo.crossover_prob == 0.1);
  CHECK(cfg.evo.mutation_prob == 0.9);
  CHECK(cfg.evo.mutation_rate == 0.05);
  CHECK(cfg.evo.tournament_size == 2);
  CHECK(cfg.social.q.alpha == 0.1);
  CHECK(cfg.social.q.gamma == 0.9);
  CHECK(cfg.social.q.epsilon == 0.05);
  CHECK(cfg.bins == 7);
  CHECK(cfg.social.carry_q);
  CHECK_FALSE(cfg.social.greedy_proposals);
}

TEST_CASE("unknown keys are rejected") {
  CHECK_THROWS_AS(RunConfig::from_string("environment=cartpole\nbogus_key=1\n"), ConfigError);
  try {
    RunConfig::from_string("bogus_key=1\n");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "bogus_key");
  }
}

TEST_CASE("malformed lines and values are rejected with the field name") {
  CHECK_THROWS_AS(RunConfig::from_string("environment cartpole\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_string("population_size=ten\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_string("carry_q=maybe\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_string("=3\n"), ConfigError);
}

TEST_CASE("collaborative budget consistency") {
  // all three given and consistent
  RunConfig ok = RunConfig::from_string(
      "environment=cartpole\ncollab_episodes=200\ncollab_parallel=4\ncollab_iterations=50\n");
  CHECK(ok.social.collaborative_episodes == 200);

  // inconsistent triple fails validation
  RunConfig bad = RunConfig::from_string(
      "environment=cartpole\ncollab_episodes=100\ncollab_parallel=4\ncollab_iterations=50\n");
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  // e_c alone: serial, i = e_c
  RunConfig serial = RunConfig::from_string("environment=cartpole\ncollab_episodes=30\n");
  CHECK(serial.social.collab_parallel == 1);
  CHECK(serial.social.collab_iterations == 30);
  serial.validate();

  // indivisible split is refused at parse time
  CHECK_THROWS_AS(
      RunConfig::from_string("environment=cartpole\ncollab_episodes=10\ncollab_parallel=3\n"),
      ConfigError);

  // omitted budget means non-social
  RunConfig none = RunConfig::from_string("environment=cartpole\n");
  CHECK(none.social.collaborative_episodes == 0);
  none.validate();
}

TEST_CASE("validation rejects bad environments and ranges") {
  RunConfig cfg = RunConfig::from_string("environment=mujoco\n");
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  RunConfig eps = RunConfig::from_string("environment=cartpole\nepsilon=1.5\n");
  CHECK_THROWS_AS(eps.validate(), ConfigError);

  RunConfig bins = RunConfig::from_string("environment=cartpole\nbins=1\n");
  CHECK_THROWS_AS(bins.validate(), ConfigError);

  RunConfig missing = RunConfig::from_string("seed=1\n");
  CHECK_THROWS_AS(missing.validate(), ConfigError);
}

TEST_CASE("manifest is re-runnable and carries the budget") {
  RunConfig cfg = RunConfig::from_string(
      "environment=cartpole\nseed=7\npopulation_size=500\ngenerations=100\n"
      "collab_parallel=10\ncollab_iterations=100\nindividual_episodes=3\n");
  cfg.validate();

  const std::string manifest = cfg.manifest();
  CHECK(manifest.find("# planned_total_episodes=250000\n") != std::string::npos);
  CHECK(manifest.find("# version=") != std::string::npos);

  RunConfig reloaded = RunConfig::from_string(manifest);
  reloaded.validate();
  CHECK(reloaded.environment == cfg.environment);
  CHECK(reloaded.social.seed == 7);
  CHECK(reloaded.evo.population_size == 500);
  CHECK(reloaded.social.collaborative_episodes == 1000);
  CHECK(reloaded.manifest() == manifest);
}
