// Command-line front end: train / evaluate / prune / sweep / budget.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "sirl/analysis.hpp"
#include "sirl/config.hpp"
#include "sirl/social.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;        // runtime/parse failures
constexpr int kExitConfig = 2;       // invalid configuration
constexpr int kExitNoSolution = 3;   // no genotype ever translated

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
}

sirl::DecisionTree load_tree(const std::string& path) {
  std::string text = read_file(path);
  // Tolerate leading comment lines and trailing whitespace in tree files.
  std::string body;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    body += line;
  }
  return sirl::DecisionTree::parse(body);
}

sirl::EnvFactory checked_factory(const sirl::DecisionTree& tree, const std::string& env_name,
                                 int bins) {
  auto factory = sirl::make_env_factory(env_name, bins);
  const sirl::EnvSpec spec = factory()->spec();
  if (tree.n_inputs() != spec.n_inputs) {
    throw std::runtime_error("tree expects " + std::to_string(tree.n_inputs()) +
                             " inputs but '" + env_name + "' provides " +
                             std::to_string(spec.n_inputs));
  }
  if (tree.n_actions() != spec.n_discrete) {
    throw std::runtime_error("tree has " + std::to_string(tree.n_actions()) +
                             " actions but '" + env_name + "' expects " +
                             std::to_string(spec.n_discrete));
  }
  return factory;
}

std::string fmt(double v) { return sirl::format_q(v); }

int cmd_train(const std::string& config_path, const std::string& out_dir, bool seed_given,
              std::uint64_t seed, int workers, bool dry_run) {
  sirl::RunConfig cfg = sirl::RunConfig::from_file(config_path);
  if (seed_given) {
    cfg.social.seed = seed;
    cfg.seed_was_set = true;
  }
  if (!cfg.seed_was_set) {
    std::random_device entropy;
    cfg.social.seed = (std::uint64_t(entropy()) << 32) ^ entropy();
    cfg.seed_was_set = true;
  }
  cfg.social.workers = workers;
  cfg.validate();

  fs::create_directories(out_dir);
  write_file(fs::path(out_dir) / "manifest.cfg", cfg.manifest());

  const std::int64_t planned = sirl::planned_total_episodes(cfg.evo, cfg.social);
  std::printf("planned episode budget: %lld (%d generations x (%d collaborative + %d x %d individual))\n",
              static_cast<long long>(planned), cfg.evo.generations,
              cfg.social.collaborative_episodes, cfg.evo.population_size,
              cfg.social.individual_episodes);
  if (dry_run) {
    std::printf("dry run: config valid, nothing simulated\n");
    return kExitOk;
  }

  auto factory = sirl::make_env_factory(cfg.environment, cfg.bins);
  sirl::Grammar grammar = sirl::default_oblique_grammar(factory()->spec().n_inputs);

  std::ofstream log(fs::path(out_dir) / "train_log.csv", std::ios::binary);
  log << "generation,best_fitness,mean_fitness,invalid_count,collab_episodes,"
         "individual_episodes,total_episodes,wall_seconds\n";

  sirl::GenerationHook hook = [&](const sirl::GenerationRecord& rec,
                                  const sirl::DecisionTree& best) {
    char name[48];
    std::snprintf(name, sizeof name, "best_gen_%04d.tree", rec.generation);
    write_file(fs::path(out_dir) / name, best.serialize() + "\n");
    char wall[32];
    std::snprintf(wall, sizeof wall, "%.3f", rec.wall_seconds);
    log << rec.generation << ',' << fmt(rec.best_fitness) << ',' << fmt(rec.mean_fitness) << ','
        << rec.invalid_count << ',' << rec.collab_episodes << ',' << rec.individual_episodes
        << ',' << rec.total_episodes << ',' << wall << '\n';
    log.flush();
    std::printf("gen %4d  best %12.4f  mean %12.4f  invalid %4d  episodes %lld\n",
                rec.generation, rec.best_fitness, rec.mean_fitness, rec.invalid_count,
                static_cast<long long>(rec.total_episodes));
  };

  sirl::TrainResult result = sirl::train(grammar, factory, cfg.evo, cfg.social, hook);

  write_file(fs::path(out_dir) / "best.tree", result.best_tree.serialize() + "\n");
  std::printf("best fitness: %s\n", fmt(result.best_fitness).c_str());
  std::printf("episodes: %lld collaborative + %lld individual = %lld total\n",
              static_cast<long long>(result.ledger.collaborative),
              static_cast<long long>(result.ledger.individual),
              static_cast<long long>(result.ledger.total()));
  std::printf("artifacts written to %s\n", out_dir.c_str());
  return kExitOk;
}

int cmd_evaluate(const std::string& tree_path, const std::string& env_name, int episodes,
                 int bins, std::uint64_t seed, const std::string& out_dir,
                 const std::string& trace_path) {
  sirl::DecisionTree tree = load_tree(tree_path);
  auto factory = checked_factory(tree, env_name, bins);

  sirl::EvalStats stats = sirl::evaluate(tree, factory, episodes, seed);
  fs::create_directories(out_dir);
  std::string csv = "episode,return\n";
  for (std::size_t i = 0; i < stats.returns.size(); ++i) {
    csv += std::to_string(i) + "," + fmt(stats.returns[i]) + "\n";
  }
  write_file(fs::path(out_dir) / "evaluation.csv", csv);

  if (!trace_path.empty()) {
    auto env = factory();
    write_file(trace_path, sirl::trace_episode(tree, *env, seed));
  }
  std::printf("episodes %d  mean %s  std %s\n", episodes, fmt(stats.mean).c_str(),
              fmt(stats.stddev).c_str());
  return kExitOk;
}

int cmd_prune(const std::string& tree_path, const std::string& env_name, int episodes,
              double threshold, int bins, std::uint64_t seed, const std::string& out_dir) {
  sirl::DecisionTree tree = load_tree(tree_path);
  auto factory = checked_factory(tree, env_name, bins);

  auto [pruned, report] = sirl::prune_with_traces(tree, factory, episodes, threshold, seed);
  fs::create_directories(out_dir);
  write_file(fs::path(out_dir) / "pruned.tree", pruned.serialize() + "\n");
  write_file(fs::path(out_dir) / "prune_report.txt", report.text());
  std::printf("%s", report.text().c_str());
  return kExitOk;
}

int cmd_sweep(const std::string& tree_path, const std::string& spec_path,
              const std::string& out_dir) {
  sirl::DecisionTree tree = load_tree(tree_path);

  sirl::SweepSpec spec;
  std::string env_name;
  int bins = 7;
  std::istringstream in(read_file(spec_path));
  std::string line;
  while (std::getline(in, line)) {
    std::size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw sirl::ConfigError("sweep spec", "expected key=value");
    std::string key = line.substr(start, eq - start);
    std::string value = line.substr(eq + 1);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
    if (key == "environment") {
      env_name = value;
    } else if (key == "bins") {
      bins = std::stoi(value);
    } else if (key == "node") {
      spec.node_id = std::stoi(value);
    } else if (key == "coefficient") {
      spec.coefficient = value == "bias" ? -1 : std::stoi(value);
    } else if (key == "episodes") {
      spec.episodes_per_value = std::stoi(value);
    } else if (key == "seed") {
      spec.seed = std::stoull(value);
    } else if (key == "values") {
      std::istringstream vs(value);
      std::string item;
      while (std::getline(vs, item, ',')) spec.values.push_back(std::stod(item));
    } else {
      throw sirl::ConfigError(key, "unknown key in sweep spec");
    }
  }
  if (env_name.empty()) throw sirl::ConfigError("environment", "missing from sweep spec");
  if (spec.values.empty()) throw sirl::ConfigError("values", "missing from sweep spec");

  auto factory = checked_factory(tree, env_name, bins);
  std::vector<sirl::SweepRow> rows = sirl::sweep(tree, spec, factory);
  fs::create_directories(out_dir);
  write_file(fs::path(out_dir) / "sweep.csv", sirl::sweep_csv(rows));
  std::printf("%zu sweep rows written to %s/sweep.csv\n", rows.size(), out_dir.c_str());
  return kExitOk;
}

int cmd_budget(const std::string& config_path, int baseline, const std::string& out_dir) {
  sirl::RunConfig cfg = sirl::RunConfig::from_file(config_path);
  cfg.validate();
  sirl::BudgetReport report = sirl::budget_report(cfg.evo, cfg.social, baseline);
  std::printf("%s", report.text().c_str());
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_file(fs::path(out_dir) / "budget.csv", report.csv());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Population-based training of oblique decision-tree policies"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "sirl_out", tree_path, env_name, spec_path, trace_path;
  std::uint64_t seed = 0;
  bool dry_run = false;
  int workers = 0;
  int episodes = 100;
  int bins = 7;
  int baseline = 1;
  double threshold = 0.005;

  auto* train = app.add_subcommand("train", "Run the full training loop");
  train->add_option("--config", config_path, "config file (key=value)")->required();
  train->add_option("--out", out_dir, "output directory");
  auto* train_seed = train->add_option("--seed", seed, "override the config seed");
  train->add_option("--workers", workers, "max worker threads (0 = hardware)");
  train->add_flag("--dry-run", dry_run, "validate and print the episode budget only");

  auto* evaluate = app.add_subcommand("evaluate", "Greedy evaluation of a tree file");
  evaluate->add_option("--tree", tree_path, "tree file")->required();
  evaluate->add_option("--env", env_name, "environment name")->required();
  evaluate->add_option("-n,--episodes", episodes, "evaluation episodes");
  evaluate->add_option("--bins", bins, "action bins per channel");
  evaluate->add_option("--seed", seed, "evaluation seed");
  evaluate->add_option("--out", out_dir, "output directory");
  evaluate->add_option("--trace", trace_path, "write a per-step CSV trace of one episode");

  auto* prune = app.add_subcommand("prune", "Visit-ratio pruning of a tree file");
  prune->add_option("--tree", tree_path, "tree file")->required();
  prune->add_option("--env", env_name, "environment name")->required();
  prune->add_option("--episodes", episodes, "trace episodes");
  prune->add_option("--threshold", threshold, "visit-ratio threshold");
  prune->add_option("--bins", bins, "action bins per channel");
  prune->add_option("--seed", seed, "trace seed");
  prune->add_option("--out", out_dir, "output directory");

  auto* sweep = app.add_subcommand("sweep", "Coefficient sensitivity sweep");
  sweep->add_option("--tree", tree_path, "tree file")->required();
  sweep->add_option("--spec", spec_path, "sweep spec file")->required();
  sweep->add_option("--out", out_dir, "output directory");

  auto* budget = app.add_subcommand("budget", "Social vs non-social episode budget");
  budget->add_option("--config", config_path, "config file")->required();
  budget->add_option("--baseline", baseline, "baseline episodes per agent per generation")
      ->required();
  budget->add_option("--out", out_dir, "output directory for budget.csv");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      return cmd_train(config_path, out_dir, !train_seed->empty(), seed, workers, dry_run);
    }
    if (evaluate->parsed()) {
      return cmd_evaluate(tree_path, env_name, episodes, bins, seed, out_dir, trace_path);
    }
    if (prune->parsed()) {
      return cmd_prune(tree_path, env_name, episodes, threshold, bins, seed, out_dir);
    }
    if (sweep->parsed()) return cmd_sweep(tree_path, spec_path, out_dir);
    if (budget->parsed()) return cmd_budget(config_path, baseline, out_dir);
  } catch (const sirl::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const sirl::NoValidSolutionError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNoSolution;
  } catch (const sirl::ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return kExitError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
  return kExitOk;
}
