#include "sirl/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "sirl/envs.hpp"

namespace sirl {

namespace {

std::string trim(std::string_view s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return {};
  std::size_t b = s.find_last_not_of(" \t\r");
  return std::string(s.substr(a, b - a + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* begin = value.data();
  const char* end = value.data() + value.size();
  auto [next, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc{} || next != end) {
    throw ConfigError(key, "cannot parse '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError(key, "expected true/false, got '" + value + "'");
}

}  // namespace

RunConfig RunConfig::from_string(const std::string& text) {
  RunConfig cfg;
  int ec = -1;  // collaborative budget keys before consistency resolution
  int ep = -1;
  int iters = -1;

  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no), "expected key=value, got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no), "empty key");

    if (key == "environment") {
      cfg.environment = value;
    } else if (key == "seed") {
      cfg.social.seed = parse_number<std::uint64_t>(key, value);
      cfg.seed_was_set = true;
    } else if (key == "population_size") {
      cfg.evo.population_size = parse_number<int>(key, value);
    } else if (key == "generations") {
      cfg.evo.generations = parse_number<int>(key, value);
    } else if (key == "genotype_length") {
      cfg.evo.genotype_length = parse_number<int>(key, value);
    } else if (key == "gene_value_max") {
      cfg.evo.gene_value_max = parse_number<std::uint32_t>(key, value);
    } else if (key == "crossover_prob") {
      cfg.evo.crossover_prob = parse_number<double>(key, value);
    } else if (key == "mutation_prob") {
      cfg.evo.mutation_prob = parse_number<double>(key, value);
    } else if (key == "mutation_rate") {
      cfg.evo.mutation_rate = parse_number<double>(key, value);
    } else if (key == "tournament_size") {
      cfg.evo.tournament_size = parse_number<int>(key, value);
    } else if (key == "collab_episodes") {
      ec = parse_number<int>(key, value);
    } else if (key == "collab_parallel") {
      ep = parse_number<int>(key, value);
    } else if (key == "collab_iterations") {
      iters = parse_number<int>(key, value);
    } else if (key == "individual_episodes") {
      cfg.social.individual_episodes = parse_number<int>(key, value);
    } else if (key == "alpha") {
      cfg.social.q.alpha = parse_number<double>(key, value);
    } else if (key == "gamma") {
      cfg.social.q.gamma = parse_number<double>(key, value);
    } else if (key == "epsilon") {
      cfg.social.q.epsilon = parse_number<double>(key, value);
    } else if (key == "bins") {
      cfg.bins = parse_number<int>(key, value);
    } else if (key == "carry_q") {
      cfg.social.carry_q = parse_bool(key, value);
    } else if (key == "collab_greedy") {
      cfg.social.greedy_proposals = parse_bool(key, value);
    } else {
      throw ConfigError(key, "unknown key");
    }
  }

  // Resolve the collaborative budget from whichever keys were given.
  if (ep < 0) ep = 1;
  if (ec < 0 && iters < 0) {
    ec = 0;
    iters = 0;
  } else if (iters < 0) {
    if (ec % ep != 0) {
      throw ConfigError("collab_episodes",
                        "not divisible by collab_parallel; give collab_iterations explicitly");
    }
    iters = ec / ep;
  } else if (ec < 0) {
    ec = ep * iters;
  }
  cfg.social.collaborative_episodes = ec;
  cfg.social.collab_parallel = ep;
  cfg.social.collab_iterations = iters;
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_string(buffer.str());
}

void RunConfig::validate() const {
  if (environment.empty()) throw ConfigError("environment", "missing");
  try {
    make_env(environment, bins);  // also checks bins against the channel count
  } catch (const std::invalid_argument& e) {
    throw ConfigError("environment", e.what());
  }
  try {
    evo.validate();
    social.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("config", e.what());
  }
  if (bins < 2) throw ConfigError("bins", "must be >= 2");
}

std::string RunConfig::manifest() const {
  std::string s;
  s += "# sirl run manifest (re-runnable as a config file)\n";
  s += "# version=" + std::string(kVersion) + "\n";
  s += "# planned_total_episodes=" + std::to_string(planned_total_episodes(evo, social)) + "\n";
  s += "environment=" + environment + "\n";
  s += "seed=" + std::to_string(social.seed) + "\n";
  s += "population_size=" + std::to_string(evo.population_size) + "\n";
  s += "generations=" + std::to_string(evo.generations) + "\n";
  s += "genotype_length=" + std::to_string(evo.genotype_length) + "\n";
  s += "gene_value_max=" + std::to_string(evo.gene_value_max) + "\n";
  s += "crossover_prob=" + format_weight(evo.crossover_prob) + "\n";
  s += "mutation_prob=" + format_weight(evo.mutation_prob) + "\n";
  s += "mutation_rate=" + format_weight(evo.mutation_rate) + "\n";
  s += "tournament_size=" + std::to_string(evo.tournament_size) + "\n";
  s += "collab_episodes=" + std::to_string(social.collaborative_episodes) + "\n";
  s += "collab_parallel=" + std::to_string(social.collab_parallel) + "\n";
  s += "collab_iterations=" + std::to_string(social.collab_iterations) + "\n";
  s += "individual_episodes=" + std::to_string(social.individual_episodes) + "\n";
  s += "alpha=" + format_weight(social.q.alpha) + "\n";
  s += "gamma=" + format_weight(social.q.gamma) + "\n";
  s += "epsilon=" + format_weight(social.q.epsilon) + "\n";
  s += "bins=" + std::to_string(bins) + "\n";
  s += std::string("carry_q=") + (social.carry_q ? "true" : "false") + "\n";
  s += std::string("collab_greedy=") + (social.greedy_proposals ? "true" : "false") + "\n";
  return s;
}

}  // namespace sirl
