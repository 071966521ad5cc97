#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "sirl/evolution.hpp"
#include "sirl/social.hpp"

namespace sirl {

inline constexpr const char* kVersion = "0.1.0";

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// A full run description, loaded from flat `key=value` text (one pair per
/// line, `#` comments). Unknown keys are rejected; every value is validated
/// before a run starts. The collaborative budget may be given as
/// collab_episodes, as collab_parallel + collab_iterations, or both
/// (consistency is checked: e_c = e_p * i).
struct RunConfig {
  std::string environment;
  EvoParams evo;
  SocialConfig social;
  int bins = 7;
  bool seed_was_set = false;

  static RunConfig from_string(const std::string& text);
  static RunConfig from_file(const std::string& path);

  void validate() const;

  /// Re-runnable manifest: the resolved configuration in config syntax, with
  /// version and planned episode budget recorded as comment metadata.
  std::string manifest() const;
};

}  // namespace sirl
