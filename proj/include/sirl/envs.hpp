#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "sirl/actionmap.hpp"

namespace sirl {

struct EnvSpec {
  enum class ActionKind { discrete, continuous };
  int n_inputs = 0;
  ActionKind kind = ActionKind::discrete;
  int n_discrete = 0;   // valid when discrete
  int n_channels = 0;   // valid when continuous
  int max_steps = 0;
};

struct StepResult {
  Eigen::VectorXd obs;
  double reward = 0.0;
  bool done = false;
};

/// Episodic environment with a discrete action interface. Deterministic
/// given (reset seed, action sequence). Stepping a finished episode is a
/// contract violation; episodes truncate to spec().max_steps.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual EnvSpec spec() const = 0;
  virtual Eigen::VectorXd reset(std::uint64_t seed) = 0;
  virtual StepResult step(int action) = 0;
};

/// Same contract with a continuous [-1, 1]^n action vector.
class ContinuousEnvironment {
 public:
  virtual ~ContinuousEnvironment() = default;
  virtual EnvSpec spec() const = 0;
  virtual Eigen::VectorXd reset(std::uint64_t seed) = 0;
  virtual StepResult step(const Eigen::VectorXd& action) = 0;
};

/// Presents a continuous environment through the discrete contract using a
/// DiscretizedActionMap.
class DiscretizedEnv : public Environment {
 public:
  DiscretizedEnv(std::unique_ptr<ContinuousEnvironment> inner, int bins);
  EnvSpec spec() const override;
  Eigen::VectorXd reset(std::uint64_t seed) override;
  StepResult step(int action) override;

 private:
  std::unique_ptr<ContinuousEnvironment> inner_;
  DiscretizedActionMap map_;
};

/// Cart-pole balancing on classic dynamics: state (x, theta, v, omega),
/// one force channel in [-1, 1] scaled to +-10 N, +1 reward per step,
/// done when |theta| > 0.2 rad, |x| > 2.4, or after 1000 steps.
class CartPole : public ContinuousEnvironment {
 public:
  EnvSpec spec() const override;
  Eigen::VectorXd reset(std::uint64_t seed) override;
  StepResult step(const Eigen::VectorXd& action) override;

 private:
  double x_ = 0, theta_ = 0, v_ = 0, omega_ = 0;
  int steps_ = 0;
  bool done_ = true;
};

/// Exact model of a tabular environment, for dynamic-programming oracles.
struct TabularModel {
  int n_states = 0;
  int n_actions = 0;
  std::vector<int> next;        // [s * n_actions + a]
  std::vector<double> reward;   // [s * n_actions + a]
  std::vector<char> terminal;   // transition enters the terminal state

  int idx(int s, int a) const { return s * n_actions + a; }
};

class TabularEnv {
 public:
  virtual ~TabularEnv() = default;
  virtual const TabularModel& model() const = 0;
};

/// Deterministic chain of n_states states; actions {left=0, right=1}. Right
/// from state n-2 enters the terminal state with goal_reward; every other
/// step pays 0. Starts in state 0; truncates after 4 * n_states steps.
/// Observation: one-hot over states followed by the raw state index.
class ChainMdp : public Environment, public TabularEnv {
 public:
  ChainMdp(int n_states, double goal_reward);
  EnvSpec spec() const override;
  Eigen::VectorXd reset(std::uint64_t seed) override;
  StepResult step(int action) override;
  const TabularModel& model() const override { return model_; }

 private:
  Eigen::VectorXd observe(int state) const;
  int n_states_;
  double goal_reward_;
  TabularModel model_;
  int state_ = 0;
  int steps_ = 0;
  bool done_ = true;
};

/// 1D vertical lander: state (altitude, velocity, fuel); actions
/// {coast=0, thrust=1}. Thrust costs a small penalty and burns fuel.
/// Touching down with |velocity| <= 1 pays +100, faster is a -100 crash;
/// truncates after 500 steps.
class Lander1d : public Environment {
 public:
  explicit Lander1d(double fuel = 200.0);
  EnvSpec spec() const override;
  Eigen::VectorXd reset(std::uint64_t seed) override;
  StepResult step(int action) override;

 private:
  double initial_fuel_;
  double h_ = 0, v_ = 0, fuel_ = 0;
  int steps_ = 0;
  bool done_ = true;
};

std::unique_ptr<ContinuousEnvironment> make_cartpole();
std::unique_ptr<Environment> make_chain_mdp(int n_states, double goal_reward);
std::unique_ptr<Environment> make_lander1d();

/// Bellman-optimality iteration to max-norm tolerance `tol`; returns
/// Q*(s, a) as an n_states x n_actions matrix.
Eigen::MatrixXd value_iteration(const TabularModel& model, double gamma, double tol);

/// Convenience overload; throws if the environment is not tabular.
Eigen::MatrixXd value_iteration(const Environment& env, double gamma, double tol);

using EnvFactory = std::function<std::unique_ptr<Environment>()>;

/// Environments by name: "cartpole" (discretized with `bins`), "lander1d",
/// "chain<N>" (e.g. chain3). Unknown names throw.
std::unique_ptr<Environment> make_env(const std::string& name, int bins);
EnvFactory make_env_factory(const std::string& name, int bins);

}  // namespace sirl
