#include "sirl/envs.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace sirl {

namespace {

[[noreturn]] void step_after_done() {
  throw std::logic_error("environment: step() called on a finished episode");
}

}  // namespace

// ---------------------------------------------------------------------------
// DiscretizedEnv

DiscretizedEnv::DiscretizedEnv(std::unique_ptr<ContinuousEnvironment> inner, int bins)
    : inner_(std::move(inner)), map_(inner_->spec().n_channels, bins) {}

EnvSpec DiscretizedEnv::spec() const {
  EnvSpec s = inner_->spec();
  s.kind = EnvSpec::ActionKind::discrete;
  s.n_discrete = map_.total_actions();
  return s;
}

Eigen::VectorXd DiscretizedEnv::reset(std::uint64_t seed) { return inner_->reset(seed); }

StepResult DiscretizedEnv::step(int action) {
  return inner_->step(map_.to_continuous(action));
}

// ---------------------------------------------------------------------------
// CartPole

namespace cartpole {
constexpr double kGravity = 9.8;
constexpr double kMassCart = 1.0;
constexpr double kMassPole = 0.1;
constexpr double kTotalMass = kMassCart + kMassPole;
constexpr double kHalfLength = 0.5;
constexpr double kPoleMassLength = kMassPole * kHalfLength;
constexpr double kForceMag = 10.0;
constexpr double kDt = 0.02;
constexpr double kThetaLimit = 0.2;
constexpr double kXLimit = 2.4;
constexpr int kMaxSteps = 1000;
}  // namespace cartpole

EnvSpec CartPole::spec() const {
  return {4, EnvSpec::ActionKind::continuous, 0, 1, cartpole::kMaxSteps};
}

Eigen::VectorXd CartPole::reset(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> init(-0.01, 0.01);
  x_ = init(rng);
  theta_ = init(rng);
  v_ = init(rng);
  omega_ = init(rng);
  steps_ = 0;
  done_ = false;
  return Eigen::Vector4d(x_, theta_, v_, omega_);
}

StepResult CartPole::step(const Eigen::VectorXd& action) {
  using namespace cartpole;
  if (done_) step_after_done();
  if (action.size() != 1) throw std::invalid_argument("cartpole: action must have 1 channel");

  const double force = std::clamp(action[0], -1.0, 1.0) * kForceMag;
  const double sin_t = std::sin(theta_);
  const double cos_t = std::cos(theta_);

  const double temp = (force + kPoleMassLength * omega_ * omega_ * sin_t) / kTotalMass;
  const double theta_acc = (kGravity * sin_t - cos_t * temp) /
                           (kHalfLength * (4.0 / 3.0 - kMassPole * cos_t * cos_t / kTotalMass));
  const double x_acc = temp - kPoleMassLength * theta_acc * cos_t / kTotalMass;

  // Semi-implicit Euler: velocities first, then positions.
  v_ += kDt * x_acc;
  x_ += kDt * v_;
  omega_ += kDt * theta_acc;
  theta_ += kDt * omega_;
  ++steps_;

  done_ = std::abs(theta_) > kThetaLimit || std::abs(x_) > kXLimit || steps_ >= kMaxSteps;
  return {Eigen::Vector4d(x_, theta_, v_, omega_), 1.0, done_};
}

// ---------------------------------------------------------------------------
// ChainMdp

ChainMdp::ChainMdp(int n_states, double goal_reward)
    : n_states_(n_states), goal_reward_(goal_reward) {
  if (n_states < 2) throw std::invalid_argument("chain: need at least 2 states");

  // Non-terminal states 0 .. n-2; state n-1 is terminal.
  model_.n_states = n_states - 1;
  model_.n_actions = 2;
  model_.next.resize(model_.n_states * 2);
  model_.reward.assign(model_.n_states * 2, 0.0);
  model_.terminal.assign(model_.n_states * 2, 0);
  for (int s = 0; s < model_.n_states; ++s) {
    model_.next[model_.idx(s, 0)] = std::max(s - 1, 0);
    model_.next[model_.idx(s, 1)] = s + 1;
    if (s + 1 == n_states - 1) {
      model_.reward[model_.idx(s, 1)] = goal_reward;
      model_.terminal[model_.idx(s, 1)] = 1;
    }
  }
}

EnvSpec ChainMdp::spec() const {
  return {n_states_ + 1, EnvSpec::ActionKind::discrete, 2, 0, 4 * n_states_};
}

Eigen::VectorXd ChainMdp::observe(int state) const {
  Eigen::VectorXd obs = Eigen::VectorXd::Zero(n_states_ + 1);
  obs[state] = 1.0;
  obs[n_states_] = static_cast<double>(state);
  return obs;
}

Eigen::VectorXd ChainMdp::reset(std::uint64_t) {
  state_ = 0;
  steps_ = 0;
  done_ = false;
  return observe(state_);
}

StepResult ChainMdp::step(int action) {
  if (done_) step_after_done();
  if (action < 0 || action > 1) throw std::invalid_argument("chain: action must be 0 or 1");

  const int i = model_.idx(state_, action);
  const double reward = model_.reward[i];
  state_ = model_.terminal[i] ? n_states_ - 1 : model_.next[i];
  ++steps_;
  done_ = model_.terminal[i] || steps_ >= 4 * n_states_;
  return {observe(state_), reward, done_};
}

// ---------------------------------------------------------------------------
// Lander1d

namespace lander {
constexpr double kDt = 0.2;
constexpr double kGravity = 1.0;
constexpr double kThrustAcc = 2.0;
constexpr double kSafeSpeed = 1.0;
constexpr double kThrustPenalty = 0.05;
constexpr double kLandBonus = 100.0;
constexpr int kMaxSteps = 500;
}  // namespace lander

Lander1d::Lander1d(double fuel) : initial_fuel_(fuel) {}

EnvSpec Lander1d::spec() const {
  return {3, EnvSpec::ActionKind::discrete, 2, 0, lander::kMaxSteps};
}

Eigen::VectorXd Lander1d::reset(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  h_ = std::uniform_real_distribution<double>(8.0, 12.0)(rng);
  v_ = 0.0;
  fuel_ = initial_fuel_;
  steps_ = 0;
  done_ = false;
  return Eigen::Vector3d(h_, v_, fuel_);
}

StepResult Lander1d::step(int action) {
  using namespace lander;
  if (done_) step_after_done();
  if (action < 0 || action > 1) throw std::invalid_argument("lander1d: action must be 0 or 1");

  const bool thrust = action == 1 && fuel_ >= 1.0;
  if (thrust) fuel_ -= 1.0;
  v_ += kDt * ((thrust ? kThrustAcc : 0.0) - kGravity);
  h_ += kDt * v_;
  ++steps_;

  double reward = thrust ? -kThrustPenalty : 0.0;
  if (h_ <= 0.0) {
    h_ = 0.0;
    reward += std::abs(v_) <= kSafeSpeed ? kLandBonus : -kLandBonus;
    done_ = true;
  } else if (steps_ >= kMaxSteps) {
    done_ = true;
  }
  return {Eigen::Vector3d(h_, v_, fuel_), reward, done_};
}

// ---------------------------------------------------------------------------
// Factories and oracles

std::unique_ptr<ContinuousEnvironment> make_cartpole() { return std::make_unique<CartPole>(); }

std::unique_ptr<Environment> make_chain_mdp(int n_states, double goal_reward) {
  return std::make_unique<ChainMdp>(n_states, goal_reward);
}

std::unique_ptr<Environment> make_lander1d() { return std::make_unique<Lander1d>(); }

Eigen::MatrixXd value_iteration(const TabularModel& m, double gamma, double tol) {
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(m.n_states, m.n_actions);
  for (;;) {
    double delta = 0.0;
    Eigen::MatrixXd next = q;
    for (int s = 0; s < m.n_states; ++s) {
      for (int a = 0; a < m.n_actions; ++a) {
        const int i = m.idx(s, a);
        double value = m.reward[i];
        if (!m.terminal[i]) value += gamma * q.row(m.next[i]).maxCoeff();
        delta = std::max(delta, std::abs(value - q(s, a)));
        next(s, a) = value;
      }
    }
    q = std::move(next);
    if (delta < tol) return q;
  }
}

Eigen::MatrixXd value_iteration(const Environment& env, double gamma, double tol) {
  const auto* tabular = dynamic_cast<const TabularEnv*>(&env);
  if (!tabular) {
    throw std::invalid_argument("value_iteration: environment has no tabular model");
  }
  return value_iteration(tabular->model(), gamma, tol);
}

std::unique_ptr<Environment> make_env(const std::string& name, int bins) {
  if (name == "cartpole") {
    return std::make_unique<DiscretizedEnv>(make_cartpole(), bins);
  }
  if (name == "lander1d") {
    return make_lander1d();
  }
  if (name.rfind("chain", 0) == 0) {
    const std::string suffix = name.substr(5);
    int n = 0;
    try {
      n = std::stoi(suffix);
    } catch (const std::exception&) {
      throw std::invalid_argument("unknown environment '" + name + "'");
    }
    return make_chain_mdp(n, 1.0);
  }
  throw std::invalid_argument("unknown environment '" + name +
                              "' (expected cartpole, lander1d, or chain<N>)");
}

EnvFactory make_env_factory(const std::string& name, int bins) {
  make_env(name, bins);  // validate the name eagerly
  return [name, bins]() { return make_env(name, bins); };
}

}  // namespace sirl
