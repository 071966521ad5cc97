#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sirl/envs.hpp"
#include "sirl/rng.hpp"

using namespace sirl;
using Eigen::VectorXd;

TEST_CASE("cartpole reset is seed-deterministic and small") {
  CartPole env;
  VectorXd a = env.reset(123);
  CartPole env2;
  VectorXd b = env2.reset(123);
  CHECK((a - b).norm() == 0.0);
  CHECK(a.cwiseAbs().maxCoeff() <= 0.01);
  CHECK((env.reset(124) - env2.reset(123)).norm() > 0.0);
}

TEST_CASE("cartpole survives the first step and pays 1 per step") {
  CartPole env;
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 99ull}) {
    env.reset(seed);
    StepResult st = env.step(VectorXd::Zero(1));
    CHECK(st.reward == 1.0);
    CHECK_FALSE(st.done);
  }
}

TEST_CASE("constant max force destabilizes the pole") {
  CartPole env;
  env.reset(7);
  VectorXd push = VectorXd::Constant(1, 1.0);
  int steps = 0;
  StepResult st;
  do {
    st = env.step(push);
    ++steps;
  } while (!st.done);
  CHECK(steps < env.spec().max_steps);
  CHECK(std::abs(st.obs[1]) > 0.2);  // angle limit, not the position limit
}

TEST_CASE("cartpole replay reproduces rewards exactly") {
  DiscretizedEnv env(make_cartpole(), 7);
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> act(0, 6);
  std::vector<int> actions;
  std::vector<double> rewards;
  env.reset(42);
  for (int i = 0; i < 50; ++i) {
    int a = act(rng);
    StepResult st = env.step(a);
    actions.push_back(a);
    rewards.push_back(st.reward);
    if (st.done) break;
  }
  DiscretizedEnv replay(make_cartpole(), 7);
  replay.reset(42);
  for (std::size_t i = 0; i < actions.size(); ++i) {
    CHECK(replay.step(actions[i]).reward == rewards[i]);
  }
}

TEST_CASE("stepping a finished episode is a contract violation") {
  ChainMdp env(3, 1.0);
  env.reset(0);
  env.step(1);
  StepResult st = env.step(1);
  CHECK(st.done);
  CHECK(st.reward == 1.0);
  CHECK_THROWS_AS(env.step(0), std::logic_error);
}

TEST_CASE("chain value iteration oracle") {
  ChainMdp env(3, 1.0);
  Eigen::MatrixXd q = value_iteration(env, 0.9, 1e-10);
  REQUIRE(q.rows() == 2);  // two non-terminal states
  CHECK(q(0, 1) == doctest::Approx(0.9).epsilon(1e-9));
  CHECK(q(1, 1) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(q(0, 0) == doctest::Approx(0.81).epsilon(1e-9));
  CHECK(q(1, 0) == doctest::Approx(0.81).epsilon(1e-9));
}

TEST_CASE("value iteration with gamma 0 is the immediate reward") {
  ChainMdp env(4, 2.5);
  Eigen::MatrixXd q = value_iteration(env, 0.0, 1e-12);
  for (int s = 0; s < q.rows(); ++s) {
    CHECK(q(s, 0) == 0.0);
    CHECK(q(s, 1) == (s == q.rows() - 1 ? 2.5 : 0.0));
  }
}

TEST_CASE("value iteration tolerance consistency") {
  ChainMdp env(7, 1.0);
  Eigen::MatrixXd tight = value_iteration(env, 0.9, 1e-10);
  Eigen::MatrixXd loose = value_iteration(env, 0.9, 1e-6);
  CHECK((tight - loose).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("value iteration requires a tabular environment") {
  Lander1d env;
  CHECK_THROWS_AS(value_iteration(env, 0.9, 1e-6), std::invalid_argument);
}

TEST_CASE("chain episodes: always-left stalls, always-right wins") {
  ChainMdp env(5, 1.0);
  env.reset(0);
  double ret = 0.0;
  bool done = false;
  int steps = 0;
  while (!done) {
    StepResult st = env.step(0);
    ret += st.reward;
    done = st.done;
    ++steps;
  }
  CHECK(ret == 0.0);
  CHECK(steps == 4 * 5);  // truncation

  env.reset(0);
  ret = 0.0;
  done = false;
  while (!done) {
    StepResult st = env.step(1);
    ret += st.reward;
    done = st.done;
  }
  CHECK(ret == 1.0);
}

TEST_CASE("chain observation is one-hot plus index") {
  ChainMdp env(3, 1.0);
  VectorXd obs = env.reset(0);
  REQUIRE(obs.size() == 4);
  CHECK(obs[0] == 1.0);
  CHECK(obs[3] == 0.0);
  obs = env.step(1).obs;
  CHECK(obs[1] == 1.0);
  CHECK(obs[3] == 1.0);
}

TEST_CASE("lander free fall crashes") {
  Lander1d env;
  for (std::uint64_t seed : {0ull, 5ull, 9ull}) {
    env.reset(seed);
    double ret = 0.0;
    bool done = false;
    while (!done) {
      StepResult st = env.step(0);
      ret += st.reward;
      done = st.done;
    }
    CHECK(ret == -100.0);  // coasting has no shaping, crash is forced
  }
}

TEST_CASE("full thrust with plenty of fuel never lands") {
  Lander1d env(1e9);
  env.reset(3);
  int steps = 0;
  bool done = false;
  double last_h = 0.0;
  while (!done) {
    StepResult st = env.step(1);
    done = st.done;
    last_h = st.obs[0];
    ++steps;
  }
  CHECK(steps == env.spec().max_steps);  // truncated, not landed
  CHECK(last_h > 0.0);
}

TEST_CASE("thrust penalty makes all-thrust worse than coast-then-brake") {
  auto run = [](auto policy) {
    Lander1d env(10000.0);
    VectorXd obs = env.reset(11);
    double ret = 0.0;
    bool done = false;
    while (!done) {
      StepResult st = env.step(policy(obs));
      ret += st.reward;
      done = st.done;
      obs = st.obs;
    }
    return ret;
  };

  const double all_thrust = run([](const VectorXd&) { return 1; });
  const double brake_late = run([](const VectorXd& o) { return o[1] < -0.8 ? 1 : 0; });
  CHECK(brake_late > 90.0);  // safe landing, minor thrust penalties
  CHECK(all_thrust < brake_late);
}

TEST_CASE("environment factory names") {
  CHECK(make_env("cartpole", 7)->spec().n_discrete == 7);
  CHECK(make_env("cartpole", 9)->spec().n_discrete == 9);
  CHECK(make_env("lander1d", 7)->spec().n_discrete == 2);
  EnvSpec chain = make_env("chain5", 7)->spec();
  CHECK(chain.n_inputs == 6);
  CHECK(chain.n_discrete == 2);
  CHECK_THROWS_AS(make_env("mujoco", 7), std::invalid_argument);
  CHECK_THROWS_AS(make_env("chainx", 7), std::invalid_argument);
}
