#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "sirl/actionmap.hpp"

using namespace sirl;

TEST_CASE("single channel endpoints and center") {
  DiscretizedActionMap map(1);
  CHECK(map.to_continuous(0)[0] == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(map.to_continuous(3)[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(map.to_continuous(6)[0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("channel-major layout") {
  DiscretizedActionMap map(2);
  Eigen::VectorXd a = map.to_continuous(13);  // channel 13/7 = 1, bin 13%7 = 6
  CHECK(a[0] == 0.0);
  CHECK(a[1] == doctest::Approx(1.0).epsilon(1e-15));

  Eigen::VectorXd b = map.to_continuous(2);  // channel 0, bin 2
  CHECK(b[0] == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
  CHECK(b[1] == 0.0);
}

TEST_CASE("seven bins enumerate the symmetric grid") {
  DiscretizedActionMap map(1);
  const double expected[] = {-1.0, -2.0 / 3.0, -1.0 / 3.0, 0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0};
  for (int bin = 0; bin < 7; ++bin) {
    CHECK(map.bin_value(bin) == doctest::Approx(expected[bin]).epsilon(1e-12));
    CHECK(map.bin_value(bin) == doctest::Approx(-map.bin_value(6 - bin)).epsilon(1e-12));
  }
}

TEST_CASE("index to (channel, bin) is a bijection") {
  DiscretizedActionMap map(3, 5);
  CHECK(map.total_actions() == 15);
  std::set<std::pair<int, int>> seen;
  for (int a = 0; a < map.total_actions(); ++a) {
    const int channel = map.channel_of(a);
    const int bin = map.bin_of(a);
    CHECK(channel >= 0);
    CHECK(channel < 3);
    CHECK(bin >= 0);
    CHECK(bin < 5);
    CHECK(seen.insert({channel, bin}).second);

    Eigen::VectorXd v = map.to_continuous(a);
    for (int c = 0; c < 3; ++c) {
      CHECK(v[c] >= -1.0);
      CHECK(v[c] <= 1.0);
      if (c != channel) CHECK(v[c] == 0.0);
    }
  }
  CHECK(seen.size() == 15);
}

TEST_CASE("total actions is bins times channels") {
  CHECK(DiscretizedActionMap(1).total_actions() == 7);
  CHECK(DiscretizedActionMap(2).total_actions() == 14);
  CHECK(DiscretizedActionMap(6).total_actions() == 42);
}

TEST_CASE("invalid construction and indices") {
  CHECK_THROWS_AS(DiscretizedActionMap(0), std::invalid_argument);
  CHECK_THROWS_AS(DiscretizedActionMap(1, 1), std::invalid_argument);
  DiscretizedActionMap map(2);
  CHECK_THROWS_AS(map.to_continuous(-1), std::out_of_range);
  CHECK_THROWS_AS(map.to_continuous(14), std::out_of_range);
}
