// Copyright 2026 the doicsim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "doicsim/channel.hpp"
#include "oracles.hpp"

using namespace doicsim;

namespace {

RadioParams table_radio() {
  RadioParams radio;
  radio.bandwidth_slots = 10.0;
  radio.interference_cap = 5.0;
  radio.max_power = 10.0;
  return radio;
}

FadingProfile user1_profile() { return FadingProfile{1.0, 4.0, 1e-3}; }
FadingProfile user2_profile() { return FadingProfile{1.0, 2.0, 1e-3}; }

}  // namespace

TEST_CASE("fading profile validation") {
  CHECK_NOTHROW(user1_profile().validate());
  CHECK_THROWS_AS(FadingProfile{0.0, 4.0, 1e-3}.validate(), ConfigError);
  CHECK_THROWS_AS(FadingProfile{1.0, -1.0, 1e-3}.validate(), ConfigError);
  CHECK_THROWS_AS(FadingProfile{1.0, 4.0, 0.0}.validate(), ConfigError);
  CHECK_THROWS_AS(FadingProfile{1.0, 4.0, 2.0}.validate(), ConfigError);
}

TEST_CASE("sample_channel empirical means match the profile") {
  const FadingProfile profile = user1_profile();
  const RadioParams radio = table_radio();
  Rng channel(12345), csi(777);
  const int n = 1'000'000;
  double sum_direct = 0.0, sum_interf = 0.0;
  for (int i = 0; i < n; ++i) {
    const ChannelDraw draw = sample_channel(profile, radio, channel, csi);
    sum_direct += draw.direct_gain;
    sum_interf += draw.interference_gain;
  }
  CHECK(sum_direct / n == Catch::Approx(1.0).epsilon(0.01));
  CHECK(sum_interf / n == Catch::Approx(4.0).epsilon(0.01));
}

TEST_CASE("sample_channel clamps the direct gain at the floor") {
  const FadingProfile profile = user1_profile();
  const RadioParams radio = table_radio();
  Rng channel(99), csi(1);
  int clamped = 0;
  for (int i = 0; i < 100'000; ++i) {
    const ChannelDraw draw = sample_channel(profile, radio, channel, csi);
    REQUIRE(draw.direct_gain >= profile.direct_gain_floor);
    if (draw.direct_gain == profile.direct_gain_floor) ++clamped;
  }
  // P(raw draw below 1e-3) is about 1e-3, so roughly 100 hits expected.
  CHECK(clamped > 20);
}

TEST_CASE("sample_channel is deterministic given the seed") {
  const FadingProfile profile = user1_profile();
  const RadioParams radio = table_radio();
  Rng a1(5), a2(5), b1(6), b2(6);
  for (int i = 0; i < 1000; ++i) {
    const ChannelDraw x = sample_channel(profile, radio, a1, b1);
    const ChannelDraw y = sample_channel(profile, radio, a2, b2);
    REQUIRE(x.direct_gain == y.direct_gain);
    REQUIRE(x.interference_gain == y.interference_gain);
  }
}

TEST_CASE("transmission_rate pinned values") {
  const RadioParams radio = table_radio();
  CHECK(transmission_rate(0.0, 3.14, radio) == 0.0);
  CHECK(transmission_rate(1.25, 1.0, radio) ==
        Catch::Approx(8.109302162163288).epsilon(1e-12));
  CHECK(transmission_rate(10.0, 1.0, radio) ==
        Catch::Approx(23.978952727983707).epsilon(1e-12));
}

TEST_CASE("transmission_rate is strictly increasing in power and gain") {
  const RadioParams radio = table_radio();
  Rng rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double p1 = 20.0 * u(rng);
    const double p2 = p1 + 1e-6 + 10.0 * u(rng);
    const double gain = 1e-3 + 5.0 * u(rng);
    REQUIRE(transmission_rate(p2, gain, radio) >
            transmission_rate(p1, gain, radio));
    const double g2 = gain + 1e-6 + u(rng);
    REQUIRE(transmission_rate(p2, g2, radio) >
            transmission_rate(p2, gain, radio));
  }
  CHECK(transmission_rate(0.0, 1.0, radio) == 0.0);
  CHECK(transmission_rate(1.0, 0.0, radio) == 0.0);
}

TEST_CASE("allocate_power pinned values") {
  RadioParams radio = table_radio();
  CHECK(allocate_power(4.0, radio) == 1.25);
  CHECK(allocate_power(0.4, radio) == 10.0);  // cap binds
  radio.csi_error_bound = 0.1;
  radio.csi_backoff = 1.1;
  CHECK(allocate_power(4.0, radio) ==
        Catch::Approx(5.0 / 4.4).epsilon(1e-12));
}

TEST_CASE("model_csi_error") {
  RadioParams radio = table_radio();
  Rng rng(5150);
  SECTION("no error bound returns the gain untouched") {
    CHECK(model_csi_error(3.7, radio, rng) == 3.7);
  }
  SECTION("worst-case error sits exactly at the cap") {
    radio.csi_error_bound = 0.1;
    radio.csi_backoff = 1.1;
    const double g = 2.345;
    const double ghat = g / 1.1;  // e = +0.1 exactly
    const double p = allocate_power(ghat, radio);
    CHECK(p * g <= radio.interference_cap);
    CHECK(p * g >= radio.interference_cap * (1.0 - 1e-12));
  }
}

TEST_CASE("interference stays capped over exhaustive sampling") {
  const FadingProfile profile = user1_profile();

  SECTION("perfect CSI") {
    const RadioParams radio = table_radio();
    Rng channel(31337), csi(1);
    for (int i = 0; i < 1'000'000; ++i) {
      const ChannelDraw draw = sample_channel(profile, radio, channel, csi);
      const double p = allocate_power(draw.estimated_interference_gain, radio);
      REQUIRE(p <= radio.max_power);
      REQUIRE(p * draw.interference_gain <= radio.interference_cap);
    }
  }
  SECTION("imperfect CSI with backoff") {
    RadioParams radio = table_radio();
    radio.csi_error_bound = 0.1;
    radio.csi_backoff = 1.1;
    Rng channel(31338), csi(2);
    for (int i = 0; i < 1'000'000; ++i) {
      const ChannelDraw draw = sample_channel(profile, radio, channel, csi);
      const double p = allocate_power(draw.estimated_interference_gain, radio);
      REQUIRE(p <= radio.max_power);
      REQUIRE(p * draw.interference_gain <= radio.interference_cap);
    }
  }
}

TEST_CASE("service rate of a degenerate constant channel") {
  const RadioParams radio = table_radio();
  const ChannelDraw constant{1.0, 4.0, 1.0, 4.0};
  const double mu =
      service_rate_from_draws([&] { return constant; }, 10'000, radio);
  CHECK(mu == Catch::Approx(8.109302162163288).epsilon(1e-9));
}

TEST_CASE("service rate matches the quadrature oracle") {
  const FadingProfile profile = user1_profile();
  const RadioParams radio = table_radio();

  const double oracle = testing::service_rate_quadrature(profile, radio);
  const double oracle_coarse =
      testing::service_rate_quadrature(profile, radio, 1024);
  REQUIRE(oracle == Catch::Approx(oracle_coarse).epsilon(1e-5));

  Rng channel(8), csi(9);
  const double mu =
      estimate_service_rate(profile, radio, 1'000'000, channel, csi);
  INFO("oracle=" << oracle << " estimate=" << mu);
  CHECK(mu == Catch::Approx(oracle).epsilon(0.02));
}

TEST_CASE("identical profiles give matching service-rate estimates") {
  const FadingProfile profile = user2_profile();
  const RadioParams radio = table_radio();
  Rng c1(100), e1(101), c2(200), e2(201);
  const double mu1 = estimate_service_rate(profile, radio, 1'000'000, c1, e1);
  const double mu2 = estimate_service_rate(profile, radio, 1'000'000, c2, e2);
  CHECK(std::fabs(mu1 - mu2) / mu1 < 0.01);
}

TEST_CASE("service-rate estimator standard error halves when samples quadruple") {
  const FadingProfile profile = user1_profile();
  const RadioParams radio = table_radio();
  const int trials = 24;
  auto spread = [&](std::int64_t n, int seed_base) {
    std::vector<double> estimates;
    for (int s = 0; s < trials; ++s) {
      Rng channel(seed_base + s), csi(seed_base + 1000 + s);
      estimates.push_back(
          estimate_service_rate(profile, radio, n, channel, csi));
    }
    double mean = 0.0;
    for (double e : estimates) mean += e;
    mean /= trials;
    double var = 0.0;
    for (double e : estimates) var += (e - mean) * (e - mean);
    return std::sqrt(var / (trials - 1));
  };
  const double se_small = spread(10'000, 42);
  const double se_large = spread(40'000, 42);
  const double ratio = se_small / se_large;
  INFO("se(1e4)=" << se_small << " se(4e4)=" << se_large);
  CHECK(ratio > 1.4);
  CHECK(ratio < 2.9);
}

TEST_CASE("reciprocal service-time moments are finite and stable") {
  const FadingProfile profile = user1_profile();
  const RadioParams radio = table_radio();
  auto moments = [&](std::int64_t n, int seed) {
    Rng channel(seed), csi(seed + 7);
    std::vector<double> m(4, 0.0);
    for (std::int64_t i = 0; i < n; ++i) {
      const ChannelDraw draw = sample_channel(profile, radio, channel, csi);
      const double p = allocate_power(draw.estimated_interference_gain, radio);
      const double inv = 1.0 / transmission_rate(p, draw.estimated_direct_gain,
                                                 radio);
      double pow_inv = 1.0;
      for (int k = 0; k < 4; ++k) {
        pow_inv *= inv;
        m[static_cast<std::size_t>(k)] += pow_inv;
      }
    }
    for (double& v : m) v /= static_cast<double>(n);
    return m;
  };
  const std::vector<double> small = moments(200'000, 11);
  const std::vector<double> large = moments(800'000, 11);
  for (int k = 0; k < 4; ++k) {
    INFO("moment " << k + 1 << ": " << small[k] << " vs " << large[k]);
    REQUIRE(std::isfinite(small[k]));
    REQUIRE(std::isfinite(large[k]));
    const double ratio = small[k] / large[k];
    CHECK(ratio > 0.4);
    CHECK(ratio < 2.5);
  }
}

TEST_CASE("service-rate estimation rejects a zero gain floor") {
  FadingProfile profile = user1_profile();
  const RadioParams radio = table_radio();
  Rng channel(1), csi(2);
  profile.direct_gain_floor = 0.0;
  CHECK_THROWS_AS(
      estimate_service_rate(profile, radio, 10'000, channel, csi),
      ConfigError);
  CHECK_THROWS_AS(
      estimate_service_rate(user1_profile(), radio, 100, channel, csi),
      ConfigError);
}
