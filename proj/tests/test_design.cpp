#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qato/benchmarks.hpp"
#include "qato/design.hpp"
#include "qato/encoding.hpp"

using namespace qato;

TEST(Design, InitDesign) {
  auto s = init_design(6, 0.35, 1.1);
  EXPECT_EQ(s.rho, std::vector<double>(6, 0.35));
  EXPECT_EQ(s.theta, std::vector<double>(6, 1.1));
  EXPECT_EQ(s.iteration, 0u);
  EXPECT_EQ(init_design(1, 1.0, 1.1).rho, std::vector<double>{1.0});
  EXPECT_THROW(init_design(3, 0.0, 1.1), std::invalid_argument);
  EXPECT_THROW(init_design(3, 1.2, 1.1), std::invalid_argument);
  EXPECT_THROW(init_design(3, 0.5, 0.0), std::invalid_argument);
}

TEST(Design, DecodeAlphas) {
  auto s = init_design(2, 0.5, 1.1);
  auto l1 = make_layout(2, 1, 1);
  BitAssignment b(std::vector<std::uint8_t>{1, 0, 0});
  const auto a = decode_alphas(b, l1, s);
  EXPECT_DOUBLE_EQ(a[0], 1.1);
  EXPECT_DOUBLE_EQ(a[1], 1e-6);

  auto l3 = make_layout(2, 3, 1);
  BitAssignment b3(std::vector<std::uint8_t>{1, 0, 1, 0, 0, 0, 1});
  const auto a3 = decode_alphas(b3, l3, s);
  EXPECT_NEAR(a3[0], 1.1 * 4.0 / 6.0, 1e-15);
  EXPECT_THROW(decode_alphas(b, l3, s), std::invalid_argument);
}

TEST(Design, ApplyUpdateCapAndFloor) {
  DesignState s = init_design(3, 0.35, 1.1);
  s.rho = {0.35, 0.95, 0.5};
  s = apply_update(std::move(s), std::vector<double>{1.1, 1.1, 1e-6});
  EXPECT_NEAR(s.rho[0], 0.385, 1e-15);
  EXPECT_EQ(s.rho[1], 1.0);
  EXPECT_EQ(s.theta[1], 1.0);
  EXPECT_EQ(s.rho[2], 1e-6);
  EXPECT_EQ(s.theta[0], 1.1);
  EXPECT_EQ(s.iteration, 1u);
  EXPECT_EQ(s.alpha_log.size(), 1u);
  EXPECT_EQ(s.count_at_cap(), 1u);
  EXPECT_EQ(s.count_at_floor(), 1u);
}

TEST(Design, ReplayMatchesIncrementalAndCapLatches) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> bit(0, 1);
  const std::size_t n = 40;
  auto s = init_design(n, 0.4, 1.1);
  auto layout = make_layout(n, 2, 1);
  std::vector<bool> latched(n, false);
  for (int it = 0; it < 30; ++it) {
    BitAssignment b(layout.size());
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = static_cast<std::uint8_t>(bit(rng));
    const auto alpha = decode_alphas(b, layout, s);
    for (std::size_t e = 0; e < n; ++e) {
      EXPECT_GE(alpha[e], kAlphaFloor);
      EXPECT_LE(alpha[e], s.theta[e]);
    }
    s = apply_update(std::move(s), alpha);
    for (std::size_t e = 0; e < n; ++e) {
      EXPECT_GE(s.rho[e], kRhoFloor);
      EXPECT_LE(s.rho[e], 1.0);
      if (latched[e]) {
        EXPECT_EQ(s.theta[e], 1.0);
      }
      latched[e] = s.theta[e] == 1.0;
    }
  }
  EXPECT_EQ(replay_rho(s), s.rho);
}

TEST(Design, VolumeRatio) {
  const auto p = build_benchmark("truss6");
  EXPECT_DOUBLE_EQ(volume_ratio(std::vector<double>(6, 1.0), p), 1.0);
  EXPECT_NEAR(volume_ratio(std::vector<double>(6, 0.35), p), 0.35, 1e-15);

  TrussModel t;
  t.dimension = 2;
  t.nodes = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  t.members = {{0, 1, 1.0}, {2, 1, 1.0}};
  Problem q(ProblemKind::truss, t, {}, {}, {}, 0.5);
  EXPECT_NEAR(volume_ratio(std::vector<double>{1.0, 0.0}, q), 1.0 / (1.0 + std::sqrt(2.0)), 1e-15);
}
