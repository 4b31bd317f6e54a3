#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "ksapprox/error.hpp"
#include "ksapprox/kernels.hpp"
#include "ksapprox/quad_oracle.hpp"

using namespace ksapprox;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST(DH, Values) {
  EXPECT_NEAR(d_h(1.0), 1.0, 1e-15);
  // 30-digit reference values.
  EXPECT_NEAR(d_h(0.5), 0.64599800374075196761, 1e-14);
  EXPECT_NEAR(d_h(0.3), 0.46094382591199421524, 1e-14);
  EXPECT_NEAR(d_h(1.7), 0.93970589602645036149, 1e-14);
  EXPECT_THROW(d_h(0.0), std::invalid_argument);
  EXPECT_THROW(d_h(2.0), std::invalid_argument);
}

TEST(DH, FiniteAtTheEnds) {
  double prev = 0.0;
  for (double H : {1e-9, 1e-6, 1e-3, 0.1}) {
    const double d = d_h(H);
    EXPECT_TRUE(std::isfinite(d) && d > 0.0) << H;
    EXPECT_GT(d, prev) << H;
    prev = d;
  }
  for (double H : {1.9, 1.999, 2 - 1e-6, 2 - 1e-9}) {
    const double d = d_h(H);
    EXPECT_TRUE(std::isfinite(d) && d > 0.0) << H;
  }
}

TEST(FbmKernel, BrownianCase) {
  for (double s : {0.01, 0.3, 0.99}) EXPECT_NEAR(fbm_kernel(1.0, 1.0, s), 1.0, 1e-15);
  EXPECT_NEAR(fbm_kernel(1.0, 2.0, 0.0), 1.0, 1e-15);
}

TEST(FbmKernel, VanishesPastT) {
  for (double H : {0.3, 1.0, 1.7}) {
    EXPECT_EQ(fbm_kernel(H, 1.0, 1.5), 0.0);
    EXPECT_EQ(fbm_kernel(H, 1.0, 1.0 + 1e-12), 0.0);
  }
  EXPECT_EQ(fbm_kernel(1.7, 1.0, 1.0), 0.0);
}

TEST(FbmKernel, FrozenValues) {
  // Direct 30-digit evaluation of the defining integral.
  struct Row {
    double H, s, want;
  };
  const std::vector<Row> rows = {
      {0.3, 0.1, 0.83765481619235457513},  {0.3, 0.5, 0.67788175683315820578},
      {0.3, 0.9, 1.0529273531662579968},   {0.75, 0.1, 0.91600587706134840292},
      {0.75, 0.5, 0.93562438123519433336}, {0.75, 0.9, 1.1298718998586627844},
      {1.25, 0.1, 1.1337475958736129224},  {1.25, 0.5, 1.0077665382352014856},
      {1.25, 0.9, 0.8159136435611681049},  {1.7, 0.1, 1.2931792738590292718},
      {1.7, 0.5, 0.794942240348696379},    {1.7, 0.9, 0.42389903531001662457},
  };
  for (const auto& r : rows) {
    EXPECT_NEAR(fbm_kernel(r.H, 1.0, r.s, 1e-12), r.want, 1e-9) << r.H << ' ' << r.s;
  }
  EXPECT_NEAR(fbm_kernel(0.75, 2.0, 0.3, 1e-12), 0.83268986643702880462, 1e-9);
}

TEST(FbmKernel, SingularPoints) {
  EXPECT_THROW(fbm_kernel(0.75, 1.0, 1.0), SingularPoint);
  EXPECT_THROW(fbm_kernel(0.75, 1.0, 0.0), SingularPoint);
  EXPECT_THROW(fbm_kernel(1.5, 1.0, 0.0), SingularPoint);
  EXPECT_THROW(fbm_kernel(0.75, 1.0, -0.1), std::invalid_argument);
  EXPECT_THROW(fbm_kernel(2.5, 1.0, 0.5), std::invalid_argument);
}

TEST(FbmKernel, GapFormMatches) {
  for (double H : {0.4, 1.3}) {
    EXPECT_NEAR(fbm_kernel_gap(H, 0.7, 0.3), fbm_kernel(H, 1.0, 0.7), 1e-12);
  }
}

TEST(LeiNualartKernel, Examples) {
  EXPECT_EQ(lei_nualart_kernel(0.5, 0.0, 3.0), 0.0);
  EXPECT_NEAR(lei_nualart_kernel(1.0, 1.0, 1.0), 1 - std::exp(-1.0), 1e-15);
  for (double r : {1e-6, 1e-12, 1e-20}) {
    const double v = lei_nualart_kernel(0.5, 2.0, r);
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_NEAR(v / (2 * std::pow(r, 0.25)), 1.0, 1e-5);
  }
  EXPECT_EQ(lei_nualart_kernel(0.5, 2.0, 0.0), 0.0);
  EXPECT_THROW(lei_nualart_kernel(0.5, 1.0, -1.0), std::invalid_argument);
  EXPECT_THROW(lei_nualart_kernel(1.5, 1.0, 0.0), SingularPoint);
}

TEST(Covariance, Examples) {
  EXPECT_NEAR(cov({CovKind::fbm, 1.0}, 2, 3), 2.0, 1e-15);
  for (double H : {0.3, 1.0, 1.6}) EXPECT_EQ(cov({CovKind::sub_fbm, H}, 2.5, 0.0), 0.0);
  EXPECT_NEAR(cov({CovKind::lei_nualart_x, 0.5}, 1, 1), 2.0765588543600631044, 1e-13);
  EXPECT_THROW(cov({CovKind::lei_nualart_x, 1.0}, 1, 1), UnsupportedParameter);
  EXPECT_NEAR(lei_nualart_variance(1.0, 3.0), 6 * std::log(2.0), 1e-14);
  EXPECT_NEAR(lei_nualart_variance(0.5, 1.0), cov({CovKind::lei_nualart_x, 0.5}, 1, 1), 1e-14);
}

TEST(Covariance, Symmetric) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (auto kind : {CovKind::fbm, CovKind::sub_fbm, CovKind::lei_nualart_x}) {
    for (double H : {0.3, 0.9, 1.4}) {
      for (int k = 0; k < 10; ++k) {
        const double t = u(gen);
        const double s = u(gen);
        EXPECT_DOUBLE_EQ(cov({kind, H}, t, s), cov({kind, H}, s, t));
      }
    }
  }
}

TEST(Covariance, PositiveSemidefinite) {
  std::vector<double> grid;
  for (int i = 1; i <= 12; ++i) grid.push_back(0.25 * i);
  for (auto kind : {CovKind::fbm, CovKind::sub_fbm, CovKind::lei_nualart_x}) {
    for (double H : {0.2, 0.75, 1.3, 1.8}) {
      Eigen::MatrixXd m(grid.size(), grid.size());
      for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t j = 0; j < grid.size(); ++j) m(i, j) = cov({kind, H}, grid[i], grid[j]);
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
      EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10 * es.eigenvalues().maxCoeff())
          << to_string(kind) << ' ' << H;
    }
  }
}

TEST(DecompositionConstant, Values) {
  EXPECT_NEAR(decomposition_constant(0.5, DecompositionRegime::sub_from_fbm), 0.37556277223247124143, 1e-15);
  EXPECT_NEAR(decomposition_constant(0.5, DecompositionRegime::sub_from_fbm), 0.5 * std::pow(kPi, -0.25), 1e-15);
  EXPECT_NEAR(decomposition_constant(1.5, DecompositionRegime::fbm_from_sub), 0.45996857917732664145, 1e-15);
  EXPECT_THROW(decomposition_constant(1.5, DecompositionRegime::sub_from_fbm), std::invalid_argument);
  EXPECT_THROW(decomposition_constant(0.5, DecompositionRegime::fbm_from_sub), std::invalid_argument);
  EXPECT_THROW(decomposition_constant(1.0, DecompositionRegime::sub_from_fbm), std::invalid_argument);
}

TEST(DecompositionConstant, CovarianceIdentities) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int k = 0; k < 50; ++k) {
    const double t = u(gen);
    const double s = u(gen);
    for (double H : {0.2, 0.5, 0.8}) {
      const double c1 = decomposition_constant(H, DecompositionRegime::sub_from_fbm);
      const double lhs = c1 * c1 * cov({CovKind::lei_nualart_x, H}, t, s) + cov({CovKind::fbm, H}, t, s);
      EXPECT_NEAR(lhs, cov({CovKind::sub_fbm, H}, t, s), 1e-10);
    }
    for (double H : {1.2, 1.5, 1.8}) {
      const double c2 = decomposition_constant(H, DecompositionRegime::fbm_from_sub);
      const double lhs = c2 * c2 * cov({CovKind::lei_nualart_x, H}, t, s) + cov({CovKind::sub_fbm, H}, t, s);
      EXPECT_NEAR(lhs, cov({CovKind::fbm, H}, t, s), 1e-10);
    }
  }
}

TEST(ValidateTheta, Examples) {
  EXPECT_TRUE(validate_theta(kPi / 2, 0.75).admissible);
  const auto r = validate_theta(2 * kPi / 3, 0.3);
  EXPECT_FALSE(r.admissible);
  EXPECT_TRUE(r.in_range);
  EXPECT_EQ(r.violated_indices, std::vector<int>{1});
  EXPECT_TRUE(validate_theta(2 * kPi / 3, 0.75).admissible);
  const auto at_pi = validate_theta(kPi, 0.75);
  EXPECT_FALSE(at_pi.admissible);
  EXPECT_FALSE(at_pi.in_range);
  EXPECT_FALSE(validate_theta(0.0, 1.0).admissible);
  EXPECT_FALSE(validate_theta(2 * kPi, 1.0).admissible);
  EXPECT_THROW(Theta{kPi}, std::invalid_argument);
  EXPECT_NEAR(Theta(kPi / 2).one_minus_cos(), 1.0, 1e-15);
}

TEST(KernelSpec, Tabulated) {
  const auto lin = KernelSpec::tabulated({.grid = {0, 1, 2}, .values = {0, 2, 0}});
  EXPECT_DOUBLE_EQ(lin(5, 0.5), 1.0);
  EXPECT_DOUBLE_EQ(lin(5, 1.5), 1.0);
  EXPECT_EQ(lin(5, 2.5), 0.0);
  const auto step = KernelSpec::tabulated(
      {.grid = {0, 1, 2}, .values = {3, 4}, .interpolation = Interpolation::step, .gate_at_t = true});
  EXPECT_EQ(step(2, 0.5), 3.0);
  EXPECT_EQ(step(2, 1.5), 4.0);
  EXPECT_EQ(step(1.2, 1.5), 0.0);
  EXPECT_EQ(step.support_end(1.2), 1.2);
  EXPECT_THROW(KernelSpec::tabulated({.grid = {0, 1}, .values = {1, 2, 3}}), std::invalid_argument);
  EXPECT_THROW(KernelSpec::tabulated({.grid = {1, 0}, .values = {1, 2}}), std::invalid_argument);
}

TEST(KernelSpec, MatchesCovarianceThroughOracle) {
  for (double H : {0.3, 1.25}) {
    const auto k = KernelSpec::fbm_volterra(H, 1e-12);
    const double v = oracle::kernel_inner_product(k, 0.6, 1.0, 1e-9);
    EXPECT_NEAR(v, cov({CovKind::fbm, H}, 0.6, 1.0), 1e-6) << H;
  }
  const auto x = KernelSpec::lei_nualart(0.8);
  EXPECT_NEAR(oracle::kernel_inner_product(x, 0.5, 1.0, 1e-10), cov({CovKind::lei_nualart_x, 0.8}, 0.5, 1.0), 1e-7);
}

TEST(KernelSpec, IncrementNormIdentity) {
  const auto k = KernelSpec::fbm_volterra(0.75, 1e-12);
  EXPECT_NEAR(oracle::kernel_increment_norm(k, 0.8, 0.3, 1e-9), std::pow(0.5, 0.75), 1e-6);
}
