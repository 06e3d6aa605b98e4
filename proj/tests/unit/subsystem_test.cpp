#include <gtest/gtest.h>

#include <limits>

#include "diffnet/errors.hpp"
#include "diffnet/subsystem.hpp"
#include "support/instances.hpp"

namespace diffnet {
namespace {

using testing::random_matrix;
using testing::random_model;
using testing::uniform_int;

const ToleranceConfig kTol;

SubsystemModel example_model() {
  return {(Mat(2, 2) << 0, 1, 0, 0).finished(), (Mat(2, 1) << 0, 1).finished(), Mat::Identity(2, 2)};
}

bool has_code(const std::vector<Violation>& vs, const std::string& code) {
  return std::any_of(vs.begin(), vs.end(), [&](const Violation& v) { return v.code == code; });
}

TEST(ValidateModel, DoubleIntegratorIsValid) {
  EXPECT_TRUE(validate_model(example_model()).empty());
  EXPECT_NO_THROW(require_valid(example_model()));
}

TEST(ValidateModel, ZeroOutputChannel) {
  auto m = example_model();
  m.C.row(1).setZero();
  const auto vs = validate_model(m);
  ASSERT_EQ(vs.size(), 1u);
  EXPECT_EQ(vs[0].code, "zero_output_channel");
  EXPECT_NE(vs[0].message.find("zero output channel"), std::string::npos);
  EXPECT_THROW(require_valid(m), InputError);
}

TEST(ValidateModel, DimensionMismatch) {
  auto m = example_model();
  m.B = Mat::Ones(3, 1);
  EXPECT_TRUE(has_code(validate_model(m), "dimension"));
}

TEST(ValidateModel, NonFiniteAndMultipleViolations) {
  auto m = example_model();
  m.A(0, 0) = std::numeric_limits<double>::infinity();
  m.C = Mat::Zero(1, 3);
  const auto vs = validate_model(m);
  EXPECT_TRUE(has_code(vs, "non_finite"));
  EXPECT_TRUE(has_code(vs, "dimension"));
  EXPECT_TRUE(has_code(vs, "zero_output_channel"));
}

TEST(Checks, DelegateToPbh) {
  EXPECT_TRUE(check_controllable(example_model(), kTol).holds);
  EXPECT_TRUE(check_observable(example_model(), kTol).holds);
  auto m = example_model();
  m.C = (Mat(1, 2) << 0, 1).finished();
  EXPECT_FALSE(check_observable(m, kTol).holds);
}

TEST(Checks, Duality) {
  RandomSource rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = uniform_int(rng, 1, 5);
    auto m = random_model(rng, n, 1, 1);
    if (trial % 2 == 0) m.B(n - 1, 0) = 0.0, m.A.row(n - 1).head(n - 1).setZero();
    const SubsystemModel dual{m.A.transpose(), m.C.transpose(), m.B.transpose()};
    EXPECT_EQ(check_controllable(m, kTol).holds, check_observable(dual, kTol).holds);
  }
}

TEST(Checks, ScaleInvariance) {
  RandomSource rng(32);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = uniform_int(rng, 1, 5);
    auto m = random_model(rng, n, uniform_int(rng, 1, 2), uniform_int(rng, 1, 2));
    if (trial % 3 == 0) {
      m.A = Mat::Identity(n, n);
    }
    for (double s : {1e-3, -2.0, 1e4}) {
      const SubsystemModel scaled{s * m.A, s * m.B, s * m.C};
      EXPECT_EQ(check_controllable(m, kTol).holds, check_controllable(scaled, kTol).holds);
      EXPECT_EQ(check_observable(m, kTol).holds, check_observable(scaled, kTol).holds);
    }
  }
}

TEST(FixedModes, NoneForControllableObservableTriple) {
  RandomSource rng(33);
  const auto r = fixed_modes(example_model(), rng, kTol);
  EXPECT_TRUE(r.fixed_modes.empty());
  EXPECT_TRUE(r.method_agreement);
}

TEST(FixedModes, DiagonalExample) {
  RandomSource rng(34);
  const SubsystemModel m{Eigen::Vector2d(1, 2).asDiagonal(), (Mat(2, 1) << 1, 0).finished(),
                         (Mat(1, 2) << 1, 0).finished()};
  const auto r = fixed_modes(m, rng, kTol);
  ASSERT_EQ(r.fixed_modes.size(), 1u);
  EXPECT_NEAR(std::abs(r.fixed_modes[0] - 2.0), 0.0, 1e-12);
  EXPECT_TRUE(r.method_agreement);
}

TEST(FixedModes, ZeroInputFreezesSpectrum) {
  RandomSource rng(35);
  const SubsystemModel m{Eigen::Vector3d(-1, 0.5, 2).asDiagonal(), Mat::Zero(3, 1), Mat::Ones(1, 3)};
  const auto r = fixed_modes(m, rng, kTol);
  EXPECT_EQ(r.fixed_modes.size(), 3u);
  EXPECT_EQ(r.persistent_modes.size(), 3u);
  EXPECT_TRUE(r.method_agreement);
}

TEST(FixedModes, EmptyIffControllableAndObservable) {
  RandomSource rng(36);
  int with_modes = 0, agreements = 0;
  const int trials = 200;
  for (int trial = 0; trial < trials; ++trial) {
    const int n = uniform_int(rng, 1, 5);
    auto m = random_model(rng, n, uniform_int(rng, 1, 2), uniform_int(rng, 1, 2));
    if (trial % 3 == 0 && n >= 2) {
      // Decouple the last state from the input or the output.
      m.A.row(n - 1).head(n - 1).setZero();
      if (trial % 2 == 0) {
        m.B.row(n - 1).setZero();
      } else {
        m.A.col(n - 1).head(n - 1).setZero();
        m.C.col(n - 1).setZero();
        if (m.C.rowwise().norm().minCoeff() == 0.0) m.C(0, 0) = 1.0;
      }
    }
    const auto r = fixed_modes(m, rng, kTol);
    const bool clean = check_controllable(m, kTol).holds && check_observable(m, kTol).holds;
    EXPECT_EQ(r.fixed_modes.empty(), clean) << "trial " << trial;
    with_modes += r.fixed_modes.empty() ? 0 : 1;
    agreements += r.method_agreement ? 1 : 0;
  }
  EXPECT_GT(with_modes, 30);
  EXPECT_GE(agreements, trials * 99 / 100);
}

TEST(FixedModes, RejectsInvalidModel) {
  RandomSource rng(37);
  auto m = example_model();
  m.C.setZero();
  EXPECT_THROW(fixed_modes(m, rng, kTol), InputError);
  EXPECT_THROW(fixed_modes(example_model(), rng, kTol, 0), std::invalid_argument);
}

}  // namespace
}  // namespace diffnet
