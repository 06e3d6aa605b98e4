#include "diffnet/subsystem.hpp"

#include <algorithm>
#include <limits>

#include "diffnet/errors.hpp"

namespace diffnet {

namespace {

std::string shape(const Mat& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

// Greedy nearest-neighbour matching of `targets` into `pool` within radius.
std::vector<bool> matched_within(const std::vector<Complex>& targets, std::vector<Complex> pool,
                                 double radius) {
  std::vector<bool> found(targets.size(), false);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_j = pool.size();
    for (std::size_t j = 0; j < pool.size(); ++j) {
      const double dist = std::abs(pool[j] - targets[i]);
      if (dist < best) {
        best = dist;
        best_j = j;
      }
    }
    if (best_j < pool.size() && best <= radius) {
      found[i] = true;
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best_j));
    }
  }
  return found;
}

}  // namespace

std::vector<Violation> validate_model(const SubsystemModel& m) {
  std::vector<Violation> out;
  if (m.A.rows() == 0 || m.A.rows() != m.A.cols()) {
    out.push_back({"dimension", "A must be square and nonempty, got " + shape(m.A)});
  }
  if (m.B.rows() != m.A.rows() || m.B.cols() == 0) {
    out.push_back({"dimension", "B must have " + std::to_string(m.A.rows()) +
                                    " rows and at least one column, got " + shape(m.B)});
  }
  if (m.C.cols() != m.A.cols() || m.C.rows() == 0) {
    out.push_back({"dimension", "C must have " + std::to_string(m.A.cols()) +
                                    " columns and at least one row, got " + shape(m.C)});
  }
  if (!m.A.allFinite() || !m.B.allFinite() || !m.C.allFinite()) {
    out.push_back({"non_finite", "model contains NaN or infinite entries"});
  }
  for (Eigen::Index k = 0; k < m.C.rows(); ++k) {
    if (m.C.row(k).isZero(0.0)) {
      out.push_back({"zero_output_channel", "zero output channel: row " + std::to_string(k + 1) +
                                                " of C is zero"});
    }
  }
  return out;
}

void require_valid(const SubsystemModel& m) {
  const auto violations = validate_model(m);
  if (violations.empty()) return;
  std::string msg = "invalid subsystem model:";
  for (const auto& v : violations) msg += "\n  - " + v.message;
  throw InputError(msg);
}

PbhResult check_controllable(const SubsystemModel& m, const ToleranceConfig& tol) {
  return pbh_controllable(m.A, m.B, tol);
}

PbhResult check_observable(const SubsystemModel& m, const ToleranceConfig& tol) {
  return pbh_observable(m.A, m.C, tol);
}

FixedModeReport fixed_modes(const SubsystemModel& m, RandomSource& rng, const ToleranceConfig& tol,
                            int samples) {
  require_valid(m);
  if (samples < 1) throw std::invalid_argument("fixed_modes: samples must be >= 1");
  FixedModeReport report;

  const auto ctrl = check_controllable(m, tol);
  const auto obs = check_observable(m, tol);
  report.fixed_modes = ctrl.deficient_eigs;
  for (const auto& lambda : obs.deficient_eigs) {
    const bool dup = std::any_of(report.fixed_modes.begin(), report.fixed_modes.end(),
                                 [&](const Complex& z) { return std::abs(z - lambda) <= tol.eig_match_tol; });
    if (!dup) report.fixed_modes.push_back(lambda);
  }

  const auto spectrum = eigenvalues(m.A);
  std::vector<Complex> distinct;
  for (const auto& c : cluster_eigenvalues(spectrum, tol.eig_match_tol)) distinct.push_back(c.center);
  std::vector<bool> persists(distinct.size(), true);
  for (int k = 0; k < samples; ++k) {
    Mat f(m.B.cols(), m.C.rows());
    for (Eigen::Index i = 0; i < f.rows(); ++i) {
      for (Eigen::Index j = 0; j < f.cols(); ++j) f(i, j) = rng.uniform(-1.0, 1.0);
    }
    const auto moved = eigenvalues(m.A + m.B * f * m.C);
    const auto hit = matched_within(distinct, moved, tol.eig_match_tol);
    for (std::size_t i = 0; i < distinct.size(); ++i) persists[i] = persists[i] && hit[i];
  }
  for (std::size_t i = 0; i < distinct.size(); ++i) {
    if (persists[i]) report.persistent_modes.push_back(distinct[i]);
  }

  const auto a_in_b = matched_within(report.fixed_modes, report.persistent_modes, tol.eig_match_tol);
  report.method_agreement =
      report.fixed_modes.size() == report.persistent_modes.size() &&
      std::all_of(a_in_b.begin(), a_in_b.end(), [](bool b) { return b; });
  return report;
}

}  // namespace diffnet
