#pragma once

#include <string>
#include <vector>

#include "diffnet/numerics.hpp"

namespace diffnet {

/// Dynamics shared by every node: x' = A x + B v, coupling read through C.
/// B has a single column in the single-input case.
struct SubsystemModel {
  Mat A;
  Mat B;
  Mat C;

  Eigen::Index state_dim() const { return A.rows(); }
  Eigen::Index input_dim() const { return B.cols(); }
  Eigen::Index output_dim() const { return C.rows(); }
};

struct Violation {
  std::string code;  ///< "dimension", "zero_output_channel", "non_finite"
  std::string message;
};

std::vector<Violation> validate_model(const SubsystemModel& m);
/// Throws InputError carrying every violation when the model is invalid.
void require_valid(const SubsystemModel& m);

PbhResult check_controllable(const SubsystemModel& m, const ToleranceConfig& tol);
PbhResult check_observable(const SubsystemModel& m, const ToleranceConfig& tol);

struct FixedModeReport {
  /// Eigenvalues of A that are uncontrollable or unobservable (authoritative).
  std::vector<Complex> fixed_modes;
  /// Eigenvalues of A found in sigma(A + B F_k C) for every random F_k.
  std::vector<Complex> persistent_modes;
  bool method_agreement = true;
};

/// Fixed modes under unstructured static output feedback, computed both from
/// the PBH characterization and by persistence under `samples` random
/// feedback gains with entries uniform on [-1, 1].
FixedModeReport fixed_modes(const SubsystemModel& m, RandomSource& rng, const ToleranceConfig& tol,
                            int samples = 4);

}  // namespace diffnet
