#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "diffnet/assembly.hpp"
#include "diffnet/numerics.hpp"
#include "diffnet/subsystem.hpp"
#include "diffnet/topology.hpp"

namespace diffnet {

enum class Verdict { StructurallyControllable, NotStructurallyControllable, Inconclusive };

/// Which criterion decided the verdict.
enum class TheoremUsed {
  TrivialCase,        ///< every subsystem driven
  UndirectedSimo,     ///< undirected topology, single-input subsystems
  SemiSymmetricSimo,  ///< mixed directed/undirected topology
  MatrixWeighted,     ///< multi-input subsystems with matrix weights
  ScalarReduction,    ///< equal per-channel Laplacians, reduced output c_1 + ... + c_r
};

std::string to_string(Verdict v);
std::string to_string(TheoremUsed t);

/// Evidence attached to a condition: the eigenvalues where a rank test fails
/// or the vertices that cannot be reached.
struct Witness {
  std::vector<Complex> eigenvalues;
  std::vector<int> vertices;  ///< 0-based
  std::string note;

  bool empty() const { return eigenvalues.empty() && vertices.empty() && note.empty(); }
};

struct Condition {
  std::string name;
  bool holds = true;
  Witness witness;
};

struct TrialResult {
  std::uint64_t stream_id = 0;
  bool controllable = false;
  int deficient_eigenvalue_count = 0;  ///< distinct eigenvalues failing PBH
  int deficient_multiplicity = 0;      ///< their algebraic multiplicity
  int uncontrollable_dimension = 0;    ///< Nn - dim(controllable subspace)
  std::string error;                   ///< non-empty when the trial failed numerically
};

struct CertificationReport {
  std::uint64_t seed = 0;
  int trials = 0;
  std::vector<TrialResult> per_trial;
  /// True iff at least one trial produced a controllable pair.
  bool certified_controllable = false;
  /// Verdict the certification was compared against.
  Verdict theorem_verdict = Verdict::Inconclusive;
  bool agree_with_verdict = true;

  int controllable_count() const;
};

struct AnalysisReport {
  Verdict verdict = Verdict::Inconclusive;
  TheoremUsed theorem = TheoremUsed::UndirectedSimo;
  std::vector<Condition> conditions;
  /// Populated by the matrix-weighted engine.
  std::vector<Complex> fixed_modes;
  ToleranceConfig tolerances;
  std::vector<std::string> notes;
  std::optional<CertificationReport> certification;

  const Condition* find(const std::string& name) const;
};

// Condition names used in reports.
inline constexpr const char* kCondControllable = "subsystem_controllable";
inline constexpr const char* kCondObservable = "subsystem_observable";
inline constexpr const char* kCondReachable = "globally_input_reachable";
inline constexpr const char* kCondNoFixedModes = "no_fixed_modes";
inline constexpr const char* kCondDriven = "some_subsystem_driven";

/// Decides structural controllability for single-input subsystems with
/// vector-weighted edges; directed edges select the semi-symmetric criterion.
AnalysisReport analyze_simo(const SubsystemModel& m, const NetworkGraph& g, const DrivenSet& d,
                            const ToleranceConfig& tol = {});

/// Matrix-weighted criterion (undirected topologies only). Throws
/// PremiseViolation when g has directed edges. `rng` drives the randomized
/// fixed-mode cross-check.
AnalysisReport analyze_mimo(const SubsystemModel& m, const NetworkGraph& g, const DrivenSet& d,
                            RandomSource& rng, const ToleranceConfig& tol = {});

/// analyze_simo for one-column B, analyze_mimo otherwise.
AnalysisReport analyze(const SubsystemModel& m, const NetworkGraph& g, const DrivenSet& d,
                       RandomSource& rng, const ToleranceConfig& tol = {});

struct CertifyOptions {
  int trials = 5;
  double weight_range = 1.0;
  double input_gain = 1.0;
  std::vector<LocalTerm> local_terms;
};

/// Samples weights, assembles the lumped pair and runs PBH per trial (trial t
/// uses rng.substream(t)). The pair counts as certified controllable when any
/// trial is controllable. `theorem_verdict` is compared against that outcome;
/// without it the theorem engine is run first.
CertificationReport certify_monte_carlo(const SubsystemModel& m, const NetworkGraph& g,
                                        const DrivenSet& d, const RandomSource& rng,
                                        const ToleranceConfig& tol = {},
                                        const CertifyOptions& opts = {},
                                        std::optional<Verdict> theorem_verdict = std::nullopt);

/// The single-output model with C' = c_1 + ... + c_r.
SubsystemModel reduce_scalar_weight(const SubsystemModel& m);

/// Verdict when every channel carries the same Laplacian (L_1 = ... = L_r),
/// decided on the reduced model. A zero reduced output is reported as NOT
/// structurally controllable unless every subsystem is driven.
AnalysisReport analyze_scalar_constrained(const SubsystemModel& m, const NetworkGraph& g,
                                          const DrivenSet& d, const ToleranceConfig& tol = {});

/// Tests (-L, e_leader) for `trials` scalar weight draws; true iff every draw
/// is controllable. Throws PremiseViolation for directed or disconnected
/// graphs.
bool laplacian_leader_controllability(const NetworkGraph& g, int leader, int trials,
                                      RandomSource& rng, const ToleranceConfig& tol = {});

struct AuxConditionResult {
  /// Cycle condition on [1_{r x r} (x) K_I K, 1_{r x 1} (x) K_I Delta].
  bool edge_pattern = false;
  /// Cycle condition on [-(1_{r x r} (x) L), 1_{r x 1} (x) Delta].
  bool vertex_pattern = false;
  bool patterns_agree = false;
  bool reachable = false;
  std::vector<int> witness_cycle;  ///< vertex-pattern state ids
  bool holds() const { return patterns_agree && edge_pattern; }
};

/// Checks the cycle condition of the linear parameterization on both sparsity
/// patterns. Premises: (A, b) controllable, every c_k nonzero, and every
/// undriven vertex has an in-neighbour; PremiseViolation otherwise.
AuxConditionResult aux_condition_check(const SubsystemModel& m, const NetworkGraph& g,
                                       const DrivenSet& d, const ToleranceConfig& tol = {});

struct EigenRank {
  Complex lambda;
  int generic_rank = 0;
  int required = 0;
};

struct RankConditionResult {
  bool holds = true;
  std::vector<EigenRank> per_eigenvalue;
};

/// grank [lambda I - A_sys(w), B_sys] = Nn at each distinct eigenvalue of A,
/// with the edge weights as free parameters.
RankConditionResult rank_condition_check(const SubsystemModel& m, const NetworkGraph& g,
                                         const DrivenSet& d, RandomSource& rng,
                                         const ToleranceConfig& tol = {}, int trials = 3);

}  // namespace diffnet
