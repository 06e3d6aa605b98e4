#include "diffnet/verdict.hpp"

#include <algorithm>

#include "diffnet/errors.hpp"

namespace diffnet {

namespace {

std::vector<Complex> distinct_eigenvalues(const Mat& a, double radius) {
  std::vector<Complex> out;
  for (const auto& c : cluster_eigenvalues(eigenvalues(a), radius)) out.push_back(c.center);
  return out;
}

Condition pbh_condition(const char* name, const PbhResult& r) {
  Condition c{name, r.holds, {}};
  c.witness.eigenvalues = r.deficient_eigs;
  return c;
}

Condition reachability_condition(const NetworkGraph& g, const DrivenSet& d) {
  const auto forest = spanning_forest(g, d);
  Condition c{kCondReachable, forest.ok(), {}};
  c.witness.vertices = forest.unreachable;
  if (d.empty()) c.witness.note = "no subsystem receives an external input";
  return c;
}

bool all_hold(const std::vector<Condition>& conds) {
  return std::all_of(conds.begin(), conds.end(), [](const Condition& c) { return c.holds; });
}

AnalysisReport trivial_case(const SubsystemModel& m, const ToleranceConfig& tol) {
  AnalysisReport report;
  report.tolerances = tol;
  report.theorem = TheoremUsed::TrivialCase;
  report.conditions.push_back(pbh_condition(kCondControllable, check_controllable(m, tol)));
  report.verdict = all_hold(report.conditions) ? Verdict::StructurallyControllable
                                               : Verdict::NotStructurallyControllable;
  report.notes.push_back("every subsystem is driven: the verdict reduces to controllability of the subsystem pair");
  return report;
}

void require_sizes(const NetworkGraph& g, const DrivenSet& d) {
  if (g.num_vertices() != d.num_vertices()) {
    throw DimensionError("driven set size does not match the graph");
  }
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::StructurallyControllable:
      return "STRUCTURALLY_CONTROLLABLE";
    case Verdict::NotStructurallyControllable:
      return "NOT_STRUCTURALLY_CONTROLLABLE";
    case Verdict::Inconclusive:
      return "INCONCLUSIVE";
  }
  return "INCONCLUSIVE";
}

std::string to_string(TheoremUsed t) {
  switch (t) {
    case TheoremUsed::TrivialCase:
      return "trivial-case";
    case TheoremUsed::UndirectedSimo:
      return "undirected-simo";
    case TheoremUsed::SemiSymmetricSimo:
      return "semi-symmetric-simo";
    case TheoremUsed::MatrixWeighted:
      return "matrix-weighted";
    case TheoremUsed::ScalarReduction:
      return "scalar-reduction";
  }
  return "undirected-simo";
}

int CertificationReport::controllable_count() const {
  return static_cast<int>(std::count_if(per_trial.begin(), per_trial.end(),
                                        [](const TrialResult& t) { return t.controllable; }));
}

const Condition* AnalysisReport::find(const std::string& name) const {
  for (const auto& c : conditions) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

AnalysisReport analyze_simo(const SubsystemModel& m, const NetworkGraph& g, const DrivenSet& d,
                            const ToleranceConfig& tol) {
  require_valid(m);
  require_sizes(g, d);
  if (m.input_dim() != 1) {
    throw DimensionError("analyze_simo: B must have exactly one column, got " +
                         std::to_string(m.input_dim()));
  }
  if (d.size() == g.num_vertices()) return trivial_case(m, tol);

  AnalysisReport report;
  report.tolerances = tol;
  report.theorem = g.has_directed_edges() ? TheoremUsed::SemiSymmetricSimo : TheoremUsed::UndirectedSimo;
  report.conditions.push_back(pbh_condition(kCondControllable, check_controllable(m, tol)));
  report.conditions.push_back(pbh_condition(kCondObservable, check_observable(m, tol)));
  report.conditions.push_back(reachability_condition(g, d));
  report.verdict = all_hold(report.conditions) ? Verdict::StructurallyControllable
                                               : Verdict::NotStructurallyControllable;
  return report;
}

AnalysisReport analyze_mimo(const SubsystemModel& m, const NetworkGraph& g, const DrivenSet& d,
                            RandomSource& rng, const ToleranceConfig& tol) {
  require_valid(m);
  require_sizes(g, d);
  if (g.has_directed_edges()) {
    throw PremiseViolation(
        "the matrix-weighted criterion covers undirected topologies only; use single-input "
        "subsystems (one column in B) for topologies with directed edges");
  }
  if (m.input_dim() == 1) {
    auto report = analyze_simo(m, g, d, tol);
    for (const auto& c : report.conditions) {
      for (const auto& z : c.witness.eigenvalues) report.fixed_modes.push_back(z);
    }
    report.notes.push_back("single-input subsystem: decided by the vector-weighted criterion");
    return report;
  }
  if (d.size() == g.num_vertices()) return trivial_case(m, tol);

  AnalysisReport report;
  report.tolerances = tol;
  report.theorem = TheoremUsed::MatrixWeighted;
  const auto fm = fixed_modes(m, rng, tol);
  report.fixed_modes = fm.fixed_modes;
  Condition no_fixed{kCondNoFixedModes, fm.fixed_modes.empty(), {}};
  no_fixed.witness.eigenvalues = fm.fixed_modes;
  if (!fm.method_agreement) {
    no_fixed.witness.note = "randomized feedback check disagrees with the PBH characterization";
    report.notes.push_back("fixed-mode methods disagree; the PBH characterization is used");
  }
  const auto ctrl = check_controllable(m, tol);
  report.conditions.push_back(no_fixed);
  report.conditions.push_back(pbh_condition(kCondControllable, ctrl));
  report.conditions.push_back(reachability_condition(g, d));

  const bool reachable = report.conditions.back().holds;
  if (!reachable || !ctrl.holds) {
    report.verdict = Verdict::NotStructurallyControllable;
  } else if (!fm.fixed_modes.empty()) {
    report.verdict = Verdict::Inconclusive;
    report.notes.push_back(
        "fixed modes present with a reachable topology: no necessary condition is available, "
        "see the Monte Carlo certification for evidence");
  } else {
    report.verdict = Verdict::StructurallyControllable;
  }
  return report;
}

AnalysisReport analyze(const SubsystemModel& m, const NetworkGraph& g, const DrivenSet& d,
                       RandomSource& rng, const ToleranceConfig& tol) {
  if (m.input_dim() == 1) return analyze_simo(m, g, d, tol);
  return analyze_mimo(m, g, d, rng, tol);
}

CertificationReport certify_monte_carlo(const SubsystemModel& m, const NetworkGraph& g,
                                        const DrivenSet& d, const RandomSource& rng,
                                        const ToleranceConfig& tol, const CertifyOptions& opts,
                                        std::optional<Verdict> theorem_verdict) {
  if (opts.trials < 1) throw std::invalid_argument("certification needs at least one trial");
  if (!theorem_verdict) {
    auto engine_rng = rng.substream(~std::uint64_t{0});
    theorem_verdict = analyze(m, g, d, engine_rng, tol).verdict;
  }
  CertificationReport report;
  report.seed = rng.seed();
  report.trials = opts.trials;
  report.theorem_verdict = *theorem_verdict;
  const auto p = static_cast<int>(m.input_dim());
  const auto r = static_cast<int>(m.output_dim());

  for (int t = 0; t < opts.trials; ++t) {
    auto trial_rng = rng.substream(static_cast<std::uint64_t>(t));
    TrialResult trial;
    trial.stream_id = trial_rng.stream_id();
    try {
      const auto w = sample_weights(g, p, r, trial_rng, opts.weight_range);
      auto sys = assemble_lumped(m, g, w, d);
      sys.B_sys *= opts.input_gain;
      apply_local_terms(sys, opts.local_terms);
      const auto pbh = pbh_controllable(sys.A_sys, sys.B_sys, tol);
      trial.controllable = pbh.holds;
      trial.deficient_eigenvalue_count = static_cast<int>(pbh.deficient_eigs.size());
      trial.deficient_multiplicity = pbh.deficient_multiplicity;
      trial.uncontrollable_dimension =
          static_cast<int>(sys.A_sys.rows()) - controllable_subspace_dimension(sys.A_sys, sys.B_sys, tol);
    } catch (const NumericError& e) {
      trial.controllable = false;
      trial.error = e.what();
    }
    report.per_trial.push_back(std::move(trial));
  }

  report.certified_controllable = report.controllable_count() > 0;
  switch (report.theorem_verdict) {
    case Verdict::StructurallyControllable:
      report.agree_with_verdict = report.certified_controllable;
      break;
    case Verdict::NotStructurallyControllable:
      report.agree_with_verdict = !report.certified_controllable;
      break;
    case Verdict::Inconclusive:
      report.agree_with_verdict = true;
      break;
  }
  return report;
}

SubsystemModel reduce_scalar_weight(const SubsystemModel& m) {
  SubsystemModel out = m;
  out.C = m.C.colwise().sum();
  return out;
}

AnalysisReport analyze_scalar_constrained(const SubsystemModel& m, const NetworkGraph& g,
                                          const DrivenSet& d, const ToleranceConfig& tol) {
  const auto reduced = reduce_scalar_weight(m);
  if (d.size() == g.num_vertices()) {
    auto report = trivial_case(reduced, tol);
    report.notes.push_back("scalar-weighted reduction with output c_1 + ... + c_r");
    return report;
  }
  if (!reduced.C.isZero(0.0)) {
    auto report = analyze_simo(reduced, g, d, tol);
    report.theorem = TheoremUsed::ScalarReduction;
    report.notes.push_back("scalar-weighted reduction with output c_1 + ... + c_r");
    return report;
  }
  require_sizes(g, d);
  AnalysisReport report;
  report.tolerances = tol;
  report.theorem = TheoremUsed::ScalarReduction;
  report.conditions.push_back(pbh_condition(kCondControllable, check_controllable(reduced, tol)));
  Condition obs{kCondObservable, false, {}};
  obs.witness.eigenvalues = distinct_eigenvalues(m.A, tol.eig_match_tol);
  obs.witness.note = "c_1 + ... + c_r vanishes: no coupling survives when all channels share one Laplacian";
  report.conditions.push_back(obs);
  report.conditions.push_back(reachability_condition(g, d));
  report.verdict = Verdict::NotStructurallyControllable;
  return report;
}

bool laplacian_leader_controllability(const NetworkGraph& g, int leader, int trials,
                                      RandomSource& rng, const ToleranceConfig& tol) {
  if (g.has_directed_edges()) throw PremiseViolation("leader test needs an undirected graph");
  if (leader < 0 || leader >= g.num_vertices()) throw InputError("leader vertex out of range");
  if (trials < 1) throw std::invalid_argument("leader test needs at least one trial");
  if (!is_globally_input_reachable(g, DrivenSet(g.num_vertices(), {leader}))) {
    throw PremiseViolation("leader test needs a connected graph");
  }
  for (int t = 0; t < trials; ++t) {
    const auto w = sample_weights(g, 1, 1, rng);
    const Mat L = scalar_laplacians(g, w).front();
    if (!pbh_controllable(-L, unit_vector(g.num_vertices(), leader), tol).holds) return false;
  }
  return true;
}

AuxConditionResult aux_condition_check(const SubsystemModel& m, const NetworkGraph& g,
                                       const DrivenSet& d, const ToleranceConfig& tol) {
  require_sizes(g, d);
  if (m.input_dim() != 1) throw PremiseViolation("aux_condition_check: single-input subsystems only");
  for (const auto& v : validate_model(m)) throw PremiseViolation(v.message);
  if (!check_controllable(m, tol).holds) throw PremiseViolation("(A, b) is not controllable");
  const auto preds = g.predecessors();
  for (int v = 0; v < g.num_vertices(); ++v) {
    if (!d.contains(v) && preds[static_cast<std::size_t>(v)].empty()) {
      throw PremiseViolation("undriven vertex " + std::to_string(v + 1) + " has no in-neighbour");
    }
  }

  const auto r = m.output_dim();
  const int N = g.num_vertices();
  const Mat delta = d.delta();

  AuxConditionResult out;
  {
    const auto inc = incidence_matrices(g);
    const Mat h = kron(ones(r, r), Mat(inc.K_I * inc.K));
    const Mat p = kron(ones(r, 1), Mat(inc.K_I * delta));
    out.edge_pattern = all_cycles_input_reachable(aux_digraph(pattern_of(h, 0.5), pattern_of(p, 0.5))).holds;
  }
  {
    Mat lap = Mat::Zero(N, N);
    for (int v = 0; v < N; ++v) {
      for (int u : preds[static_cast<std::size_t>(v)]) {
        lap(v, u) = 1.0;
        lap(v, v) = 1.0;
      }
    }
    const Mat h = kron(ones(r, r), lap);
    const Mat p = kron(ones(r, 1), delta);
    const auto check = all_cycles_input_reachable(aux_digraph(pattern_of(h, 0.5), pattern_of(p, 0.5)));
    out.vertex_pattern = check.holds;
    out.witness_cycle = check.witness_cycle;
  }
  out.patterns_agree = out.edge_pattern == out.vertex_pattern;
  out.reachable = is_globally_input_reachable(g, d);
  return out;
}

RankConditionResult rank_condition_check(const SubsystemModel& m, const NetworkGraph& g,
                                         const DrivenSet& d, RandomSource& rng,
                                         const ToleranceConfig& tol, int trials) {
  require_sizes(g, d);
  const int p = static_cast<int>(m.input_dim());
  const int r = static_cast<int>(m.output_dim());
  const int E = g.num_edges();
  const auto nn = static_cast<int>(g.num_vertices() * m.state_dim());

  RankConditionResult out;
  for (const auto& lambda : distinct_eigenvalues(m.A, tol.eig_match_tol)) {
    auto matfn = [&](std::span<const double> s) {
      std::vector<Mat> per_edge;
      per_edge.reserve(static_cast<std::size_t>(E));
      for (int e = 0; e < E; ++e) {
        Mat W(p, r);
        for (int i = 0; i < p; ++i) {
          for (int j = 0; j < r; ++j) W(i, j) = s[static_cast<std::size_t>((e * p + i) * r + j)];
        }
        per_edge.push_back(std::move(W));
      }
      const auto sys = assemble_lumped(m, g, EdgeWeights(p, r, std::move(per_edge)), d);
      CMat pencil(nn, nn + sys.B_sys.cols());
      pencil.leftCols(nn) = lambda * CMat::Identity(nn, nn) - sys.A_sys.cast<Complex>();
      pencil.rightCols(sys.B_sys.cols()) = sys.B_sys.cast<Complex>();
      return pencil;
    };
    const int rank = generic_rank(matfn, E * p * r, trials, rng, tol);
    out.per_eigenvalue.push_back({lambda, rank, nn});
    if (rank < nn) out.holds = false;
  }
  return out;
}

}  // namespace diffnet
