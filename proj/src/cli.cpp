#include "diffnet/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <iomanip>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "diffnet/errors.hpp"
#include "diffnet/io.hpp"

#ifndef DIFFNET_VERSION
#define DIFFNET_VERSION "0.0.0"
#endif

namespace diffnet::cli {

namespace {

constexpr std::uint64_t kDefaultSeed = 42;
constexpr int kDefaultTrials = 5;

struct CommonFlags {
  std::string path;
  std::string out;
  std::string format = "json";
  std::uint64_t seed = 0;
  int trials = kDefaultTrials;
  double tol = 0.0;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* trials_opt = nullptr;
  CLI::Option* tol_opt = nullptr;
};

struct ExampleFlags {
  std::string name;
  int n = 0;
  double mass = 1.0;
  std::vector<double> k;
  std::vector<double> mu;
  std::vector<int> driven{1};
  bool ground_first_mass = false;
  std::string out;
};

struct Loaded {
  Problem problem;
  std::string digest;
};

Loaded load(const std::string& path) {
  const auto text = read_file(path);
  return Loaded{parse_problem(text), sha256_hex(text)};
}

std::uint64_t resolve_seed(const CommonFlags& f, const Problem& p) {
  if (f.seed_opt && f.seed_opt->count()) return f.seed;
  if (p.options.seed) return *p.options.seed;
  if (const char* env = std::getenv("DIFFNET_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used, 10);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw InputError(std::string("DIFFNET_SEED must be a nonnegative integer, got '") + env + "'");
  }
  return kDefaultSeed;
}

ToleranceConfig resolve_tol(const CommonFlags& f, const Problem& p) {
  ToleranceConfig tol;
  if (f.tol_opt && f.tol_opt->count()) {
    tol.rank_rel_tol = f.tol;
  } else if (p.options.rank_rel_tol) {
    tol.rank_rel_tol = *p.options.rank_rel_tol;
  }
  try {
    tol.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  return tol;
}

int resolve_trials(const CommonFlags& f, const Problem& p) {
  if (f.trials_opt && f.trials_opt->count()) return f.trials;
  return p.options.trials.value_or(kDefaultTrials);
}

Json envelope(const char* schema, const char* command, const std::string& digest) {
  Json j;
  j["$schema"] = schema;
  j["tool"] = {{"name", "diffnet"}, {"version", DIFFNET_VERSION}};
  j["command"] = command;
  j["input_digest"] = digest.empty() ? Json(nullptr) : Json("sha256:" + digest);
  return j;
}

void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << text;
  } else {
    write_file_atomically(out_path, text);
  }
}

std::string format_complex(const Complex& z) {
  std::ostringstream ss;
  ss << std::setprecision(6) << z.real();
  if (z.imag() != 0.0) ss << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag()) << "i";
  return ss.str();
}

template <typename T, typename Fn>
std::string join(const std::vector<T>& xs, Fn&& fmt) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ", ";
    s += fmt(xs[i]);
  }
  return s;
}

std::string render_certification(const CertificationReport& c) {
  std::ostringstream ss;
  ss << "certification: " << c.controllable_count() << "/" << c.trials
     << " trials controllable (seed " << c.seed << "), "
     << (c.agree_with_verdict ? "agrees with" : "DISAGREES with") << " verdict "
     << to_string(c.theorem_verdict) << "\n";
  for (std::size_t t = 0; t < c.per_trial.size(); ++t) {
    const auto& r = c.per_trial[t];
    ss << "  trial " << t + 1 << ": " << (r.controllable ? "controllable" : "uncontrollable");
    if (!r.controllable) {
      ss << " (deficient eigenvalues " << r.deficient_eigenvalue_count << ", uncontrollable dimension "
         << r.uncontrollable_dimension << ")";
    }
    if (!r.error.empty()) ss << " error: " << r.error;
    ss << "\n";
  }
  return ss.str();
}

std::string render_report(const AnalysisReport& r) {
  std::ostringstream ss;
  ss << "verdict: " << to_string(r.verdict) << "\n";
  ss << "criterion: " << to_string(r.theorem) << "\n";
  for (const auto& c : r.conditions) {
    ss << "  [" << (c.holds ? "x" : " ") << "] " << c.name;
    if (!c.witness.eigenvalues.empty()) ss << "  eigenvalues: " << join(c.witness.eigenvalues, format_complex);
    if (!c.witness.vertices.empty()) {
      ss << "  vertices: " << join(c.witness.vertices, [](int v) { return std::to_string(v + 1); });
    }
    if (!c.witness.note.empty()) ss << "  (" << c.witness.note << ")";
    ss << "\n";
  }
  if (!r.fixed_modes.empty()) ss << "fixed modes: " << join(r.fixed_modes, format_complex) << "\n";
  for (const auto& n : r.notes) ss << "note: " << n << "\n";
  if (r.certification) ss << render_certification(*r.certification);
  return ss.str();
}

std::string render_matrix(const char* name, const Mat& m) {
  std::ostringstream ss;
  const Eigen::IOFormat fmt(6, 0, "  ", "\n", "  ", "");
  ss << name << " (" << m.rows() << "x" << m.cols() << "):\n";
  if (m.size()) ss << m.format(fmt) << "\n";
  return ss.str();
}

std::string render_graph(const Json& g) {
  std::ostringstream ss;
  ss << "vertices: " << g["N"].get<int>() << "\n";
  ss << "globally input-reachable: " << (g["globally_input_reachable"].get<bool>() ? "yes" : "no") << "\n";
  auto ids = [](const Json& arr) {
    std::string s;
    for (const auto& v : arr) s += (s.empty() ? "" : ", ") + std::to_string(v.get<int>());
    return s.empty() ? std::string("none") : s;
  };
  ss << "driven: " << ids(g["driven"]) << "\n";
  ss << "reachable: " << ids(g["reachable"]) << "\n";
  if (!g["unreachable"].empty()) ss << "unreachable: " << ids(g["unreachable"]) << "\n";
  if (!g["forest"].is_null()) {
    ss << "spanning forest:\n";
    for (const auto& e : g["forest"]) {
      if (e["parent"].is_null()) {
        ss << "  " << e["vertex"].get<int>() << " (root)\n";
      } else {
        ss << "  " << e["vertex"].get<int>() << " <- " << e["parent"].get<int>() << "\n";
      }
    }
  }
  ss << "edges (orientation " << g["orientation_policy"].get<std::string>() << "):\n";
  for (const auto& e : g["edges"]) {
    ss << "  " << e["id"].get<int>() << ": " << e["u"].get<int>()
       << (e["kind"] == "directed" ? " -> " : " -- ") << e["v"].get<int>() << "  " << e["kind"].get<std::string>()
       << ", oriented " << e["tail"].get<int>() << " -> " << e["head"].get<int>() << ", K case "
       << e["k_case"].get<std::string>() << "\n";
  }
  return ss.str();
}

int verdict_exit(Verdict v) {
  switch (v) {
    case Verdict::StructurallyControllable:
      return kControllable;
    case Verdict::NotStructurallyControllable:
      return kNotControllable;
    case Verdict::Inconclusive:
      return kInconclusive;
  }
  return kInternalError;
}

CertifyOptions certify_options(const Problem& p, int trials) {
  CertifyOptions opts;
  opts.trials = trials;
  opts.input_gain = p.options.input_gain.value_or(1.0);
  opts.local_terms = p.local_terms;
  return opts;
}

AnalysisReport run_analysis(const Problem& p, const RandomSource& rng, const ToleranceConfig& tol) {
  auto engine_rng = rng.substream(~std::uint64_t{0});
  return analyze(p.model, p.graph, p.driven, engine_rng, tol);
}

int cmd_analyze(const CommonFlags& f, std::ostream& out) {
  const auto [problem, digest] = load(f.path);
  const auto tol = resolve_tol(f, problem);
  const auto seed = resolve_seed(f, problem);
  const RandomSource rng(seed);
  auto report = run_analysis(problem, rng, tol);
  if (!problem.local_terms.empty()) {
    const int trials = resolve_trials(f, problem);
    if (trials < 1) throw InputError("--trials must be at least 1");
    report.certification = certify_monte_carlo(problem.model, problem.graph, problem.driven, rng, tol,
                                               certify_options(problem, trials), report.verdict);
    report.notes.push_back(
        "the verdict covers identical subsystems; the certification applies the per-vertex local "
        "terms from the problem file");
  }
  if (problem.options.input_gain) {
    report.notes.push_back("external input columns scaled by " +
                           std::to_string(*problem.options.input_gain));
  }

  if (f.format == "text") {
    emit(render_report(report), f.out, out);
  } else {
    auto j = envelope(kReportSchema, "analyze", digest);
    j["seed"] = seed;
    j["report"] = to_json(report);
    emit(j.dump(2) + "\n", f.out, out);
  }
  return verdict_exit(report.verdict);
}

int cmd_certify(const CommonFlags& f, std::ostream& out) {
  const auto [problem, digest] = load(f.path);
  const auto tol = resolve_tol(f, problem);
  const auto seed = resolve_seed(f, problem);
  const int trials = resolve_trials(f, problem);
  if (trials < 1) throw InputError("--trials must be at least 1");
  const RandomSource rng(seed);
  auto report = run_analysis(problem, rng, tol);
  report.certification = certify_monte_carlo(problem.model, problem.graph, problem.driven, rng, tol,
                                             certify_options(problem, trials), report.verdict);
  if (f.format == "text") {
    emit(render_report(report), f.out, out);
  } else {
    auto j = envelope(kReportSchema, "certify", digest);
    j["seed"] = seed;
    j["report"] = to_json(report);
    emit(j.dump(2) + "\n", f.out, out);
  }
  return report.certification->agree_with_verdict ? kControllable : kCertificationDisagrees;
}

int cmd_lump(const CommonFlags& f, std::ostream& out) {
  const auto [problem, digest] = load(f.path);
  const auto seed = resolve_seed(f, problem);
  const int p = static_cast<int>(problem.model.input_dim());
  const int r = static_cast<int>(problem.model.output_dim());
  const bool sampled = !problem.weights.has_value();
  // Stream 0 reproduces the first certification trial.
  auto trial_rng = RandomSource(seed).substream(0);
  const auto weights = sampled ? sample_weights(problem.graph, p, r, trial_rng) : *problem.weights;
  auto sys = assemble_lumped(problem.model, problem.graph, weights, problem.driven);
  const double gain = problem.options.input_gain.value_or(1.0);
  sys.B_sys *= gain;
  apply_local_terms(sys, problem.local_terms);

  if (f.format == "text") {
    std::ostringstream ss;
    ss << "weights: " << (sampled ? "sampled with seed " + std::to_string(seed) : std::string("provided"))
       << "\n";
    for (int id = 0; id < problem.graph.num_edges(); ++id) {
      const auto& e = problem.graph.edge(id);
      ss << "  " << e.u + 1 << (e.kind == EdgeKind::Directed ? " -> " : " -- ") << e.v + 1 << ": "
         << weights[id].format(Eigen::IOFormat(6, 0, " ", "; ", "", "", "[", "]")) << "\n";
    }
    ss << render_matrix("A_sys", sys.A_sys) << render_matrix("B_sys", sys.B_sys);
    emit(ss.str(), f.out, out);
  } else {
    auto j = envelope(kLumpedSchema, "lump", digest);
    j["seed"] = sampled ? Json(seed) : Json(nullptr);
    j["weights_source"] = sampled ? "sampled" : "provided";
    j["input_gain"] = gain;
    j["weights"] = weights_to_json(problem.graph, weights);
    j["lumped"] = lumped_to_json(sys);
    emit(j.dump(2) + "\n", f.out, out);
  }
  return kControllable;
}

int cmd_graph(const CommonFlags& f, std::ostream& out) {
  const auto [problem, digest] = load(f.path);
  auto report = graph_report(problem.graph, problem.driven);
  if (f.format == "text") {
    emit(render_graph(report), f.out, out);
  } else {
    auto j = envelope(kGraphSchema, "graph", digest);
    for (auto& [key, value] : report.items()) {
      if (key != "$schema") j[key] = value;
    }
    emit(j.dump(2) + "\n", f.out, out);
  }
  return kControllable;
}

int cmd_example(const ExampleFlags& f, std::ostream& out) {
  if (f.name != "mass-spring") throw InputError("unknown example '" + f.name + "'");
  MassSpringParams params;
  params.num_masses = f.n;
  params.mass = f.mass;
  const auto n = static_cast<std::size_t>(std::max(f.n, 0));
  params.k = f.k.empty() ? std::vector<double>(n, 1.0) : f.k;
  params.mu = f.mu.empty() ? std::vector<double>(n, 1.0) : f.mu;
  const auto chain = mass_spring_chain(params);

  std::vector<int> driven;
  for (int v : f.driven) {
    if (v < 1 || v > f.n) throw InputError("--driven vertex " + std::to_string(v) + " is outside 1.." + std::to_string(f.n));
    driven.push_back(v - 1);
  }
  Problem problem{chain.model, chain.graph, DrivenSet(f.n, driven), chain.weights, {}, {}};
  if (chain.input_gain != 1.0) problem.options.input_gain = chain.input_gain;
  if (f.ground_first_mass) problem.local_terms.push_back(chain.grounding);

  auto j = problem_to_json(problem);
  j["description"] = "mass-spring-damper chain with " + std::to_string(f.n) + " masses";
  emit(j.dump(2) + "\n", f.out, out);
  return kControllable;
}

void add_common(CLI::App* sub, CommonFlags& f, bool randomized, bool with_tol) {
  sub->add_option("problem", f.path, "Problem file (JSON)")->required();
  sub->add_option("--out", f.out, "Write output to this path instead of stdout");
  sub->add_option("--format", f.format, "Output format")->check(CLI::IsMember({"json", "text"}));
  if (randomized) {
    f.seed_opt = sub->add_option("--seed", f.seed, "Random seed (default: file, then DIFFNET_SEED, then 42)");
  }
  if (with_tol) {
    f.tol_opt = sub->add_option("--tol", f.tol, "Relative singular-value cutoff for rank decisions");
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Structural controllability of diffusively coupled networks", "diffnet"};
  app.set_version_flag("--version", DIFFNET_VERSION);
  app.require_subcommand(1);

  CommonFlags analyze_flags;
  auto* analyze = app.add_subcommand("analyze", "Decide structural controllability");
  add_common(analyze, analyze_flags, true, true);
  analyze_flags.trials_opt =
      analyze->add_option("--trials", analyze_flags.trials, "Trials for the local-term certification");

  CommonFlags certify_flags;
  auto* certify = app.add_subcommand("certify", "Monte Carlo certification of the verdict");
  add_common(certify, certify_flags, true, true);
  certify_flags.trials_opt = certify->add_option("--trials", certify_flags.trials, "Number of weight draws");

  CommonFlags lump_flags;
  auto* lump = app.add_subcommand("lump", "Assemble the lumped pair (A_sys, B_sys)");
  add_common(lump, lump_flags, true, false);

  CommonFlags graph_flags;
  auto* graph = app.add_subcommand("graph", "Reachability, spanning forest and incidence record");
  add_common(graph, graph_flags, false, false);

  ExampleFlags example_flags;
  auto* example = app.add_subcommand("example", "Write a ready-to-analyze problem file");
  example->add_option("name", example_flags.name, "Example name (mass-spring)")->required();
  example->add_option("--N", example_flags.n, "Number of masses")->required();
  example->add_option("--mass", example_flags.mass, "Common mass");
  example->add_option("--k", example_flags.k, "Spring constants k_1..k_N (k_1 ties mass 1 to the wall)")
      ->delimiter(',');
  example->add_option("--mu", example_flags.mu, "Damping constants mu_1..mu_N")->delimiter(',');
  example->add_option("--driven", example_flags.driven, "Driven masses, 1-based")->delimiter(',');
  example->add_flag("--ground-first-mass", example_flags.ground_first_mass,
                    "Include the wall coupling of mass 1 as a local term");
  example->add_option("--out", example_flags.out, "Write output to this path instead of stdout");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kInputError;
  }

  try {
    if (analyze->parsed()) return cmd_analyze(analyze_flags, out);
    if (certify->parsed()) return cmd_certify(certify_flags, out);
    if (lump->parsed()) return cmd_lump(lump_flags, out);
    if (graph->parsed()) return cmd_graph(graph_flags, out);
    if (example->parsed()) return cmd_example(example_flags, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const PremiseViolation& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const NumericError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kInternalError;
  } catch (const std::runtime_error& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  }
  return kInputError;
}

}  // namespace diffnet::cli
