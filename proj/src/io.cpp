#include "diffnet/io.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <system_error>

#include <openssl/evp.h>
#include <unistd.h>

#include "diffnet/errors.hpp"

namespace diffnet {

namespace {

std::string location_of(std::string_view text, std::size_t byte) {
  // nlohmann reports the 1-based offset of the offending character.
  const std::size_t end = std::min(byte > 0 ? byte - 1 : 0, text.size());
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

const Json& member(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw InputError(where + " must be an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw InputError("missing field '" + where + "." + key + "'");
  return *it;
}

int as_int(const Json& j, const std::string& what) {
  if (!j.is_number_integer()) throw InputError(what + " must be an integer");
  const auto v = j.get<std::int64_t>();
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw InputError(what + " is out of range");
  }
  return static_cast<int>(v);
}

double as_real(const Json& j, const std::string& what) {
  if (!j.is_number()) throw InputError(what + " must be a number");
  return j.get<double>();
}

// 1-based id from a file, checked against N and returned 0-based.
int vertex_id(const Json& j, int n, const std::string& what) {
  const int v = as_int(j, what);
  if (v < 1 || v > n) {
    throw InputError(what + " = " + std::to_string(v) + " is outside 1.." + std::to_string(n));
  }
  return v - 1;
}

EdgeKind kind_from_string(const std::string& s, const std::string& what) {
  if (s == "undirected") return EdgeKind::Undirected;
  if (s == "directed") return EdgeKind::Directed;
  throw InputError(what + " must be \"undirected\" or \"directed\", got \"" + s + "\"");
}

Json complex_to_json(const Complex& z) { return Json::array({z.real(), z.imag()}); }

Complex complex_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw InputError("complex value must be [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

Json complex_list(const std::vector<Complex>& zs) {
  Json out = Json::array();
  for (const auto& z : zs) out.push_back(complex_to_json(z));
  return out;
}

std::vector<Complex> complex_list_from_json(const Json& j) {
  std::vector<Complex> out;
  for (const auto& z : j) out.push_back(complex_from_json(z));
  return out;
}

Json one_based(const std::vector<int>& vs) {
  Json out = Json::array();
  for (int v : vs) out.push_back(v + 1);
  return out;
}

SubsystemModel parse_model(const Json& j) {
  SubsystemModel m;
  m.A = matrix_from_json(member(j, "A", "subsystem"), "subsystem.A");
  m.B = matrix_from_json(member(j, "B", "subsystem"), "subsystem.B");
  m.C = matrix_from_json(member(j, "C", "subsystem"), "subsystem.C");
  return m;
}

NetworkGraph parse_graph(const Json& j) {
  const int n = as_int(member(j, "N", "graph"), "graph.N");
  if (n < 1) throw InputError("graph.N must be at least 1");
  std::vector<Edge> edges;
  const auto it = j.find("edges");
  if (it != j.end()) {
    if (!it->is_array()) throw InputError("graph.edges must be an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto& e = (*it)[i];
      const std::string where = "graph.edges[" + std::to_string(i) + "]";
      Edge edge;
      edge.u = vertex_id(member(e, "u", where), n, where + ".u");
      edge.v = vertex_id(member(e, "v", where), n, where + ".v");
      const auto k = e.find("kind");
      if (k != e.end()) {
        if (!k->is_string()) throw InputError(where + ".kind must be a string");
        edge.kind = kind_from_string(k->get<std::string>(), where + ".kind");
      }
      edges.push_back(edge);
    }
  }
  return NetworkGraph(n, std::move(edges));
}

Mat weight_from_json(const Json& j, const std::string& what) {
  // A flat array is accepted as a single row.
  if (j.is_array() && !j.empty() && j[0].is_number()) {
    return matrix_from_json(Json::array({j}), what);
  }
  return matrix_from_json(j, what);
}

}  // namespace

Json matrix_to_json(const Mat& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat matrix_from_json(const Json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw InputError(what + " must be a nonempty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array() || j[0].empty()) throw InputError(what + " rows must be nonempty arrays");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw InputError(what + " is ragged: row " + std::to_string(i + 1) + " does not have " +
                       std::to_string(cols) + " entries");
    }
    for (Eigen::Index k = 0; k < cols; ++k) {
      m(i, k) = as_real(row[static_cast<std::size_t>(k)],
                        what + "[" + std::to_string(i + 1) + "][" + std::to_string(k + 1) + "]");
    }
  }
  return m;
}

Problem parse_problem(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw InputError("malformed JSON at " + location_of(text, e.byte));
  }
  if (!doc.is_object()) throw InputError("problem file must be a JSON object");

  static const std::set<std::string> known{"$schema", "description", "subsystem", "graph",
                                           "driven",  "weights",     "options",   "local_terms"};
  for (const auto& [key, _] : doc.items()) {
    if (!known.count(key)) throw InputError("unknown top-level field '" + key + "'");
  }

  try {
    auto model = parse_model(member(doc, "subsystem", "problem"));
    const auto violations = validate_model(model);
    if (!violations.empty()) {
      std::string msg = "invalid subsystem:";
      for (const auto& v : violations) msg += "\n  - [" + v.code + "] " + v.message;
      throw InputError(msg);
    }
    auto graph = parse_graph(member(doc, "graph", "problem"));
    const int n = graph.num_vertices();

    std::vector<int> driven;
    const auto& dj = member(doc, "driven", "problem");
    if (!dj.is_array()) throw InputError("driven must be an array of vertex ids");
    for (std::size_t i = 0; i < dj.size(); ++i) {
      driven.push_back(vertex_id(dj[i], n, "driven[" + std::to_string(i) + "]"));
    }
    DrivenSet d(n, driven);

    std::optional<EdgeWeights> weights;
    if (const auto it = doc.find("weights"); it != doc.end()) {
      const auto& list = member(*it, "edges", "weights");
      if (!list.is_array()) throw InputError("weights.edges must be an array");
      std::vector<EdgeWeights::Entry> entries;
      for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string where = "weights.edges[" + std::to_string(i) + "]";
        EdgeWeights::Entry e;
        e.u = vertex_id(member(list[i], "u", where), n, where + ".u");
        e.v = vertex_id(member(list[i], "v", where), n, where + ".v");
        e.W = weight_from_json(member(list[i], "W", where), where + ".W");
        entries.push_back(std::move(e));
      }
      weights = EdgeWeights::from_entries(graph, static_cast<int>(model.input_dim()),
                                          static_cast<int>(model.output_dim()), entries);
    }

    ProblemOptions options;
    if (const auto it = doc.find("options"); it != doc.end()) {
      if (!it->is_object()) throw InputError("options must be an object");
      if (const auto s = it->find("seed"); s != it->end()) {
        if (!s->is_number_unsigned()) throw InputError("options.seed must be a nonnegative integer");
        options.seed = s->get<std::uint64_t>();
      }
      if (const auto t = it->find("trials"); t != it->end()) {
        options.trials = as_int(*t, "options.trials");
        if (*options.trials < 1) throw InputError("options.trials must be at least 1");
      }
      if (const auto t = it->find("rank_rel_tol"); t != it->end()) {
        options.rank_rel_tol = as_real(*t, "options.rank_rel_tol");
        if (!(*options.rank_rel_tol > 0.0 && *options.rank_rel_tol < 1.0)) {
          throw InputError("options.rank_rel_tol must lie in (0, 1)");
        }
      }
      if (const auto g = it->find("input_gain"); g != it->end()) {
        options.input_gain = as_real(*g, "options.input_gain");
        if (!(*options.input_gain > 0.0)) throw InputError("options.input_gain must be positive");
      }
    }

    std::vector<LocalTerm> local_terms;
    if (const auto it = doc.find("local_terms"); it != doc.end()) {
      if (!it->is_array()) throw InputError("local_terms must be an array");
      for (std::size_t i = 0; i < it->size(); ++i) {
        const std::string where = "local_terms[" + std::to_string(i) + "]";
        LocalTerm t;
        t.vertex = vertex_id(member((*it)[i], "vertex", where), n, where + ".vertex");
        t.delta_A = matrix_from_json(member((*it)[i], "A_delta", where), where + ".A_delta");
        if (t.delta_A.rows() != model.state_dim() || t.delta_A.cols() != model.state_dim()) {
          throw InputError(where + ".A_delta must be " + std::to_string(model.state_dim()) + "x" +
                           std::to_string(model.state_dim()));
        }
        local_terms.push_back(std::move(t));
      }
    }

    return Problem{std::move(model), std::move(graph), std::move(d), std::move(weights), options,
                   std::move(local_terms)};
  } catch (const Json::exception& e) {
    throw InputError(std::string("invalid problem file: ") + e.what());
  }
}

Json problem_to_json(const Problem& p) {
  Json doc;
  doc["$schema"] = kProblemSchema;
  doc["subsystem"] = {{"A", matrix_to_json(p.model.A)},
                      {"B", matrix_to_json(p.model.B)},
                      {"C", matrix_to_json(p.model.C)}};
  Json edges = Json::array();
  for (const auto& e : p.graph.edges()) {
    edges.push_back({{"u", e.u + 1}, {"v", e.v + 1}, {"kind", to_string(e.kind)}});
  }
  doc["graph"] = {{"N", p.graph.num_vertices()}, {"edges", edges}};
  doc["driven"] = one_based(p.driven.members());
  if (p.weights) doc["weights"] = weights_to_json(p.graph, *p.weights);
  Json opts = Json::object();
  if (p.options.seed) opts["seed"] = *p.options.seed;
  if (p.options.trials) opts["trials"] = *p.options.trials;
  if (p.options.rank_rel_tol) opts["rank_rel_tol"] = *p.options.rank_rel_tol;
  if (p.options.input_gain) opts["input_gain"] = *p.options.input_gain;
  if (!opts.empty()) doc["options"] = opts;
  if (!p.local_terms.empty()) {
    Json terms = Json::array();
    for (const auto& t : p.local_terms) {
      terms.push_back({{"vertex", t.vertex + 1}, {"A_delta", matrix_to_json(t.delta_A)}});
    }
    doc["local_terms"] = terms;
  }
  return doc;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomically(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot create '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw std::runtime_error("write to '" + tmp.string() + "' failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw std::runtime_error("cannot move output into '" + path.string() + "': " + ec.message());
  }
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xf]);
  }
  return out;
}

Verdict verdict_from_string(const std::string& s) {
  for (auto v : {Verdict::StructurallyControllable, Verdict::NotStructurallyControllable,
                 Verdict::Inconclusive}) {
    if (to_string(v) == s) return v;
  }
  throw InputError("unknown verdict '" + s + "'");
}

TheoremUsed theorem_from_string(const std::string& s) {
  for (auto t : {TheoremUsed::TrivialCase, TheoremUsed::UndirectedSimo,
                 TheoremUsed::SemiSymmetricSimo, TheoremUsed::MatrixWeighted,
                 TheoremUsed::ScalarReduction}) {
    if (to_string(t) == s) return t;
  }
  throw InputError("unknown theorem '" + s + "'");
}

Json to_json(const Condition& c) {
  return {{"name", c.name},
          {"holds", c.holds},
          {"witness",
           {{"eigenvalues", complex_list(c.witness.eigenvalues)},
            {"vertices", one_based(c.witness.vertices)},
            {"note", c.witness.note}}}};
}

Condition condition_from_json(const Json& j) {
  Condition c;
  c.name = j.at("name").get<std::string>();
  c.holds = j.at("holds").get<bool>();
  const auto& w = j.at("witness");
  c.witness.eigenvalues = complex_list_from_json(w.at("eigenvalues"));
  for (const auto& v : w.at("vertices")) c.witness.vertices.push_back(v.get<int>() - 1);
  c.witness.note = w.at("note").get<std::string>();
  return c;
}

Json to_json(const CertificationReport& c) {
  Json trials = Json::array();
  for (const auto& t : c.per_trial) {
    trials.push_back({{"stream_id", t.stream_id},
                      {"controllable", t.controllable},
                      {"deficient_eigenvalue_count", t.deficient_eigenvalue_count},
                      {"deficient_multiplicity", t.deficient_multiplicity},
                      {"uncontrollable_dimension", t.uncontrollable_dimension},
                      {"error", t.error}});
  }
  return {{"seed", c.seed},
          {"trials", c.trials},
          {"controllable_count", c.controllable_count()},
          {"certified_controllable", c.certified_controllable},
          {"theorem_verdict", to_string(c.theorem_verdict)},
          {"agree_with_verdict", c.agree_with_verdict},
          {"per_trial", trials}};
}

CertificationReport certification_from_json(const Json& j) {
  CertificationReport c;
  c.seed = j.at("seed").get<std::uint64_t>();
  c.trials = j.at("trials").get<int>();
  c.certified_controllable = j.at("certified_controllable").get<bool>();
  c.theorem_verdict = verdict_from_string(j.at("theorem_verdict").get<std::string>());
  c.agree_with_verdict = j.at("agree_with_verdict").get<bool>();
  for (const auto& t : j.at("per_trial")) {
    TrialResult r;
    r.stream_id = t.at("stream_id").get<std::uint64_t>();
    r.controllable = t.at("controllable").get<bool>();
    r.deficient_eigenvalue_count = t.at("deficient_eigenvalue_count").get<int>();
    r.deficient_multiplicity = t.at("deficient_multiplicity").get<int>();
    r.uncontrollable_dimension = t.at("uncontrollable_dimension").get<int>();
    r.error = t.at("error").get<std::string>();
    c.per_trial.push_back(std::move(r));
  }
  return c;
}

Json to_json(const AnalysisReport& r) {
  Json conds = Json::array();
  for (const auto& c : r.conditions) conds.push_back(to_json(c));
  Json out = {{"verdict", to_string(r.verdict)},
              {"theorem_used", to_string(r.theorem)},
              {"conditions", conds},
              {"fixed_modes", complex_list(r.fixed_modes)},
              {"tolerances",
               {{"rank_rel_tol", r.tolerances.rank_rel_tol},
                {"eig_match_tol", r.tolerances.eig_match_tol}}},
              {"notes", r.notes}};
  out["certification"] = r.certification ? to_json(*r.certification) : Json(nullptr);
  return out;
}

AnalysisReport report_from_json(const Json& j) {
  try {
    AnalysisReport r;
    r.verdict = verdict_from_string(j.at("verdict").get<std::string>());
    r.theorem = theorem_from_string(j.at("theorem_used").get<std::string>());
    for (const auto& c : j.at("conditions")) r.conditions.push_back(condition_from_json(c));
    r.fixed_modes = complex_list_from_json(j.at("fixed_modes"));
    r.tolerances.rank_rel_tol = j.at("tolerances").at("rank_rel_tol").get<double>();
    r.tolerances.eig_match_tol = j.at("tolerances").at("eig_match_tol").get<double>();
    r.notes = j.at("notes").get<std::vector<std::string>>();
    if (const auto it = j.find("certification"); it != j.end() && !it->is_null()) {
      r.certification = certification_from_json(*it);
    }
    return r;
  } catch (const Json::exception& e) {
    throw InputError(std::string("invalid report: ") + e.what());
  }
}

Json weights_to_json(const NetworkGraph& g, const EdgeWeights& w) {
  Json edges = Json::array();
  for (int id = 0; id < g.num_edges(); ++id) {
    const auto& e = g.edge(id);
    edges.push_back({{"u", e.u + 1}, {"v", e.v + 1}, {"kind", to_string(e.kind)},
                     {"W", matrix_to_json(w[id])}});
  }
  return {{"p", w.p()}, {"r", w.r()}, {"edges", edges}};
}

Json lumped_to_json(const LumpedSystem& sys) {
  return {{"num_subsystems", sys.num_subsystems},
          {"state_dim", sys.state_dim},
          {"route_residual", sys.route_residual},
          {"A_sys", matrix_to_json(sys.A_sys)},
          {"B_sys", matrix_to_json(sys.B_sys)}};
}

Json graph_report(const NetworkGraph& g, const DrivenSet& d) {
  Json out;
  out["$schema"] = kGraphSchema;
  out["N"] = g.num_vertices();
  out["driven"] = one_based(d.members());
  const auto forest = spanning_forest(g, d);
  out["globally_input_reachable"] = forest.ok();
  out["reachable"] = one_based(input_reachable_set(g, d));
  out["unreachable"] = one_based(forest.unreachable);
  if (forest.ok()) {
    Json parents = Json::array();
    for (int v : forest.forest->order) {
      const int p = forest.forest->parent[static_cast<std::size_t>(v)];
      parents.push_back({{"vertex", v + 1}, {"parent", p < 0 ? Json(nullptr) : Json(p + 1)}});
    }
    out["forest"] = parents;
  } else {
    out["forest"] = nullptr;
  }
  const auto inc = incidence_matrices(g);
  out["orientation_policy"] = "low-to-high";
  Json edges = Json::array();
  for (std::size_t i = 0; i < inc.edge_order.size(); ++i) {
    const int id = inc.edge_order[i];
    const auto& e = g.edge(id);
    const auto& o = inc.orientation[i];
    edges.push_back({{"id", id + 1},
                     {"u", e.u + 1},
                     {"v", e.v + 1},
                     {"kind", to_string(e.kind)},
                     {"tail", o.tail + 1},
                     {"head", o.head + 1},
                     {"k_case", inc.k_case[i] == KCase::Undirected ? "undirected" : "directed"}});
  }
  out["edges"] = edges;
  out["K_I"] = inc.K_I.size() ? matrix_to_json(inc.K_I) : Json::array();
  out["K"] = inc.K.size() ? matrix_to_json(inc.K) : Json::array();
  return out;
}

}  // namespace diffnet
