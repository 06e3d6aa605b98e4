#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "diffnet/assembly.hpp"
#include "diffnet/subsystem.hpp"
#include "diffnet/topology.hpp"
#include "diffnet/verdict.hpp"

namespace diffnet {

using Json = nlohmann::ordered_json;

inline constexpr const char* kReportSchema = "diffnet/report/v1";
inline constexpr const char* kLumpedSchema = "diffnet/lumped/v1";
inline constexpr const char* kGraphSchema = "diffnet/graph/v1";
inline constexpr const char* kProblemSchema = "diffnet/problem/v1";

struct ProblemOptions {
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<double> rank_rel_tol;
  std::optional<double> input_gain;
};

/// Everything a problem file describes, with 0-based vertex ids.
struct Problem {
  SubsystemModel model;
  NetworkGraph graph;
  DrivenSet driven;
  std::optional<EdgeWeights> weights;
  ProblemOptions options;
  std::vector<LocalTerm> local_terms;
};

/// Parses a problem document. Throws InputError; syntax errors carry the
/// line and column, semantic errors list every violation found.
Problem parse_problem(std::string_view text);
Json problem_to_json(const Problem& p);

std::string read_file(const std::filesystem::path& path);
/// Writes through a sibling temporary file and renames it into place.
void write_file_atomically(const std::filesystem::path& path, std::string_view content);

std::string sha256_hex(std::string_view data);

Json matrix_to_json(const Mat& m);
/// Accepts a rectangular array of arrays; `what` names the field in errors.
Mat matrix_from_json(const Json& j, const std::string& what);

Json to_json(const Condition& c);
Json to_json(const CertificationReport& c);
Json to_json(const AnalysisReport& r);
Condition condition_from_json(const Json& j);
CertificationReport certification_from_json(const Json& j);
AnalysisReport report_from_json(const Json& j);

Verdict verdict_from_string(const std::string& s);
TheoremUsed theorem_from_string(const std::string& s);

Json weights_to_json(const NetworkGraph& g, const EdgeWeights& w);
Json lumped_to_json(const LumpedSystem& sys);

/// Reachable set, spanning forest or unreachable witness, and the incidence
/// orientation record.
Json graph_report(const NetworkGraph& g, const DrivenSet& d);

}  // namespace diffnet
