#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "diffnet/cli.hpp"
#include "diffnet/io.hpp"

namespace diffnet {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
  Json json() const { return Json::parse(out); }
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("diffnet_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
    ::unsetenv("DIFFNET_SEED");
  }
  void TearDown() override {
    fs::remove_all(dir_);
    ::unsetenv("DIFFNET_SEED");
  }

  std::string write(const std::string& name, const std::string& content) {
    const auto path = dir_ / name;
    write_file_atomically(path, content);
    return path.string();
  }

  Json chain(int n) {
    const auto r = run({"example", "mass-spring", "--N", std::to_string(n)});
    EXPECT_EQ(r.code, 0) << r.err;
    return r.json();
  }

  std::string chain_file(int n) { return write("chain.json", chain(n).dump()); }

  fs::path dir_;
};

TEST_F(CliTest, AnalyzeChain) {
  const auto r = run({"analyze", chain_file(5)});
  EXPECT_EQ(r.code, cli::kControllable) << r.err;
  const auto j = r.json();
  EXPECT_EQ(j["$schema"], "diffnet/report/v1");
  EXPECT_EQ(j["command"], "analyze");
  EXPECT_EQ(j["report"]["verdict"], "STRUCTURALLY_CONTROLLABLE");
  EXPECT_FALSE(j["report"].contains("certification") && !j["report"]["certification"].is_null());
}

TEST_F(CliTest, AnalyzeWithoutDrivenVertex) {
  auto doc = chain(4);
  doc["driven"] = Json::array();
  const auto r = run({"analyze", write("p.json", doc.dump())});
  EXPECT_EQ(r.code, cli::kNotControllable) << r.err;
  EXPECT_EQ(r.json()["report"]["conditions"][2]["witness"]["vertices"], Json::array({1, 2, 3, 4}));
}

TEST_F(CliTest, MalformedFileReportsLocation) {
  const auto text = chain(3).dump(2);
  const auto r = run({"analyze", write("bad.json", text.substr(0, text.size() / 2))});
  EXPECT_EQ(r.code, cli::kInputError);
  EXPECT_NE(r.err.find("line"), std::string::npos) << r.err;
  EXPECT_TRUE(r.out.empty());
}

TEST_F(CliTest, MissingFileIsInputError) {
  EXPECT_EQ(run({"analyze", (dir_ / "nope.json").string()}).code, cli::kInputError);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kInputError);
}

TEST_F(CliTest, CertifyChainAndSplitChain) {
  const auto path = chain_file(5);
  auto r = run({"certify", path, "--seed", "42", "--trials", "5"});
  EXPECT_EQ(r.code, cli::kControllable) << r.err;
  auto cert = r.json()["report"]["certification"];
  EXPECT_EQ(cert["controllable_count"], 5);
  EXPECT_TRUE(cert["agree_with_verdict"].get<bool>());

  auto doc = chain(5);
  auto& edges = doc["graph"]["edges"];
  edges.erase(2);  // {3,4}
  doc.erase("weights");
  r = run({"certify", write("split.json", doc.dump()), "--seed", "42", "--trials", "5"});
  EXPECT_EQ(r.code, cli::kControllable) << r.err;
  cert = r.json()["report"]["certification"];
  EXPECT_EQ(cert["controllable_count"], 0);
  EXPECT_TRUE(cert["agree_with_verdict"].get<bool>());
  EXPECT_EQ(r.json()["report"]["verdict"], "NOT_STRUCTURALLY_CONTROLLABLE");

  EXPECT_EQ(run({"certify", path, "--trials", "0"}).code, cli::kInputError);
}

TEST_F(CliTest, CertifyIsReproducible) {
  auto doc = chain(4);
  doc.erase("weights");
  const auto path = write("p.json", doc.dump());
  const auto a = run({"certify", path, "--seed", "9"});
  const auto b = run({"certify", path, "--seed", "9"});
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.json()["seed"], 9);
}

TEST_F(CliTest, SeedPrecedence) {
  auto doc = chain(3);
  doc.erase("weights");
  const auto plain = write("plain.json", doc.dump());
  EXPECT_EQ(run({"certify", plain}).json()["seed"], 42);

  ::setenv("DIFFNET_SEED", "17", 1);
  EXPECT_EQ(run({"certify", plain}).json()["seed"], 17);
  doc["options"]["seed"] = 5;
  const auto seeded = write("seeded.json", doc.dump());
  EXPECT_EQ(run({"certify", seeded}).json()["seed"], 5);
  EXPECT_EQ(run({"certify", seeded, "--seed", "3"}).json()["seed"], 3);

  ::setenv("DIFFNET_SEED", "seventeen", 1);
  EXPECT_EQ(run({"certify", plain}).code, cli::kInputError);
}

TEST_F(CliTest, LumpSingleSubsystemIsTheSubsystem) {
  auto doc = chain(1);
  const auto r = run({"lump", write("one.json", doc.dump())});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = r.json();
  EXPECT_EQ(j["$schema"], "diffnet/lumped/v1");
  EXPECT_EQ(matrix_from_json(j["lumped"]["A_sys"], "A_sys"), matrix_from_json(doc["subsystem"]["A"], "A"));
}

TEST_F(CliTest, LumpSampledWeightsAreDeterministic) {
  auto doc = chain(4);
  doc.erase("weights");
  const auto path = write("p.json", doc.dump());
  const auto a = run({"lump", path, "--seed", "11"});
  const auto b = run({"lump", path, "--seed", "11"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.json()["weights_source"], "sampled");
  EXPECT_NE(a.out, run({"lump", path, "--seed", "12"}).out);
}

TEST_F(CliTest, LumpEchoesProvidedWeights) {
  const auto doc = chain(3);
  const auto j = run({"lump", write("p.json", doc.dump())}).json();
  EXPECT_EQ(j["weights_source"], "provided");
  EXPECT_TRUE(j["seed"].is_null());
  ASSERT_EQ(j["weights"]["edges"].size(), doc["weights"]["edges"].size());
  for (std::size_t i = 0; i < doc["weights"]["edges"].size(); ++i) {
    EXPECT_EQ(matrix_from_json(j["weights"]["edges"][i]["W"], "W"),
              matrix_from_json(doc["weights"]["edges"][i]["W"], "W"));
  }
}

TEST_F(CliTest, ExampleRejectsDegenerateSizes) {
  EXPECT_EQ(run({"example", "mass-spring", "--N", "0"}).code, cli::kInputError);
  EXPECT_EQ(run({"example", "mass-spring", "--N", "3", "--k", "1,2"}).code, cli::kInputError);
  EXPECT_EQ(run({"example", "mass-spring", "--N", "3", "--driven", "4"}).code, cli::kInputError);
  EXPECT_EQ(run({"example", "pendulum", "--N", "3"}).code, cli::kInputError);
}

TEST_F(CliTest, ExampleWritesLoadableProblem) {
  const auto path = (dir_ / "ex.json").string();
  const auto r = run({"example", "mass-spring", "--N", "3", "--mass", "2", "--k", "1,2,3", "--mu", "0.5,0.5,0.5",
                      "--driven", "2", "--out", path});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto p = parse_problem(read_file(path));
  EXPECT_EQ(p.graph.num_vertices(), 3);
  EXPECT_EQ(p.driven.members(), std::vector<int>{1});
  ASSERT_TRUE(p.options.input_gain.has_value());
  EXPECT_DOUBLE_EQ(*p.options.input_gain, 0.5);
}

TEST_F(CliTest, GraphReport) {
  auto r = run({"graph", chain_file(3), "--format", "text"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("globally input-reachable: yes"), std::string::npos) << r.out;

  auto doc = chain(3);
  doc.erase("weights");
  doc["graph"]["edges"] = Json::parse(R"([{"u": 1, "v": 2, "kind": "directed"}])");
  r = run({"graph", write("g.json", doc.dump())});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = r.json();
  EXPECT_EQ(j["$schema"], "diffnet/graph/v1");
  EXPECT_FALSE(j["globally_input_reachable"].get<bool>());
  EXPECT_EQ(j["unreachable"], Json::array({3}));
  EXPECT_EQ(j["edges"][0]["k_case"], "directed");
}

TEST_F(CliTest, InconclusiveAndPremiseViolation) {
  const char* inconclusive = R"({
    "subsystem": {"A": [[-1, 0, 0], [0, 0.5, 0], [0, 0, 2]], "B": [[1, 0], [0, 1], [1, 1]],
                  "C": [[1, 0, 0], [0, 1, 0]]},
    "graph": {"N": 3, "edges": [{"u": 1, "v": 2}, {"u": 2, "v": 3}]},
    "driven": [1]})";
  const auto r = run({"analyze", write("inc.json", inconclusive)});
  EXPECT_EQ(r.code, cli::kInconclusive) << r.err;
  EXPECT_EQ(r.json()["report"]["verdict"], "INCONCLUSIVE");

  auto directed = Json::parse(inconclusive);
  directed["graph"]["edges"][0]["kind"] = "directed";
  const auto d = run({"analyze", write("dir.json", directed.dump())});
  EXPECT_EQ(d.code, cli::kInputError);
  EXPECT_NE(d.err.find("single-input"), std::string::npos) << d.err;
}

TEST_F(CliTest, OutFileAndDigest) {
  const auto path = chain_file(4);
  const auto out = (dir_ / "report.json").string();
  const auto r = run({"analyze", path, "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  const auto j = Json::parse(read_file(out));
  EXPECT_EQ(j["input_digest"], "sha256:" + sha256_hex(read_file(path)));
}

TEST_F(CliTest, ReportRoundTrips) {
  const auto j = run({"certify", chain_file(3)}).json();
  const auto back = report_from_json(j["report"]);
  EXPECT_EQ(to_json(back), j["report"]);
  EXPECT_EQ(back.verdict, Verdict::StructurallyControllable);
}

TEST_F(CliTest, TextFormat) {
  const auto r = run({"analyze", chain_file(3), "--format", "text"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("verdict: STRUCTURALLY_CONTROLLABLE"), std::string::npos) << r.out;
  EXPECT_THROW(Json::parse(r.out), Json::parse_error);
}

TEST_F(CliTest, GroundedExampleCarriesCertification) {
  const auto ex = run({"example", "mass-spring", "--N", "3", "--ground-first-mass"});
  ASSERT_EQ(ex.code, 0) << ex.err;
  EXPECT_FALSE(ex.json()["local_terms"].empty());
  const auto r = run({"analyze", write("g.json", ex.out)});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto cert = r.json()["report"]["certification"];
  ASSERT_TRUE(cert.is_object());
  EXPECT_EQ(cert["controllable_count"], cert["trials"]);
}

TEST_F(CliTest, HelpSucceeds) {
  const auto r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("analyze"), std::string::npos);
}

}  // namespace
}  // namespace diffnet
