#include "latlab/lab.hpp"

#include <gtest/gtest.h>

#include <filesystem>

using namespace latlab;
using namespace latlab::lab;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("latlab_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

json small_sup() {
  return json::parse(R"({"experiment": "sup-construct", "domain": {"kind": "torus", "n": 32},
                         "tol": 1e-6, "samples": 4, "seed": 7})");
}

}  // namespace

TEST(Config, DefaultsAndOverrides) {
  const ExperimentConfig c = parse_config(small_sup());
  EXPECT_EQ(c.experiment, Experiment::sup_construct);
  EXPECT_EQ(c.domain_kind, DomainKind::torus);
  EXPECT_EQ(c.n, 32);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(parse_config(small_sup(), std::string("sup-construct"), 99).seed, 99u);
  json no_name = small_sup();
  no_name.erase("experiment");
  EXPECT_EQ(parse_config(no_name, std::string("sup-construct")).experiment, Experiment::sup_construct);
}

TEST(Config, FieldDiagnostics) {
  auto expect_field = [](json j, const std::string& field) {
    try {
      parse_config(j);
      FAIL() << "accepted " << j.dump();
    } catch (const UsageError& e) {
      EXPECT_NE(std::string(e.what()).find("'" + field + "'"), std::string::npos) << e.what();
    }
  };
  json j = small_sup();
  j["tol"] = 1e-13;
  expect_field(j, "tol");
  j["tol"] = 0.05;
  expect_field(j, "tol");
  j = small_sup();
  j["domain"]["n"] = 3;
  expect_field(j, "domain.n");
  j = small_sup();
  j["p"] = 1.0;
  expect_field(j, "p");
  j = small_sup();
  j["seed"] = -4;
  expect_field(j, "seed");
  j = small_sup();
  j["deltas"] = {0.1};
  expect_field(j, "deltas");
  j = small_sup();
  j["scheme"] = {{"family", "spline"}};
  expect_field(j, "scheme.family");
  j = small_sup();
  j["domain"]["kind"] = "sphere";
  expect_field(j, "domain.kind");
  j = small_sup();
  j["tol"] = "small";
  expect_field(j, "tol");
  json g = json::parse(R"({"experiment": "extrapolation-demo", "generator": {"kind": "multiplication", "m": [1, 2], "n": 3}})");
  expect_field(g, "generator.n");
  EXPECT_THROW(parse_config(small_sup(), std::string("renorm-audit")), UsageError);
  EXPECT_THROW(parse_config(json::object()), UsageError);
  EXPECT_THROW(parse_config(json::array()), UsageError);
  EXPECT_THROW(parse_config(json{{"experiment", "nothing"}}), UsageError);
}

TEST(Run, DeterministicCsvAndSchema) {
  const ExperimentConfig c = parse_config(small_sup());
  const RunResult a = run(c), b = run(c);
  const std::string csv = to_csv(a);
  EXPECT_EQ(csv, to_csv(b));
  EXPECT_EQ(csv.rfind("# schema=1,experiment=sup-construct,run_id=" + a.run_id + "\n", 0), 0u);
  EXPECT_NE(csv.find(std::string("\n") + kCsvColumns + "\n"), std::string::npos);
  EXPECT_EQ(a.rows.size(), 4u);
  EXPECT_TRUE(a.all_pass());
  for (const auto& row : a.rows) EXPECT_NE(row.params.find("family=mollifier"), std::string::npos);
  // seed is part of the run id
  EXPECT_NE(run_id(parse_config(small_sup(), std::nullopt, 8)), a.run_id);
  EXPECT_EQ(run_id(parse_config(small_sup())), a.run_id);
  const json s = summary(a);
  EXPECT_EQ(s["pass"], 4);
  EXPECT_EQ(s["fail"], 0);
  EXPECT_EQ(s["run_id"], a.run_id);
}

TEST(Run, OracleGapWithinTenTolerances) {
  json j = small_sup();
  j["domain"]["n"] = 128;
  j["samples"] = 9;
  const RunResult r = run(parse_config(j));
  EXPECT_TRUE(r.all_pass());
  EXPECT_LE(r.worst_gap(), 1e-5);
}

TEST(Run, NormalityScanRoughlyDoubles) {
  const RunResult r = run(parse_config(json::parse(
      R"({"experiment": "normality-scan", "eps": [0.25, 0.125, 0.0625]})")));
  ASSERT_EQ(r.rows.size(), 5u);
  EXPECT_TRUE(r.all_pass());
  for (std::size_t i = 3; i < 5; ++i) EXPECT_NEAR(r.rows[i].measured, 2.0, 0.3);
}

TEST(Run, PreconditionsPropagate) {
  EXPECT_THROW(run(parse_config(json::parse(
                   R"({"experiment": "mollifier-rate", "domain": {"kind": "torus", "n": 64}, "deltas": [0.02]})"))),
               PreconditionError);
  EXPECT_THROW(run(parse_config(json::parse(
                   R"({"experiment": "boundary-chart-audit", "domain": {"kind": "torus", "n": 16}})"))),
               PreconditionError);
}

TEST(Run, EveryExperimentProducesRows) {
  const std::vector<std::string> configs{
      R"({"experiment": "sup-construct-dual", "domain": {"kind": "interval", "n": 16}, "scheme": {"family": "resolvent"}, "samples": 3})",
      R"({"experiment": "mollifier-rate", "domain": {"kind": "torus", "n": 1024}, "deltas": [0.08, 0.04], "samples": 1})",
      R"({"experiment": "boundary-chart-audit", "domain": {"kind": "interval", "n": 17}, "audit_samples": 200})",
      R"({"experiment": "pushin-audit", "domain": {"kind": "interval", "n": 257}, "indices": [2, 4], "with_boundary": true, "samples": 2})",
      R"({"experiment": "prop35-demo", "domain": {"kind": "interval", "n": 41}, "k": 1, "samples": 4})",
      R"({"experiment": "extrapolation-demo", "generator": {"kind": "neumann_laplacian", "n": 6}, "samples": 4})",
      R"({"experiment": "renorm-audit", "domain": {"kind": "interval", "n": 6}, "samples": 4})"};
  for (const auto& text : configs) {
    const RunResult r = run(parse_config(json::parse(text)));
    EXPECT_FALSE(r.rows.empty()) << text;
    EXPECT_TRUE(r.all_pass()) << text;
  }
}

TEST(Output, AtomicWritesAndNames) {
  const auto dir = scratch("out");
  const RunResult r = run(parse_config(small_sup()));
  const auto [csv, js] = write_outputs(r, dir);
  EXPECT_EQ(csv.filename(), "sup-construct.csv");
  EXPECT_EQ(slurp(csv), to_csv(r));
  EXPECT_EQ(json::parse(slurp(js)), summary(r));
  EXPECT_FALSE(std::filesystem::exists(csv.string() + ".tmp"));
}

TEST(Merge, DisjointRunsAdd) {
  const auto dir = scratch("merge_add");
  const RunResult a = run(parse_config(small_sup()));
  const RunResult b = run(parse_config(small_sup(), std::nullopt, 8));
  write_atomic(dir / "a.csv", to_csv(a));
  write_atomic(dir / "b.csv", to_csv(b));
  const json m = report_merge({(dir / "a.csv").string(), (dir / "b.csv").string()});
  EXPECT_EQ(m["status"], "PASS");
  EXPECT_EQ(m["runs"], 2);
  EXPECT_EQ(m["experiments"]["sup-construct"]["pass"], 8);
}

TEST(Merge, DuplicateRunIsIdempotent) {
  const auto dir = scratch("merge_dup");
  const RunResult a = run(parse_config(small_sup()));
  write_atomic(dir / "a.csv", to_csv(a));
  write_atomic(dir / "copy.csv", to_csv(a));
  const json once = report_merge({(dir / "a.csv").string()});
  const json twice = report_merge({(dir / "a.csv").string(), (dir / "copy.csv").string()});
  EXPECT_EQ(once, twice);
}

TEST(Merge, FailurePreservesWitness) {
  const auto dir = scratch("merge_fail");
  RunResult bad;
  bad.run_id = "00000000000000aa";
  bad.experiment = Experiment::renorm_audit;
  bad.rows.push_back({"bounds", "n=2", 3.0, 0.5, false, Eigen::Vector2d(1.5, -0.25)});
  bad.rows.push_back({"bounds", "n=2", 1.0, 0.0, true, {}});
  write_atomic(dir / "bad.csv", to_csv(bad));
  write_atomic(dir / "good.csv", to_csv(run(parse_config(small_sup()))));
  const json m = report_merge({(dir / "good.csv").string(), (dir / "bad.csv").string()});
  EXPECT_EQ(m["status"], "FAIL");
  const json& e = m["experiments"]["renorm-audit"];
  EXPECT_EQ(e["fail"], 1);
  EXPECT_EQ(e["pass"], 1);
  EXPECT_DOUBLE_EQ(e["worst_gap"].get<double>(), 0.5);
  EXPECT_EQ(e["failures"][0]["witness"], "1.5 -0.25");
}

TEST(Merge, MalformedRowNamesFileAndLine) {
  const auto dir = scratch("merge_bad");
  std::string text = to_csv(run(parse_config(small_sup())));
  text += "0123456789abcdef,sup-construct,x,7,n=1,abc,0,PASS,\n";
  write_atomic(dir / "r.csv", text);
  try {
    report_merge({(dir / "r.csv").string()});
    FAIL() << "expected MergeError";
  } catch (const MergeError& e) {
    EXPECT_EQ(e.line, 7);
    EXPECT_NE(std::string(e.what()).find("r.csv:7"), std::string::npos);
  }
  write_atomic(dir / "h.csv", "run_id\n");
  EXPECT_THROW(report_merge({(dir / "h.csv").string()}), MergeError);
  EXPECT_THROW(report_merge({}), UsageError);
}

TEST(Fnv, KnownVectors) {
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
}
