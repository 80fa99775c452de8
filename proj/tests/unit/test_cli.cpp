#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "sigdet/cli.hpp"
#include "sigdet/errors.hpp"

namespace sigdet::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_command(args, out, err);
  return {code, out.str(), err.str()};
}

std::string demo() { return SIGDET_DEMO_CONFIG; }

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("sigdet_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
    return path(name);
  }
  static std::string slurp(const std::string& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), {}};
  }
  fs::path dir_;
};

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::string first_data_header(const std::string& csv) {
  for (const auto& l : lines(csv)) {
    if (!l.empty() && l[0] != '#') return l;
  }
  return {};
}

TEST(CliSolve, WorkedExampleJson) {
  const auto r = run({"solve", "--config", demo(), "--radius", "0.681385"});
  ASSERT_EQ(r.code, kOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["lagrange_a"].get<double>(), 1.0 / 9.0, 1e-6);
  EXPECT_NEAR(j["u"].get<double>(), 23.82, 5e-3);
  // 0.681385 sits just below sqrt(13/28), so l = 3 enters with a negligible share.
  const auto& support = j["support"];
  ASSERT_GE(support.size(), 2u);
  EXPECT_NEAR(support[0]["theta_star_squared"].get<double>(), 2.0 / 7.0, 1e-5);
  EXPECT_NEAR(support[1]["theta_star_squared"].get<double>(), 5.0 / 28.0, 1e-5);
  EXPECT_EQ(j["schema"], "sigdet.solve/1");
  EXPECT_EQ(j["provenance"]["command"], "solve");
  EXPECT_EQ(j["provenance"]["partitions"], 1);
  EXPECT_EQ(j["provenance"]["version"], std::string(version()));
  EXPECT_EQ(j["support"][0]["index"], nlohmann::json::array({1}));
}

TEST(CliSolve, KeyOrderIsStable) {
  const auto r = run({"solve", "--config", demo(), "--radius", "0.681385"});
  ASSERT_EQ(r.code, kOk);
  const auto j = nlohmann::ordered_json::parse(r.out);
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  const std::vector<std::string> want{
      "schema", "provenance", "problem", "radius",       "ellipsoid_radius",
      "lagrange_a", "z0_squared", "u", "J",           "support_size",
      "residuals", "support_listed", "support"};
  EXPECT_EQ(keys, want);
}

TEST(CliSolve, TargetUAndEllipsoidRadius) {
  const auto a = run({"solve", "--config", demo(), "--target-u", "5"});
  ASSERT_EQ(a.code, kOk) << a.err;
  EXPECT_NEAR(nlohmann::json::parse(a.out)["u"].get<double>(), 5.0, 1e-7);
  const auto b = run({"solve", "--config", demo(), "--radius", "1.3", "--ellipsoid-radius", "2"});
  ASSERT_EQ(b.code, kOk) << b.err;
  EXPECT_EQ(nlohmann::json::parse(b.out)["ellipsoid_radius"].get<double>(), 2.0);
}

TEST(CliSolve, RealsCarrySeventeenDigits) {
  const auto r = run({"solve", "--config", demo(), "--radius", "0.681385"});
  const auto j = nlohmann::json::parse(r.out);
  const double a = j["lagrange_a"].get<double>();
  std::ostringstream round;
  round.precision(17);
  round << a;
  EXPECT_EQ(std::stod(round.str()), a);
}

TEST_F(TempDir, SimulateIsByteIdentical) {
  const auto a = path("a.csv"), b = path("b.csv");
  for (const auto& p : {a, b}) {
    const auto r = run({"simulate", "--config", demo(), "--replications", "2000", "--seed", "42",
                        "--output", p});
    ASSERT_EQ(r.code, kOk) << r.err;
  }
  const auto text = slurp(a);
  EXPECT_FALSE(text.empty());
  EXPECT_EQ(text, slurp(b));
  EXPECT_EQ(first_data_header(text),
            "alpha,radius,u,threshold,type1,type2,predicted_type2,type1_se,type2_se,"
            "replications,support_size,seed");
  EXPECT_NE(text.find("# seed: 42"), std::string::npos);
  EXPECT_NE(text.find("# partitions: 1"), std::string::npos);
}

TEST(CliSimulate, OneRowPerTarget) {
  const auto r = run({"simulate", "--config", demo(), "--target-u", "1,2,3", "--replications",
                      "200"});
  ASSERT_EQ(r.code, kOk) << r.err;
  std::size_t rows = 0;
  for (const auto& l : lines(r.out)) {
    if (!l.empty() && l[0] != '#') ++rows;
  }
  EXPECT_EQ(rows, 4u);  // header plus three rows
}

TEST_F(TempDir, RatesHeaderAndFit) {
  const auto cfg = write("rates.cfg",
                         "[problem]\ndimension = 2\n[spectrum]\nkind = mild\ndegrees = 1, 0.25\n"
                         "[smoothness]\nshape = tensor_polynomial\nexponents = 1, 1\n"
                         "[rates]\nregime = tensor_mild_ordinary\nepsilons = 0.0625, 0.015625\n");
  const auto r = run({"rates", "--config", cfg});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_EQ(first_data_header(r.out),
            "epsilon,feasible,r_solved,r_star,u,support_size,fitted_slope,predicted_exponent");
  EXPECT_NE(r.out.find("# regime: tensor_mild_ordinary"), std::string::npos);
  std::size_t rows = 0;
  for (const auto& l : lines(r.out)) {
    if (!l.empty() && l[0] != '#') ++rows;
  }
  EXPECT_EQ(rows, 3u);
}

TEST(CliVerify, JSumRatiosInBand) {
  const auto r = run({"verify", "--lemma", "J", "--R", "200", "--t", "0", "--s", "1"});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_EQ(first_data_header(r.out), "quantity,R,exact,asymptotic,ratio,residual");
  int seen = 0;
  for (const auto& l : lines(r.out)) {
    if (l.rfind("J", 0) != 0) continue;
    std::vector<std::string> cells;
    std::istringstream in(l);
    for (std::string c; std::getline(in, c, ',');) cells.push_back(c);
    ASSERT_GE(cells.size(), 5u);
    const double ratio = std::stod(cells[4]);
    EXPECT_GE(ratio, 0.95) << l;
    EXPECT_LE(ratio, 1.05) << l;
    ++seen;
  }
  EXPECT_EQ(seen, 3);
}

TEST(CliVerify, LatticeSumAndConstants) {
  const auto a = run({"verify", "--lemma", "1", "--R", "50", "--u", "0,0", "--s", "1,2"});
  ASSERT_EQ(a.code, kOk) << a.err;
  const auto b = run({"verify", "--lemma", "constants", "--t", "0", "--s", "1"});
  ASSERT_EQ(b.code, kOk) << b.err;
  EXPECT_NE(b.out.find("C1"), std::string::npos);
}

TEST(CliExitCodes, Usage) {
  EXPECT_EQ(run({}).code, kUsage);
  EXPECT_EQ(run({"frobnicate"}).code, kUsage);
  EXPECT_EQ(run({"solve", "--config", demo(), "--bogus"}).code, kUsage);
}

TEST(CliExitCodes, MissingConfig) {
  const auto r = run({"solve", "--config", "/nonexistent/x.cfg", "--radius", "0.5"});
  EXPECT_EQ(r.code, kMissingConfig);
  EXPECT_NE(r.err.find("cannot open config file"), std::string::npos);
}

TEST_F(TempDir, InvalidConfigCodes) {
  const auto r =
      run({"solve", "--config", demo(), "--radius", "0.5", "--set", "problem.alpha=1.2"});
  EXPECT_EQ(r.code, kInvalidConfig);
  EXPECT_NE(r.err.find("alpha"), std::string::npos);
  const auto unknown = write("unknown.cfg", "[problem]\nflavour = 3\n");
  EXPECT_EQ(run({"solve", "--config", unknown, "--radius", "0.5"}).code, kInvalidConfig);
  EXPECT_EQ(run({"solve", "--config", demo(), "--radius", "0.5", "--set", "nope.key=1"}).code,
            kInvalidConfig);
}

TEST(CliExitCodes, SolverFailureAndResourceLimit) {
  EXPECT_EQ(run({"solve", "--config", demo(), "--radius", "5"}).code, kSolverFailure);
  EXPECT_EQ(run({"solve", "--config", demo(), "--radius", "0.001", "--set",
                 "problem.support_cap=100"})
                .code,
            kResourceLimit);
}

TEST(CliConfig, OverridesChangeHash) {
  auto base = load_config(demo());
  const auto h = config_hash(base);
  EXPECT_EQ(h.size(), 16u);
  EXPECT_EQ(h, config_hash(load_config(demo())));
  apply_overrides(base, {"problem.epsilon=0.05"});
  EXPECT_NE(config_hash(base), h);
  EXPECT_EQ(problem_from(base).epsilon, 0.05);
  EXPECT_THROW(apply_overrides(base, {"problem.epsilon"}), ConfigError);
  EXPECT_THROW(apply_overrides(base, {"nope.x=1"}), ConfigError);
}

TEST(CliConfig, ParseList) {
  EXPECT_EQ(parse_list("1, 2.5 3", "f"), (std::vector<double>{1.0, 2.5, 3.0}));
  EXPECT_THROW(parse_list("1,abc", "f"), ConfigError);
}

TEST(CliConfig, SchemaCoversDemo) {
  const auto& schema = schema_defaults();
  for (const auto& [key, value] : load_config(demo())) {
    EXPECT_TRUE(schema.count(key)) << key;
  }
}

}  // namespace
}  // namespace sigdet::cli
