#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "qiniup/csv.hpp"
#include "qiniup/lasso.hpp"
#include "qiniup/model.hpp"
#include "qiniup/report.hpp"
#include "qiniup/select.hpp"
#include "support/oracles.hpp"

using namespace qiniup;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = qiniup::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json load(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("qiniup_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    oracle::Gen g(21);
    data_ = (dir_ / "d.csv").string();
    save_csv(data_, oracle::random_dataset(g, 600, 3, 0.8));
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::vector<std::string> with_data(std::vector<std::string> args, const std::string& out) const {
    for (const auto& a : {"--data", data_.c_str(), "--treatment", "t", "--outcome", "y", "--out-dir",
                          out.c_str()})
      args.push_back(a);
    return args;
  }
  std::string sub(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
  std::string data_;
};

}  // namespace

TEST_F(CliTest, FitWritesModelAndManifest) {
  const auto r = invoke(with_data({"fit"}, sub("fit")));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto model = load(dir_ / "fit" / "model.json");
  for (const char* k : {"intercept", "main", "treat", "interact", "feature_names", "meta"})
    EXPECT_TRUE(model.contains(k)) << k;
  EXPECT_EQ(model["main"].size(), 3u);
  const auto manifest = load(dir_ / "fit" / "manifest.json");
  EXPECT_EQ(manifest["command"], "fit");
  EXPECT_EQ(manifest["inputs"].size(), 1u);
  EXPECT_TRUE(load(dir_ / "fit" / "diagnostics.json")["converged"].get<bool>());
}

TEST_F(CliTest, MissingOutcomeIsUsageError) {
  EXPECT_EQ(invoke({"fit", "--data", data_, "--treatment", "t"}).code, qiniup::cli::kExitUsage);
  EXPECT_EQ(invoke({}).code, qiniup::cli::kExitUsage);
  EXPECT_EQ(invoke({"fit", "--data", data_, "--treatment", "t", "--outcome", "nope"}).code,
            qiniup::cli::kExitUsage);
}

TEST_F(CliTest, SeparationSurfacesInDiagnostics) {
  const std::string sep = sub("sep.csv");
  std::ofstream(sep) << "x,t,y\n-4,0,0\n-3,1,0\n-2,0,0\n-1,1,0\n1,0,1\n2,1,1\n3,0,1\n4,1,1\n";
  const auto r = invoke({"fit", "--data", sep, "--treatment", "t", "--outcome", "y", "--out-dir", sub("sep")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(load(dir_ / "sep" / "diagnostics.json")["separation"].get<bool>());
}

TEST_F(CliTest, SelectQlassoMatchesBruteForceArgmax) {
  const auto r = invoke(with_data({"select", "--method", "qlasso", "--J", "5", "--lambda-count", "15"},
                               sub("sel")));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ds = load_csv(data_, "t", "y");
  PathOptions opt;
  opt.length = 15;
  const auto path = fit_lasso_path(ds, opt);
  std::size_t best = 0;
  double best_v = -1;
  for (std::size_t j = 0; j < path.size(); ++j) {
    const Eigen::VectorXd u = predict_uplifts(path.coefficients[j], ds.features());
    const double v = oracle::brute_metrics(ds, std::vector<double>(u.data(), u.data() + u.size()), 5).adjusted;
    if (v > best_v) {
      best_v = v;
      best = j;
    }
  }
  const auto sel = load(dir_ / "sel" / "selection.json");
  EXPECT_EQ(sel["lambda_index"].get<std::size_t>(), best);
  EXPECT_TRUE(fs::exists(dir_ / "sel" / "path.csv"));
}

TEST_F(CliTest, DegenerateLhsMatchesQlasso) {
  ASSERT_EQ(invoke(with_data({"select", "--method", "qlasso", "--J", "5"}, sub("q"))).code, 0);
  const auto r = invoke(with_data({"select", "--method", "lhs-qadj", "--J", "5", "--L", "1", "--radius-rel",
                                "0", "--radius-floor", "1e-12"},
                               sub("l")));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto q = load(dir_ / "q" / "selection.json");
  const auto l = load(dir_ / "l" / "search.json");
  const auto idx = q["lambda_index"].get<std::size_t>();
  EXPECT_NEAR(l["value"].get<double>(), q["path_metric"][idx].get<double>(), 1e-9);
}

TEST_F(CliTest, UnknownMethodIsUsageError) {
  EXPECT_EQ(invoke(with_data({"select", "--method", "magic"}, sub("x"))).code, qiniup::cli::kExitUsage);
}

TEST_F(CliTest, OtherMethodsRun) {
  for (const char* m : {"qlasso-ose", "loglik-cv", "nm-base", "nm-q", "lhs-rho"}) {
    const auto r = invoke(with_data({"select", "--method", m, "--J", "4", "--L", "5", "--lambda-count", "10"},
                                 sub(m)));
    EXPECT_EQ(r.code, 0) << m << ": " << r.err;
    EXPECT_TRUE(fs::exists(dir_ / m / "model.json")) << m;
  }
  EXPECT_TRUE(fs::exists(dir_ / "qlasso-ose" / "cv.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "nm-q" / "search.json"));
}

TEST_F(CliTest, EvaluateZeroModelAndSvgShape) {
  const std::string model = sub("zero.json");
  std::ofstream(model) << model_to_json(UpliftCoefficients::zero(3), {"x1", "x2", "x3"}).dump();
  const auto r = invoke(with_data({"evaluate", "--model", model, "--J", "6"}, sub("ev")));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("Top 20% Uplift"), std::string::npos);
  EXPECT_NE(r.out.find("Bottom 20% Uplift"), std::string::npos);
  const auto rep = load(dir_ / "ev" / "report.json");
  EXPECT_TRUE(rep["scores"].contains("adjusted_qini"));
  EXPECT_EQ(count(slurp(dir_ / "ev" / "bins.svg"), "<rect class=\"bar\""), 6u);
  EXPECT_EQ(count(slurp(dir_ / "ev" / "curve.svg"), "<circle"), 7u);
}

TEST_F(CliTest, EvaluateRejectsMismatchedModel) {
  const std::string model = sub("bad.json");
  std::ofstream(model) << model_to_json(UpliftCoefficients::zero(2), {"a", "b"}).dump();
  EXPECT_EQ(invoke(with_data({"evaluate", "--model", model}, sub("ev"))).code, qiniup::cli::kExitUsage);
}

TEST_F(CliTest, TopGroupOfSeparatedFixture) {
  // Highest-uplift fifth: 5 treated all respond, 5 control none respond.
  std::ostringstream csv;
  csv << "x,t,y\n";
  for (int i = 0; i < 50; ++i) {
    const int t = i % 2;
    const int y = i < 10 ? t : (i % 3 == 0);
    csv << (i < 10 ? 10.0 : -static_cast<double>(i)) << ',' << t << ',' << y << '\n';
  }
  const std::string d = sub("sep.csv");
  std::ofstream(d) << csv.str();
  auto c = UpliftCoefficients::zero(1);
  c.interact << 0.1;
  const std::string model = sub("m.json");
  std::ofstream(model) << model_to_json(c, {"x"}).dump();
  const auto r = invoke({"evaluate", "--model", model, "--data", d, "--treatment", "t", "--outcome", "y",
                      "--J", "2", "--out-dir", sub("ev")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rep = load(dir_ / "ev" / "report.json");
  EXPECT_EQ(rep["top_group"]["n"].get<int>(), 10);
  EXPECT_DOUBLE_EQ(rep["top_group"]["uplift"].get<double>(), 5.0 / 5.0 - 0.0 / 5.0);
}

TEST_F(CliTest, ReportOddsColumns) {
  const std::string d = sub("odds.csv");
  {
    std::ofstream f(d);
    f << "a,b,t,y\n";
    oracle::Gen g(3);
    for (int i = 0; i < 400; ++i) {
      const double a = g.coin(0.5), b = g.normal();
      const int t = g.coin(0.5);
      f << a << ',' << b << ',' << t << ',' << g.coin(oracle::sigmoid(-0.5 + 0.4 * a)) << '\n';
    }
  }
  auto c = UpliftCoefficients::zero(2);
  c.intercept = -0.5;
  c.main << std::log(0.35), 0.2;
  c.interact << 0.0, 0.1;
  const std::string model = sub("m.json");
  std::ofstream(model) << model_to_json(c, {"a", "b"}).dump();
  const auto r = invoke({"report-odds", "--model", model, "--data", d, "--treatment", "t", "--outcome",
                      "y", "--out-dir", sub("o")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto odds = load(dir_ / "o" / "odds.json");
  const auto& a = odds["variables"][0];
  EXPECT_EQ(a["variable"], "a");
  EXPECT_NEAR(a["or_control"].get<double>(), 0.350, 1e-12);
  EXPECT_EQ(a["or_control"], a["or_treated"]);
  EXPECT_EQ(a["ci_control"], a["ci_treated"]);
  const std::string table = slurp(dir_ / "o" / "odds.csv");
  EXPECT_NE(table.find("a,0.350,"), std::string::npos);
}

TEST_F(CliTest, ReportOddsGroupRatioOneForEqualMeans) {
  auto c = UpliftCoefficients::zero(1);
  c.main << 0.7;
  c.interact << 0.3;
  std::ostringstream csv;
  csv << "k,t,y\n";
  for (int i = 0; i < 40; ++i) csv << 1 << ',' << i % 2 << ',' << (i / 2) % 2 << '\n';
  const std::string d = sub("k.csv");
  std::ofstream(d) << csv.str();
  const std::string model = sub("m.json");
  std::ofstream(model) << model_to_json(c, {"k"}).dump();
  const auto r = invoke({"report-odds", "--model", model, "--data", d, "--treatment", "t", "--outcome",
                      "y", "--out-dir", sub("o")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto odds = load(dir_ / "o" / "odds.json");
  EXPECT_EQ(odds["variables"][0]["group_or_control"].get<double>(), 1.0);
  EXPECT_EQ(odds["variables"][0]["group_or_treated"].get<double>(), 1.0);
  EXPECT_NE(r.err.find("covariance unavailable"), std::string::npos);
}

TEST_F(CliTest, SimulateDeterministicAndFiltered) {
  const std::vector<std::string> base = {"simulate", "--depth", "1", "--k", "10", "--n", "1000",
                                         "--reps", "5", "--seed", "7", "--L", "10", "--base-n", "2000"};
  auto a = base, b = base;
  a.insert(a.end(), {"--out-dir", sub("a")});
  b.insert(b.end(), {"--out-dir", sub("b")});
  ASSERT_EQ(invoke(a).code, 0);
  ASSERT_EQ(invoke(b).code, 0);
  EXPECT_EQ(slurp(dir_ / "a" / "results.csv"), slurp(dir_ / "b" / "results.csv"));
  EXPECT_EQ(slurp(dir_ / "a" / "replications.csv"), slurp(dir_ / "b" / "replications.csv"));
  const std::string header = slurp(dir_ / "a" / "results.csv").substr(0, 29);
  EXPECT_EQ(header, "estimator,metric,mean,se,M\nBa");

  ASSERT_EQ(invoke({"simulate", "--reps", "2", "--n", "500", "--base-n", "1500", "--L", "5", "--estimators",
                 "Baseline,Q+lasso", "--out-dir", sub("f")})
                .code,
            0);
  std::istringstream rows(slurp(dir_ / "f" / "results.csv"));
  std::string line;
  std::getline(rows, line);
  while (std::getline(rows, line)) {
    const auto name = line.substr(0, line.find(','));
    EXPECT_TRUE(name == "Baseline" || name == "Q+lasso") << line;
  }
  EXPECT_EQ(invoke({"simulate", "--estimators", "Nope", "--out-dir", sub("g")}).code, qiniup::cli::kExitUsage);
}

TEST(Report, ModelJsonRoundTrip) {
  auto c = UpliftCoefficients::zero(2);
  c.intercept = 0.1;
  c.main << 0.2, -0.3;
  c.treat = 1e-17;
  c.interact << 0.0, 5.5;
  const auto j = model_to_json(c, {"u", "v"}, {{"method", "x"}});
  const auto [back, names] = model_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(back, c);
  EXPECT_EQ(names, (std::vector<std::string>{"u", "v"}));
  nlohmann::json bad = j;
  bad.erase("treat");
  EXPECT_THROW(model_from_json(bad), ValidationError);
  bad = j;
  bad["interact"] = {1.0};
  EXPECT_THROW(model_from_json(bad), ValidationError);
}

TEST(Report, CurveAndBinsCsv) {
  QiniCurve curve{{0, 0.5, 1}, {0, 0.4, 0.2}};
  std::ostringstream s;
  write_curve_csv(s, curve);
  EXPECT_EQ(s.str(), "phi,g\n0,0\n0.5,0.4\n1,0.2\n");
  BinTable bins;
  bins.bins.resize(2);
  std::ostringstream b;
  write_bins_csv(b, bins);
  EXPECT_EQ(b.str().substr(0, b.str().find('\n')), "bin,n,pred_uplift,obs_uplift,n_treat,n_control");
  EXPECT_EQ(count(bins_svg(bins), "<rect class=\"bar\""), 2u);
}
