#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qiniup/csv.hpp"
#include "qiniup/glm.hpp"
#include "qiniup/lasso.hpp"
#include "qiniup/lhs.hpp"
#include "qiniup/metrics.hpp"
#include "qiniup/model.hpp"
#include "qiniup/nelder_mead.hpp"
#include "qiniup/report.hpp"
#include "qiniup/select.hpp"
#include "qiniup/simulation.hpp"
#include "qiniup/synthetic.hpp"

namespace qiniup::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kToolVersion = "0.3.0";

struct Common {
  std::string data;
  std::string treatment;
  std::string outcome;
  std::string out_dir = ".";
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct FitArgs {
  Common common;
};

struct SelectArgs {
  Common common;
  std::string method;
  std::optional<std::size_t> J;
  std::size_t K = 5;
  std::size_t L = 100;
  double radius_rel = 0.5;
  double radius_floor = 0.1;
  bool full_space = false;
  std::size_t lambda_count = 100;
  std::optional<double> lambda_eps;
  bool verbose = false;
};

struct EvaluateArgs {
  Common common;
  std::string model;
  std::optional<std::size_t> J;
  double top_fraction = 0.2;
};

struct SimulateArgs {
  std::string data;
  std::string treatment = "t";
  std::string outcome = "y";
  std::string out_dir = ".";
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::size_t depth = 2;
  std::size_t k = 10;
  std::size_t n = 2000;
  std::size_t reps = 20;
  std::size_t J = 10;
  std::size_t trees = 50;
  std::size_t K = 5;
  std::size_t L = 100;
  double radius_rel = 0.5;
  double radius_floor = 0.1;
  std::size_t lambda_count = 100;
  std::optional<double> lambda_eps;
  bool loglik_cv = false;
  std::vector<std::string> estimators;
  std::size_t base_n = 5000;
  std::size_t base_continuous = 10;
  std::size_t base_binary = 10;
  double base_treated = 0.5;
};

struct OddsArgs {
  Common common;
  std::string model;
  std::vector<std::string> variables;
  double top_fraction = 0.2;
};

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + p.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + p.string() + "'");
  out << text;
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

template <class Fn>
void write_stream(const fs::path& p, Fn&& fn) {
  std::ostringstream s;
  fn(s);
  write_text(p, s.str());
}

fs::path prepare_out_dir(const std::string& dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

class Manifest {
 public:
  Manifest(std::string command, json params, std::uint64_t seed)
      : command_(std::move(command)), params_(std::move(params)), seed_(seed), started_(utc_now()) {}

  void input(const fs::path& p) {
    const std::string bytes = read_file(p);
    inputs_.push_back({{"path", p.string()}, {"bytes", bytes.size()}, {"fnv1a64", hex64(fnv1a64(bytes))}});
  }

  void write(const fs::path& dir, const std::vector<std::string>& outputs) const {
    write_json(dir / "manifest.json", {{"command", command_},
                                       {"parameters", params_},
                                       {"seed", seed_},
                                       {"inputs", inputs_},
                                       {"outputs", outputs},
                                       {"tool_version", kToolVersion},
                                       {"started_at", started_},
                                       {"finished_at", utc_now()}});
  }

 private:
  std::string command_;
  json params_;
  std::uint64_t seed_;
  std::string started_;
  json inputs_ = json::array();
};

json common_json(const Common& c) {
  return {{"data", c.data},         {"treatment", c.treatment}, {"outcome", c.outcome},
          {"out_dir", c.out_dir},   {"seed", c.seed},           {"threads", c.threads}};
}

void add_common(CLI::App* cmd, Common& c, bool with_seed) {
  cmd->add_option("--data", c.data, "Input CSV with header row")->required();
  cmd->add_option("--treatment", c.treatment, "Name of the 0/1 treatment column")->required();
  cmd->add_option("--outcome", c.outcome, "Name of the 0/1 outcome column")->required();
  cmd->add_option("--out-dir", c.out_dir, "Directory for output files")->capture_default_str();
  if (with_seed) {
    cmd->add_option("--seed", c.seed, "Master random seed")->capture_default_str();
    cmd->add_option("--threads", c.threads, "Worker threads (0 = all cores)")->capture_default_str();
  }
}

std::pair<UpliftCoefficients, std::vector<std::string>> load_model(const std::string& path,
                                                                   const UpliftDataset& ds) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ValidationError("model file '" + path + "' is not valid JSON: " + e.what());
  }
  auto model = model_from_json(j);
  if (model.second != ds.feature_names())
    throw ValidationError("model features do not match the data columns (same names, same order)");
  return model;
}

std::vector<double> uplift_vector(const UpliftCoefficients& c, const UpliftDataset& ds) {
  const Eigen::VectorXd u = predict_uplifts(c, ds.features());
  return {u.data(), u.data() + u.size()};
}

PathOptions path_options(std::size_t count, std::optional<double> eps) {
  PathOptions o;
  o.length = count;
  o.eps = eps;
  return o;
}

void warn_all(std::ostream& err, const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) err << "warning: " << w << '\n';
}

void warn_path(std::ostream& err, const LassoPath& path) {
  std::size_t bad = 0;
  for (const auto& d : path.diagnostics) bad += d.converged ? 0 : 1;
  if (bad) err << "warning: " << bad << " of " << path.size() << " path fits did not converge\n";
}

// fit -----------------------------------------------------------------------

int cmd_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
  const UpliftDataset ds = load_csv(a.common.data, a.common.treatment, a.common.outcome);
  const fs::path dir = prepare_out_dir(a.common.out_dir);
  Manifest manifest("fit", common_json(a.common), a.common.seed);
  manifest.input(a.common.data);

  const MleFit fit = fit_mle(ds);
  const auto& d = fit.diagnostics;
  write_json(dir / "model.json",
             model_to_json(fit.coefficients, ds.feature_names(),
                           {{"method", "mle"}, {"converged", d.converged}, {"separation", d.separation}}));
  write_json(dir / "diagnostics.json", diagnostics_to_json(d));
  manifest.write(dir, {"model.json", "diagnostics.json"});

  out << "log-likelihood " << format_double(d.log_likelihood) << " after " << d.iterations
      << " iterations\n";
  warn_all(err, d.warnings);
  if (!d.converged && !d.separation) {
    err << "error: maximum likelihood did not converge\n";
    return kExitNumerical;
  }
  return kExitOk;
}

// select --------------------------------------------------------------------

const std::vector<std::string> kMethods = {"qlasso", "qlasso-ose", "lhs-q",  "lhs-rho",
                                           "lhs-qadj", "nm-base",   "nm-q",   "loglik-cv"};

int cmd_select(const SelectArgs& a, std::ostream& out, std::ostream& err) {
  const UpliftDataset ds = load_csv(a.common.data, a.common.treatment, a.common.outcome);
  const fs::path dir = prepare_out_dir(a.common.out_dir);
  const std::size_t J = resolve_bins(ds.n(), a.J);
  const PathOptions popt = path_options(a.lambda_count, a.lambda_eps);
  const RandomSeed seed{a.common.seed};
  const auto& names = ds.feature_names();

  json params = common_json(a.common);
  params.update({{"method", a.method},       {"J", J},
                 {"K", a.K},                 {"L", a.L},
                 {"radius_rel", a.radius_rel}, {"radius_floor", a.radius_floor},
                 {"full_space", a.full_space}, {"lambda_count", a.lambda_count},
                 {"lambda_eps", a.lambda_eps ? json(*a.lambda_eps) : json(nullptr)}});
  Manifest manifest("select", params, a.common.seed);
  manifest.input(a.common.data);
  std::vector<std::string> outputs;

  auto emit_path = [&](const LassoPath& path) {
    write_stream(dir / "path.csv", [&](std::ostream& s) { write_path_csv(s, path, names); });
    outputs.push_back("path.csv");
    warn_path(err, path);
  };
  auto emit_selection = [&](const SelectionResult& sel) {
    write_json(dir / "selection.json", selection_to_json(sel, names));
    outputs.push_back("selection.json");
    if (sel.cv) {
      write_stream(dir / "cv.csv", [&](std::ostream& s) { write_cv_csv(s, *sel.cv); });
      outputs.push_back("cv.csv");
    }
    warn_all(err, sel.warnings);
    out << "chosen lambda " << format_double(sel.lambda) << " (index " << sel.lambda_index
        << ", rule " << rule_name(sel.rule) << "), support size " << sel.support.size() << '\n';
  };
  auto emit_search = [&](const SearchResult& r) {
    write_json(dir / "search.json", search_to_json(r, names));
    outputs.push_back("search.json");
    warn_all(err, r.warnings);
    out << "best metric " << format_double(r.value) << " at " << r.origin << " ("
        << r.evaluations << " evaluations)\n";
  };

  UpliftCoefficients model;
  json meta = {{"method", a.method}, {"J", J}};
  if (a.method == "qlasso" || a.method == "nm-q") {
    const LassoPath path = fit_lasso_path(ds, popt);
    emit_path(path);
    const SelectionResult sel = q_lasso_select(path, ds, J, MetricKind::kAdjustedQini, a.common.threads);
    emit_selection(sel);
    meta["lambda"] = sel.lambda;
    model = sel.coefficients;
    if (a.method == "nm-q") {
      const SearchResult r = nelder_mead_search(sel.first_stage, ds, MetricKind::kAdjustedQini, J);
      emit_search(r);
      meta["value"] = r.value;
      model = r.coefficients;
    }
  } else if (a.method == "qlasso-ose" || a.method == "loglik-cv") {
    CvOptions cv;
    cv.K = a.K;
    cv.J = J;
    cv.seed = seed;
    cv.threads = a.common.threads;
    cv.path = popt;
    const SelectionResult sel =
        a.method == "loglik-cv"
            ? loglik_cv_select(ds, cv)
            : cross_validated_select(ds, MetricKind::kAdjustedQini,
                                     SelectionRule::kOneStandardError, cv);
    emit_selection(sel);
    meta["lambda"] = sel.lambda;
    model = sel.coefficients;
  } else if (a.method.rfind("lhs-", 0) == 0) {
    const LassoPath path = fit_lasso_path(ds, popt);
    emit_path(path);
    LhsConfig cfg;
    cfg.samples = a.L;
    cfg.radius_rel = a.radius_rel;
    cfg.radius_floor = a.radius_floor;
    cfg.perturb_support_only = !a.full_space;
    cfg.seed = seed;
    LhsOptions opt;
    opt.threads = a.common.threads;
    opt.keep_log = a.verbose;
    const SearchResult r = lhs_search(path, ds, parse_metric(a.method.substr(4)), J, cfg, opt);
    emit_search(r);
    meta["value"] = r.value;
    model = r.coefficients;
  } else if (a.method == "nm-base") {
    const MleFit mle = fit_mle(ds);
    warn_all(err, mle.diagnostics.warnings);
    const SearchResult r = nelder_mead_search(mle.coefficients, ds, MetricKind::kAdjustedQini, J);
    emit_search(r);
    meta["value"] = r.value;
    model = r.coefficients;
  } else {
    throw ValidationError("unknown method '" + a.method + "'");
  }

  write_json(dir / "model.json", model_to_json(model, names, meta));
  outputs.push_back("model.json");
  manifest.write(dir, outputs);
  return kExitOk;
}

// evaluate ------------------------------------------------------------------

json group_json(const GroupUplift& g, double fraction) {
  return {{"fraction", fraction}, {"n", g.n},           {"n_treat", g.n_treat},
          {"n_control", g.n_control}, {"uplift", g.uplift}, {"mean_predicted_uplift", g.mean_pred}};
}

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream&) {
  const UpliftDataset ds = load_csv(a.common.data, a.common.treatment, a.common.outcome);
  const auto [coeffs, names] = load_model(a.model, ds);
  const fs::path dir = prepare_out_dir(a.common.out_dir);
  const std::size_t J = resolve_bins(ds.n(), a.J);

  json params = common_json(a.common);
  params.update({{"model", a.model}, {"J", J}, {"top_fraction", a.top_fraction}});
  Manifest manifest("evaluate", params, a.common.seed);
  manifest.input(a.common.data);
  manifest.input(a.model);

  const auto pred = uplift_vector(coeffs, ds);
  const EvaluationReport rep = evaluate(ds, pred, J);
  const GroupUplift top = top_group_uplift(ds, pred, a.top_fraction, false);
  const GroupUplift bottom = top_group_uplift(ds, pred, a.top_fraction, true);

  write_json(dir / "report.json", {{"scores", scores_to_json(rep.scores)},
                                   {"J", J},
                                   {"n", ds.n()},
                                   {"overall_uplift", overall_uplift(ds)},
                                   {"top_group", group_json(top, a.top_fraction)},
                                   {"bottom_group", group_json(bottom, a.top_fraction)}});
  write_stream(dir / "curve.csv", [&](std::ostream& s) { write_curve_csv(s, rep.curve); });
  write_stream(dir / "bins.csv", [&](std::ostream& s) { write_bins_csv(s, rep.bins); });
  write_text(dir / "curve.svg", curve_svg(rep.curve));
  write_text(dir / "bins.svg", bins_svg(rep.bins));
  manifest.write(dir, {"report.json", "curve.csv", "bins.csv", "curve.svg", "bins.svg"});

  const int pct = static_cast<int>(std::lround(100 * a.top_fraction));
  out << "qini " << format_double(rep.scores.qini) << "\nkendall " << format_double(rep.scores.kendall)
      << "\nadjusted_qini " << format_double(rep.scores.adjusted_qini) << "\nTop " << pct
      << "% Uplift " << format_double(top.uplift) << "\nBottom " << pct << "% Uplift "
      << format_double(bottom.uplift) << '\n';
  return kExitOk;
}

// simulate ------------------------------------------------------------------

void write_replications_csv(std::ostream& s, const SimulationResult& r) {
  s << "replication,ok,estimator,qini,kendall,adjusted_qini,rmse,rrmse,first_stage_adjusted_qini,"
       "loglik_cv_rank\n";
  for (const auto& rec : r.replications) {
    const std::string fs = rec.first_stage_adjusted_qini ? format_double(*rec.first_stage_adjusted_qini) : "";
    const std::string rank = rec.loglik_cv_rank ? std::to_string(*rec.loglik_cv_rank) : "";
    if (!rec.ok) {
      s << rec.index + 1 << ",0,,,,,,,,\n";
      continue;
    }
    for (Estimator e : r.estimators) {
      const auto& sc = rec.scores[static_cast<std::size_t>(e)];
      if (!sc) continue;
      s << rec.index + 1 << ",1," << estimator_name(e) << ',' << format_double(sc->qini) << ','
        << format_double(sc->kendall) << ',' << format_double(sc->adjusted_qini) << ','
        << format_double(sc->rmse) << ',' << format_double(sc->rrmse) << ',' << fs << ',' << rank
        << '\n';
    }
  }
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  const fs::path dir = prepare_out_dir(a.out_dir);
  std::vector<Estimator> estimators;
  if (a.estimators.empty()) {
    estimators = all_estimators();
  } else {
    for (const auto& name : a.estimators) {
      const Estimator e = parse_estimator(name);
      if (std::find(estimators.begin(), estimators.end(), e) == estimators.end())
        estimators.push_back(e);
    }
  }

  json params = {{"data", a.data},     {"depth", a.depth},   {"k", a.k},
                 {"n", a.n},           {"reps", a.reps},     {"J", a.J},
                 {"trees", a.trees},   {"K", a.K},           {"L", a.L},
                 {"radius_rel", a.radius_rel}, {"radius_floor", a.radius_floor},
                 {"lambda_count", a.lambda_count},
                 {"lambda_eps", a.lambda_eps ? json(*a.lambda_eps) : json(nullptr)},
                 {"loglik_cv", a.loglik_cv}, {"threads", a.threads}, {"seed", a.seed}};
  json names = json::array();
  for (Estimator e : estimators) names.push_back(std::string(estimator_name(e)));
  params["estimators"] = names;
  if (a.data.empty())
    params["base"] = {{"n", a.base_n}, {"continuous", a.base_continuous}, {"binary", a.base_binary},
                      {"treated_fraction", a.base_treated}};
  Manifest manifest("simulate", params, a.seed);

  const RandomSeed seed{a.seed};
  std::optional<UpliftDataset> base;
  if (!a.data.empty()) {
    base.emplace(load_csv(a.data, a.treatment, a.outcome));
    manifest.input(a.data);
  } else {
    BasePopulationConfig bc;
    bc.n = a.base_n;
    bc.continuous = a.base_continuous;
    bc.binary = a.base_binary;
    bc.treated_fraction = a.base_treated;
    bc.seed = seed.derive("base-population");
    base.emplace(generate_base_population(bc));
  }

  ScenarioConfig cfg;
  cfg.depth = a.depth;
  cfg.k = a.k;
  cfg.n_sample = a.n;
  cfg.replications = a.reps;
  cfg.J = a.J;
  cfg.seed = seed;
  cfg.trees = a.trees;
  cfg.lhs.samples = a.L;
  cfg.lhs.radius_rel = a.radius_rel;
  cfg.lhs.radius_floor = a.radius_floor;
  cfg.path = path_options(a.lambda_count, a.lambda_eps);
  cfg.loglik_cv = a.loglik_cv;
  cfg.cv_folds = a.K;
  cfg.threads = a.threads;

  const SimulationResult res = run_simulation(*base, cfg, estimators);
  write_stream(dir / "results.csv", [&](std::ostream& s) { write_summary_csv(s, res.summary); });
  write_text(dir / "results.txt", summary_text_table(res.summary));
  write_stream(dir / "replications.csv", [&](std::ostream& s) { write_replications_csv(s, res); });
  manifest.write(dir, {"results.csv", "results.txt", "replications.csv"});

  out << summary_text_table(res.summary);
  if (res.failures) {
    err << "warning: " << res.failures << " of " << a.reps << " replications failed:\n";
    for (const auto& r : res.replications)
      if (!r.ok) err << "  replication " << r.index + 1 << ": " << r.error << '\n';
  }
  return kExitOk;
}

// report-odds ---------------------------------------------------------------

int cmd_report_odds(const OddsArgs& a, std::ostream& out, std::ostream& err) {
  const UpliftDataset ds = load_csv(a.common.data, a.common.treatment, a.common.outcome);
  const auto [c, names] = load_model(a.model, ds);
  const fs::path dir = prepare_out_dir(a.common.out_dir);

  json params = common_json(a.common);
  params.update({{"model", a.model}, {"variables", a.variables}, {"top_fraction", a.top_fraction}});
  Manifest manifest("report-odds", params, a.common.seed);
  manifest.input(a.common.data);
  manifest.input(a.model);

  std::vector<std::size_t> vars;
  if (a.variables.empty()) {
    for (std::size_t j = 0; j < names.size(); ++j) vars.push_back(j);
  } else {
    for (const auto& v : a.variables) {
      const auto it = std::find(names.begin(), names.end(), v);
      if (it == names.end()) throw ValidationError("unknown variable '" + v + "'");
      vars.push_back(static_cast<std::size_t>(it - names.begin()));
    }
  }

  std::optional<CoefficientCovariance> cov;
  try {
    cov = coefficient_covariance(c, ds);
  } catch (const NumericalError& e) {
    err << "warning: covariance unavailable (" << e.what() << "); reporting point estimates only\n";
  }

  const auto pred = uplift_vector(c, ds);
  const auto order = uplift_order(pred);
  const std::size_t m = std::max<std::size_t>(
      1, std::min(ds.n(), static_cast<std::size_t>(std::ceil(a.top_fraction * static_cast<double>(ds.n()) - 1e-9))));
  const std::size_t p = names.size();

  auto interval = [&](double log_or, std::size_t fa, std::optional<std::size_t> fb) -> json {
    if (!cov || !cov->active(fa) || (fb && !cov->active(*fb))) return nullptr;
    double var = cov->at(fa, fa);
    if (fb) var += cov->at(*fb, *fb) + 2.0 * cov->at(fa, *fb);
    const double se = std::sqrt(std::max(var, 0.0));
    return json::array({std::exp(log_or - 1.96 * se), std::exp(log_or + 1.96 * se)});
  };
  auto fmt = [](const json& v, std::size_t i) -> std::string {
    if (v.is_null()) return "";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v[i].get<double>());
    return buf;
  };
  auto f3 = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return std::string(buf);
  };

  json rows = json::array();
  std::ostringstream csv;
  csv << "variable,or_control,ci_control_low,ci_control_high,or_treated,ci_treated_low,"
         "ci_treated_high,mean_top,mean_bottom,group_or_control,group_or_treated\n";
  double sum0 = 0.0, sum1 = 0.0;
  for (auto j : vars) {
    double top = 0.0, bottom = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      top += ds.features()(order[r], j);
      bottom += ds.features()(order[ds.n() - 1 - r], j);
    }
    top /= static_cast<double>(m);
    bottom /= static_cast<double>(m);
    const double or0 = odds_ratio(c, j, 0), or1 = odds_ratio(c, j, 1);
    const json ci0 = interval(c.main[j], j + 1, std::nullopt);
    const json ci1 = c.interact[j] == 0.0 ? ci0 : interval(c.main[j] + c.interact[j], j + 1, j + p + 2);
    const double g0 = group_odds_ratio(c, j, 0, top, bottom);
    const double g1 = group_odds_ratio(c, j, 1, top, bottom);
    sum0 += c.main[j] * (top - bottom);
    sum1 += (c.main[j] + c.interact[j]) * (top - bottom);
    rows.push_back({{"variable", names[j]}, {"or_control", or0}, {"ci_control", ci0},
                    {"or_treated", or1}, {"ci_treated", ci1}, {"mean_top", top},
                    {"mean_bottom", bottom}, {"group_or_control", g0}, {"group_or_treated", g1}});
    csv << names[j] << ',' << f3(or0) << ',' << fmt(ci0, 0) << ',' << fmt(ci0, 1) << ',' << f3(or1)
        << ',' << fmt(ci1, 0) << ',' << fmt(ci1, 1) << ',' << f3(top) << ',' << f3(bottom) << ','
        << f3(g0) << ',' << f3(g1) << '\n';
  }
  csv << "overall,,,,,,,,," << f3(std::exp(sum0)) << ',' << f3(std::exp(sum1)) << '\n';

  write_text(dir / "odds.csv", csv.str());
  write_json(dir / "odds.json", {{"top_fraction", a.top_fraction},
                                 {"group_size", m},
                                 {"covariance_available", cov.has_value()},
                                 {"variables", rows},
                                 {"overall_group_or_control", std::exp(sum0)},
                                 {"overall_group_or_treated", std::exp(sum1)}});
  manifest.write(dir, {"odds.csv", "odds.json"});
  out << csv.str();
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Qini-based uplift regression", "qiniup"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Maximum-likelihood uplift logistic model");
  add_common(fit_cmd, fit.common, false);

  SelectArgs sel;
  auto* sel_cmd = app.add_subcommand("select", "Lasso-path selection and metric search");
  add_common(sel_cmd, sel.common, true);
  sel_cmd->add_option("--method", sel.method, "Selection pipeline")
      ->required()
      ->check(CLI::IsMember(kMethods));
  sel_cmd->add_option("--J", sel.J, "Number of bins (default: 10 for n >= 1000, else n^(1/6))");
  sel_cmd->add_option("--K", sel.K, "Cross-validation folds")->capture_default_str();
  sel_cmd->add_option("--L", sel.L, "LHS samples per path solution")->capture_default_str();
  sel_cmd->add_option("--radius-rel", sel.radius_rel, "LHS relative half-width")->capture_default_str();
  sel_cmd->add_option("--radius-floor", sel.radius_floor, "LHS absolute half-width floor")
      ->capture_default_str();
  sel_cmd->add_flag("--full-space", sel.full_space, "Let LHS perturb zero coefficients too");
  sel_cmd->add_option("--lambda-count", sel.lambda_count, "Path length")->capture_default_str();
  sel_cmd->add_option("--lambda-eps", sel.lambda_eps, "lambda_min / lambda_max");
  sel_cmd->add_flag("--verbose", sel.verbose, "Log every evaluated LHS candidate");

  EvaluateArgs ev;
  auto* ev_cmd = app.add_subcommand("evaluate", "Qini curve, bins and metrics of a model");
  add_common(ev_cmd, ev.common, false);
  ev_cmd->add_option("--model", ev.model, "Model JSON")->required();
  ev_cmd->add_option("--J", ev.J, "Number of bins");
  ev_cmd->add_option("--top-fraction", ev.top_fraction, "Size of top/bottom groups")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Replicated comparison of the estimators");
  sim_cmd->add_option("--data", sim.data, "Base population CSV (default: generated)");
  sim_cmd->add_option("--treatment", sim.treatment, "Treatment column of --data")->capture_default_str();
  sim_cmd->add_option("--outcome", sim.outcome, "Outcome column of --data")->capture_default_str();
  sim_cmd->add_option("--out-dir", sim.out_dir, "Directory for output files")->capture_default_str();
  sim_cmd->add_option("--seed", sim.seed, "Master random seed")->capture_default_str();
  sim_cmd->add_option("--threads", sim.threads, "Worker threads (0 = all cores)")->capture_default_str();
  sim_cmd->add_option("--depth", sim.depth, "Depth of the generating trees")->capture_default_str();
  sim_cmd->add_option("--k", sim.k, "Features given to the fitted models")->capture_default_str();
  sim_cmd->add_option("--n", sim.n, "Subsample size per replication")->capture_default_str();
  sim_cmd->add_option("--reps", sim.reps, "Replications")->capture_default_str();
  sim_cmd->add_option("--J", sim.J, "Number of bins")->capture_default_str();
  sim_cmd->add_option("--trees", sim.trees, "Trees in the generating ensemble")->capture_default_str();
  sim_cmd->add_option("--K", sim.K, "Folds for --loglik-cv")->capture_default_str();
  sim_cmd->add_option("--L", sim.L, "LHS samples per path solution")->capture_default_str();
  sim_cmd->add_option("--radius-rel", sim.radius_rel, "LHS relative half-width")->capture_default_str();
  sim_cmd->add_option("--radius-floor", sim.radius_floor, "LHS absolute half-width floor")
      ->capture_default_str();
  sim_cmd->add_option("--lambda-count", sim.lambda_count, "Path length")->capture_default_str();
  sim_cmd->add_option("--lambda-eps", sim.lambda_eps, "lambda_min / lambda_max");
  sim_cmd->add_flag("--loglik-cv", sim.loglik_cv, "Rank the log-likelihood CV lambda per replication");
  sim_cmd->add_option("--estimators", sim.estimators, "Comma-separated estimator names")
      ->delimiter(',');
  sim_cmd->add_option("--base-n", sim.base_n, "Size of the generated base population")
      ->capture_default_str();
  sim_cmd->add_option("--base-continuous", sim.base_continuous, "Continuous base features")
      ->capture_default_str();
  sim_cmd->add_option("--base-binary", sim.base_binary, "Binary base features")->capture_default_str();
  sim_cmd->add_option("--base-treated", sim.base_treated, "Treated fraction of the base population")
      ->capture_default_str();

  OddsArgs odds;
  auto* odds_cmd = app.add_subcommand("report-odds", "Odds ratios with 95% intervals");
  add_common(odds_cmd, odds.common, false);
  odds_cmd->add_option("--model", odds.model, "Model JSON (maximum-likelihood refit)")->required();
  odds_cmd->add_option("--variables", odds.variables, "Comma-separated feature names")->delimiter(',');
  odds_cmd->add_option("--top-fraction", odds.top_fraction, "Size of top/bottom groups")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*fit_cmd) return cmd_fit(fit, out, err);
    if (*sel_cmd) return cmd_select(sel, out, err);
    if (*ev_cmd) return cmd_evaluate(ev, out, err);
    if (*sim_cmd) return cmd_simulate(sim, out, err);
    if (*odds_cmd) return cmd_report_odds(odds, out, err);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace qiniup::cli
