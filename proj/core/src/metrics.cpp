#include "qiniup/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qiniup {
namespace {

// Count of observations in the top fraction phi; the small slack keeps
// phi = j/J from rounding up past an exact integer.
std::size_t top_count(double phi, std::size_t n) {
  if (!(phi >= 0.0 && phi <= 1.0)) throw ValidationError("fraction must lie in [0, 1]");
  const double raw = phi * static_cast<double>(n);
  const double c = std::ceil(raw - 1e-9 * std::max(1.0, raw));
  return std::min<std::size_t>(n, static_cast<std::size_t>(std::max(0.0, c)));
}

struct Tally {
  double yt = 0, yc = 0, nt = 0, nc = 0;
  void add(int t, int y) {
    if (t) {
      nt += 1;
      yt += y;
    } else {
      nc += 1;
      yc += y;
    }
  }
  double incremental() const { return yt - yc * (nt / nc); }
  double uplift() const { return yt / nt - yc / nc; }
};

void check_predictions(const UpliftDataset& ds, std::span<const double> pred) {
  if (pred.size() != ds.n())
    throw ValidationError("prediction length " + std::to_string(pred.size()) +
                          " does not match dataset size " + std::to_string(ds.n()));
}

int sign(double v) { return (v > 0) - (v < 0); }

}  // namespace

double overall_uplift(const UpliftDataset& ds) {
  Tally all;
  for (std::size_t i = 0; i < ds.n(); ++i) all.add(ds.treatment()[i], ds.outcome()[i]);
  return all.uplift();
}

std::vector<std::size_t> uplift_order(std::span<const double> pred) {
  std::vector<std::size_t> order(pred.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pred[a] > pred[b]; });
  return order;
}

double incremental_uplift(const UpliftDataset& ds, std::span<const double> pred, double phi) {
  check_predictions(ds, pred);
  const std::size_t m = top_count(phi, ds.n());
  if (m == 0) return 0.0;
  const auto order = uplift_order(pred);
  Tally top;
  for (std::size_t r = 0; r < m; ++r) top.add(ds.treatment()[order[r]], ds.outcome()[order[r]]);
  if (top.nc == 0)
    throw ValidationError("no control observation among the top " + std::to_string(m) +
                          " predictions; use fewer bins or a coarser grid");
  return top.incremental();
}

MetricEvaluator::MetricEvaluator(const UpliftDataset& ds, std::size_t J)
    : ds_(ds), J_(J), order_(ds.n()) {
  if (J == 0) throw ValidationError("bin count J must be positive");
  if (J > ds.n()) throw ValidationError("bin count J exceeds the number of observations");
}

bool MetricEvaluator::build(std::span<const double> pred, BinTable& table, QiniCurve& curve,
                            std::string* why) {
  check_predictions(ds_, pred);
  const std::size_t n = ds_.n();
  keyed_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(pred[i])) throw ValidationError("predictions must be finite");
    keyed_[i] = {pred[i], i};
  }
  // Same order as a stable sort on -pred, but sorts contiguous keys.
  std::sort(keyed_.begin(), keyed_.end(), [](const auto& a, const auto& b) {
    return a.first > b.first || (a.first == b.first && a.second < b.second);
  });
  for (std::size_t i = 0; i < n; ++i) order_[i] = keyed_[i].second;

  const auto& t = ds_.treatment();
  const auto& y = ds_.outcome();
  table.bins.assign(J_, Bin{});
  curve.grid.assign(J_ + 1, 0.0);
  curve.values.assign(J_ + 1, 0.0);

  Tally cumulative;
  std::size_t start = 0;
  for (std::size_t k = 0; k < J_; ++k) {
    const std::size_t end = ((k + 1) * n + J_ - 1) / J_;
    Tally bin;
    double sum = 0.0;
    for (std::size_t r = start; r < end; ++r) {
      const auto i = order_[r];
      bin.add(t[i], y[i]);
      cumulative.add(t[i], y[i]);
      sum += pred[i];
    }
    if (bin.nt == 0 || bin.nc == 0) {
      if (why)
        *why = "bin " + std::to_string(k + 1) + " of " + std::to_string(J_) + " has no " +
               (bin.nt == 0 ? "treated" : "control") +
               " observation; use fewer bins (smaller J)";
      return false;
    }
    Bin& b = table.bins[k];
    b.n = end - start;
    b.n_treat = static_cast<std::size_t>(bin.nt);
    b.n_control = static_cast<std::size_t>(bin.nc);
    b.pred_max = pred[order_[start]];
    b.pred_min = pred[order_[end - 1]];
    b.pred_uplift = std::clamp(sum / static_cast<double>(b.n), b.pred_min, b.pred_max);
    b.obs_uplift = bin.uplift();
    curve.grid[k + 1] = static_cast<double>(k + 1) / static_cast<double>(J_);
    curve.values[k + 1] = cumulative.incremental() / static_cast<double>(ds_.n_treated());
    start = end;
  }
  curve.grid[J_] = 1.0;
  curve.values[J_] = cumulative.uplift();
  return true;
}

namespace {

MetricScores score_tables(const BinTable& bins, const QiniCurve& curve) {
  MetricScores s;
  s.qini = qini_coefficient(curve);
  s.kendall = bins.J() >= 2 ? kendall_uplift_correlation(bins) : 0.0;
  s.adjusted_qini = adjusted_qini(s.qini, s.kendall);
  return s;
}

}  // namespace

std::optional<MetricScores> MetricEvaluator::try_scores(std::span<const double> pred) {
  if (!build(pred, bins_, curve_, nullptr)) return std::nullopt;
  return score_tables(bins_, curve_);
}

MetricScores MetricEvaluator::scores(std::span<const double> pred) {
  std::string why;
  if (!build(pred, bins_, curve_, &why)) throw ValidationError(why);
  return score_tables(bins_, curve_);
}

EvaluationReport MetricEvaluator::report(std::span<const double> pred) {
  EvaluationReport r;
  std::string why;
  if (!build(pred, r.bins, r.curve, &why)) throw ValidationError(why);
  r.scores = score_tables(r.bins, r.curve);
  return r;
}

BinTable bin_table(const UpliftDataset& ds, std::span<const double> pred, std::size_t J) {
  return MetricEvaluator(ds, J).report(pred).bins;
}

QiniCurve qini_curve(const UpliftDataset& ds, std::span<const double> pred, std::size_t J) {
  return MetricEvaluator(ds, J).report(pred).curve;
}

EvaluationReport evaluate(const UpliftDataset& ds, std::span<const double> pred, std::size_t J) {
  return MetricEvaluator(ds, J).report(pred);
}

double qini_coefficient(const QiniCurve& curve) {
  if (curve.grid.size() < 2 || curve.grid.size() != curve.values.size())
    throw ValidationError("Qini curve needs at least two grid points");
  const double g1 = curve.values.back();
  double area = 0.0;
  for (std::size_t j = 0; j + 1 < curve.grid.size(); ++j) {
    const double q0 = curve.values[j] - curve.grid[j] * g1;
    const double q1 = curve.values[j + 1] - curve.grid[j + 1] * g1;
    area += (curve.grid[j + 1] - curve.grid[j]) * (q1 + q0);
  }
  return 0.5 * area;
}

double kendall_uplift_correlation(const BinTable& table) {
  const auto& b = table.bins;
  const std::size_t J = b.size();
  if (J < 2) throw ValidationError("Kendall uplift correlation needs J >= 2");
  long long total = 0;
  for (std::size_t i = 0; i < J; ++i) {
    for (std::size_t j = i + 1; j < J; ++j) {
      // Bins come from a sorted order, so comparing ranges decides the sign of
      // the mean difference exactly; means are only consulted for overlaps.
      int sp;
      if (b[i].pred_min > b[j].pred_max)
        sp = 1;
      else if (b[i].pred_max < b[j].pred_min)
        sp = -1;
      else if (b[i].pred_min == b[i].pred_max && b[j].pred_min == b[j].pred_max)
        sp = 0;
      else
        sp = sign(b[i].pred_uplift - b[j].pred_uplift);
      total += sp * sign(b[i].obs_uplift - b[j].obs_uplift);
    }
  }
  return 2.0 * static_cast<double>(total) / (static_cast<double>(J) * static_cast<double>(J - 1));
}

double kendall_uplift_correlation(std::span<const double> pred_means,
                                  std::span<const double> obs_uplifts) {
  const std::size_t J = pred_means.size();
  if (obs_uplifts.size() != J) throw ValidationError("bin vectors differ in length");
  if (J < 2) throw ValidationError("Kendall uplift correlation needs J >= 2");
  long long total = 0;
  for (std::size_t i = 0; i < J; ++i)
    for (std::size_t j = i + 1; j < J; ++j)
      total += sign(pred_means[i] - pred_means[j]) * sign(obs_uplifts[i] - obs_uplifts[j]);
  return 2.0 * static_cast<double>(total) / (static_cast<double>(J) * static_cast<double>(J - 1));
}

double adjusted_qini(double q_hat, double rho) { return rho * std::max(0.0, q_hat); }

double uplift_rmse(std::span<const double> true_uplift, std::span<const double> pred_uplift) {
  if (true_uplift.size() != pred_uplift.size())
    throw ValidationError("uplift vectors differ in length");
  if (true_uplift.empty()) throw ValidationError("uplift vectors are empty");
  double ss = 0.0;
  for (std::size_t i = 0; i < true_uplift.size(); ++i) {
    const double r = true_uplift[i] - pred_uplift[i];
    ss += r * r;
  }
  return std::sqrt(ss / static_cast<double>(true_uplift.size()));
}

double relative_rmse(double rmse_model, double rmse_baseline) {
  if (rmse_model == rmse_baseline) return 1.0;
  return rmse_model / rmse_baseline;
}

std::size_t default_bins(std::size_t n) {
  if (n < 2) throw ValidationError("default_bins needs n >= 2");
  const double j = std::round(std::pow(static_cast<double>(n), 1.0 / 6.0));
  return static_cast<std::size_t>(std::clamp(j, 2.0, 10.0));
}

std::size_t resolve_bins(std::size_t n, std::optional<std::size_t> requested) {
  if (requested) {
    if (*requested == 0) throw ValidationError("bin count J must be positive");
    return *requested;
  }
  return n >= 1000 ? 10 : default_bins(n);
}

GroupUplift top_group_uplift(const UpliftDataset& ds, std::span<const double> pred,
                             double fraction, bool bottom) {
  check_predictions(ds, pred);
  const std::size_t m = top_count(fraction, ds.n());
  if (m == 0) throw ValidationError("group fraction selects no observations");
  const auto order = uplift_order(pred);
  Tally tally;
  double sum = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    const auto i = bottom ? order[ds.n() - 1 - r] : order[r];
    tally.add(ds.treatment()[i], ds.outcome()[i]);
    sum += pred[i];
  }
  if (tally.nt == 0 || tally.nc == 0)
    throw ValidationError(std::string(bottom ? "bottom" : "top") + " group lacks a " +
                          (tally.nt == 0 ? "treated" : "control") + " observation");
  GroupUplift g;
  g.n = m;
  g.n_treat = static_cast<std::size_t>(tally.nt);
  g.n_control = static_cast<std::size_t>(tally.nc);
  g.uplift = tally.uplift();
  g.mean_pred = sum / static_cast<double>(m);
  return g;
}

}  // namespace qiniup
