#include "qiniup/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace qiniup {
namespace {

constexpr double kWorst = -std::numeric_limits<double>::infinity();

double sanitize(double v) { return std::isfinite(v) ? v : kWorst; }

}  // namespace

NelderMeadTrace nelder_mead_maximize(const std::function<double(const Eigen::VectorXd&)>& f,
                                     const Eigen::VectorXd& x0, const NelderMeadOptions& options) {
  const auto d = x0.size();
  NelderMeadTrace out;
  auto eval = [&](const Eigen::VectorXd& x) {
    const double v = sanitize(f(x));
    ++out.evaluations;
    if (out.evaluations == 1 || v > out.value) {
      out.value = v;
      out.best = x;
    }
    return v;
  };

  std::vector<Eigen::VectorXd> simplex{x0};
  std::vector<double> values{eval(x0)};
  for (Eigen::Index j = 0; j < d; ++j) {
    Eigen::VectorXd v = x0;
    v[j] += std::max(options.offset_rel * std::abs(x0[j]), options.offset_floor);
    simplex.push_back(v);
    values.push_back(eval(v));
  }
  if (d == 0) return out;

  std::vector<std::size_t> order(simplex.size());
  while (out.iterations < options.max_iterations) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    std::vector<Eigen::VectorXd> s2;
    std::vector<double> v2;
    for (auto i : order) {
      s2.push_back(simplex[i]);
      v2.push_back(values[i]);
    }
    simplex.swap(s2);
    values.swap(v2);

    const double best = values.front();
    const double worst = values.back();
    if (best == kWorst) break;
    if (worst != kWorst && best - worst < options.spread_tolerance) break;

    ++out.iterations;
    const auto last = static_cast<std::size_t>(d);
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (std::size_t i = 0; i < last; ++i) centroid += simplex[i];
    centroid /= static_cast<double>(d);

    const Eigen::VectorXd xr = centroid + options.reflection * (centroid - simplex[last]);
    const double fr = eval(xr);
    bool shrink = false;
    if (fr > values[0]) {
      const Eigen::VectorXd xe = centroid + options.expansion * (xr - centroid);
      const double fe = eval(xe);
      if (fe > fr) {
        simplex[last] = xe;
        values[last] = fe;
      } else {
        simplex[last] = xr;
        values[last] = fr;
      }
    } else if (fr > values[last - 1]) {
      simplex[last] = xr;
      values[last] = fr;
    } else if (fr > values[last]) {
      const Eigen::VectorXd xc = centroid + options.contraction * (xr - centroid);
      const double fc = eval(xc);
      if (fc >= fr) {
        simplex[last] = xc;
        values[last] = fc;
      } else {
        shrink = true;
      }
    } else {
      const Eigen::VectorXd xc = centroid + options.contraction * (simplex[last] - centroid);
      const double fc = eval(xc);
      if (fc > values[last]) {
        simplex[last] = xc;
        values[last] = fc;
      } else {
        shrink = true;
      }
    }
    if (shrink) {
      for (std::size_t i = 1; i < simplex.size(); ++i) {
        simplex[i] = simplex[0] + options.shrink * (simplex[i] - simplex[0]);
        values[i] = eval(simplex[i]);
      }
    }
    out.trace.push_back(out.value);
  }
  return out;
}

SearchResult nelder_mead_search(const UpliftCoefficients& init, const UpliftDataset& ds,
                                MetricKind metric, std::size_t J,
                                const NelderMeadOptions& options) {
  init.validate();
  init.check_dimension(ds.p());
  const std::size_t p = ds.p();
  const Eigen::VectorXd flat = init.flat();
  std::vector<std::size_t> active;
  for (std::size_t k = 0; k < static_cast<std::size_t>(flat.size()); ++k)
    if (k == 0 || k == p + 1 || flat[k] != 0.0) active.push_back(k);

  MetricEvaluator eval(ds, J);
  auto expand = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd full = flat;
    for (std::size_t i = 0; i < active.size(); ++i) full[active[i]] = v[i];
    return UpliftCoefficients::from_flat(full);
  };
  auto objective = [&](const Eigen::VectorXd& v) {
    const auto s = score_coefficients(eval, expand(v));
    return s ? metric_value(*s, metric) : kWorst;
  };

  Eigen::VectorXd x0(active.size());
  for (std::size_t i = 0; i < active.size(); ++i) x0[i] = flat[active[i]];
  const NelderMeadTrace t = nelder_mead_maximize(objective, x0, options);
  if (t.value == kWorst)
    throw ValidationError("Nelder-Mead could not score any vertex: some bin lacks an arm; "
                          "use fewer bins (smaller J)");

  SearchResult r;
  r.coefficients = expand(t.best);
  r.value = t.value;
  r.origin = "nelder-mead after " + std::to_string(t.iterations) + " iterations";
  r.evaluations = t.evaluations;
  r.trace = t.trace;
  return r;
}

}  // namespace qiniup
