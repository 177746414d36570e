#include "qiniup/synthetic.hpp"

#include <cmath>

#include "qiniup/model.hpp"

namespace qiniup {

SyntheticSample generate_synthetic(const SyntheticTruth& truth, const UpliftDataset& base,
                                   RandomSeed seed) {
  if (truth.p() != base.p())
    throw ValidationError("truth expects " + std::to_string(truth.p()) + " features, base has " +
                          std::to_string(base.p()));
  const std::size_t n = base.n();
  Rng rng = make_rng(seed);
  std::vector<std::size_t> rows(n);
  for (auto& r : rows) r = static_cast<std::size_t>(uniform_index(rng, n));

  std::vector<int> t(n), y(n);
  std::vector<double> p1(n), p0(n), u(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto [a, b] = truth.probabilities(base.features().row(rows[i]).transpose());
    p1[i] = a;
    p0[i] = b;
    u[i] = a - b;
    const int y1 = bernoulli(rng, a);
    const int y0 = bernoulli(rng, b);
    t[i] = base.treatment()[rows[i]];
    y[i] = t[i] ? y1 : y0;
  }
  Eigen::MatrixXd x(n, base.p());
  for (std::size_t i = 0; i < n; ++i) x.row(i) = base.features().row(rows[i]);
  return {UpliftDataset(std::move(x), std::move(t), std::move(y), base.feature_names()),
          std::move(p1), std::move(p0), std::move(u)};
}

UpliftDataset generate_base_population(const BasePopulationConfig& cfg) {
  if (cfg.n < 2) throw ValidationError("base population needs n >= 2");
  if (!(cfg.treated_fraction > 0.0 && cfg.treated_fraction < 1.0))
    throw ValidationError("treated fraction must lie in (0, 1)");
  const std::size_t p = cfg.continuous + cfg.binary;

  Rng coef_rng = make_rng(cfg.seed.derive("base-model"));
  UpliftCoefficients model = UpliftCoefficients::zero(p);
  model.intercept = cfg.intercept;
  model.treat = cfg.treat;
  for (std::size_t j = 0; j < p; ++j) model.main[j] = cfg.main_scale * standard_normal(coef_rng);
  for (std::size_t j = 0; j < std::min(cfg.interacting, p); ++j)
    model.interact[j] = (j % 2 == 0 ? 1.0 : -1.0) * cfg.interact_scale;
  std::vector<double> rates(cfg.binary);
  for (auto& r : rates) r = 0.1 + 0.4 * uniform01(coef_rng);

  Rng rng = make_rng(cfg.seed.derive("base-rows"));
  Eigen::MatrixXd x(cfg.n, p);
  std::vector<int> t(cfg.n), y(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    for (std::size_t j = 0; j < cfg.continuous; ++j) x(i, j) = standard_normal(rng);
    for (std::size_t j = 0; j < cfg.binary; ++j) x(i, cfg.continuous + j) = bernoulli(rng, rates[j]);
    t[i] = bernoulli(rng, cfg.treated_fraction);
    y[i] = bernoulli(rng, predict_prob(model, x.row(i).transpose(), t[i]));
  }
  // Guarantee both arms even for tiny n.
  t[0] = 1;
  t[1] = 0;

  std::vector<std::string> names;
  for (std::size_t j = 0; j < cfg.continuous; ++j) names.push_back("x" + std::to_string(j + 1));
  for (std::size_t j = 0; j < cfg.binary; ++j) names.push_back("d" + std::to_string(j + 1));
  return UpliftDataset(std::move(x), std::move(t), std::move(y), std::move(names));
}

}  // namespace qiniup
