#include "spinlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spinlab/sampler.hpp"
#include "spinlab/util.hpp"

namespace spinlab {
namespace {

void check_repulsive_variance(const LatticeModel& model, double var_sum, int K,
                              double sigma) {
  if (model.J < 0.0 && var_sum < 0.1 * K)
    throw ConsistencyError("repulsive model fails the empirical variance condition "
                           "Var(sum) >= 0.1 K at (K=" + std::to_string(K) +
                           ", sigma=" + std::to_string(sigma) + ")");
}

struct CellResult {
  double c0 = 0.0, c1 = 0.0, c2 = 0.0;
};

//! One (K, sigma) cell of the equivalence sweep, identities re-asserted.
CellResult evaluate_cell(const TransferOperator& op, double sigma) {
  const int K = op.K();
  const double h = kStencilStep;

  const GceMoments mom = op.moments(sigma, 2);
  check_repulsive_variance(op.model(), mom.var_sum, K, sigma);
  const double a = mom.log_z / K;
  const double m = mom.m;
  const double d2 = mom.var_sum / K;

  const DensityResult den = density_at_zero(op, sigma);
  const double ace = a + std::log(den.g0) / K;
  const auto ace_at = [&](double sg) {
    const GceMoments mm = op.moments(sg, 2);
    const DensityResult dd = density_at_zero(op, sg);
    return mm.log_z / K + std::log(dd.g0) / K;
  };
  const double ace_p = ace_at(sigma + h);
  const double ace_m = ace_at(sigma - h);

  CellResult out;
  out.c0 = std::abs(a - ace);
  out.c1 = std::abs(m - (ace_p - ace_m) / (2.0 * h));
  out.c2 = std::abs(d2 - (ace_p - 2.0 * ace + ace_m) / (h * h));

  // Cramer identities via the conjugate round trip.
  const double sg2 = sigma_of_m(op, m, sigma);
  const GceMoments mom2 = op.moments(sg2, 2);
  const double hk = sg2 * m - mom2.log_z / K;
  const double g0_rt =
      (std::abs(sg2 - sigma) > 1e-9) ? density_at_zero(op, sg2).g0 : den.g0;
  const double hbar = hk - std::log(g0_rt) / K;
  const auto fail = [&](const char* name) {
    throw ConsistencyError(std::string("rate_study: identity '") + name +
                           "' violated at (K=" + std::to_string(K) +
                           ", sigma=" + std::to_string(sigma) + ")");
  };
  if (!(std::abs((a - ace) - (hbar - hk)) <= 1e-7))
    fail("a_gce - a_ce = h_bar - h_K");
  if (!(std::abs(ace - (sigma * m - hbar)) <= 1e-7))
    fail("a_ce = sigma m - h_bar");
  return out;
}

RateFit fit_rates(const std::vector<int>& K_list, std::vector<double> sup,
                  RateQuantity tag) {
  RateFit fit;
  fit.K_list = K_list;
  fit.sup_diff = std::move(sup);
  fit.quantity_tag = tag;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < fit.K_list.size(); ++i) {
    lx.push_back(std::log(static_cast<double>(fit.K_list[i])));
    ly.push_back(std::log(fit.sup_diff[i]));
  }
  const LinearFit lf = linear_fit(lx, ly);
  fit.slope = lf.slope;
  fit.intercept = lf.intercept;
  fit.r_squared = lf.r_squared;
  if (lf.r_squared < 0.9 && fit.K_list.size() > 2) {
    // The theorem is asymptotic: drop the pre-asymptotic smallest K, refit.
    const LinearFit rf = linear_fit({lx.begin() + 1, lx.end()}, {ly.begin() + 1, ly.end()});
    fit.refit = RateFit::Refit{rf.slope, rf.intercept, rf.r_squared, fit.K_list[0]};
  }
  return fit;
}

} // namespace

std::vector<double> SigmaWindow::points() const {
  if (count < 1)
    throw ConfigError("sigma window needs at least one point");
  return linspace(lo, hi, count);
}

LatticeModel instantiate_K(const LatticeModel& family, int K) {
  for (double si : family.s)
    if (si != family.s[0])
      throw ConfigError("model family requires a uniform external field s");
  return LatticeModel::make(K, family.J, family.s.empty() ? 0.0 : family.s[0],
                            family.sigma, family.potential);
}

QuadratureGrid sweep_grid(const LatticeModel& family, const GridSpec& gs,
                          double max_abs_sigma) {
  LatticeModel proto = family; // only |J|, sup|s|, bound_sup, sigma matter here
  proto.sigma = max_abs_sigma;
  return build_grid(proto, gs.n, gs.tol);
}

std::string to_string(RateQuantity q) {
  switch (q) {
  case RateQuantity::C0:
    return "C0";
  case RateQuantity::C1:
    return "C1";
  case RateQuantity::C2:
    return "C2";
  }
  return "?";
}

RateStudy rate_study(const LatticeModel& family, const std::vector<int>& K_list,
                     const SigmaWindow& window, const GridSpec& gs) {
  if (K_list.size() < 4)
    throw ConfigError("rate_study: need >= 4 K values");
  for (std::size_t i = 0; i + 1 < K_list.size(); ++i)
    if (K_list[i] >= K_list[i + 1])
      throw ConfigError("rate_study: K list must be strictly ascending");
  if (window.lo < -3.0 - 1e-12 || window.hi > 3.0 + 1e-12 || window.lo > window.hi)
    throw ConfigError("rate_study: sigma window must lie inside [-3, 3]");

  const std::vector<double> sigmas = window.points();
  const double sigma_cap = std::max(std::abs(window.lo), std::abs(window.hi));
  const QuadratureGrid grid = sweep_grid(family, gs, sigma_cap + 0.5);

  std::vector<double> sup0, sup1, sup2;
  for (int K : K_list) {
    const LatticeModel model = instantiate_K(family, K);
    const TransferOperator op(model, grid);
    std::vector<CellResult> cells(sigmas.size());
    parallel_for(static_cast<int>(sigmas.size()), [&](int i) {
      cells[static_cast<std::size_t>(i)] =
          evaluate_cell(op, sigmas[static_cast<std::size_t>(i)]);
    });
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (const CellResult& c : cells) {
      s0 = std::max(s0, c.c0);
      s1 = std::max(s1, c.c1);
      s2 = std::max(s2, c.c2);
    }
    sup0.push_back(s0);
    sup1.push_back(s1);
    sup2.push_back(s2);
  }

  RateStudy study;
  study.c0 = fit_rates(K_list, std::move(sup0), RateQuantity::C0);
  study.c1 = fit_rates(K_list, std::move(sup1), RateQuantity::C1);
  study.c2 = fit_rates(K_list, std::move(sup2), RateQuantity::C2);
  return study;
}

ConvexityScan convexity_scan(const LatticeModel& family, int K,
                             const std::vector<double>& m_grid, const GridSpec& gs) {
  if (K < 2)
    throw ConfigError("convexity_scan: K must be >= 2");
  double m_cap = 0.0;
  for (double m : m_grid)
    m_cap = std::max(m_cap, std::abs(m));
  const QuadratureGrid grid =
      sweep_grid(family, gs, m_cap * 1.5 + 1.0 + family.potential.bound_sup());
  const LatticeModel model = instantiate_K(family, K);
  const TransferOperator op(model, grid);

  ConvexityScan scan;
  scan.K = K;
  scan.m_grid = m_grid;
  scan.h_bar_d2.resize(m_grid.size());
  scan.h_K_d2.resize(m_grid.size());
  parallel_for(static_cast<int>(m_grid.size()), [&](int i) {
    const double m = m_grid[static_cast<std::size_t>(i)];
    const HBar hb = h_bar(op, m);
    const LegendreHK hk = legendre_HK(op, m);
    scan.h_bar_d2[static_cast<std::size_t>(i)] = hb.d2;
    scan.h_K_d2[static_cast<std::size_t>(i)] = hk.d2;
  });
  scan.lower = *std::min_element(scan.h_bar_d2.begin(), scan.h_bar_d2.end());
  scan.upper = *std::max_element(scan.h_bar_d2.begin(), scan.h_bar_d2.end());
  if (!std::isfinite(scan.lower) || !std::isfinite(scan.upper))
    throw ConsistencyError("convexity_scan: non-finite curvature");
  return scan;
}

DecayFit decay_study(const LatticeModel& model, int max_distance, const GridSpec& gs) {
  if (model.K < 2 * max_distance)
    throw ConfigError("decay_study: need K >= 2 * max_distance");
  const QuadratureGrid grid = sweep_grid(model, gs, std::abs(model.sigma));
  const TransferOperator op(model, grid);
  const int c = (model.K + 1) / 2;
  const std::vector<double> cov = op.covariance_row(model.sigma, c, max_distance);

  DecayFit fit;
  std::vector<double> xs, ys;
  for (int d = 0; d <= max_distance; ++d) {
    fit.distances.push_back(d);
    fit.cov_values.push_back(cov[static_cast<std::size_t>(d)]);
    if (std::abs(cov[static_cast<std::size_t>(d)]) > 1e-13) {
      xs.push_back(d);
      ys.push_back(std::log(std::abs(cov[static_cast<std::size_t>(d)])));
    }
  }
  if (xs.size() < 2)
    throw DegenerateFitError("decay_study: all covariances below 1e-13 "
                             "(J too small for a decay fit)");
  const LinearFit lf = linear_fit(xs, ys);
  fit.rate_c = -lf.slope;
  fit.prefactor = std::exp(lf.intercept);
  fit.r_squared = lf.r_squared;
  return fit;
}

ConditionalBoundSummary conditional_bound_study(const LatticeModel& family, int trials,
                                                int K, std::uint64_t seed,
                                                const GridSpec& gs) {
  if (trials < 100)
    throw ConfigError("conditional_bound_study: need trials >= 100");
  if (K < 3)
    throw ConfigError("conditional_bound_study: need K >= 3 for interior sites");
  const QuadratureGrid grid = sweep_grid(family, gs, 0.0);
  const LatticeModel base = instantiate_K(family, K);

  Xoshiro256pp rng(seed);
  ConditionalBoundSummary out;
  out.s2_min = std::numeric_limits<double>::infinity();
  out.s2_max = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    ConditionalTrial row;
    row.left = -10.0 + 20.0 * rng.uniform01();
    row.right = -10.0 + 20.0 * rng.uniform01();
    row.sigma = -3.0 + 6.0 * rng.uniform01();
    row.site = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(K - 2)));
    const ConditionalSite cs =
        conditional_site(base.with_sigma(row.sigma), grid, row.site, row.left, row.right);
    row.m_i2 = cs.m_i2;
    row.s_i2_sq = cs.s_i2_sq;
    row.t_i2 = cs.t_i2;
    out.s2_min = std::min(out.s2_min, cs.s_i2_sq);
    out.s2_max = std::max(out.s2_max, cs.s_i2_sq);
    out.trials.push_back(row);
  }
  return out;
}

OuterDecaySummary outer_decay_study(const LatticeModel& model, double delta,
                                    const GridSpec& gs) {
  if (model.K < 8)
    throw ConfigError("outer_decay_study: need K >= 8");
  const QuadratureGrid grid = sweep_grid(model, gs, std::abs(model.sigma));
  const TransferOperator op(model, grid);
  const double rk = std::sqrt(static_cast<double>(model.K));

  OuterDecaySummary out;
  out.delta = delta;
  out.K = model.K;
  out.xi = linspace(delta * rk, 4.0 * delta * rk, 64);
  std::vector<double> tilts{0.0};
  for (double xi : out.xi)
    tilts.push_back(xi / rk);
  const auto lz = op.log_partition_imag_tilts(model.sigma, tilts);
  for (std::size_t i = 0; i < out.xi.size(); ++i) {
    const double a = std::exp(lz[i + 1].real() - lz[0].real());
    out.abs_phi.push_back(a);
    out.max_abs_phi = std::max(out.max_abs_phi, a);
  }
  out.g0 = density_at_zero(op, model.sigma).g0;
  return out;
}

GDerivativeStudy g_derivative_study(const LatticeModel& family,
                                    const std::vector<int>& K_list,
                                    const SigmaWindow& window, const GridSpec& gs) {
  if (K_list.size() < 4)
    throw ConfigError("g_derivative_study: need >= 4 K values");
  const std::vector<double> sigmas = window.points();
  const double sigma_cap = std::max(std::abs(window.lo), std::abs(window.hi));
  const QuadratureGrid grid = sweep_grid(family, gs, sigma_cap + 0.5);
  const double h = kStencilStep;

  GDerivativeStudy study;
  for (int K : K_list) {
    const LatticeModel model = instantiate_K(family, K);
    const TransferOperator op(model, grid);
    struct Cell {
      double g0 = 0.0, d1 = 0.0, d2 = 0.0;
    };
    std::vector<Cell> cells(sigmas.size());
    parallel_for(static_cast<int>(sigmas.size()), [&](int i) {
      const double sg = sigmas[static_cast<std::size_t>(i)];
      const double g = density_at_zero(op, sg).g0;
      const double gp = density_at_zero(op, sg + h).g0;
      const double gm = density_at_zero(op, sg - h).g0;
      cells[static_cast<std::size_t>(i)] = {g, std::abs(gp - gm) / (2.0 * h),
                                            std::abs(gp - 2.0 * g + gm) / (h * h)};
    });
    GDerivativeRow row;
    row.K = K;
    row.g0_min = std::numeric_limits<double>::infinity();
    for (const Cell& c : cells) {
      row.g0_min = std::min(row.g0_min, c.g0);
      row.g0_max = std::max(row.g0_max, c.g0);
      row.d1_max = std::max(row.d1_max, c.d1);
      row.d2_max = std::max(row.d2_max, c.d2);
    }
    study.rows.push_back(row);
  }

  std::vector<double> lk, l1, l2;
  for (const GDerivativeRow& r : study.rows) {
    lk.push_back(std::log(static_cast<double>(r.K)));
    l1.push_back(std::log(std::max(r.d1_max, 1e-300)));
    l2.push_back(std::log(std::max(r.d2_max, 1e-300)));
  }
  study.d1_growth_exponent = linear_fit(lk, l1).slope;
  study.d2_growth_exponent = linear_fit(lk, l2).slope;
  return study;
}

} // namespace spinlab
