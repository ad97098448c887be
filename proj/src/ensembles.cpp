#include "spinlab/ensembles.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace spinlab {
namespace {

struct Basics {
  double a = 0.0;  // A_gce
  double m = 0.0;  // mean spin
  double d2 = 0.0; // var_sum / K
};

Basics basics(const TransferOperator& op, double sigma) {
  const GceMoments mom = op.moments(sigma, 2);
  return {mom.log_z / op.K(), mom.m, mom.var_sum / op.K()};
}

//! Composite Simpson of samples y_0..y_n (n even) with spacing h.
std::complex<double> simpson(const std::vector<std::complex<double>>& y, int n, double h) {
  std::complex<double> acc = y[0] + y[static_cast<std::size_t>(n)];
  for (int j = 1; j < n; ++j)
    acc += y[static_cast<std::size_t>(j)] * ((j % 2) ? 4.0 : 2.0);
  return acc * (h / 3.0);
}

double h_bar_value(const TransferOperator& op, double m, const DensityOptions& opts,
                   double warm_sigma, double* sigma_out) {
  const double sg = sigma_of_m(op, m, warm_sigma);
  const Basics b = basics(op, sg);
  const DensityResult den = density_at_zero(op, sg, opts);
  if (sigma_out)
    *sigma_out = sg;
  return sg * m - b.a - std::log(den.g0) / op.K();
}

} // namespace

AGce a_gce(const TransferOperator& op, double sigma) {
  const Basics b = basics(op, sigma);
  return {b.a, b.m, b.d2};
}

double sigma_of_m(const TransferOperator& op, double m, double warm_start) {
  if (!std::isfinite(m))
    throw ConfigError("sigma_of_m: m must be finite");
  const double budget = op.grid().chain_tilt_budget(op.model());

  const auto f = [&](double sigma) { return basics(op, sigma); };

  double x = std::isfinite(warm_start) ? warm_start : m * (1.0 - 2.0 * op.model().J);
  x = std::clamp(x, -budget, budget);
  Basics bx = f(x);

  // Bracket [lo, hi] with mean(lo) < m < mean(hi); mean is increasing.
  double lo = x, hi = x, flo = bx.m - m, fhi = bx.m - m;
  double width = 0.5;
  while (flo > 0.0) {
    if (lo <= -budget)
      throw ConvergenceError("sigma_of_m: bracket [" + std::to_string(lo) + ", " +
                             std::to_string(hi) + "] hit the grid budget " +
                             std::to_string(budget));
    lo = std::max(lo - width, -budget);
    flo = f(lo).m - m;
    width *= 2.0;
  }
  width = 0.5;
  while (fhi < 0.0) {
    if (hi >= budget)
      throw ConvergenceError("sigma_of_m: bracket [" + std::to_string(lo) + ", " +
                             std::to_string(hi) + "] hit the grid budget " +
                             std::to_string(budget));
    hi = std::min(hi + width, budget);
    fhi = f(hi).m - m;
    width *= 2.0;
  }

  x = std::clamp(x, lo, hi);
  bx = f(x);
  for (int it = 0; it < 100; ++it) {
    const double fx = bx.m - m;
    if (std::abs(fx) <= kConjugateTol)
      return x;
    if (fx > 0.0)
      hi = x;
    else
      lo = x;
    // d mean / d sigma = Var(sum)/K = bx.d2, strictly positive.
    double next = x - fx / (bx.d2 <= 0.0 ? 1.0 : bx.d2);
    if (!(next > lo && next < hi))
      next = 0.5 * (lo + hi);
    x = next;
    bx = f(x);
  }
  throw ConvergenceError("sigma_of_m: no convergence in 100 iterations, bracket [" +
                         std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

LegendreHK legendre_HK(const TransferOperator& op, double m) {
  const double sg = sigma_of_m(op, m);
  const Basics b = basics(op, sg);
  LegendreHK out;
  out.sigma = sg;
  out.value = sg * m - b.a;
  out.d2 = 1.0 / b.d2; // dsigma/dm = (dm/dsigma)^{-1} = K / Var(sum)
  return out;
}

std::complex<double> char_fn(const TransferOperator& op, double sigma, double m,
                             double xi) {
  const double rk = std::sqrt(static_cast<double>(op.K()));
  const std::vector<double> tilts{0.0, xi / rk};
  const auto lz = op.log_partition_imag_tilts(sigma, tilts);
  return std::exp(lz[1] - lz[0] - std::complex<double>(0.0, xi * rk * m));
}

DensityResult density_at_zero(const TransferOperator& op, double sigma,
                              const DensityOptions& opts) {
  const int K = op.K();
  const double rk = std::sqrt(static_cast<double>(K));
  const Basics b = basics(op, sigma);
  const double v = std::max(b.d2, 1e-4);

  const double h0 = std::min(0.05, 0.5 / std::sqrt(v));
  const double split = opts.delta * rk;
  const int n1 = 2 * static_cast<int>(std::ceil(split / (2.0 * h0)));
  const double h = split / n1; // delta*sqrt(K) lands exactly on the grid
  const double decay_guess =
      std::sqrt(2.0 * std::log(1.0 / opts.phi_cutoff) / v) * 1.15 + 1.0;
  int n2 = std::max(n1, 2 * static_cast<int>(std::ceil(decay_guess / (2.0 * h))));

  std::vector<std::complex<double>> phi;
  for (;;) {
    std::vector<double> tilts(static_cast<std::size_t>(n2) + 1);
    for (int j = 0; j <= n2; ++j)
      tilts[static_cast<std::size_t>(j)] = j * h / rk;
    const auto lz = op.log_partition_imag_tilts(sigma, tilts);
    phi.resize(tilts.size());
    for (int j = 0; j <= n2; ++j) {
      const std::complex<double> phase(0.0, j * h * rk * b.m);
      phi[static_cast<std::size_t>(j)] = std::exp(lz[static_cast<std::size_t>(j)] -
                                                  lz[0] - phase);
    }
    const int tail = std::max(4, n2 / 16);
    double tail_max = 0.0;
    for (int j = n2 - tail; j <= n2; ++j)
      tail_max = std::max(tail_max, std::abs(phi[static_cast<std::size_t>(j)]));
    if (tail_max <= opts.phi_cutoff)
      break;
    n2 = 2 * static_cast<int>(std::ceil(n2 * 0.65)); // grow by ~30%
    if (n2 * h > opts.max_xi_factor * rk)
      throw ConsistencyError(
          "density_at_zero: characteristic function failed to decay below " +
          std::to_string(opts.phi_cutoff) + " by xi = " +
          std::to_string(opts.max_xi_factor) + "*sqrt(K); grid or model pathology");
  }

  const double pi = std::acos(-1.0);
  // phi(-xi) = conj(phi(xi)), so the two-sided integral is twice the real part.
  const std::complex<double> s_full = simpson(phi, n2, h);
  const std::complex<double> s_inner = simpson(phi, n1, h);

  DensityResult out;
  out.delta = opts.delta;
  out.xi_step = h;
  out.xi_max = n2 * h;
  out.g0 = s_full.real() / pi;
  out.inner_value = (s_inner + std::conj(s_inner)) / (2.0 * pi);

  const double xi_hi = n2 * h;
  std::vector<double> sample_tilts(8);
  for (int k = 0; k < 8; ++k)
    sample_tilts[static_cast<std::size_t>(k)] = (xi_hi * (1.0 + (k + 1) / 8.0)) / rk;
  const auto lz_tail = op.log_partition_imag_tilts(sigma, sample_tilts);
  const double lz0_re = op.log_partition(sigma);
  double tail_abs = 0.0;
  for (const auto& l : lz_tail)
    tail_abs = std::max(tail_abs, std::exp(l.real() - lz0_re));
  out.outer_bound = 2.0 * xi_hi * tail_abs / (2.0 * pi);

  if (!(out.g0 > 0.0))
    throw ConsistencyError("density_at_zero: nonpositive g0");
  return out;
}

double a_ce(const TransferOperator& op, double sigma, const DensityOptions& opts) {
  const Basics b = basics(op, sigma);
  const DensityResult den = density_at_zero(op, sigma, opts);
  return b.a + std::log(den.g0) / op.K();
}

HBar h_bar(const TransferOperator& op, double m, const DensityOptions& opts) {
  double sg = 0.0;
  const double h = kStencilStep;
  const double v0 = h_bar_value(op, m, opts, std::numeric_limits<double>::quiet_NaN(), &sg);
  const double vp = h_bar_value(op, m + h, opts, sg, nullptr);
  const double vm = h_bar_value(op, m - h, opts, sg, nullptr);
  HBar out;
  out.value = v0;
  out.d1 = (vp - vm) / (2.0 * h);
  out.d2 = (vp - 2.0 * v0 + vm) / (h * h);
  return out;
}

double h_bar_direct(const LatticeModel& model, double m, const DirectResolution& res) {
  const int K = model.K;
  if (K > 4)
    throw ConfigError("h_bar_direct: K > 4 unsupported (oracle only)");
  if (K == 1)
    return model.potential.psi(m) + model.s[0] * m;

  const int n = res.points_per_axis;
  const double step = 2.0 * res.half_width / (n - 1);
  const int dims = K - 1;
  std::vector<int> idx(static_cast<std::size_t>(dims), 0);
  std::vector<double> x(static_cast<std::size_t>(K), 0.0);
  double acc = 0.0;
  for (;;) {
    double sum = 0.0;
    for (int d = 0; d < dims; ++d) {
      x[static_cast<std::size_t>(d)] =
          m - res.half_width + step * idx[static_cast<std::size_t>(d)];
      sum += x[static_cast<std::size_t>(d)];
    }
    x[static_cast<std::size_t>(K - 1)] = K * m - sum;
    acc += std::exp(-hamiltonian(model, x));
    int d = 0;
    for (; d < dims; ++d) {
      if (++idx[static_cast<std::size_t>(d)] < n)
        break;
      idx[static_cast<std::size_t>(d)] = 0;
    }
    if (d == dims)
      break;
  }
  const double integral = acc * std::pow(step, dims) * std::sqrt(static_cast<double>(K));
  return -std::log(integral) / K;
}

ThermoReport thermo_report(const TransferOperator& op, double sigma,
                           const DensityOptions& opts) {
  const int K = op.K();
  const double h = kStencilStep;

  const Basics b0 = basics(op, sigma);
  const DensityResult den0 = density_at_zero(op, sigma, opts);

  ThermoReport r;
  r.sigma = sigma;
  r.m = b0.m;
  r.a_gce = b0.a;
  r.a_gce_d1 = b0.m;
  r.a_gce_d2 = b0.d2;
  r.g0 = den0.g0;
  r.a_ce = b0.a + std::log(den0.g0) / K;

  const auto ace_at = [&](double sg) {
    const Basics b = basics(op, sg);
    const DensityResult den = density_at_zero(op, sg, opts);
    return b.a + std::log(den.g0) / K;
  };
  const double ace_p = ace_at(sigma + h);
  const double ace_m = ace_at(sigma - h);
  r.a_ce_d1 = (ace_p - ace_m) / (2.0 * h);
  r.a_ce_d2 = (ace_p - 2.0 * r.a_ce + ace_m) / (h * h);

  // Conjugate round trip.
  const double sg2 = sigma_of_m(op, r.m, sigma);
  const Basics b2 = basics(op, sg2);
  r.h_K = sg2 * r.m - b2.a;
  r.h_K_d2 = 1.0 / b2.d2;
  const double g0_rt =
      (std::abs(sg2 - sigma) > 1e-9) ? density_at_zero(op, sg2, opts).g0 : den0.g0;
  r.h_bar = r.h_K - std::log(g0_rt) / K;

  const double hb_p = h_bar_value(op, r.m + h, opts, sg2, nullptr);
  const double hb_m = h_bar_value(op, r.m - h, opts, sg2, nullptr);
  r.h_bar_d1 = (hb_p - hb_m) / (2.0 * h);
  r.h_bar_d2 = (hb_p - 2.0 * r.h_bar + hb_m) / (h * h);

  const auto check = [](double lhs, double rhs, const char* name) {
    if (!(std::abs(lhs - rhs) <= 1e-7))
      throw ConsistencyError(std::string("thermo_report: identity '") + name +
                             "' violated: " + std::to_string(lhs) + " vs " +
                             std::to_string(rhs));
  };
  check(r.a_ce - r.a_gce, std::log(r.g0) / K, "a_ce - a_gce = ln(g0)/K");
  check(r.a_gce - r.a_ce, r.h_bar - r.h_K, "a_gce - a_ce = h_bar - h_K");
  check(r.a_ce, r.sigma * r.m - r.h_bar, "a_ce = sigma m - h_bar");
  return r;
}

std::string to_json(const ThermoReport& r) {
  const auto field = [](const char* name, double x) {
    if (std::isnan(x))
      throw ConsistencyError(std::string("ThermoReport serialization: NaN in field ") +
                             name);
    return x;
  };
  nlohmann::json j{
      {"sigma", field("sigma", r.sigma)},
      {"m", field("m", r.m)},
      {"a_gce", field("a_gce", r.a_gce)},
      {"a_gce_d1", field("a_gce_d1", r.a_gce_d1)},
      {"a_gce_d2", field("a_gce_d2", r.a_gce_d2)},
      {"a_ce", field("a_ce", r.a_ce)},
      {"a_ce_d1", field("a_ce_d1", r.a_ce_d1)},
      {"a_ce_d2", field("a_ce_d2", r.a_ce_d2)},
      {"h_K", field("h_K", r.h_K)},
      {"h_K_d2", field("h_K_d2", r.h_K_d2)},
      {"h_bar", field("h_bar", r.h_bar)},
      {"h_bar_d1", field("h_bar_d1", r.h_bar_d1)},
      {"h_bar_d2", field("h_bar_d2", r.h_bar_d2)},
      {"g0", field("g0", r.g0)},
  };
  return j.dump(2);
}

AGce a_gce(const LatticeModel& model, const QuadratureGrid& grid) {
  return a_gce(TransferOperator(model, grid), model.sigma);
}
double sigma_of_m(const LatticeModel& model, const QuadratureGrid& grid, double m) {
  return sigma_of_m(TransferOperator(model, grid), m);
}
LegendreHK legendre_HK(const LatticeModel& model, const QuadratureGrid& grid, double m) {
  return legendre_HK(TransferOperator(model, grid), m);
}
std::complex<double> char_fn(const LatticeModel& model, const QuadratureGrid& grid,
                             double sigma, double m, double xi) {
  return char_fn(TransferOperator(model, grid), sigma, m, xi);
}
DensityResult density_at_zero(const LatticeModel& model, const QuadratureGrid& grid,
                              double sigma) {
  return density_at_zero(TransferOperator(model, grid), sigma);
}
double a_ce(const LatticeModel& model, const QuadratureGrid& grid, double sigma) {
  return a_ce(TransferOperator(model, grid), sigma);
}
HBar h_bar(const LatticeModel& model, const QuadratureGrid& grid, double m) {
  return h_bar(TransferOperator(model, grid), m);
}
ThermoReport thermo_report(const LatticeModel& model, const QuadratureGrid& grid,
                           double sigma) {
  return thermo_report(TransferOperator(model, grid), sigma);
}

} // namespace spinlab
