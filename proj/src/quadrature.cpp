#include "spinlab/quadrature.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>

namespace spinlab {
namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178; // ln(2*pi)/2

//! Smallest R with exp(-(1/2 - |J|) R^2 + b R) <= tol, b >= 0, tol < 1.
double required_truncation(double b, double abs_J, double tol) {
  const double q = 0.5 - abs_J; // > 1/4 since |J| < 1/4
  const double c = -std::log(tol);
  // q R^2 - b R - c = 0, positive root; closed form of the spec's fixed point.
  return (b + std::sqrt(b * b + 4.0 * q * c)) / (2.0 * q);
}

//! Nodes/log-weights of the N-point rule for the weight e^{-z^2/2} via
//! Golub-Welsch on the probabilists' Hermite recurrence. Weights are
//! assembled in log space so extreme nodes survive for large N.
void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& logw) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double off = std::sqrt(static_cast<double>(k));
    jacobi(k, k - 1) = off;
    jacobi(k - 1, k) = off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  nodes.resize(n);
  logw.resize(n);
  for (int j = 0; j < n; ++j) {
    nodes[static_cast<std::size_t>(j)] = es.eigenvalues()(j);
    const double v0 = es.eigenvectors()(0, j);
    logw[static_cast<std::size_t>(j)] = kLogSqrt2Pi + 2.0 * std::log(std::abs(v0));
  }
}

double tilt_budget_for(double z_max, double abs_J, double bound_sup, double max_abs_s,
                       double tol) {
  // exp(-(1/2-|J|) z^2 + (t + sup|s| + bound_sup) z) <= tol solved for t.
  return (0.5 - abs_J) * z_max - bound_sup - max_abs_s + std::log(tol) / z_max;
}

} // namespace

double QuadratureGrid::chain_tilt_budget(const LatticeModel& model) const {
  return tilt_budget_for(max_node(), std::abs(model.J), model.potential.bound_sup(),
                         model.max_abs_s(), target_tol);
}

bool QuadratureGrid::supports_1d_tilt(double abs_tilt, const LatticeModel& model) const {
  const double z = max_node();
  const double expo = -0.5 * z * z + (abs_tilt + model.potential.bound_sup()) * z;
  return expo <= std::log(target_tol);
}

QuadratureGrid build_grid(const LatticeModel& model, int N, double target_tol,
                          QuadratureScheme scheme) {
  if (N < 16)
    throw ConfigError("build_grid: N must be >= 16");
  if (!(target_tol > 0.0) || target_tol >= 1.0)
    throw ConfigError("build_grid: target_tol must lie in (0, 1)");

  const double abs_J = std::abs(model.J);
  const double b = std::abs(model.sigma) + model.max_abs_s() + model.potential.bound_sup();
  const double R = required_truncation(b, abs_J, target_tol);

  QuadratureGrid grid;
  grid.truncation = R;
  grid.scheme = scheme;
  grid.target_tol = target_tol;
  grid.abs_J = abs_J;

  if (scheme == QuadratureScheme::GaussHermite) {
    gauss_hermite(N, grid.nodes, grid.log_weights);
    if (grid.max_node() < R)
      throw ResolutionError(
          "build_grid: target_tol " + std::to_string(target_tol) + " needs truncation " +
          std::to_string(R) + " but the N=" + std::to_string(N) +
          " Gauss-Hermite rule only reaches " + std::to_string(grid.max_node()) +
          "; increase N");
  } else {
    grid.nodes.resize(static_cast<std::size_t>(N));
    grid.log_weights.resize(static_cast<std::size_t>(N));
    const double h = 2.0 * R / (N - 1);
    for (int j = 0; j < N; ++j) {
      const double z = -R + h * j;
      grid.nodes[static_cast<std::size_t>(j)] = z;
      const double w = (j == 0 || j == N - 1) ? 0.5 * h : h;
      grid.log_weights[static_cast<std::size_t>(j)] = std::log(w) - 0.5 * z * z;
    }
  }

  // Gaussian recovery check: logsumexp(log_weights) must be ln(2*pi)/2.
  double lw_max = grid.log_weights[0];
  for (double lw : grid.log_weights)
    lw_max = std::max(lw_max, lw);
  double acc = 0.0;
  for (double lw : grid.log_weights)
    acc += std::exp(lw - lw_max);
  const double lse = lw_max + std::log(acc);
  if (std::abs(lse - kLogSqrt2Pi) > 1e-12 * std::abs(kLogSqrt2Pi))
    throw ResolutionError("build_grid: grid fails to recover the Gaussian integral "
                          "to 1e-12; increase N");
  return grid;
}

ConditionalSite conditional_site(const LatticeModel& model, const QuadratureGrid& grid,
                                 int i, double left, double right) {
  if (i < 1 || i > model.K)
    throw ConfigError("conditional_site: site index out of range");
  const double left_eff = (i > 1) ? left : 0.0;
  const double right_eff = (i < model.K) ? right : 0.0;
  const double tilt =
      model.sigma - model.s[static_cast<std::size_t>(i - 1)] + model.J * (left_eff + right_eff);
  if (!grid.supports_1d_tilt(std::abs(tilt), model))
    throw ResolutionError("conditional_site: grid too narrow for tilt " +
                          std::to_string(tilt));

  const int n = grid.size();
  std::vector<double> logp(static_cast<std::size_t>(n));
  double lp_max = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) {
    const double z = grid.nodes[static_cast<std::size_t>(j)];
    logp[static_cast<std::size_t>(j)] = grid.log_weights[static_cast<std::size_t>(j)] -
                                        model.potential.perturbation(z).value + tilt * z;
    lp_max = std::max(lp_max, logp[static_cast<std::size_t>(j)]);
  }
  double z0 = 0.0, z1 = 0.0;
  for (int j = 0; j < n; ++j) {
    const double p = std::exp(logp[static_cast<std::size_t>(j)] - lp_max);
    z0 += p;
    z1 += p * grid.nodes[static_cast<std::size_t>(j)];
  }
  const double mean = z1 / z0;
  double m2 = 0.0, m3 = 0.0;
  for (int j = 0; j < n; ++j) {
    const double p = std::exp(logp[static_cast<std::size_t>(j)] - lp_max);
    const double d = grid.nodes[static_cast<std::size_t>(j)] - mean;
    m2 += p * d * d;
    m3 += p * d * d * d;
  }
  ConditionalSite out;
  out.site = i;
  out.m_i2 = mean;
  out.s_i2_sq = m2 / z0;
  out.t_i2 = m3 / z0;
  if (!(out.s_i2_sq > 0.0))
    throw ConsistencyError("conditional_site: nonpositive conditional variance");
  return out;
}

} // namespace spinlab
