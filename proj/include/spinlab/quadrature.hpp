#pragma once

#include <vector>

#include "spinlab/model.hpp"

namespace spinlab {

enum class QuadratureScheme { GaussHermite, Trapezoid };

//! Truncated real-line discretization. log_weights[j] is the log of
//! (quadrature weight x exp(-node^2/2)), so any integral of the form
//! integral e^{-z^2/2} u(z) dz is sum_j exp(log_weights[j]) * u(node_j).
struct QuadratureGrid {
  std::vector<double> nodes;       // strictly increasing abscissae
  std::vector<double> log_weights; // Gaussian base factor absorbed
  double truncation = 0.0;         // effective support half-width R
  QuadratureScheme scheme = QuadratureScheme::GaussHermite;
  double target_tol = 1e-12;
  double abs_J = 0.0;              // coupling the truncation budget reserved for

  int size() const { return static_cast<int>(nodes.size()); }
  double max_node() const { return nodes.empty() ? 0.0 : nodes.back(); }

  //! Largest |sigma + Re(tilt)| the transfer chain may use: the worst-case
  //! kernel tilt |J|*z_max from one neighbor stays reserved.
  double chain_tilt_budget(const LatticeModel& model) const;

  //! Checks a plain 1D integral with linear tilt t (no kernel neighbor).
  bool supports_1d_tilt(double abs_tilt, const LatticeModel& model) const;
};

//! Builds a grid whose truncation satisfies
//!   exp(-R^2/2 + (|sigma| + sup|s| + bound_sup + |J| R) R) <= target_tol.
//! Gauss-Hermite nodes carry the e^{-z^2/2} weight; Trapezoid uses a
//! uniform grid on [-R, R].
QuadratureGrid build_grid(const LatticeModel& model, int N, double target_tol,
                          QuadratureScheme scheme = QuadratureScheme::GaussHermite);

//! Conditional law of one spin given its neighbors.
struct ConditionalSite {
  int site = 0;        // 1-based index
  double m_i2 = 0.0;   // conditional mean
  double s_i2_sq = 0.0; // conditional variance, > 0
  double t_i2 = 0.0;   // conditional third centered moment
};

//! One-dimensional quadrature over the conditional density
//!   dx_i proportional to exp(-psi(x_i) - (-J*left - J*right + s_i - sigma) x_i).
//! Boundary sites use the single present neighbor (i = K sees x_{K+1} = 0),
//! i.e. pass the absent neighbor as 0.
ConditionalSite conditional_site(const LatticeModel& model, const QuadratureGrid& grid,
                                 int i, double left, double right);

} // namespace spinlab
