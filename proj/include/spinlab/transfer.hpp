#pragma once

#include <Eigen/Dense>

#include <complex>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "spinlab/quadrature.hpp"

namespace spinlab {

//! Exact (quadrature-level) moments of the gce measure.
struct GceMoments {
  std::vector<double> m_per_site;                 // m_i = E[X_i]
  double m = 0.0;                                 // mean spin (1/K) sum m_i
  double var_sum = 0.0;                           // Var(sum X_i)
  std::map<std::pair<int, int>, double> cov;      // requested covariances, 1-based
  double centered_sum_p3 = 0.0;                   // E[(sum (X_i - m_i))^3]
  std::optional<double> centered_sum_p4;          // p = 4, cost-gated
  double log_z = 0.0;                             // log partition at this sigma
};

//! Backward transfer recursion on a fixed (model, grid) pair. The N x N
//! kernel exp(J z z') with quadrature weights absorbed is precomputed once;
//! every evaluation (any sigma, any tilt) reuses it. Immutable and safe to
//! share across threads.
class TransferOperator {
public:
  TransferOperator(const LatticeModel& model, const QuadratureGrid& grid);

  const LatticeModel& model() const { return model_; }
  const QuadratureGrid& grid() const { return grid_; }
  int K() const { return model_.K; }
  int N() const { return grid_.size(); }

  //! log integral exp(sum_i sigma x_i - H(x)) dx.
  double log_partition(double sigma) const;

  //! Complex tilt; the real part adds to sigma, the imaginary part rotates
  //! the site factor. The imaginary part of the result is the principal
  //! branch of the final inner product (per-step rescalings are real).
  std::complex<double> log_partition(double sigma, std::complex<double> tilt) const;

  //! One backward pass for many purely imaginary tilts i*t at fixed sigma.
  std::vector<std::complex<double>> log_partition_imag_tilts(
      double sigma, const std::vector<double>& tilts) const;

  //! Per-site means, Var(sum), centered sum moments up to max_order
  //! (p2/p3 always; p4 when max_order == 4), nearest-neighbor covariances.
  GceMoments moments(double sigma, int max_order = 3, bool nn_cov = false) const;

  //! cov(X_i, X_j), 1-based sites; i == j gives the variance.
  double covariance(double sigma, int i, int j) const;

  //! cov(X_c, X_{c+d}) for d = 0..max_distance in one sweep.
  std::vector<double> covariance_row(double sigma, int c, int max_distance) const;

  //! E[(X_i - m_i)^p] for every site, one pass.
  std::vector<double> site_central_moments(double sigma, int p) const;

private:
  struct Marginals {
    Eigen::MatrixXd left;    // N x K messages, site i excluded
    Eigen::MatrixXd right;
    Eigen::VectorXd ls_left; // accumulated per-site log rescalings
    Eigen::VectorXd ls_right;
    std::vector<double> mean;
    double log_z = 0.0;
  };

  Eigen::MatrixXd site_factors(double sigma) const; // N x K, u_i(z)
  Marginals marginals(const Eigen::MatrixXd& u) const;
  void require_budget(double effective_sigma) const;

  LatticeModel model_;
  QuadratureGrid grid_;
  Eigen::VectorXd z_;        // nodes
  Eigen::VectorXd omega_;    // exp(log_weights)
  Eigen::VectorXd pert_;     // -psi_b(z)
  Eigen::MatrixXd kernel_;   // exp(J z_k z_l + log_weights[l])
};

//! Spec-shaped wrappers; each builds a TransferOperator internally and uses
//! the model's own sigma field.
std::complex<double> log_partition(const LatticeModel& model, const QuadratureGrid& grid,
                                   std::complex<double> tilt);
GceMoments gce_moments(const LatticeModel& model, const QuadratureGrid& grid,
                       int max_order);
double covariance(const LatticeModel& model, const QuadratureGrid& grid, int i, int j);

} // namespace spinlab
