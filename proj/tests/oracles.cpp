#include "oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace oracles {
namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

Eigen::MatrixXd precision_matrix(const spinlab::LatticeModel& model) {
  const int K = model.K;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(K, K);
  for (int i = 0; i < K; ++i) {
    a(i, i) = 1.0;
    if (i + 1 < K) {
      a(i, i + 1) = -model.J;
      a(i + 1, i) = -model.J;
    }
  }
  return a;
}

//! Iterates x' over a tensor grid of dims axes; x_K closes the constraint.
template <typename F>
void constrained_scan(const spinlab::LatticeModel& model, double m, double half_width,
                      int points, F&& body) {
  const int K = model.K;
  if (K < 2 || K > 3)
    throw std::runtime_error("constrained oracle supports K in {2, 3}");
  const int dims = K - 1;
  const double step = 2.0 * half_width / (points - 1);
  std::vector<double> x(static_cast<std::size_t>(K), 0.0);
  std::vector<int> idx(static_cast<std::size_t>(dims), 0);
  for (;;) {
    double sum = 0.0;
    for (int d = 0; d < dims; ++d) {
      x[static_cast<std::size_t>(d)] = m - half_width + step * idx[static_cast<std::size_t>(d)];
      sum += x[static_cast<std::size_t>(d)];
    }
    x[static_cast<std::size_t>(K - 1)] = K * m - sum;
    body(x, std::pow(step, dims));
    int d = 0;
    for (; d < dims; ++d) {
      if (++idx[static_cast<std::size_t>(d)] < points)
        break;
      idx[static_cast<std::size_t>(d)] = 0;
    }
    if (d == dims)
      break;
  }
}

} // namespace

DenseGaussian::DenseGaussian(const spinlab::LatticeModel& model) : K(model.K) {
  if (model.potential.kind() != spinlab::PerturbationKind::Zero)
    throw std::runtime_error("DenseGaussian oracle needs psi_b = 0");
  precision_ = precision_matrix(model);
  cov_ = precision_.inverse();
  s_ = Eigen::Map<const Eigen::VectorXd>(model.s.data(), K);
  logdet_ = std::log(precision_.determinant());
}

double DenseGaussian::log_partition(double sigma) const {
  const Eigen::VectorXd b = Eigen::VectorXd::Constant(K, sigma) - s_;
  return 0.5 * K * kLog2Pi - 0.5 * logdet_ + 0.5 * b.dot(cov_ * b);
}

std::complex<double> DenseGaussian::log_partition(double sigma,
                                                  std::complex<double> tilt) const {
  const Eigen::VectorXcd b =
      Eigen::VectorXcd::Constant(K, sigma + tilt) - s_.cast<std::complex<double>>();
  // Plain bilinear form b^T A^{-1} b (no conjugation).
  const std::complex<double> quad =
      (b.transpose() * (cov_.cast<std::complex<double>>() * b))(0, 0);
  return 0.5 * K * kLog2Pi - 0.5 * logdet_ + 0.5 * quad;
}

Eigen::VectorXd DenseGaussian::site_means(double sigma) const {
  const Eigen::VectorXd b = Eigen::VectorXd::Constant(K, sigma) - s_;
  return cov_ * b;
}

double DenseGaussian::mean_spin(double sigma) const { return site_means(sigma).mean(); }

double DenseGaussian::cov(int i, int j) const { return cov_(i - 1, j - 1); }

double DenseGaussian::var_sum() const { return cov_.sum(); }

double DenseGaussian::a_gce(double sigma) const { return log_partition(sigma) / K; }

double DenseGaussian::sigma_of_m(double m) const {
  const double v = var_sum() / K;
  const double c = (cov_ * s_).sum() / K;
  return (m + c) / v;
}

double DenseGaussian::h_K(double m) const {
  const double sg = sigma_of_m(m);
  return sg * m - a_gce(sg);
}

std::complex<double> DenseGaussian::char_fn(double xi) const {
  return std::exp(std::complex<double>(-0.5 * xi * xi * var_sum() / K, 0.0));
}

double DenseGaussian::g0() const { return 1.0 / std::sqrt(2.0 * std::acos(-1.0) * var_sum() / K); }

double DenseGaussian::a_ce(double sigma) const { return a_gce(sigma) + std::log(g0()) / K; }

double DenseGaussian::h_bar(double m) const { return h_K(m) - std::log(g0()) / K; }

std::complex<double> tensor_log_partition(const spinlab::LatticeModel& model,
                                          const std::vector<double>& nodes,
                                          const std::vector<double>& log_weights,
                                          std::complex<double> tilt) {
  const int K = model.K;
  if (K > 3)
    throw std::runtime_error("tensor oracle supports K <= 3");
  const int n = static_cast<int>(nodes.size());
  std::vector<int> idx(static_cast<std::size_t>(K), 0);

  const auto log_term = [&](const std::vector<int>& jj, double& re,
                            double& im) {
    re = 0.0;
    im = 0.0;
    for (int i = 0; i < K; ++i) {
      const double z = nodes[static_cast<std::size_t>(jj[static_cast<std::size_t>(i)])];
      re += log_weights[static_cast<std::size_t>(jj[static_cast<std::size_t>(i)])];
      re -= model.potential.perturbation(z).value;
      re += (model.sigma + tilt.real() - model.s[static_cast<std::size_t>(i)]) * z;
      im += tilt.imag() * z;
      if (i + 1 < K) {
        const double zn =
            nodes[static_cast<std::size_t>(jj[static_cast<std::size_t>(i + 1)])];
        re += model.J * z * zn;
      }
    }
  };

  double max_re = -1e300;
  for (;;) {
    double re, im;
    log_term(idx, re, im);
    max_re = std::max(max_re, re);
    int d = 0;
    for (; d < K; ++d) {
      if (++idx[static_cast<std::size_t>(d)] < n)
        break;
      idx[static_cast<std::size_t>(d)] = 0;
    }
    if (d == K)
      break;
  }
  std::fill(idx.begin(), idx.end(), 0);
  std::complex<double> acc(0.0, 0.0);
  for (;;) {
    double re, im;
    log_term(idx, re, im);
    acc += std::exp(re - max_re) * std::complex<double>(std::cos(im), std::sin(im));
    int d = 0;
    for (; d < K; ++d) {
      if (++idx[static_cast<std::size_t>(d)] < n)
        break;
      idx[static_cast<std::size_t>(d)] = 0;
    }
    if (d == K)
      break;
  }
  return std::log(acc) + max_re;
}

Conditional1D conditional_moments_1d(const spinlab::LatticeModel& model, int site,
                                     double left, double right, double span,
                                     int points) {
  if (points % 2 == 0)
    ++points;
  const double h = 2.0 * span / (points - 1);
  const double c = -model.J * left - model.J * right +
                   model.s[static_cast<std::size_t>(site - 1)] - model.sigma;
  double z0 = 0.0, z1 = 0.0;
  for (int j = 0; j < points; ++j) {
    const double x = -span + j * h;
    const double w = (j == 0 || j == points - 1) ? 1.0 : (j % 2 ? 4.0 : 2.0);
    const double p = w * std::exp(-model.potential.psi(x) - c * x);
    z0 += p;
    z1 += p * x;
  }
  const double mean = z1 / z0;
  double m2 = 0.0, m3 = 0.0;
  for (int j = 0; j < points; ++j) {
    const double x = -span + j * h;
    const double w = (j == 0 || j == points - 1) ? 1.0 : (j % 2 ? 4.0 : 2.0);
    const double p = w * std::exp(-model.potential.psi(x) - c * x);
    m2 += p * (x - mean) * (x - mean);
    m3 += p * (x - mean) * (x - mean) * (x - mean);
  }
  return {mean, m2 / z0, m3 / z0};
}

double constrained_g0(const spinlab::LatticeModel& model, double sigma, double m,
                      double log_z, double half_width, int points) {
  // g0 = integral over {sum x = K m} of e^{sigma sum x - H} dL^{K-1} / Z,
  // with |grad (1/sqrt(K)) sum (x-m)| = 1 as the coarea factor.
  const int K = model.K;
  double acc = 0.0;
  constrained_scan(model, m, half_width, points, [&](const std::vector<double>& x,
                                                     double w) {
    acc += w * std::exp(sigma * K * m - spinlab::hamiltonian(model, x) - log_z);
  });
  return acc * std::sqrt(static_cast<double>(K));
}

double ce_site_mean(const spinlab::LatticeModel& model, double m, int site,
                    double half_width, int points) {
  double num = 0.0, den = 0.0;
  constrained_scan(model, m, half_width, points,
                   [&](const std::vector<double>& x, double w) {
                     const double p = w * std::exp(-spinlab::hamiltonian(model, x));
                     num += p * x[static_cast<std::size_t>(site - 1)];
                     den += p;
                   });
  return num / den;
}

double ce_site_var(const spinlab::LatticeModel& model, double m, int site,
                   double half_width, int points) {
  const double mean = ce_site_mean(model, m, site, half_width, points);
  double num = 0.0, den = 0.0;
  constrained_scan(model, m, half_width, points,
                   [&](const std::vector<double>& x, double w) {
                     const double p = w * std::exp(-spinlab::hamiltonian(model, x));
                     const double d = x[static_cast<std::size_t>(site - 1)] - mean;
                     num += p * d * d;
                     den += p;
                   });
  return num / den;
}

} // namespace oracles
