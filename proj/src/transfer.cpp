#include "spinlab/transfer.hpp"

#include <cmath>
#include <limits>

namespace spinlab {
namespace {

double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i)
    r = r * (n - k + i) / i;
  return r;
}

} // namespace

TransferOperator::TransferOperator(const LatticeModel& model, const QuadratureGrid& grid)
    : model_(model), grid_(grid) {
  const int n = grid_.size();
  if (n < 16)
    throw ConfigError("transfer: grid has fewer than 16 nodes");
  if (std::abs(model_.J) > grid_.abs_J + 1e-15)
    throw ConfigError("transfer: grid truncation was built for a weaker coupling "
                      "than the model's J");
  z_.resize(n);
  omega_.resize(n);
  pert_.resize(n);
  for (int j = 0; j < n; ++j) {
    z_(j) = grid_.nodes[static_cast<std::size_t>(j)];
    omega_(j) = std::exp(grid_.log_weights[static_cast<std::size_t>(j)]);
    pert_(j) = -model_.potential.perturbation(z_(j)).value;
  }
  kernel_.resize(n, n);
  for (int l = 0; l < n; ++l)
    for (int k = 0; k < n; ++k)
      kernel_(k, l) =
          std::exp(model_.J * z_(k) * z_(l) + grid_.log_weights[static_cast<std::size_t>(l)]);
}

void TransferOperator::require_budget(double effective_sigma) const {
  const double budget = grid_.chain_tilt_budget(model_);
  if (std::abs(effective_sigma) > budget)
    throw ResolutionError("transfer: grid too narrow for external field " +
                          std::to_string(effective_sigma) + " (budget " +
                          std::to_string(budget) + "); rebuild with larger N or sigma");
}

Eigen::MatrixXd TransferOperator::site_factors(double sigma) const {
  require_budget(sigma);
  const int n = grid_.size();
  const int K = model_.K;
  Eigen::MatrixXd u(n, K);
  Eigen::VectorXd col;
  double last_s = std::numeric_limits<double>::quiet_NaN();
  for (int i = 0; i < K; ++i) {
    const double si = model_.s[static_cast<std::size_t>(i)];
    if (si != last_s) {
      col = (pert_.array() + (sigma - si) * z_.array()).exp().matrix();
      last_s = si;
    }
    u.col(i) = col;
  }
  return u;
}

double TransferOperator::log_partition(double sigma) const {
  const Eigen::MatrixXd u = site_factors(sigma);
  const int K = model_.K;
  Eigen::VectorXd v = u.col(K - 1);
  double ls = 0.0;
  {
    const double c = v.maxCoeff();
    v /= c;
    ls += std::log(c);
  }
  for (int i = K - 2; i >= 0; --i) {
    v = u.col(i).cwiseProduct(kernel_ * v);
    const double c = v.maxCoeff();
    if (!(c > 0.0) || !std::isfinite(c))
      throw ConsistencyError("transfer: overflow despite rescaling (bug)");
    v /= c;
    ls += std::log(c);
  }
  return ls + std::log(omega_.dot(v));
}

std::complex<double> TransferOperator::log_partition(double sigma,
                                                     std::complex<double> tilt) const {
  const std::vector<double> t{tilt.imag()};
  return log_partition_imag_tilts(sigma + tilt.real(), t)[0];
}

std::vector<std::complex<double>> TransferOperator::log_partition_imag_tilts(
    double sigma, const std::vector<double>& tilts) const {
  const Eigen::MatrixXd u = site_factors(sigma);
  const int n = grid_.size();
  const int K = model_.K;
  const int P = static_cast<int>(tilts.size());

  Eigen::MatrixXd cph(n, P), sph(n, P);
  for (int p = 0; p < P; ++p) {
    cph.col(p) = (tilts[static_cast<std::size_t>(p)] * z_.array()).cos().matrix();
    sph.col(p) = (tilts[static_cast<std::size_t>(p)] * z_.array()).sin().matrix();
  }

  Eigen::MatrixXd re = cph.array().colwise() * u.col(K - 1).array();
  Eigen::MatrixXd im = sph.array().colwise() * u.col(K - 1).array();
  Eigen::VectorXd ls = Eigen::VectorXd::Zero(P);
  const auto rescale = [&] {
    for (int p = 0; p < P; ++p) {
      const double c = std::max(re.col(p).cwiseAbs().maxCoeff(),
                                im.col(p).cwiseAbs().maxCoeff());
      if (!(c > 0.0) || !std::isfinite(c))
        throw ConsistencyError("transfer: tilted message collapsed (bug)");
      re.col(p) /= c;
      im.col(p) /= c;
      ls(p) += std::log(c);
    }
  };
  rescale();

  Eigen::MatrixXd re2(n, P), im2(n, P);
  for (int i = K - 2; i >= 0; --i) {
    re2.noalias() = kernel_ * re;
    im2.noalias() = kernel_ * im;
    re = (re2.array() * cph.array() - im2.array() * sph.array()).colwise() *
         u.col(i).array();
    im = (re2.array() * sph.array() + im2.array() * cph.array()).colwise() *
         u.col(i).array();
    rescale();
  }

  std::vector<std::complex<double>> out(static_cast<std::size_t>(P));
  for (int p = 0; p < P; ++p) {
    const std::complex<double> w(omega_.dot(re.col(p)), omega_.dot(im.col(p)));
    out[static_cast<std::size_t>(p)] = std::log(w) + ls(p);
  }
  return out;
}

TransferOperator::Marginals TransferOperator::marginals(const Eigen::MatrixXd& u) const {
  const int n = grid_.size();
  const int K = model_.K;
  Marginals mg;
  mg.left.resize(n, K);
  mg.right.resize(n, K);
  mg.ls_left = Eigen::VectorXd::Zero(K);
  mg.ls_right = Eigen::VectorXd::Zero(K);

  mg.right.col(K - 1).setOnes();
  for (int i = K - 2; i >= 0; --i) {
    Eigen::VectorXd t = u.col(i + 1).cwiseProduct(mg.right.col(i + 1));
    mg.right.col(i) = kernel_ * t;
    const double c = mg.right.col(i).maxCoeff();
    if (!(c > 0.0) || !std::isfinite(c))
      throw ConsistencyError("transfer: right message collapsed (bug)");
    mg.right.col(i) /= c;
    mg.ls_right(i) = mg.ls_right(i + 1) + std::log(c);
  }
  mg.left.col(0).setOnes();
  for (int i = 1; i < K; ++i) {
    Eigen::VectorXd t = u.col(i - 1).cwiseProduct(mg.left.col(i - 1));
    mg.left.col(i) = kernel_ * t;
    const double c = mg.left.col(i).maxCoeff();
    if (!(c > 0.0) || !std::isfinite(c))
      throw ConsistencyError("transfer: left message collapsed (bug)");
    mg.left.col(i) /= c;
    mg.ls_left(i) = mg.ls_left(i - 1) + std::log(c);
  }

  mg.mean.resize(static_cast<std::size_t>(K));
  for (int i = 0; i < K; ++i) {
    const Eigen::ArrayXd w = omega_.array() * mg.left.col(i).array() *
                             u.col(i).array() * mg.right.col(i).array();
    const double z0 = w.sum();
    mg.mean[static_cast<std::size_t>(i)] = (w * z_.array()).sum() / z0;
    if (i == 0)
      mg.log_z = mg.ls_left(0) + mg.ls_right(0) + std::log(z0);
  }
  return mg;
}

GceMoments TransferOperator::moments(double sigma, int max_order, bool nn_cov) const {
  if (max_order < 1 || max_order > 4)
    throw ConfigError("gce_moments: max_order " + std::to_string(max_order) +
                      " unsupported, must be in {1,2,3,4}");
  const Eigen::MatrixXd u = site_factors(sigma);
  const Marginals mg = marginals(u);
  const int n = grid_.size();
  const int K = model_.K;

  GceMoments out;
  out.m_per_site = mg.mean;
  out.log_z = mg.log_z;
  double acc = 0.0;
  for (double mi : mg.mean)
    acc += mi;
  out.m = acc / K;

  // Centered sum moments by companion vectors: column q of h carries the
  // integrand weighted with (sum_{k >= i} (x_k - m_k))^q.
  const int p = (max_order == 4) ? 4 : 3;
  Eigen::MatrixXd h(n, p + 1), t(n, p + 1), hn(n, p + 1);
  Eigen::ArrayXd d = z_.array() - mg.mean[static_cast<std::size_t>(K - 1)];
  h.col(0) = u.col(K - 1);
  for (int q = 1; q <= p; ++q)
    h.col(q) = h.col(q - 1).array() * d;
  for (int i = K - 2; i >= 0; --i) {
    t.noalias() = kernel_ * h;
    d = z_.array() - mg.mean[static_cast<std::size_t>(i)];
    for (int q = 0; q <= p; ++q) {
      Eigen::ArrayXd accq = t.col(q).array();
      Eigen::ArrayXd dpow = Eigen::ArrayXd::Ones(n);
      for (int r = q - 1; r >= 0; --r) {
        dpow *= d;
        accq += binom(q, r) * dpow * t.col(r).array();
      }
      hn.col(q) = u.col(i).array() * accq;
    }
    h = hn;
    const double c = h.col(0).maxCoeff();
    if (!(c > 0.0) || !std::isfinite(c))
      throw ConsistencyError("transfer: companion message collapsed (bug)");
    h /= c;
  }
  const double z0 = omega_.dot(h.col(0));
  out.var_sum = omega_.dot(h.col(2)) / z0;
  out.centered_sum_p3 = omega_.dot(h.col(3)) / z0;
  if (max_order == 4)
    out.centered_sum_p4 = omega_.dot(h.col(4)) / z0;

  if (nn_cov) {
    for (int i = 0; i + 1 < K; ++i) {
      const Eigen::ArrayXd src = mg.left.col(i).array() * u.col(i).array() *
                                 (z_.array() - mg.mean[static_cast<std::size_t>(i)]);
      const Eigen::VectorXd prop = kernel_ * src.matrix();
      const Eigen::ArrayXd wj = omega_.array() * prop.array() * u.col(i + 1).array() *
                                (z_.array() - mg.mean[static_cast<std::size_t>(i + 1)]) *
                                mg.right.col(i + 1).array();
      const Eigen::ArrayXd zj = omega_.array() * mg.left.col(i + 1).array() *
                                u.col(i + 1).array() * mg.right.col(i + 1).array();
      const double scale =
          std::exp(mg.ls_left(i) + mg.ls_right(i + 1) - mg.ls_left(i + 1) - mg.ls_right(i + 1));
      out.cov[{i + 1, i + 2}] = wj.sum() / zj.sum() * scale;
    }
  }
  return out;
}

double TransferOperator::covariance(double sigma, int i, int j) const {
  if (i < 1 || i > model_.K || j < 1 || j > model_.K)
    throw ConfigError("covariance: site index out of range");
  if (i > j)
    std::swap(i, j);
  const std::vector<double> row = covariance_row(sigma, i, j - i);
  return row.back();
}

std::vector<double> TransferOperator::covariance_row(double sigma, int c,
                                                     int max_distance) const {
  if (c < 1 || c + max_distance > model_.K)
    throw ConfigError("covariance_row: sites out of range");
  const Eigen::MatrixXd u = site_factors(sigma);
  const Marginals mg = marginals(u);
  const int i = c - 1;

  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(max_distance + 1));
  {
    const Eigen::ArrayXd d = z_.array() - mg.mean[static_cast<std::size_t>(i)];
    const Eigen::ArrayXd w =
        omega_.array() * mg.left.col(i).array() * u.col(i).array() * mg.right.col(i).array();
    out.push_back((w * d * d).sum() / w.sum());
  }
  Eigen::VectorXd t = (mg.left.col(i).array() * u.col(i).array() *
                       (z_.array() - mg.mean[static_cast<std::size_t>(i)]))
                          .matrix();
  double ls_t = mg.ls_left(i);
  for (int j = i + 1; j <= i + max_distance; ++j) {
    const Eigen::VectorXd arrived = kernel_ * t;
    const Eigen::ArrayXd num = omega_.array() * arrived.array() * u.col(j).array() *
                               (z_.array() - mg.mean[static_cast<std::size_t>(j)]) *
                               mg.right.col(j).array();
    const Eigen::ArrayXd den = omega_.array() * mg.left.col(j).array() * u.col(j).array() *
                               mg.right.col(j).array();
    out.push_back(num.sum() / den.sum() * std::exp(ls_t - mg.ls_left(j)));
    if (j < i + max_distance) {
      t = u.col(j).cwiseProduct(arrived);
      const double cmax = t.cwiseAbs().maxCoeff();
      if (cmax > 0.0) {
        t /= cmax;
        ls_t += std::log(cmax);
      }
    }
  }
  return out;
}

std::vector<double> TransferOperator::site_central_moments(double sigma, int p) const {
  const Eigen::MatrixXd u = site_factors(sigma);
  const Marginals mg = marginals(u);
  std::vector<double> out(static_cast<std::size_t>(model_.K));
  for (int i = 0; i < model_.K; ++i) {
    const Eigen::ArrayXd w =
        omega_.array() * mg.left.col(i).array() * u.col(i).array() * mg.right.col(i).array();
    const Eigen::ArrayXd d = z_.array() - mg.mean[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] = (w * d.pow(p)).sum() / w.sum();
  }
  return out;
}

std::complex<double> log_partition(const LatticeModel& model, const QuadratureGrid& grid,
                                   std::complex<double> tilt) {
  const TransferOperator t(model, grid);
  if (tilt == std::complex<double>(0.0, 0.0))
    return t.log_partition(model.sigma);
  return t.log_partition(model.sigma, tilt);
}

GceMoments gce_moments(const LatticeModel& model, const QuadratureGrid& grid,
                       int max_order) {
  return TransferOperator(model, grid).moments(model.sigma, max_order, true);
}

double covariance(const LatticeModel& model, const QuadratureGrid& grid, int i, int j) {
  return TransferOperator(model, grid).covariance(model.sigma, i, j);
}

} // namespace spinlab
