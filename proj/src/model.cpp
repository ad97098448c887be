#include "spinlab/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace spinlab {
namespace {

// Minimal splitmix64: only used to place the sampled-bound check points.
double check_point(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z = z ^ (z >> 31);
  const double u = static_cast<double>(z >> 11) * 0x1.0p-53;
  return -50.0 + 100.0 * u;
}

} // namespace

SingleSitePotential SingleSitePotential::zero() {
  SingleSitePotential p;
  p.kind_ = PerturbationKind::Zero;
  p.bound_sup_ = 0.0;
  return p;
}

SingleSitePotential SingleSitePotential::cosine(double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b))
    throw ConfigError("potential: cosine parameters must be finite");
  SingleSitePotential p;
  p.kind_ = PerturbationKind::Cosine;
  p.a_ = a;
  p.b_ = b;
  p.bound_sup_ = std::abs(a) * (1.0 + std::abs(b) + b * b);
  p.check_sampled_bound();
  return p;
}

SingleSitePotential SingleSitePotential::tabulated(std::vector<double> z,
                                                   std::vector<double> value,
                                                   std::vector<double> d1,
                                                   std::vector<double> d2,
                                                   double bound_sup) {
  const std::size_t n = z.size();
  if (n < 2)
    throw ConfigError("potential: table needs at least 2 rows");
  if (value.size() != n || d1.size() != n || d2.size() != n)
    throw ConfigError("potential: table columns have mismatched lengths");
  if (!(bound_sup >= 0.0) || !std::isfinite(bound_sup))
    throw ConfigError("potential: bound_sup must be a finite nonnegative number");
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (!(z[i] < z[i + 1]))
      throw ConfigError("potential: table grid must be strictly increasing");
  SingleSitePotential p;
  p.kind_ = PerturbationKind::Custom;
  p.bound_sup_ = bound_sup;
  p.tab_z_ = std::move(z);
  p.tab_v_ = std::move(value);
  p.tab_d1_ = std::move(d1);
  p.tab_d2_ = std::move(d2);
  p.check_sampled_bound();
  return p;
}

PotentialValue SingleSitePotential::perturbation(double z) const {
  switch (kind_) {
  case PerturbationKind::Zero:
    return {0.0, 0.0, 0.0};
  case PerturbationKind::Cosine: {
    const double c = std::cos(b_ * z);
    const double s = std::sin(b_ * z);
    return {a_ * c, -a_ * b_ * s, -a_ * b_ * b_ * c};
  }
  case PerturbationKind::Custom:
    break;
  }
  // Constant extension keeps the perturbation bounded outside the table.
  if (z <= tab_z_.front())
    return {tab_v_.front(), 0.0, 0.0};
  if (z >= tab_z_.back())
    return {tab_v_.back(), 0.0, 0.0};
  const auto it = std::upper_bound(tab_z_.begin(), tab_z_.end(), z);
  const std::size_t k = static_cast<std::size_t>(it - tab_z_.begin()) - 1;
  const double h = tab_z_[k + 1] - tab_z_[k];
  const double t = (z - tab_z_[k]) / h;
  // Cubic Hermite per channel: (value,d1) drive the value, (d1,d2) its
  // derivative, d2 is interpolated linearly.
  const auto hermite = [t, h](double f0, double f1, double g0, double g1) {
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * f0 + (t3 - 2 * t2 + t) * h * g0 +
           (-2 * t3 + 3 * t2) * f1 + (t3 - t2) * h * g1;
  };
  PotentialValue out;
  out.value = hermite(tab_v_[k], tab_v_[k + 1], tab_d1_[k], tab_d1_[k + 1]);
  out.d1 = hermite(tab_d1_[k], tab_d1_[k + 1], tab_d2_[k], tab_d2_[k + 1]);
  out.d2 = (1.0 - t) * tab_d2_[k] + t * tab_d2_[k + 1];
  return out;
}

void SingleSitePotential::check_sampled_bound() const {
  std::uint64_t state = 0x5eed5eed5eed5eedULL;
  const double tol = bound_sup_ + 1e-12;
  for (int i = 0; i < 1000; ++i) {
    const double z = check_point(state);
    const PotentialValue v = perturbation(z);
    if (std::abs(v.value) > tol || std::abs(v.d1) > tol || std::abs(v.d2) > tol)
      throw ConfigError("potential: sampled perturbation exceeds declared bound_sup at z=" +
                        std::to_string(z));
  }
}

LatticeModel LatticeModel::make(int K, double J, std::vector<double> s, double sigma,
                                SingleSitePotential potential) {
  if (K < 1)
    throw ConfigError("model: K must be >= 1");
  if (!(std::abs(J) < 0.25))
    throw ConfigError("model: J out of range, the interaction strength must lie "
                      "strictly inside (-0.25, 0.25)");
  if (!std::isfinite(sigma))
    throw ConfigError("model: sigma must be finite");
  if (s.size() == 1 && K > 1)
    s.assign(static_cast<std::size_t>(K), s[0]);
  if (s.size() != static_cast<std::size_t>(K))
    throw ConfigError("model: s must be a scalar or a vector of length K");
  for (double si : s)
    if (!std::isfinite(si))
      throw ConfigError("model: s entries must be finite");
  LatticeModel m;
  m.K = K;
  m.J = J;
  m.s = std::move(s);
  m.sigma = sigma;
  m.potential = std::move(potential);
  return m;
}

LatticeModel LatticeModel::make(int K, double J, double s_scalar, double sigma,
                                SingleSitePotential potential) {
  return make(K, J, std::vector<double>{s_scalar}, sigma, std::move(potential));
}

double LatticeModel::max_abs_s() const {
  double m = 0.0;
  for (double si : s)
    m = std::max(m, std::abs(si));
  return m;
}

double hamiltonian(const LatticeModel& model, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(model.K))
    throw ConfigError("hamiltonian: configuration has length " +
                      std::to_string(x.size()) + ", model has K=" +
                      std::to_string(model.K));
  double h = 0.0;
  for (int i = 0; i < model.K; ++i) {
    const double xi = x[static_cast<std::size_t>(i)];
    const double xn = (i + 1 < model.K) ? x[static_cast<std::size_t>(i + 1)] : 0.0;
    h += model.potential.psi(xi) + model.s[static_cast<std::size_t>(i)] * xi -
         model.J * xi * xn;
  }
  return h;
}

} // namespace spinlab
