#pragma once

#include <span>
#include <vector>

#include "spinlab/errors.hpp"

namespace spinlab {

//! Value of a perturbation together with its first two derivatives.
struct PotentialValue {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

enum class PerturbationKind { Zero, Cosine, Custom };

//! Single-site potential psi(z) = z^2/2 + psi_b(z) with a bounded
//! perturbation psi_b. The quadratic part is implicit and never stored;
//! this class only describes psi_b and its declared sup bound.
class SingleSitePotential {
public:
  static SingleSitePotential zero();

  //! psi_b(z) = a*cos(b*z); the bound |a|(1 + |b| + b^2) is derived.
  static SingleSitePotential cosine(double a, double b);

  //! Tabulated (value, d1, d2) triples on a strictly increasing grid,
  //! cubic Hermite interpolation in between, constant extension outside.
  static SingleSitePotential tabulated(std::vector<double> z,
                                       std::vector<double> value,
                                       std::vector<double> d1,
                                       std::vector<double> d2,
                                       double bound_sup);

  //! (psi_b, psi_b', psi_b'') at z.
  PotentialValue perturbation(double z) const;

  //! Full potential psi(z) = z^2/2 + psi_b(z).
  double psi(double z) const { return 0.5 * z * z + perturbation(z).value; }
  double psi_d1(double z) const { return z + perturbation(z).d1; }

  double bound_sup() const { return bound_sup_; }
  PerturbationKind kind() const { return kind_; }
  double cosine_a() const { return a_; }
  double cosine_b() const { return b_; }
  const std::vector<double>& table_z() const { return tab_z_; }
  const std::vector<double>& table_value() const { return tab_v_; }
  const std::vector<double>& table_d1() const { return tab_d1_; }
  const std::vector<double>& table_d2() const { return tab_d2_; }

private:
  SingleSitePotential() = default;
  void check_sampled_bound() const;

  PerturbationKind kind_ = PerturbationKind::Zero;
  double bound_sup_ = 0.0;
  double a_ = 0.0; // Cosine parameters
  double b_ = 0.0;
  std::vector<double> tab_z_, tab_v_, tab_d1_, tab_d2_;
};

//! Full model specification of the 1D nearest-neighbor chain.
//! Immutable after construction; safe to share across threads.
struct LatticeModel {
  int K = 1;                  // number of lattice sites, >= 1
  double J = 0.0;             // interaction strength, strictly inside (-1/4, 1/4)
  std::vector<double> s;      // external/boundary field, length K
  double sigma = 0.0;         // external field of the gce
  SingleSitePotential potential = SingleSitePotential::zero();

  //! Validates ranges and broadcasts a scalar field to length K.
  static LatticeModel make(int K, double J, std::vector<double> s, double sigma,
                           SingleSitePotential potential);
  static LatticeModel make(int K, double J, double s_scalar, double sigma,
                           SingleSitePotential potential);

  double max_abs_s() const;

  //! Copy with a different external field (grid/kernel stay valid).
  LatticeModel with_sigma(double new_sigma) const {
    LatticeModel m = *this;
    m.sigma = new_sigma;
    return m;
  }
};

//! H(x) = sum_i (x_i^2/2 + psi_b(x_i) + s_i x_i - J x_i x_{i+1}), x_{K+1} = 0.
double hamiltonian(const LatticeModel& model, std::span<const double> x);

} // namespace spinlab
