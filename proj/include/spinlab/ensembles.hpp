#pragma once

#include <complex>
#include <string>

#include "spinlab/transfer.hpp"

namespace spinlab {

//! Free energy of the gce with its first two sigma-derivatives, both taken
//! from exact moments (never finite differences).
struct AGce {
  double value = 0.0;
  double d1 = 0.0; // mean spin m(sigma)
  double d2 = 0.0; // Var(sum X_i)/K
};

//! Legendre transform H_K(m) = sigma(m) m - A_gce(sigma(m)).
struct LegendreHK {
  double value = 0.0;
  double d2 = 0.0;    // K / Var(sum X_i) at sigma(m)
  double sigma = 0.0; // the conjugate field sigma(m)
};

//! Coarse-grained Hamiltonian and finite-difference derivatives.
struct HBar {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

struct DensityOptions {
  double delta = 1.0;        // inner/outer split parameter
  double phi_cutoff = 1e-12; // extend the xi grid until |phi| falls below this
  double max_xi_factor = 64; // non-decay error beyond this multiple of sqrt(K)
};

//! Fourier-inverted density of (1/sqrt(K)) sum (X_i - m) at zero.
struct DensityResult {
  double g0 = 0.0;
  double delta = 1.0;
  std::complex<double> inner_value; // integral over |xi| <= delta sqrt(K), / 2 pi
  double outer_bound = 0.0;         // numerical bound on the discarded tail
  double xi_step = 0.0;
  double xi_max = 0.0;              // extent of the integration window
};

//! One full evaluation of both ensembles at a conjugate (sigma, m) pair.
struct ThermoReport {
  double sigma = 0.0;
  double m = 0.0;
  double a_gce = 0.0, a_gce_d1 = 0.0, a_gce_d2 = 0.0;
  double a_ce = 0.0, a_ce_d1 = 0.0, a_ce_d2 = 0.0;
  double h_K = 0.0, h_K_d2 = 0.0;
  double h_bar = 0.0, h_bar_d1 = 0.0, h_bar_d2 = 0.0;
  double g0 = 0.0;
};

//! Flat JSON object with the field names above; NaN anywhere is a
//! serialization error.
std::string to_json(const ThermoReport& report);

inline constexpr double kStencilStep = 1e-3;   // h_sigma and h_m
inline constexpr double kConjugateTol = 1e-10; // |m(sigma) - m| termination

AGce a_gce(const TransferOperator& op, double sigma);

//! The unique sigma with d/dsigma A_gce = m, by safeguarded Newton with a
//! bisection fallback. warm_start seeds the bracket when finite.
double sigma_of_m(const TransferOperator& op, double m,
                  double warm_start = std::numeric_limits<double>::quiet_NaN());

LegendreHK legendre_HK(const TransferOperator& op, double m);

//! phi(xi) = E[exp(i xi K^{-1/2} sum (X_k - m_k))] with sum m_k = K m.
std::complex<double> char_fn(const TransferOperator& op, double sigma, double m,
                             double xi);

DensityResult density_at_zero(const TransferOperator& op, double sigma,
                              const DensityOptions& opts = {});

//! A_ce(sigma) = A_gce(sigma) + ln(g0)/K (Cramer route).
double a_ce(const TransferOperator& op, double sigma, const DensityOptions& opts = {});

HBar h_bar(const TransferOperator& op, double m, const DensityOptions& opts = {});

struct DirectResolution {
  double half_width = 12.0; // integration window per axis around m
  int points_per_axis = 481;
};

//! Direct constrained-integral evaluation of the coarse-grained Hamiltonian,
//! -(1/K) ln of the surface integral of e^{-H} with Hausdorff factor sqrt(K).
//! Dense tensor quadrature; K <= 4 only (oracle use).
double h_bar_direct(const LatticeModel& model, double m,
                    const DirectResolution& res = {});

ThermoReport thermo_report(const TransferOperator& op, double sigma,
                           const DensityOptions& opts = {});

//! Spec-shaped wrappers constructing the operator internally.
AGce a_gce(const LatticeModel& model, const QuadratureGrid& grid);
double sigma_of_m(const LatticeModel& model, const QuadratureGrid& grid, double m);
LegendreHK legendre_HK(const LatticeModel& model, const QuadratureGrid& grid, double m);
std::complex<double> char_fn(const LatticeModel& model, const QuadratureGrid& grid,
                             double sigma, double m, double xi);
DensityResult density_at_zero(const LatticeModel& model, const QuadratureGrid& grid,
                              double sigma);
double a_ce(const LatticeModel& model, const QuadratureGrid& grid, double sigma);
HBar h_bar(const LatticeModel& model, const QuadratureGrid& grid, double m);
ThermoReport thermo_report(const LatticeModel& model, const QuadratureGrid& grid,
                           double sigma);

} // namespace spinlab
