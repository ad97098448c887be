#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spinlab/config.hpp"
#include "spinlab/ensembles.hpp"
#include "spinlab/experiments.hpp"
#include "spinlab/sampler.hpp"

namespace py = pybind11;
using namespace spinlab;

namespace {

SingleSitePotential potential_from_args(const std::string& kind, double a, double b) {
  if (kind == "zero")
    return SingleSitePotential::zero();
  if (kind == "cosine")
    return SingleSitePotential::cosine(a, b);
  throw ConfigError("potential kind must be 'zero' or 'cosine' here; use "
                    "load_model for tabulated potentials");
}

py::dict moments_dict(const GceMoments& mom) {
  py::dict d;
  d["m_per_site"] = mom.m_per_site;
  d["m"] = mom.m;
  d["var_sum"] = mom.var_sum;
  d["centered_sum_p3"] = mom.centered_sum_p3;
  if (mom.centered_sum_p4)
    d["centered_sum_p4"] = *mom.centered_sum_p4;
  py::dict cov;
  for (const auto& [key, value] : mom.cov)
    cov[py::make_tuple(key.first, key.second)] = value;
  d["cov"] = cov;
  d["log_z"] = mom.log_z;
  return d;
}

py::dict report_dict(const ThermoReport& r) {
  py::dict d;
  d["sigma"] = r.sigma;
  d["m"] = r.m;
  d["a_gce"] = r.a_gce;
  d["a_gce_d1"] = r.a_gce_d1;
  d["a_gce_d2"] = r.a_gce_d2;
  d["a_ce"] = r.a_ce;
  d["a_ce_d1"] = r.a_ce_d1;
  d["a_ce_d2"] = r.a_ce_d2;
  d["h_K"] = r.h_K;
  d["h_K_d2"] = r.h_K_d2;
  d["h_bar"] = r.h_bar;
  d["h_bar_d1"] = r.h_bar_d1;
  d["h_bar_d2"] = r.h_bar_d2;
  d["g0"] = r.g0;
  return d;
}

py::dict stats_dict(const ChainStats& st) {
  py::dict d;
  py::list means;
  for (const auto& e : st.site_means)
    means.append(py::make_tuple(e.value, e.std_error));
  d["site_means"] = means;
  d["var_sum"] = py::make_tuple(st.var_sum.value, st.var_sum.std_error);
  py::dict cov;
  for (const auto& [key, e] : st.pair_cov)
    cov[py::make_tuple(key.first, key.second)] = py::make_tuple(e.value, e.std_error);
  d["pair_cov"] = cov;
  d["acceptance_rate"] = st.acceptance_rate;
  d["low_acceptance_warning"] = st.low_acceptance_warning;
  d["batches"] = st.batches;
  d["max_mean_drift"] = st.max_mean_drift;
  return d;
}

} // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "1D unbounded-spin lattice thermodynamics: transfer-operator "
              "quadrature, ensemble free energies, Fourier-inverted densities, "
              "Monte Carlo samplers";

  py::register_exception<ConfigError>(mod, "ConfigError");
  py::register_exception<ResolutionError>(mod, "ResolutionError");
  py::register_exception<ConvergenceError>(mod, "ConvergenceError");
  py::register_exception<ConsistencyError>(mod, "ConsistencyError");
  py::register_exception<DegenerateFitError>(mod, "DegenerateFitError");

  py::class_<LatticeModel>(mod, "LatticeModel")
      .def_readonly("K", &LatticeModel::K)
      .def_readonly("J", &LatticeModel::J)
      .def_readonly("s", &LatticeModel::s)
      .def_readonly("sigma", &LatticeModel::sigma)
      .def("with_sigma", &LatticeModel::with_sigma);

  mod.def(
      "make_model",
      [](int K, double J, double s, double sigma, const std::string& potential,
         double a, double b) {
        return LatticeModel::make(K, J, s, sigma, potential_from_args(potential, a, b));
      },
      py::arg("K"), py::arg("J") = 0.0, py::arg("s") = 0.0, py::arg("sigma") = 0.0,
      py::arg("potential") = "zero", py::arg("a") = 0.0, py::arg("b") = 0.0);
  mod.def("load_model", &load_model, py::arg("text"),
          "parse a configuration document");
  mod.def("load_model_file", &load_model_file, py::arg("path"));
  mod.def("serialize_model", &serialize_model);
  mod.def("config_digest", &config_digest);

  mod.def(
      "hamiltonian",
      [](const LatticeModel& m, const std::vector<double>& x) {
        return hamiltonian(m, x);
      },
      py::arg("model"), py::arg("x"));

  py::class_<QuadratureGrid>(mod, "QuadratureGrid")
      .def_readonly("nodes", &QuadratureGrid::nodes)
      .def_readonly("log_weights", &QuadratureGrid::log_weights)
      .def_readonly("truncation", &QuadratureGrid::truncation)
      .def_property_readonly("size", &QuadratureGrid::size);

  mod.def(
      "build_grid",
      [](const LatticeModel& m, int n, double tol, const std::string& scheme) {
        return build_grid(m, n, tol,
                          scheme == "trapezoid" ? QuadratureScheme::Trapezoid
                                                : QuadratureScheme::GaussHermite);
      },
      py::arg("model"), py::arg("N") = 128, py::arg("target_tol") = 1e-12,
      py::arg("scheme") = "gauss-hermite");

  mod.def("log_partition",
          [](const LatticeModel& m, const QuadratureGrid& g, std::complex<double> t) {
            return log_partition(m, g, t);
          },
          py::arg("model"), py::arg("grid"), py::arg("tilt") = std::complex<double>(0, 0));
  mod.def("gce_moments",
          [](const LatticeModel& m, const QuadratureGrid& g, int max_order) {
            return moments_dict(gce_moments(m, g, max_order));
          },
          py::arg("model"), py::arg("grid"), py::arg("max_order") = 3);
  mod.def("covariance",
          [](const LatticeModel& m, const QuadratureGrid& g, int i, int j) {
            return covariance(m, g, i, j);
          },
          py::arg("model"), py::arg("grid"), py::arg("i"), py::arg("j"));
  mod.def("conditional_site",
          [](const LatticeModel& m, const QuadratureGrid& g, int i, double left,
             double right) {
            const ConditionalSite cs = conditional_site(m, g, i, left, right);
            py::dict d;
            d["site"] = cs.site;
            d["m_i2"] = cs.m_i2;
            d["s_i2_sq"] = cs.s_i2_sq;
            d["t_i2"] = cs.t_i2;
            return d;
          },
          py::arg("model"), py::arg("grid"), py::arg("i"), py::arg("left"),
          py::arg("right"));

  mod.def("a_gce",
          [](const LatticeModel& m, const QuadratureGrid& g) {
            const AGce ag = a_gce(m, g);
            return py::make_tuple(ag.value, ag.d1, ag.d2);
          },
          py::arg("model"), py::arg("grid"));
  mod.def("sigma_of_m",
          [](const LatticeModel& m, const QuadratureGrid& g, double target) {
            return sigma_of_m(m, g, target);
          },
          py::arg("model"), py::arg("grid"), py::arg("m"));
  mod.def("legendre_HK",
          [](const LatticeModel& m, const QuadratureGrid& g, double target) {
            const LegendreHK hk = legendre_HK(m, g, target);
            return py::make_tuple(hk.value, hk.d2);
          },
          py::arg("model"), py::arg("grid"), py::arg("m"));
  mod.def("char_fn",
          [](const LatticeModel& mdl, const QuadratureGrid& g, double sigma, double m,
             double xi) { return char_fn(mdl, g, sigma, m, xi); },
          py::arg("model"), py::arg("grid"), py::arg("sigma"), py::arg("m"),
          py::arg("xi"));
  mod.def("density_at_zero",
          [](const LatticeModel& m, const QuadratureGrid& g, double sigma) {
            const DensityResult den = density_at_zero(m, g, sigma);
            py::dict d;
            d["g0"] = den.g0;
            d["delta"] = den.delta;
            d["inner_value"] = den.inner_value;
            d["outer_bound"] = den.outer_bound;
            d["xi_step"] = den.xi_step;
            d["xi_max"] = den.xi_max;
            return d;
          },
          py::arg("model"), py::arg("grid"), py::arg("sigma"));
  mod.def("a_ce",
          [](const LatticeModel& m, const QuadratureGrid& g, double sigma) {
            return a_ce(m, g, sigma);
          },
          py::arg("model"), py::arg("grid"), py::arg("sigma"));
  mod.def("h_bar",
          [](const LatticeModel& m, const QuadratureGrid& g, double target) {
            const HBar hb = h_bar(m, g, target);
            return py::make_tuple(hb.value, hb.d1, hb.d2);
          },
          py::arg("model"), py::arg("grid"), py::arg("m"));
  mod.def("h_bar_direct",
          [](const LatticeModel& m, double target, double half_width, int points) {
            return h_bar_direct(m, target, {half_width, points});
          },
          py::arg("model"), py::arg("m"), py::arg("half_width") = 12.0,
          py::arg("points") = 481);
  mod.def("thermo_report",
          [](const LatticeModel& m, const QuadratureGrid& g, double sigma) {
            return report_dict(thermo_report(m, g, sigma));
          },
          py::arg("model"), py::arg("grid"), py::arg("sigma"));

  py::class_<ChainConfig>(mod, "ChainConfig")
      .def(py::init([](std::int64_t steps, std::int64_t burn_in, std::uint64_t seed,
                       double width) {
             ChainConfig cfg;
             cfg.steps = steps;
             cfg.burn_in = burn_in;
             cfg.seed = seed;
             cfg.proposal_width = width;
             return cfg;
           }),
           py::arg("steps") = 1'000'000, py::arg("burn_in") = 100'000,
           py::arg("seed") = 1, py::arg("proposal_width") = 1.0)
      .def_readwrite("steps", &ChainConfig::steps)
      .def_readwrite("burn_in", &ChainConfig::burn_in)
      .def_readwrite("seed", &ChainConfig::seed)
      .def_readwrite("proposal_width", &ChainConfig::proposal_width);

  mod.def("metropolis_gce",
          [](const LatticeModel& m, const ChainConfig& cfg,
             const std::vector<std::pair<int, int>>& pairs) {
            return stats_dict(metropolis_gce(m, cfg, pairs));
          },
          py::arg("model"), py::arg("cfg"),
          py::arg("pairs") = std::vector<std::pair<int, int>>{});
  mod.def("kawasaki_ce",
          [](const LatticeModel& m, double target, const ChainConfig& cfg,
             const std::vector<std::pair<int, int>>& pairs) {
            return stats_dict(kawasaki_ce(m, target, cfg, pairs));
          },
          py::arg("model"), py::arg("m"), py::arg("cfg"),
          py::arg("pairs") = std::vector<std::pair<int, int>>{});

  mod.def("decay_study",
          [](const LatticeModel& m, int max_distance, int grid_n) {
            const DecayFit fit = decay_study(m, max_distance, GridSpec{grid_n, 1e-12});
            py::dict d;
            d["distances"] = fit.distances;
            d["cov_values"] = fit.cov_values;
            d["rate_c"] = fit.rate_c;
            d["prefactor"] = fit.prefactor;
            d["r_squared"] = fit.r_squared;
            return d;
          },
          py::arg("model"), py::arg("max_distance") = 12, py::arg("grid_n") = 128);
}
