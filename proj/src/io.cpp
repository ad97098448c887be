#include "spinlab/io.hpp"

#include <nlohmann/json.hpp>

#include <ctime>
#include <fstream>

#include "spinlab/util.hpp"

namespace spinlab {
namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out)
    throw ConfigError("cannot open output file '" + path + "'");
  return out;
}

} // namespace

std::string tool_version() { return "spinlab 0.1.0"; }

std::string timestamp_utc() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

void RunManifest::write(const std::string& path) const {
  nlohmann::json j{
      {"config_digest", config_digest},
      {"tool_version", tool_version},
      {"started_at", started_at},
      {"grid", {{"N", grid_n}, {"R", grid_truncation}}},
      {"outputs", outputs},
      {"sigma_window_note", sigma_window_note},
      {"wall_time_seconds", wall_time_seconds},
  };
  if (!extra_json.empty())
    j["study"] = nlohmann::json::parse(extra_json);
  open_out(path) << j.dump(2) << "\n";
}

void write_rate_fit_csv(const std::string& path, const RateFit& fit) {
  auto out = open_out(path);
  out << "K_list,sup_diff,slope,intercept,r_squared,quantity_tag\n";
  for (std::size_t i = 0; i < fit.K_list.size(); ++i)
    out << fit.K_list[i] << ',' << format_double(fit.sup_diff[i]) << ','
        << format_double(fit.slope) << ',' << format_double(fit.intercept) << ','
        << format_double(fit.r_squared) << ',' << to_string(fit.quantity_tag) << "\n";
}

void write_convexity_csv(const std::string& path, const ConvexityScan& scan) {
  auto out = open_out(path);
  out << "m_grid,h_bar_d2,h_K_d2,K,lower,upper\n";
  for (std::size_t i = 0; i < scan.m_grid.size(); ++i)
    out << format_double(scan.m_grid[i]) << ',' << format_double(scan.h_bar_d2[i]) << ','
        << format_double(scan.h_K_d2[i]) << ',' << scan.K << ','
        << format_double(scan.lower) << ',' << format_double(scan.upper) << "\n";
}

void write_decay_csv(const std::string& path, const DecayFit& fit) {
  auto out = open_out(path);
  out << "distances,cov_values,rate_c,prefactor,r_squared\n";
  for (std::size_t i = 0; i < fit.distances.size(); ++i)
    out << fit.distances[i] << ',' << format_double(fit.cov_values[i]) << ','
        << format_double(fit.rate_c) << ',' << format_double(fit.prefactor) << ','
        << format_double(fit.r_squared) << "\n";
}

void write_conditional_csv(const std::string& path, const ConditionalBoundSummary& s) {
  auto out = open_out(path);
  out << "site,left,right,sigma,m_i2,s_i2_sq,t_i2\n";
  for (const ConditionalTrial& t : s.trials)
    out << t.site << ',' << format_double(t.left) << ',' << format_double(t.right) << ','
        << format_double(t.sigma) << ',' << format_double(t.m_i2) << ','
        << format_double(t.s_i2_sq) << ',' << format_double(t.t_i2) << "\n";
}

void write_outer_decay_csv(const std::string& path, const OuterDecaySummary& s) {
  auto out = open_out(path);
  out << "xi,abs_phi,delta,K,max_abs_phi,g0\n";
  for (std::size_t i = 0; i < s.xi.size(); ++i)
    out << format_double(s.xi[i]) << ',' << format_double(s.abs_phi[i]) << ','
        << format_double(s.delta) << ',' << s.K << ',' << format_double(s.max_abs_phi)
        << ',' << format_double(s.g0) << "\n";
}

void write_g_derivative_csv(const std::string& path, const GDerivativeStudy& s) {
  auto out = open_out(path);
  out << "K,g0_min,g0_max,d1_max,d2_max,d1_growth_exponent,d2_growth_exponent\n";
  for (const GDerivativeRow& r : s.rows)
    out << r.K << ',' << format_double(r.g0_min) << ',' << format_double(r.g0_max) << ','
        << format_double(r.d1_max) << ',' << format_double(r.d2_max) << ','
        << format_double(s.d1_growth_exponent) << ','
        << format_double(s.d2_growth_exponent) << "\n";
}

void write_chi_csv(const std::string& path, const std::vector<double>& xi,
                   const std::vector<std::complex<double>>& phi) {
  auto out = open_out(path);
  out << "xi,re_phi,im_phi\n";
  for (std::size_t i = 0; i < xi.size(); ++i)
    out << format_double(xi[i]) << ',' << format_double(phi[i].real()) << ','
        << format_double(phi[i].imag()) << "\n";
}

} // namespace spinlab
