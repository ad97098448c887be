#pragma once

#include <string>
#include <vector>

#include "spinlab/experiments.hpp"

namespace spinlab {

//! Per-run provenance record written next to every sweep's CSV files.
struct RunManifest {
  std::string config_digest;
  std::string tool_version;
  std::string started_at; // ISO 8601 UTC; the only non-deterministic output
  int grid_n = 0;
  double grid_truncation = 0.0;
  std::vector<std::string> outputs;
  std::string sigma_window_note;
  double wall_time_seconds = 0.0;
  std::string extra_json; // study-specific payload, already-serialized object

  void write(const std::string& path) const;
};

std::string tool_version();
std::string timestamp_utc();

void write_rate_fit_csv(const std::string& path, const RateFit& fit);
void write_convexity_csv(const std::string& path, const ConvexityScan& scan);
void write_decay_csv(const std::string& path, const DecayFit& fit);
void write_conditional_csv(const std::string& path, const ConditionalBoundSummary& s);
void write_outer_decay_csv(const std::string& path, const OuterDecaySummary& s);
void write_g_derivative_csv(const std::string& path, const GDerivativeStudy& s);
void write_chi_csv(const std::string& path, const std::vector<double>& xi,
                   const std::vector<std::complex<double>>& phi);

} // namespace spinlab
