#pragma once

#include <functional>
#include <string>
#include <vector>

namespace spinlab {

//! Runs fn(i) for i in [0, n) on SPINLAB_THREADS workers (default: hardware
//! concurrency). Results must go to preallocated slots indexed by i, which
//! keeps parallel runs bit-identical to serial ones. The first exception,
//! if any, is rethrown on the calling thread.
void parallel_for(int n, const std::function<void(int)>& fn);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

//! Ordinary least squares of y against x.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

//! Uniform grid of n points on [lo, hi] (n == 1 gives the midpoint).
std::vector<double> linspace(double lo, double hi, int n);

//! Shortest decimal form that round-trips; CSV/JSON outputs use this so
//! repeated runs are byte-identical.
std::string format_double(double x);

} // namespace spinlab
