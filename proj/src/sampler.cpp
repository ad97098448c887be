#include "spinlab/sampler.hpp"

#include <nlohmann/json.hpp>

#include <cmath>

namespace spinlab {
namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

constexpr int kBatches = 32;
constexpr double kSnap = 0x1.0p30; // Kawasaki increment lattice 2^-30

//! Batch-means accumulator for one scalar observable.
class BatchMeans {
public:
  explicit BatchMeans(std::int64_t batch_len) : len_(batch_len) {}

  void add(double v) {
    sum_ += v;
    if (++count_ == len_) {
      batch_values_.push_back(sum_ / len_);
      sum_ = 0.0;
      count_ = 0;
    }
  }

  Estimate estimate() const {
    const std::size_t b = batch_values_.size();
    double mean = 0.0;
    for (double v : batch_values_)
      mean += v;
    mean /= static_cast<double>(b);
    double var = 0.0;
    for (double v : batch_values_)
      var += (v - mean) * (v - mean);
    var /= static_cast<double>(b - 1);
    return {mean, std::sqrt(var / static_cast<double>(b))};
  }

private:
  std::int64_t len_;
  std::int64_t count_ = 0;
  double sum_ = 0.0;
  std::vector<double> batch_values_;
};

//! Variance/covariance via per-batch second moments; each batch yields one
//! nearly independent estimate.
class BatchCov {
public:
  explicit BatchCov(std::int64_t batch_len) : len_(batch_len) {}

  void add(double a, double b) {
    sa_ += a;
    sb_ += b;
    sab_ += a * b;
    if (++count_ == len_) {
      const double n = static_cast<double>(len_);
      const double cov = (sab_ / n - (sa_ / n) * (sb_ / n)) * n / (n - 1.0);
      batch_values_.push_back(cov);
      sa_ = sb_ = sab_ = 0.0;
      count_ = 0;
    }
  }

  Estimate estimate() const {
    const std::size_t b = batch_values_.size();
    double mean = 0.0;
    for (double v : batch_values_)
      mean += v;
    mean /= static_cast<double>(b);
    double var = 0.0;
    for (double v : batch_values_)
      var += (v - mean) * (v - mean);
    var /= static_cast<double>(b - 1);
    return {mean, std::sqrt(var / static_cast<double>(b))};
  }

private:
  std::int64_t len_;
  std::int64_t count_ = 0;
  double sa_ = 0.0, sb_ = 0.0, sab_ = 0.0;
  std::vector<double> batch_values_;
};

double kahan_sum(const std::vector<double>& xs) {
  double s = 0.0, c = 0.0;
  for (double x : xs) {
    const double y = x - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

std::vector<std::pair<int, int>> default_pairs(int K) {
  if (K < 2)
    return {};
  const int c = (K + 1) / 2;
  return {{c, c + 1}};
}

struct Accumulators {
  std::vector<BatchMeans> site;
  BatchCov sum_var;
  std::vector<BatchCov> pair;

  Accumulators(int K, std::size_t n_pairs, std::int64_t batch_len)
      : site(static_cast<std::size_t>(K), BatchMeans(batch_len)),
        sum_var(batch_len), pair(n_pairs, BatchCov(batch_len)) {}
};

ChainStats finalize(const Accumulators& acc, const std::vector<std::pair<int, int>>& pairs,
                    std::int64_t accepted, std::int64_t proposed, double max_drift) {
  ChainStats st;
  for (const auto& bm : acc.site)
    st.site_means.push_back(bm.estimate());
  st.var_sum = acc.sum_var.estimate();
  for (std::size_t p = 0; p < pairs.size(); ++p)
    st.pair_cov[pairs[p]] = acc.pair[p].estimate();
  st.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(proposed);
  st.low_acceptance_warning = st.acceptance_rate < 0.01;
  st.batches = kBatches;
  st.max_mean_drift = max_drift;
  return st;
}

void dump_row(const TrajectorySink& sink, std::int64_t step,
              const std::vector<double>& x) {
  if (!sink.out || sink.thin <= 0 || step % sink.thin != 0)
    return;
  for (std::size_t i = 0; i < x.size(); ++i) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%lld,%zu,%.17g\n",
                  static_cast<long long>(step), i + 1, x[i]);
    *sink.out << buf;
  }
}

} // namespace

Xoshiro256pp::Xoshiro256pp(std::uint64_t seed) {
  std::uint64_t sm = seed;
  for (auto& w : s_)
    w = splitmix64(sm);
}

std::uint64_t Xoshiro256pp::next() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Xoshiro256pp::uniform01() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double Xoshiro256pp::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  const double u1 = 1.0 - uniform01(); // (0, 1], keeps the log finite
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::acos(-1.0) * u2;
  cached_ = r * std::sin(a);
  has_cached_ = true;
  return r * std::cos(a);
}

std::uint64_t Xoshiro256pp::below(std::uint64_t bound) {
  // Lemire's multiply-shift with rejection; exact and platform-stable.
  std::uint64_t x = next();
  unsigned __int128 m = static_cast<unsigned __int128>(x) * bound;
  auto lo = static_cast<std::uint64_t>(m);
  if (lo < bound) {
    const std::uint64_t threshold = -bound % bound;
    while (lo < threshold) {
      x = next();
      m = static_cast<unsigned __int128>(x) * bound;
      lo = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

void ChainConfig::validate() const {
  if (burn_in < 0 || steps <= burn_in)
    throw ConfigError("sampler: need steps > burn_in >= 0");
  if (steps - burn_in < kBatches)
    throw ConfigError("sampler: need at least 32 post-burn-in steps for batch means");
  if (!(proposal_width > 0.0))
    throw ConfigError("sampler: proposal_width must be > 0");
}

ChainStats metropolis_gce(const LatticeModel& model, const ChainConfig& cfg,
                          const std::vector<std::pair<int, int>>& pairs_in,
                          const TrajectorySink& sink) {
  cfg.validate();
  const int K = model.K;
  const auto pairs = pairs_in.empty() ? default_pairs(K) : pairs_in;
  for (const auto& [a, b] : pairs)
    if (a < 1 || a > K || b < 1 || b > K)
      throw ConfigError("sampler: covariance pair out of range");

  Xoshiro256pp rng(cfg.seed);
  std::vector<double> x(static_cast<std::size_t>(K), 0.0);

  const auto local = [&](int i, double v) {
    const double left = (i > 0) ? x[static_cast<std::size_t>(i - 1)] : 0.0;
    const double right = (i + 1 < K) ? x[static_cast<std::size_t>(i + 1)] : 0.0;
    return model.potential.psi(v) +
           (model.s[static_cast<std::size_t>(i)] - model.sigma) * v -
           model.J * v * (left + right);
  };

  const std::int64_t kept = cfg.steps - cfg.burn_in;
  const std::int64_t batch_len = kept / kBatches;
  Accumulators acc(K, pairs.size(), batch_len);
  std::int64_t accepted = 0;
  double sum_x = 0.0;

  for (std::int64_t step = 0; step < cfg.steps; ++step) {
    const int i = static_cast<int>(rng.below(static_cast<std::uint64_t>(K)));
    const double old = x[static_cast<std::size_t>(i)];
    const double prop = old + cfg.proposal_width * rng.normal();
    const double de = local(i, prop) - local(i, old);
    const double u = rng.uniform01();
    if (de <= 0.0 || u < std::exp(-de)) {
      x[static_cast<std::size_t>(i)] = prop;
      sum_x += prop - old;
      ++accepted;
    }
    if (step >= cfg.burn_in) {
      const std::int64_t k = step - cfg.burn_in;
      if (k < batch_len * kBatches) {
        for (int j = 0; j < K; ++j)
          acc.site[static_cast<std::size_t>(j)].add(x[static_cast<std::size_t>(j)]);
        acc.sum_var.add(sum_x, sum_x);
        for (std::size_t p = 0; p < pairs.size(); ++p)
          acc.pair[p].add(x[static_cast<std::size_t>(pairs[p].first - 1)],
                          x[static_cast<std::size_t>(pairs[p].second - 1)]);
      }
      dump_row(sink, step, x);
    }
  }
  return finalize(acc, pairs, accepted, cfg.steps, 0.0);
}

ChainStats kawasaki_ce(const LatticeModel& model, double m, const ChainConfig& cfg,
                       const std::vector<std::pair<int, int>>& pairs_in,
                       const TrajectorySink& sink) {
  cfg.validate();
  const int K = model.K;
  if (K < 2)
    throw ConfigError("kawasaki_ce: needs K >= 2");
  const auto pairs = pairs_in.empty() ? default_pairs(K) : pairs_in;

  Xoshiro256pp rng(cfg.seed);
  // Offsets from the initial level m on the 2^-30 lattice; their sum is
  // exactly zero for the whole trajectory.
  std::vector<double> y(static_cast<std::size_t>(K), 0.0);
  std::vector<double> x(static_cast<std::size_t>(K), m);

  const auto energy_pair = [&](int i, int j, double yi, double yj) {
    // All Hamiltonian terms touching sites i and j, with the trial offsets.
    const auto val = [&](int k) {
      if (k < 0 || k >= K)
        return 0.0;
      if (k == i)
        return m + yi;
      if (k == j)
        return m + yj;
      return x[static_cast<std::size_t>(k)];
    };
    double e = 0.0;
    for (int k : {i, j}) {
      const double v = val(k);
      e += model.potential.psi(v) + model.s[static_cast<std::size_t>(k)] * v;
      e -= model.J * v * val(k + 1);
      if (k - 1 != i && k - 1 != j)
        e -= model.J * val(k - 1) * v;
    }
    // The (i-1, i) and (j-1, j) edges with the partner inside the set were
    // already counted once by the k+1 term above.
    return e;
  };

  const std::int64_t kept = cfg.steps - cfg.burn_in;
  const std::int64_t batch_len = kept / kBatches;
  Accumulators acc(K, pairs.size(), batch_len);
  std::int64_t accepted = 0;
  double max_drift = 0.0;

  for (std::int64_t step = 0; step < cfg.steps; ++step) {
    const int i = static_cast<int>(rng.below(static_cast<std::uint64_t>(K)));
    int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(K - 1)));
    if (j >= i)
      ++j;
    double delta = cfg.proposal_width * rng.normal();
    delta = std::nearbyint(delta * kSnap) / kSnap;
    const double yi = y[static_cast<std::size_t>(i)] + delta;
    const double yj = y[static_cast<std::size_t>(j)] - delta;
    const double de = energy_pair(i, j, yi, yj) -
                      energy_pair(i, j, y[static_cast<std::size_t>(i)],
                                  y[static_cast<std::size_t>(j)]);
    const double u = rng.uniform01();
    if (de <= 0.0 || u < std::exp(-de)) {
      y[static_cast<std::size_t>(i)] = yi;
      y[static_cast<std::size_t>(j)] = yj;
      x[static_cast<std::size_t>(i)] = m + yi;
      x[static_cast<std::size_t>(j)] = m + yj;
      ++accepted;
    }
    max_drift = std::max(max_drift, std::abs(kahan_sum(x) / K - m));
    if (step >= cfg.burn_in) {
      const std::int64_t k = step - cfg.burn_in;
      if (k < batch_len * kBatches) {
        double sum_x = 0.0;
        for (int jj = 0; jj < K; ++jj) {
          acc.site[static_cast<std::size_t>(jj)].add(x[static_cast<std::size_t>(jj)]);
          sum_x += x[static_cast<std::size_t>(jj)];
        }
        acc.sum_var.add(sum_x, sum_x);
        for (std::size_t p = 0; p < pairs.size(); ++p)
          acc.pair[p].add(x[static_cast<std::size_t>(pairs[p].first - 1)],
                          x[static_cast<std::size_t>(pairs[p].second - 1)]);
      }
      dump_row(sink, step, x);
    }
  }
  return finalize(acc, pairs, accepted, cfg.steps, max_drift);
}

std::string ChainStats::to_json() const {
  nlohmann::json j;
  auto est = [](const Estimate& e) {
    return nlohmann::json{{"value", e.value}, {"std_error", e.std_error}};
  };
  j["site_means"] = nlohmann::json::array();
  for (const auto& e : site_means)
    j["site_means"].push_back(est(e));
  j["var_sum"] = est(var_sum);
  j["pair_cov"] = nlohmann::json::array();
  for (const auto& [key, e] : pair_cov) {
    nlohmann::json row = est(e);
    row["i"] = key.first;
    row["j"] = key.second;
    j["pair_cov"].push_back(row);
  }
  j["acceptance_rate"] = acceptance_rate;
  j["low_acceptance_warning"] = low_acceptance_warning;
  j["batches"] = batches;
  j["max_mean_drift"] = max_mean_drift;
  return j.dump(2);
}

} // namespace spinlab
