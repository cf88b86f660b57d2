#include "wdmarb/ideal_arbiter.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace wdmarb {

std::string_view to_string(Policy p) noexcept {
  switch (p) {
    case Policy::LtD: return "LtD";
    case Policy::LtC: return "LtC";
    case Policy::LtA: return "LtA";
  }
  return "?";
}

Policy parse_policy(std::string_view text) {
  std::string t(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "ltd") return Policy::LtD;
  if (t == "ltc") return Policy::LtC;
  if (t == "lta") return Policy::LtA;
  throw std::invalid_argument("unknown policy '" + std::string(text) + "' (expected LtD, LtC or LtA)");
}

ReachMatrix::ReachMatrix(const MwlSample& mwl, const RingRowSample& row, double eps)
    : n_(row.size()) {
  if (mwl.size() != n_) throw std::invalid_argument("laser and ring row channel counts differ");
  codes_.assign(static_cast<std::size_t>(n_) * n_, std::numeric_limits<double>::quiet_NaN());
  for (int i = 0; i < n_; ++i)
    for (int l = 0; l < n_; ++l)
      if (auto d = nearest_tuner_code(row.rings[i], mwl.wavelengths[l], eps))
        codes_[static_cast<std::size_t>(i) * n_ + l] = *d;
}

namespace {

// Ring of rank p locks laser (p + k) mod n for every p.
std::optional<double> shift_cost(const ReachMatrix& reach, const SpectralOrdering& s, int k) {
  const int n = reach.size();
  double total = 0.0;
  for (int p = 0; p < n; ++p) {
    const double d = reach.code(s.ring_at(p), (p + k) % n);
    if (std::isnan(d)) return std::nullopt;
    total += d;
  }
  return total;
}

IdealResult shifted_result(const SpectralOrdering& s, int n, int k, double total) {
  IdealResult out;
  out.feasible = true;
  out.shift = k;
  out.total_tuning = total;
  out.assignment.resize(n);
  for (int p = 0; p < n; ++p) out.assignment[s.ring_at(p)] = (p + k) % n;
  return out;
}

// Kuhn's augmenting paths over the reachability graph.
class Matcher {
 public:
  explicit Matcher(const ReachMatrix& reach)
      : reach_(reach), laser_owner_(reach.size(), -1), seen_(reach.size(), 0) {}

  int solve() {
    int matched = 0;
    for (int ring = 0; ring < reach_.size(); ++ring) {
      ++stamp_;
      if (augment(ring)) ++matched;
    }
    return matched;
  }

  std::vector<int> assignment() const {
    std::vector<int> out(reach_.size(), -1);
    for (int l = 0; l < reach_.size(); ++l)
      if (laser_owner_[l] >= 0) out[laser_owner_[l]] = l;
    return out;
  }

 private:
  bool augment(int ring) {
    for (int l = 0; l < reach_.size(); ++l) {
      if (!reach_.reachable(ring, l) || seen_[l] == stamp_) continue;
      seen_[l] = stamp_;
      if (laser_owner_[l] < 0 || augment(laser_owner_[l])) {
        laser_owner_[l] = ring;
        return true;
      }
    }
    return false;
  }

  const ReachMatrix& reach_;
  std::vector<int> laser_owner_;
  std::vector<int> seen_;
  int stamp_ = 0;
};

}  // namespace

IdealResult arbitrate_ideal(const ReachMatrix& reach, Policy policy, const SpectralOrdering& s) {
  const int n = reach.size();
  switch (policy) {
    case Policy::LtD: {
      if (s.size() != n) throw std::invalid_argument("target ordering size differs from n_ch");
      if (auto cost = shift_cost(reach, s, 0)) return shifted_result(s, n, 0, *cost);
      return {};
    }
    case Policy::LtC: {
      if (s.size() != n) throw std::invalid_argument("target ordering size differs from n_ch");
      int best_k = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int k = 0; k < n; ++k) {
        auto cost = shift_cost(reach, s, k);
        if (cost && *cost < best) {
          best = *cost;
          best_k = k;
        }
      }
      if (best_k < 0) return {};
      return shifted_result(s, n, best_k, best);
    }
    case Policy::LtA: {
      Matcher matcher(reach);
      if (matcher.solve() != n) return {};
      IdealResult out;
      out.feasible = true;
      out.assignment = matcher.assignment();
      for (int i = 0; i < n; ++i) out.total_tuning += reach.code(i, out.assignment[i]);
      return out;
    }
  }
  return {};
}

IdealResult arbitrate_ideal(const MwlSample& mwl, const RingRowSample& row, Policy policy,
                            const SpectralOrdering& s, double eps) {
  return arbitrate_ideal(ReachMatrix(mwl, row, eps), policy, s);
}

bool brute_force_lta(const MwlSample& mwl, const RingRowSample& row, double eps) {
  const int n = row.size();
  if (n > 8) throw std::invalid_argument("brute_force_lta is limited to 8 rings");
  if (mwl.size() != n) throw std::invalid_argument("laser and ring row channel counts differ");
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    bool ok = true;
    for (int i = 0; i < n && ok; ++i)
      ok = !tuner_codes_for(row.rings[i], mwl.wavelengths[perm[i]], eps).empty();
    if (ok) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

namespace {

bool all_feasible(const TrialSet& trials, Policy policy, const SpectralOrdering& s, double tr_mean,
                  int jobs) {
  const int n_rows = static_cast<int>(trials.rows.size());
  std::atomic<bool> failed{false};
  auto work = [&](int begin, int end) {
    for (int b = begin; b < end && !failed.load(std::memory_order_relaxed); ++b) {
      const RingRowSample row = trials.rows[b].with_tr_mean(tr_mean);
      for (const MwlSample& mwl : trials.lasers) {
        if (!arbitrate_ideal(ReachMatrix(mwl, row), policy, s).feasible) {
          failed.store(true, std::memory_order_relaxed);
          return;
        }
      }
    }
  };
  jobs = std::clamp(jobs, 1, std::max(1, n_rows));
  if (jobs == 1) {
    work(0, n_rows);
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < jobs; ++t)
      pool.emplace_back(work, n_rows * t / jobs, n_rows * (t + 1) / jobs);
  }
  return !failed.load();
}

}  // namespace

MinTrResult min_tuning_range(const TrialSet& trials, Policy policy, const SpectralOrdering& s,
                             double tr_mean_ceiling, double resolution, int jobs) {
  if (!(resolution > 0.0) || !std::isfinite(resolution))
    throw std::invalid_argument("min_tuning_range: resolution must be > 0");
  if (!(tr_mean_ceiling >= 0.0)) throw std::invalid_argument("min_tuning_range: bad ceiling");
  MinTrResult out;
  out.ceiling = tr_mean_ceiling;
  out.resolution = resolution;
  out.trials = trials.trials();

  const long top = static_cast<long>(std::ceil(tr_mean_ceiling / resolution - 1e-9));
  auto feasible_at = [&](long idx) {
    return all_feasible(trials, policy, s, static_cast<double>(idx) * resolution, jobs);
  };
  if (!feasible_at(top)) return out;
  long lo = 0, hi = top;  // hi is feasible
  while (lo < hi) {
    const long mid = lo + (hi - lo) / 2;
    if (feasible_at(mid))
      hi = mid;
    else
      lo = mid + 1;
  }
  out.min_tr = static_cast<double>(hi) * resolution;
  return out;
}

MinTrResult min_tuning_range(const MinTrQuery& q) {
  const double ceiling = q.ceiling > 0.0 ? q.ceiling : 2.0 * q.variation.fsr_mean;
  const SpectralOrdering r = q.r.size() ? q.r : SpectralOrdering::natural(q.grid.n_ch);
  const SpectralOrdering s = q.s.size() ? q.s : r;
  const TrialSet trials = sample_trials(q.grid, q.variation, r, q.n_lasers, q.n_rows, q.seed);
  return min_tuning_range(trials, q.policy, s, ceiling, q.resolution, q.jobs);
}

}  // namespace wdmarb
