#pragma once

// Wavelength-aware ("ideal") arbitration under the three spectral-ordering
// enforcement policies, and the minimum tuning range search built on it.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wdmarb/model.hpp"

namespace wdmarb {

enum class Policy : std::uint8_t { LtD, LtC, LtA };

std::string_view to_string(Policy p) noexcept;
Policy parse_policy(std::string_view text);

struct IdealResult final {
  bool feasible = false;
  std::vector<int> assignment;  // ring spatial index -> laser index, empty if infeasible
  std::optional<int> shift;     // LtC / LtD only
  double total_tuning = 0.0;    // nm, sum of nearest tuner codes of the assignment
};

// Nearest tuner code of every (ring, laser) pair; NaN marks unreachable.
class ReachMatrix final {
 public:
  ReachMatrix(const MwlSample& mwl, const RingRowSample& row, double eps = kDefaultEps);

  int size() const noexcept { return n_; }
  bool reachable(int ring, int laser) const { return !std::isnan(code(ring, laser)); }
  double code(int ring, int laser) const { return codes_[static_cast<std::size_t>(ring) * n_ + laser]; }

 private:
  int n_ = 0;
  std::vector<double> codes_;
};

IdealResult arbitrate_ideal(const MwlSample& mwl, const RingRowSample& row, Policy policy,
                            const SpectralOrdering& s, double eps = kDefaultEps);
IdealResult arbitrate_ideal(const ReachMatrix& reach, Policy policy, const SpectralOrdering& s);

// Exhaustive permutation check of Lock-to-Any feasibility. Test oracle;
// rejects rows with more than 8 rings.
bool brute_force_lta(const MwlSample& mwl, const RingRowSample& row, double eps = kDefaultEps);

struct MinTrQuery final {
  DwdmGridSpec grid;
  VariationParams variation;
  Policy policy = Policy::LtC;
  SpectralOrdering r;  // pre-fabrication ordering used for sampling
  SpectralOrdering s;  // target ordering; ignored for LtA
  int n_lasers = 100;
  int n_rows = 100;
  std::uint64_t seed = 1;
  double resolution = 0.056;  // nm
  double ceiling = 0.0;       // nm; <= 0 selects 2 * fsr_mean
  int jobs = 1;
};

struct MinTrResult final {
  std::optional<double> min_tr;  // empty when infeasible at the ceiling
  double ceiling = 0.0;
  double resolution = 0.0;
  long trials = 0;

  bool above_max() const noexcept { return !min_tr.has_value(); }
};

// Smallest tuning-range mean on the resolution grid for which every sampled
// trial arbitrates. Binary search over the grid index; samples are drawn once
// and rescaled, which keeps feasibility monotone in the tuning-range mean.
MinTrResult min_tuning_range(const MinTrQuery& query);
MinTrResult min_tuning_range(const TrialSet& trials, Policy policy, const SpectralOrdering& s,
                             double tr_mean_ceiling, double resolution, int jobs = 1);

}  // namespace wdmarb
