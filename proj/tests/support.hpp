#pragma once

// Fixtures shared by the unit tests.

#include <cstdint>
#include <vector>

#include "wdmarb/model.hpp"

namespace wdmarb::test {

inline VariationParams zero_variation(double tr_mean = 2.24) {
  VariationParams v;
  v.grid_offset_bound = 0.0;
  v.laser_local_bound = 0.0;
  v.ring_local_bound = 0.0;
  v.fsr_rel_bound = 0.0;
  v.tr_mean = tr_mean;
  v.tr_rel_bound = 0.0;
  return v;
}

// One deterministic (laser, row) pair.
struct Instance {
  MwlSample mwl;
  RingRowSample row;
};

inline Instance sample_instance(const DwdmGridSpec& grid, const VariationParams& var, const SpectralOrdering& r,
                                std::uint64_t seed) {
  Rng rng(seed);
  Instance in;
  in.mwl = sample_mwl(grid, var, rng);
  in.row = sample_ring_row(grid, var, r, rng);
  return in;
}

inline Instance zero_variation_instance(double tr_mean = 2.24, int n_ch = 8) {
  const DwdmGridSpec grid = DwdmGridSpec::preset(n_ch, 1.12);
  VariationParams var = zero_variation(tr_mean);
  var.fsr_mean = n_ch * 1.12;
  return sample_instance(grid, var, SpectralOrdering::natural(n_ch), 1);
}

// Hand-built row: resonances at `res`, shared fsr and tr.
inline RingRowSample make_row(const std::vector<double>& res, double fsr, double tr) {
  RingRowSample row;
  const int n = static_cast<int>(res.size());
  for (double r : res) row.rings.push_back({r, fsr, tr});
  row.order = SpectralOrdering::natural(n);
  row.fsr_rel.assign(n, 0.0);
  row.tr_rel.assign(n, 0.0);
  return row;
}

}  // namespace wdmarb::test
