#include "wdmarb/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace wdmarb {

void DwdmGridSpec::validate() const {
  if (n_ch < 2) throw std::invalid_argument("grid: n_ch must be >= 2");
  if (!(grid_spacing > 0.0) || !std::isfinite(grid_spacing))
    throw std::invalid_argument("grid: grid_spacing must be > 0");
  if (!(ring_bias >= 0.0) || !std::isfinite(ring_bias))
    throw std::invalid_argument("grid: ring_bias must be >= 0");
  if (!std::isfinite(center)) throw std::invalid_argument("grid: center must be finite");
}

DwdmGridSpec DwdmGridSpec::preset(int n_ch, double grid_spacing, double center) {
  DwdmGridSpec spec;
  spec.n_ch = n_ch;
  spec.grid_spacing = grid_spacing;
  spec.center = center;
  spec.ring_bias = 0.5 * n_ch * grid_spacing;
  spec.validate();
  return spec;
}

void VariationParams::validate() const {
  auto bound = [](double v, const char* what) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument(std::string("variation: ") + what + " must be >= 0");
  };
  bound(grid_offset_bound, "grid_offset");
  bound(laser_local_bound, "laser_local");
  bound(ring_local_bound, "ring_local");
  bound(fsr_rel_bound, "fsr_var");
  bound(tr_rel_bound, "tr_var");
  bound(tr_mean, "tr_mean");
  if (!(fsr_mean > 0.0) || !std::isfinite(fsr_mean))
    throw std::invalid_argument("variation: fsr_mean must be > 0");
  if (fsr_rel_bound >= 1.0) throw std::invalid_argument("variation: fsr_var must be < 100%");
  if (tr_rel_bound > 1.0) throw std::invalid_argument("variation: tr_var must be <= 100%");
}

VariationParams VariationParams::defaults_for(const DwdmGridSpec& grid) {
  VariationParams var;
  var.laser_local_bound = 0.25 * grid.grid_spacing;
  var.ring_local_bound = 2.0 * grid.grid_spacing;
  var.fsr_mean = grid.n_ch * grid.grid_spacing;
  return var;
}

SpectralOrdering::SpectralOrdering(std::vector<int> ranks) : ranks_(std::move(ranks)) {
  const int n = size();
  rings_.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    const int p = ranks_[i];
    if (p < 0 || p >= n || rings_[p] != -1)
      throw std::invalid_argument("spectral ordering is not a permutation: " + to_string());
    rings_[p] = i;
  }
}

SpectralOrdering SpectralOrdering::natural(int n) {
  std::vector<int> ranks(n);
  std::iota(ranks.begin(), ranks.end(), 0);
  return SpectralOrdering(std::move(ranks));
}

SpectralOrdering SpectralOrdering::permuted(int n) {
  const int half = (n + 1) / 2;
  std::vector<int> ranks;
  ranks.reserve(n);
  for (int k = 0; k < half; ++k) {
    ranks.push_back(k);
    if (half + k < n) ranks.push_back(half + k);
  }
  return SpectralOrdering(std::move(ranks));
}

std::string SpectralOrdering::to_string() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < ranks_.size(); ++i) os << (i ? "," : "") << ranks_[i];
  return os.str();
}

RingRowSample RingRowSample::with_tr_mean(double tr_mean) const {
  RingRowSample out = *this;
  for (std::size_t i = 0; i < out.rings.size(); ++i) out.rings[i].tr = tr_mean * (1.0 + tr_rel[i]);
  return out;
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t h = mix(master);
  for (std::uint64_t k : keys) h = mix(h ^ mix(k));
  return h;
}

std::vector<double> pre_fab_laser_grid(const DwdmGridSpec& spec) {
  spec.validate();
  std::vector<double> out(spec.n_ch);
  const double mid = 0.5 * (spec.n_ch - 1);
  for (int i = 0; i < spec.n_ch; ++i) out[i] = spec.center + (i - mid) * spec.grid_spacing;
  return out;
}

std::vector<double> pre_fab_ring_grid(const DwdmGridSpec& spec, const SpectralOrdering& r) {
  spec.validate();
  if (r.size() != spec.n_ch) throw std::invalid_argument("ordering size differs from n_ch");
  std::vector<double> out(spec.n_ch);
  const double mid = 0.5 * (spec.n_ch - 1);
  for (int i = 0; i < spec.n_ch; ++i)
    out[i] = spec.center - spec.ring_bias + (r.rank_of(i) - mid) * spec.grid_spacing;
  return out;
}

MwlSample sample_mwl(const DwdmGridSpec& spec, const VariationParams& var, Rng& rng) {
  MwlSample s;
  s.wavelengths = pre_fab_laser_grid(spec);
  s.grid_offset = rng.symmetric(var.grid_offset_bound);
  for (double& w : s.wavelengths) w += s.grid_offset + rng.symmetric(var.laser_local_bound);
  return s;
}

RingRowSample sample_ring_row(const DwdmGridSpec& spec, const VariationParams& var,
                              const SpectralOrdering& r, Rng& rng) {
  const std::vector<double> nominal = pre_fab_ring_grid(spec, r);
  RingRowSample row;
  row.order = r;
  row.rings.resize(spec.n_ch);
  row.fsr_rel.resize(spec.n_ch);
  row.tr_rel.resize(spec.n_ch);
  for (int rank = 0; rank < spec.n_ch; ++rank) {
    const int i = r.ring_at(rank);
    const double local = rng.symmetric(var.ring_local_bound);
    row.fsr_rel[i] = rng.symmetric(var.fsr_rel_bound);
    row.tr_rel[i] = rng.symmetric(var.tr_rel_bound);
    row.rings[i].resonance = nominal[i] + local;
    row.rings[i].fsr = var.fsr_mean * (1.0 + row.fsr_rel[i]);
    row.rings[i].tr = var.tr_mean * (1.0 + row.tr_rel[i]);
  }
  return row;
}

namespace {

// Replica window [j_lo, j_hi] whose code lambda - res - j*fsr lies within
// [-eps, tr + eps].
struct ReplicaSpan {
  double base;
  long j_lo;
  long j_hi;
};

ReplicaSpan replica_span(const Ring& ring, double lambda, double eps) {
  const double base = lambda - ring.resonance;
  return {base, static_cast<long>(std::ceil((base - ring.tr - eps) / ring.fsr)),
          static_cast<long>(std::floor((base + eps) / ring.fsr))};
}

}  // namespace

std::vector<double> tuner_codes_for(const Ring& ring, double lambda, double eps) {
  std::vector<double> codes;
  const ReplicaSpan span = replica_span(ring, lambda, eps);
  for (long j = span.j_hi; j >= span.j_lo; --j) {
    const double d = span.base - static_cast<double>(j) * ring.fsr;
    if (d < -eps || d > ring.tr + eps) continue;
    codes.push_back(std::clamp(d, 0.0, ring.tr));
  }
  return codes;
}

std::optional<double> nearest_tuner_code(const Ring& ring, double lambda, double eps) {
  const ReplicaSpan span = replica_span(ring, lambda, eps);
  for (long j = span.j_hi; j >= span.j_lo; --j) {
    const double d = span.base - static_cast<double>(j) * ring.fsr;
    if (d < -eps || d > ring.tr + eps) continue;
    return std::clamp(d, 0.0, ring.tr);
  }
  return std::nullopt;
}

std::vector<int> reachable_lasers(const Ring& ring, const MwlSample& mwl, double eps) {
  std::vector<int> out;
  for (int l = 0; l < mwl.size(); ++l)
    if (nearest_tuner_code(ring, mwl.wavelengths[l], eps)) out.push_back(l);
  return out;
}

TrialSet sample_trials(const DwdmGridSpec& spec, const VariationParams& var,
                       const SpectralOrdering& r, int n_lasers, int n_rows, std::uint64_t seed) {
  spec.validate();
  var.validate();
  if (n_lasers < 1 || n_rows < 1) throw std::invalid_argument("trial grid must be at least 1x1");
  TrialSet set;
  set.lasers.reserve(n_lasers);
  set.rows.reserve(n_rows);
  for (int a = 0; a < n_lasers; ++a) {
    Rng rng(derive_seed(seed, {0x6c61736572ULL, static_cast<std::uint64_t>(a)}));
    set.lasers.push_back(sample_mwl(spec, var, rng));
  }
  for (int b = 0; b < n_rows; ++b) {
    Rng rng(derive_seed(seed, {0x72696e67ULL, static_cast<std::uint64_t>(b)}));
    set.rows.push_back(sample_ring_row(spec, var, r, rng));
  }
  return set;
}

}  // namespace wdmarb
