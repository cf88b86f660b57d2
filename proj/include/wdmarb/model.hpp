#pragma once

// Wavelength-domain model of a multi-wavelength laser (MWL) and a microring
// row: nominal grids, uniform variation sampling, and tuning-range
// reachability.

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace wdmarb {

// Coincidence tolerance for peak/lock matching, in nm.
inline constexpr double kDefaultEps = 1e-6;

// Lumped global variations. Only their sum (the grid offset bound) is
// sampled; these two exist for documentation of the default.
inline constexpr double kLaserGlobalVariationNm = 9.0;
inline constexpr double kRingGlobalVariationNm = 6.0;

enum class Distribution : std::uint8_t { Uniform };

struct DwdmGridSpec final {
  int n_ch = 8;
  double grid_spacing = 1.12;  // nm
  double center = 1300.0;      // nm
  double ring_bias = 4.48;     // nm, blue-side resonance pre-bias

  void validate() const;

  // Channel count and spacing with the ring bias placed at half the
  // nominal FSR (n_ch * grid_spacing / 2), as for the 8 x 1.12 nm default.
  static DwdmGridSpec preset(int n_ch, double grid_spacing, double center = 1300.0);

  bool operator==(const DwdmGridSpec&) const = default;
};

struct VariationParams final {
  double grid_offset_bound = kLaserGlobalVariationNm + kRingGlobalVariationNm;  // nm
  double laser_local_bound = 0.28;  // nm
  double ring_local_bound = 2.24;   // nm
  double fsr_mean = 8.96;           // nm
  double fsr_rel_bound = 0.01;      // fraction of fsr_mean
  double tr_mean = 2.24;            // nm
  double tr_rel_bound = 0.10;       // fraction of tr_mean
  Distribution distribution = Distribution::Uniform;

  void validate() const;

  // Defaults scaled to a grid: laser local variation at 25% of the spacing,
  // ring local variation at twice the spacing, FSR filled by the grid.
  static VariationParams defaults_for(const DwdmGridSpec& grid);

  bool operator==(const VariationParams&) const = default;
};

// Map between the spatial order of a microring row and the spectral order.
// rank_of(i) is the spectral rank of the ring at spatial index i.
class SpectralOrdering final {
 public:
  SpectralOrdering() = default;
  explicit SpectralOrdering(std::vector<int> ranks);

  static SpectralOrdering natural(int n);
  // (0, n/2, 1, n/2 + 1, ...); odd n interleaves ceil(n/2) with the rest.
  static SpectralOrdering permuted(int n);

  int size() const noexcept { return static_cast<int>(ranks_.size()); }
  int rank_of(int ring) const { return ranks_.at(ring); }
  int ring_at(int rank) const { return rings_.at(rank); }
  const std::vector<int>& ranks() const noexcept { return ranks_; }

  std::string to_string() const;

  bool operator==(const SpectralOrdering& o) const { return ranks_ == o.ranks_; }

 private:
  std::vector<int> ranks_;
  std::vector<int> rings_;
};

struct MwlSample final {
  std::vector<double> wavelengths;  // nm, wavelength-domain index
  double grid_offset = 0.0;         // sampled lumped offset, nm

  int size() const noexcept { return static_cast<int>(wavelengths.size()); }
};

struct Ring final {
  double resonance = 0.0;  // nm
  double fsr = 0.0;        // nm
  double tr = 0.0;         // nm
};

struct RingRowSample final {
  std::vector<Ring> rings;  // spatial index, 0 nearest the light input
  SpectralOrdering order;   // pre-fabrication ordering used at sampling
  std::vector<double> fsr_rel;  // relative FSR draw per ring
  std::vector<double> tr_rel;   // relative tuning-range draw per ring

  int size() const noexcept { return static_cast<int>(rings.size()); }

  // Same sample with every tuning range recomputed from a new mean using the
  // stored relative draws.
  RingRowSample with_tr_mean(double tr_mean) const;
};

// Seeded random stream. Uniform variates are built from the top 53 bits of
// a 64-bit Mersenne twister so sequences are identical across standard
// libraries.
class Rng final {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double canonical() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // Uniform on [-bound, +bound].
  double symmetric(double bound) { return bound * (2.0 * canonical() - 1.0); }

 private:
  std::mt19937_64 engine_;
};

// splitmix64 fold of a master seed with stream keys.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys);

std::vector<double> pre_fab_laser_grid(const DwdmGridSpec& spec);
std::vector<double> pre_fab_ring_grid(const DwdmGridSpec& spec, const SpectralOrdering& r);

MwlSample sample_mwl(const DwdmGridSpec& spec, const VariationParams& var, Rng& rng);

// Draws are consumed per spectral rank (rank 0 first), so two rows sampled
// from the same stream with different orderings give the ring of a given
// rank identical parameters.
RingRowSample sample_ring_row(const DwdmGridSpec& spec, const VariationParams& var,
                              const SpectralOrdering& r, Rng& rng);

// Red-shift distances d in [0, tr] at which a resonance replica of the ring
// sits on `lambda` (within eps), ascending.
std::vector<double> tuner_codes_for(const Ring& ring, double lambda, double eps = kDefaultEps);

// Smallest tuner code reaching `lambda`, if any.
std::optional<double> nearest_tuner_code(const Ring& ring, double lambda, double eps = kDefaultEps);

// Laser indices with a nonempty tuner-code set, ascending.
std::vector<int> reachable_lasers(const Ring& ring, const MwlSample& mwl, double eps = kDefaultEps);

// Sampled lasers and rows of one experiment cell; trial (a, b) pairs laser a
// with row b.
struct TrialSet final {
  std::vector<MwlSample> lasers;
  std::vector<RingRowSample> rows;

  long trials() const noexcept {
    return static_cast<long>(lasers.size()) * static_cast<long>(rows.size());
  }
};

TrialSet sample_trials(const DwdmGridSpec& spec, const VariationParams& var,
                       const SpectralOrdering& r, int n_lasers, int n_rows, std::uint64_t seed);

}  // namespace wdmarb
