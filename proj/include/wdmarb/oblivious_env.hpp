#pragma once

// Simulated transceiver exposing only wavelength-oblivious primitives
// (sweep, lock, unlock), plus the wavelength-aware referee that resolves
// which ring captured which laser and classifies the outcome.
//
// Light reaches rings in spatial order: a locked ring captures the laser
// sitting on its locked resonance unless an upstream ring already took it.
// Unlocked rings are transparent.

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "wdmarb/ideal_arbiter.hpp"
#include "wdmarb/model.hpp"

namespace wdmarb {

struct SearchTable final {
  int ring = -1;
  std::vector<double> entries;  // tuner codes at observed power peaks, ascending

  int size() const noexcept { return static_cast<int>(entries.size()); }
  bool empty() const noexcept { return entries.empty(); }
};

class TransceiverEnv final {
 public:
  TransceiverEnv(MwlSample mwl, RingRowSample row, double eps = kDefaultEps);

  int size() const noexcept { return row_.size(); }
  double eps() const noexcept { return eps_; }

  // Peaks seen by `ring` over its tuning range. Lasers captured by locked
  // upstream rings are masked; downstream locks have no effect.
  SearchTable sweep(int ring) const;

  void lock(int ring, double code);
  void unlock(int ring);
  void unlock_all();
  std::optional<double> lock_code(int ring) const { return locks_.at(ring); }
  bool any_locked() const;

  // Wavelength-aware access, for the referee and tests only.
  const MwlSample& mwl() const noexcept { return mwl_; }
  const RingRowSample& row() const noexcept { return row_; }
  // Laser whose wavelength coincides with the ring's resonance at `code`.
  std::optional<int> laser_at(int ring, double code) const;

 private:
  void check_ring(int ring) const;

  MwlSample mwl_;
  RingRowSample row_;
  double eps_;
  std::vector<std::optional<double>> locks_;
};

enum class CaptureState : std::uint8_t {
  Unlocked,  // ring holds no lock
  Missed,    // locked where no laser sits
  Captured,  // holds `laser`
  Starved,   // locked onto `laser`, which an upstream ring captured first
};

struct RingCapture final {
  CaptureState state = CaptureState::Unlocked;
  int laser = -1;
};

struct CaptureMap final {
  std::vector<RingCapture> rings;  // spatial index
};

CaptureMap resolve_captures(const TransceiverEnv& env);

enum class OutcomeClass : std::uint8_t { Success, ZeroLock, DuplLock, LaneOrderError };
inline constexpr int kOutcomeClassCount = 4;

std::string_view to_string(OutcomeClass c) noexcept;

struct ArbitrationOutcome final {
  OutcomeClass kind = OutcomeClass::ZeroLock;
  std::optional<int> shift;     // witnessing cyclic shift on success (LtC, LtD)
  std::vector<int> assignment;  // ring -> captured laser (-1 if none)

  bool success() const noexcept { return kind == OutcomeClass::Success; }
};

// Precedence: DuplLock, then ZeroLock, then LaneOrderError.
ArbitrationOutcome classify_outcome(const CaptureMap& capture, const SpectralOrdering& s, Policy policy);

}  // namespace wdmarb
