#pragma once

// Wavelength-oblivious arbitration for the Lock-to-Cyclic policy:
//  * sequential Lock-to-Nearest baseline,
//  * relation search (RS) and its variation-tolerant form (VT-RS) that build
//    pairwise search-table alignments between consecutive target ranks,
//  * single-step matching (SSM) over the lock allocation table.
// Everything here drives a TransceiverEnv through sweep/lock/unlock only.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "wdmarb/oblivious_env.hpp"

namespace wdmarb {

enum class RelationStrategy : std::uint8_t { RS, VTRS };

enum class RelationNote : std::uint8_t {
  Found,
  NoMasking,  // no aggression attempt masked exactly one victim entry
  Conflict,   // Lock-to-First and Lock-to-Last disagreed
};

// Offset between two search tables: entry e of the first table and entry
// e + value of the second see the same laser. Empty value is the null (phi)
// relation.
struct RelationIndex final {
  std::optional<int> value;
  RelationNote note = RelationNote::NoMasking;

  bool found() const noexcept { return value.has_value(); }
  static RelationIndex of(int v) { return {v, RelationNote::Found}; }
  static RelationIndex null(RelationNote why = RelationNote::NoMasking) { return {std::nullopt, why}; }
};

// Per ring: lock target code, or none to leave the ring parked.
struct LockPlan final {
  std::vector<std::optional<double>> codes;  // spatial index
};

// Rings visited in ascending target rank; each locks its smallest-code peak.
LockPlan sequential_lock_to_nearest(TransceiverEnv& env, const SpectralOrdering& s);

// Requires aggressor < victim (upstream aggressor) and both unlocked. The
// result is index(victim entry) - index(aggressor entry) for one shared laser.
// Lock-to-First and Lock-to-Last results agree when they differ by a multiple
// of n_ch; the Lock-to-Last value is reported.
// The environment's locks are restored before returning.
RelationIndex relation_search(TransceiverEnv& env, int aggressor, int victim, RelationStrategy strategy);

struct RecordPhase final {
  std::vector<SearchTable> tables;        // initial sweep, spatial index
  std::vector<RelationIndex> relations;   // slot p: rank p -> rank p+1 (mod n)
};

// Runs the n consecutive-pair relation searches implied by `s`. Slot p holds
// the offset of the rank-(p+1) ring's table relative to the rank-p table,
// whichever of the two is physically upstream.
RecordPhase record_phase(TransceiverEnv& env, const SpectralOrdering& s, RelationStrategy strategy);

// Rows are counted modulo `period` (the channel count) when it is positive:
// a table spanning most of an FSR lists the lowest lasers again past its
// wrap point, and entries n_ch apart are the same laser.
struct LatColumn final {
  int ring = -1;
  SearchTable table;
  int offset = 0;  // cumulative relation index; entry e sits on row e - offset
  int period = 0;

  int row_of(int entry) const noexcept { return wrap(entry - offset); }
  // Lowest-code entry on `row`.
  std::optional<int> entry_at_row(int row) const noexcept {
    const int e = period > 0 ? wrap(row + offset) : row + offset;
    if (e < 0 || e >= table.size()) return std::nullopt;
    return e;
  }

 private:
  int wrap(int v) const noexcept { return period > 0 ? ((v % period) + period) % period : v; }
};

struct LatSubTable final {
  std::vector<LatColumn> columns;  // consecutive target ranks
};

struct LockAllocationTable final {
  std::vector<LatSubTable> sub_tables;
  int null_relations = 0;
  int n_rings = 0;
};

// Splits the rank cycle at every null relation; rings inside a sub-table are
// placed by cumulative relation indices from the sub-table's first ring.
LockAllocationTable build_lat(std::span<const SearchTable> tables,
                              std::span<const RelationIndex> relations, const SpectralOrdering& s);

// No null relation: best diagonal by total tuning distance (ties: lowest
// starting row). Otherwise per sub-table the first ring takes its first
// entry, the last ring its last entry, and middle rings follow the diagonal
// from the first. A ring whose required row is missing stays unlocked.
LockPlan single_step_match(const LockAllocationTable& lat);

enum class Algorithm : std::uint8_t { Sequential, RsSsm, VtRsSsm };

std::string_view to_string(Algorithm a) noexcept;
Algorithm parse_algorithm(std::string_view text);

void apply_plan(TransceiverEnv& env, const LockPlan& plan);

// Runs one algorithm on a fresh environment and referees it against the
// Lock-to-Cyclic policy with target ordering `s`.
ArbitrationOutcome run_algorithm(const MwlSample& mwl, const RingRowSample& row, const SpectralOrdering& s,
                                 Algorithm algorithm, double eps = kDefaultEps);

}  // namespace wdmarb
