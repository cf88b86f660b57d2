#include "wdmarb/algorithms.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace wdmarb {

LockPlan sequential_lock_to_nearest(TransceiverEnv& env, const SpectralOrdering& s) {
  const int n = env.size();
  if (s.size() != n) throw std::invalid_argument("target ordering size differs from n_ch");
  LockPlan plan;
  plan.codes.resize(n);
  for (int p = 0; p < n; ++p) {
    const int ring = s.ring_at(p);
    const SearchTable st = env.sweep(ring);
    if (st.empty()) continue;
    env.lock(ring, st.entries.front());
    plan.codes[ring] = st.entries.front();
  }
  return plan;
}

namespace {

// Index of the entry of `before` absent from `after`, if exactly one laser
// went missing. Entries `period` apart are FSR replicas of the same laser and
// vanish together; the lowest index is reported.
std::optional<int> single_masked_entry(const SearchTable& before, const SearchTable& after, int period,
                                       double eps) {
  std::optional<int> missing;
  std::size_t j = 0;
  for (int i = 0; i < before.size(); ++i) {
    const double code = before.entries[i];
    while (j < after.entries.size() && after.entries[j] < code - eps) ++j;
    if (j < after.entries.size() && std::abs(after.entries[j] - code) <= eps) {
      ++j;
      continue;
    }
    if (!missing) {
      missing = i;
    } else if ((i - *missing) % period != 0) {
      return std::nullopt;
    }
  }
  return missing;
}

}  // namespace

RelationIndex relation_search(TransceiverEnv& env, int aggressor, int victim, RelationStrategy strategy) {
  const int n = env.size();
  if (aggressor < 0 || victim >= n || aggressor >= victim)
    throw std::invalid_argument("relation_search: aggressor must be physically upstream of the victim");
  if (env.lock_code(aggressor) || env.lock_code(victim))
    throw std::logic_error("relation_search: aggressor and victim must start unlocked");

  const SearchTable st_a = env.sweep(aggressor);
  const SearchTable st_v = env.sweep(victim);
  if (st_a.empty() || st_v.empty()) return RelationIndex::null();

  auto aggress = [&](int target) -> std::optional<int> {
    env.lock(aggressor, st_a.entries[target]);
    const SearchTable masked = env.sweep(victim);
    env.unlock(aggressor);
    if (auto m = single_masked_entry(st_v, masked, n, env.eps())) return *m - target;
    return std::nullopt;
  };

  // Entries past n_ch repeat lower lasers one FSR up; Lock-to-Last aims at the
  // highest distinct laser.
  const int last = std::min(st_a.size(), n) - 1;
  const std::optional<int> from_last = aggress(last);
  const std::optional<int> from_first = last > 0 ? aggress(0) : std::nullopt;
  if (from_last && from_first && (*from_last - *from_first) % n != 0)
    return RelationIndex::null(RelationNote::Conflict);
  if (from_last) return RelationIndex::of(*from_last);
  if (from_first) return RelationIndex::of(*from_first);

  if (strategy == RelationStrategy::VTRS && last >= 2) {
    if (auto from_second = aggress(1)) return RelationIndex::of(*from_second);
  }
  return RelationIndex::null();
}

RecordPhase record_phase(TransceiverEnv& env, const SpectralOrdering& s, RelationStrategy strategy) {
  const int n = env.size();
  if (s.size() != n) throw std::invalid_argument("target ordering size differs from n_ch");
  if (env.any_locked()) throw std::logic_error("record_phase expects a lock-free environment");

  RecordPhase rec;
  rec.tables.reserve(n);
  for (int i = 0; i < n; ++i) rec.tables.push_back(env.sweep(i));
  rec.relations.reserve(n);
  for (int p = 0; p < n; ++p) {
    const int pred = s.ring_at(p);
    const int succ = s.ring_at((p + 1) % n);
    if (pred < succ) {
      rec.relations.push_back(relation_search(env, pred, succ, strategy));
    } else {
      RelationIndex ri = relation_search(env, succ, pred, strategy);
      if (ri.value) ri.value = -*ri.value;
      rec.relations.push_back(ri);
    }
  }
  return rec;
}

LockAllocationTable build_lat(std::span<const SearchTable> tables, std::span<const RelationIndex> relations,
                              const SpectralOrdering& s) {
  const int n = s.size();
  if (static_cast<int>(tables.size()) != n || static_cast<int>(relations.size()) != n)
    throw std::invalid_argument("build_lat: expected one search table and one relation per ring");
  for (int i = 0; i < n; ++i)
    if (tables[i].ring != i) throw std::invalid_argument("build_lat: search tables must be in spatial order");

  LockAllocationTable lat;
  lat.n_rings = n;
  std::vector<int> null_slots;
  for (int p = 0; p < n; ++p)
    if (!relations[p].found()) null_slots.push_back(p);
  lat.null_relations = static_cast<int>(null_slots.size());

  auto grow = [&](int start_rank, bool cyclic) {
    LatSubTable sub;
    int rank = start_rank;
    int offset = 0;
    for (int count = 0; count < n; ++count) {
      const int ring = s.ring_at(rank);
      sub.columns.push_back({ring, tables[ring], offset, n});
      if (!cyclic && !relations[rank].found()) break;
      if (count + 1 == n) break;
      offset += *relations[rank].value;
      rank = (rank + 1) % n;
    }
    return sub;
  };

  if (null_slots.empty()) {
    lat.sub_tables.push_back(grow(0, true));
  } else {
    for (int slot : null_slots) lat.sub_tables.push_back(grow((slot + 1) % n, false));
  }

  std::vector<int> seen(n, 0);
  for (const auto& sub : lat.sub_tables)
    for (const auto& col : sub.columns)
      if (seen[col.ring]++) throw std::logic_error("build_lat: ring placed twice");
  return lat;
}

namespace {

void match_cyclic(const LatSubTable& sub, LockPlan& plan) {
  const int m = static_cast<int>(sub.columns.size());
  std::vector<int> starts;
  for (int p = 0; p < m; ++p)
    for (int e = 0; e < sub.columns[p].table.size(); ++e) {
      int r0 = sub.columns[p].row_of(e) - p;
      if (const int period = sub.columns[p].period; period > 0) r0 = ((r0 % period) + period) % period;
      starts.push_back(r0);
    }
  std::sort(starts.begin(), starts.end());
  starts.erase(std::unique(starts.begin(), starts.end()), starts.end());

  int best_cover = -1;
  double best_cost = std::numeric_limits<double>::infinity();
  int best_start = 0;
  for (int r0 : starts) {
    int cover = 0;
    double cost = 0.0;
    for (int p = 0; p < m; ++p) {
      if (auto e = sub.columns[p].entry_at_row(r0 + p)) {
        ++cover;
        cost += sub.columns[p].table.entries[*e];
      }
    }
    if (cover > best_cover || (cover == best_cover && cost < best_cost)) {
      best_cover = cover;
      best_cost = cost;
      best_start = r0;
    }
  }
  if (best_cover <= 0) return;
  for (int p = 0; p < m; ++p) {
    const LatColumn& col = sub.columns[p];
    if (auto e = col.entry_at_row(best_start + p)) plan.codes[col.ring] = col.table.entries[*e];
  }
}

void match_anchored(const LatSubTable& sub, LockPlan& plan) {
  const int m = static_cast<int>(sub.columns.size());
  const LatColumn& first = sub.columns.front();
  if (first.table.empty()) return;
  plan.codes[first.ring] = first.table.entries.front();
  const int anchor_row = first.row_of(0);
  for (int q = 1; q < m; ++q) {
    const LatColumn& col = sub.columns[q];
    const std::optional<int> e = col.entry_at_row(anchor_row + q);
    if (!e) continue;
    // The closing ring must land on its last entry.
    if (q == m - 1 && col.row_of(*e) != col.row_of(col.table.size() - 1)) continue;
    plan.codes[col.ring] = col.table.entries[*e];
  }
}

}  // namespace

LockPlan single_step_match(const LockAllocationTable& lat) {
  LockPlan plan;
  plan.codes.resize(lat.n_rings);
  if (lat.null_relations == 0) {
    for (const auto& sub : lat.sub_tables) match_cyclic(sub, plan);
  } else {
    for (const auto& sub : lat.sub_tables) match_anchored(sub, plan);
  }
  return plan;
}

std::string_view to_string(Algorithm a) noexcept {
  switch (a) {
    case Algorithm::Sequential: return "sequential";
    case Algorithm::RsSsm: return "rs-ssm";
    case Algorithm::VtRsSsm: return "vt-rs-ssm";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view text) {
  std::string t(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) {
    return c == '_' || c == '/' ? '-' : static_cast<char>(std::tolower(c));
  });
  if (t == "sequential" || t == "seq") return Algorithm::Sequential;
  if (t == "rs-ssm" || t == "rs") return Algorithm::RsSsm;
  if (t == "vt-rs-ssm" || t == "vtrs-ssm" || t == "vt-rs") return Algorithm::VtRsSsm;
  throw std::invalid_argument("unknown algorithm '" + std::string(text) +
                              "' (expected sequential, rs-ssm or vt-rs-ssm)");
}

void apply_plan(TransceiverEnv& env, const LockPlan& plan) {
  if (static_cast<int>(plan.codes.size()) != env.size())
    throw std::invalid_argument("lock plan size differs from ring count");
  env.unlock_all();
  for (int i = 0; i < env.size(); ++i)
    if (plan.codes[i]) env.lock(i, *plan.codes[i]);
}

ArbitrationOutcome run_algorithm(const MwlSample& mwl, const RingRowSample& row, const SpectralOrdering& s,
                                 Algorithm algorithm, double eps) {
  TransceiverEnv env(mwl, row, eps);
  switch (algorithm) {
    case Algorithm::Sequential:
      sequential_lock_to_nearest(env, s);
      break;
    case Algorithm::RsSsm:
    case Algorithm::VtRsSsm: {
      const auto strategy = algorithm == Algorithm::RsSsm ? RelationStrategy::RS : RelationStrategy::VTRS;
      const RecordPhase rec = record_phase(env, s, strategy);
      apply_plan(env, single_step_match(build_lat(rec.tables, rec.relations, s)));
      break;
    }
  }
  return classify_outcome(resolve_captures(env), s, Policy::LtC);
}

}  // namespace wdmarb
