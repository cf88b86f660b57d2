#include "wdmarb/oblivious_env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace wdmarb {

TransceiverEnv::TransceiverEnv(MwlSample mwl, RingRowSample row, double eps)
    : mwl_(std::move(mwl)), row_(std::move(row)), eps_(eps), locks_(row_.size()) {
  if (mwl_.size() != row_.size()) throw std::invalid_argument("laser and ring row channel counts differ");
  if (!(eps_ > 0.0)) throw std::invalid_argument("eps must be > 0");
}

void TransceiverEnv::check_ring(int ring) const {
  if (ring < 0 || ring >= size()) throw std::out_of_range("ring index " + std::to_string(ring));
}

namespace {

bool coincides(const Ring& ring, double code, double lambda, double eps) {
  const double offset = lambda - (ring.resonance + code);
  const double m = std::round(offset / ring.fsr);
  return std::abs(offset - m * ring.fsr) <= eps;
}

// Walks rings [0, upto) in light order and marks what each locked ring takes.
void resolve_prefix(const TransceiverEnv& env, const std::vector<std::optional<double>>& locks, int upto,
                    std::vector<char>& taken, std::vector<RingCapture>* out) {
  const auto& rings = env.row().rings;
  const auto& lambdas = env.mwl().wavelengths;
  for (int i = 0; i < upto; ++i) {
    RingCapture cap;
    if (locks[i]) {
      cap.state = CaptureState::Missed;
      for (int l = 0; l < static_cast<int>(lambdas.size()); ++l) {
        if (!coincides(rings[i], *locks[i], lambdas[l], env.eps())) continue;
        if (!taken[l]) {
          taken[l] = 1;
          cap = {CaptureState::Captured, l};
          break;
        }
        if (cap.state == CaptureState::Missed) cap = {CaptureState::Starved, l};
      }
    }
    if (out) out->push_back(cap);
  }
}

}  // namespace

SearchTable TransceiverEnv::sweep(int ring) const {
  check_ring(ring);
  std::vector<char> masked(mwl_.size(), 0);
  resolve_prefix(*this, locks_, ring, masked, nullptr);
  SearchTable st;
  st.ring = ring;
  for (int l = 0; l < mwl_.size(); ++l) {
    if (masked[l]) continue;
    for (double d : tuner_codes_for(row_.rings[ring], mwl_.wavelengths[l], eps_)) st.entries.push_back(d);
  }
  std::sort(st.entries.begin(), st.entries.end());
  return st;
}

void TransceiverEnv::lock(int ring, double code) {
  check_ring(ring);
  const double tr = row_.rings[ring].tr;
  if (!(code >= 0.0) || code > tr)
    throw std::out_of_range("lock code " + std::to_string(code) + " outside [0, " + std::to_string(tr) +
                            "] for ring " + std::to_string(ring));
  locks_[ring] = code;
}

void TransceiverEnv::unlock(int ring) {
  check_ring(ring);
  locks_[ring].reset();
}

void TransceiverEnv::unlock_all() {
  for (auto& l : locks_) l.reset();
}

bool TransceiverEnv::any_locked() const {
  return std::any_of(locks_.begin(), locks_.end(), [](const auto& l) { return l.has_value(); });
}

std::optional<int> TransceiverEnv::laser_at(int ring, double code) const {
  check_ring(ring);
  for (int l = 0; l < mwl_.size(); ++l)
    if (coincides(row_.rings[ring], code, mwl_.wavelengths[l], eps_)) return l;
  return std::nullopt;
}

CaptureMap resolve_captures(const TransceiverEnv& env) {
  std::vector<std::optional<double>> locks(env.size());
  for (int i = 0; i < env.size(); ++i) locks[i] = env.lock_code(i);
  std::vector<char> taken(env.size(), 0);
  CaptureMap map;
  map.rings.reserve(env.size());
  resolve_prefix(env, locks, env.size(), taken, &map.rings);
  return map;
}

std::string_view to_string(OutcomeClass c) noexcept {
  switch (c) {
    case OutcomeClass::Success: return "Success";
    case OutcomeClass::ZeroLock: return "ZeroLock";
    case OutcomeClass::DuplLock: return "DuplLock";
    case OutcomeClass::LaneOrderError: return "LaneOrderError";
  }
  return "?";
}

ArbitrationOutcome classify_outcome(const CaptureMap& capture, const SpectralOrdering& s, Policy policy) {
  const int n = static_cast<int>(capture.rings.size());
  ArbitrationOutcome out;
  out.assignment.assign(n, -1);
  bool starved = false, empty = false;
  for (int i = 0; i < n; ++i) {
    const RingCapture& c = capture.rings[i];
    if (c.state == CaptureState::Captured) out.assignment[i] = c.laser;
    starved |= c.state == CaptureState::Starved;
    empty |= c.state == CaptureState::Unlocked || c.state == CaptureState::Missed;
  }
  if (starved) {
    out.kind = OutcomeClass::DuplLock;
    return out;
  }
  if (empty) {
    out.kind = OutcomeClass::ZeroLock;
    return out;
  }
  if (policy == Policy::LtA) {
    out.kind = OutcomeClass::Success;
    return out;
  }
  if (s.size() != n) throw std::invalid_argument("target ordering size differs from capture map");
  // Captures are distinct and complete here, so the shift is fixed by rank 0.
  const int k = out.assignment[s.ring_at(0)];
  bool cyclic = policy == Policy::LtC || k == 0;
  for (int p = 1; p < n && cyclic; ++p) cyclic = out.assignment[s.ring_at(p)] == (p + k) % n;
  if (!cyclic) {
    out.kind = OutcomeClass::LaneOrderError;
    return out;
  }
  out.kind = OutcomeClass::Success;
  out.shift = k;
  return out;
}

}  // namespace wdmarb
