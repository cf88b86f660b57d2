#pragma once

// Trial orchestration and failure statistics: arbitration failure
// probability (AFP) of the ideal arbiter, conditional failure probability
// (CAFP) of the oblivious algorithms, and one-parameter min-TR sweeps.

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

#include "wdmarb/algorithms.hpp"
#include "wdmarb/ideal_arbiter.hpp"
#include "wdmarb/model.hpp"

namespace wdmarb {

struct TrialPlan final {
  DwdmGridSpec grid;
  VariationParams variation;
  Policy policy = Policy::LtC;
  SpectralOrdering r;  // empty: natural
  SpectralOrdering s;  // empty: same as r
  std::vector<Algorithm> algorithms;
  int n_lasers = 100;
  int n_rows = 100;
  std::uint64_t seed = 1;
  std::uint64_t cell = 0;  // folded into the sample seed so sweep cells draw independently
  int jobs = 1;

  SpectralOrdering prefab_order() const;
  SpectralOrdering target_order() const;
  std::uint64_t sample_seed() const { return derive_seed(seed, {cell}); }
};

struct ClassCounts final {
  std::array<long, kOutcomeClassCount> by_class{};

  long operator[](OutcomeClass c) const { return by_class[static_cast<int>(c)]; }
  long& operator[](OutcomeClass c) { return by_class[static_cast<int>(c)]; }
  long total() const;
  long failures() const { return total() - (*this)[OutcomeClass::Success]; }
  long lock_errors() const { return (*this)[OutcomeClass::ZeroLock] + (*this)[OutcomeClass::DuplLock]; }
  ClassCounts& operator+=(const ClassCounts& o);
  bool operator==(const ClassCounts&) const = default;
};

struct AlgorithmStats final {
  Algorithm algorithm = Algorithm::Sequential;
  ClassCounts all;                 // every trial
  ClassCounts given_ideal_success; // trials the ideal arbiter solved
  long failures_given_ideal_failure = 0;

  long failures() const { return all.failures(); }
  bool operator==(const AlgorithmStats&) const = default;
};

struct StatRecord final {
  long trials = 0;
  long ideal_successes = 0;
  long ideal_failures = 0;
  std::vector<AlgorithmStats> algorithms;

  double afp() const;
  // Empty when the ideal arbiter never succeeded.
  std::optional<double> cafp(std::size_t algorithm_index) const;
  bool operator==(const StatRecord&) const = default;
};

// Total-failure composition: algorithm failures equal the conditional
// failures among ideal successes plus every ideal failure, on exact counts.
bool composition_identity_holds(const StatRecord& rec, const AlgorithmStats& alg);

StatRecord run_afp(const TrialPlan& plan);
StatRecord run_afp(const TrialSet& trials, Policy policy, const SpectralOrdering& s, int jobs = 1);

// Ideal arbitration under Lock-to-Cyclic plus every selected algorithm on a
// fresh environment per trial. Throws InvariantViolation when an algorithm
// succeeds on a trial the ideal arbiter rejects.
StatRecord run_cafp(const TrialPlan& plan);
StatRecord run_cafp(const TrialSet& trials, const SpectralOrdering& s, const std::vector<Algorithm>& algorithms,
                    int jobs = 1);

class InvariantViolation final : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class SweepParameter : std::uint8_t {
  GridOffset,    // nm
  LaserLocal,    // nm
  RingLocal,     // nm
  FsrMean,       // nm
  FsrVariation,  // fraction
  TrMean,        // nm
  TrVariation,   // fraction
};

std::string_view to_string(SweepParameter p) noexcept;
SweepParameter parse_sweep_parameter(std::string_view text);
bool is_relative(SweepParameter p) noexcept;
void set_parameter(VariationParams& var, SweepParameter p, double value);
double get_parameter(const VariationParams& var, SweepParameter p);

struct MinTrSettings final {
  double resolution = 0.056;  // nm
  double ceiling = 0.0;       // nm; <= 0 selects 2 * fsr_mean of each point
};

// min_tuning_range at each value of one parameter, the rest taken from the
// plan. Every point reuses the plan seed.
std::vector<std::pair<double, MinTrResult>> sensitivity_sweep(const TrialPlan& plan, SweepParameter parameter,
                                                              const std::vector<double>& values,
                                                              const MinTrSettings& settings);

MinTrResult min_tuning_range(const TrialPlan& plan, const MinTrSettings& settings);

}  // namespace wdmarb
