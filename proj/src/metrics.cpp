#include "wdmarb/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <exception>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>

namespace wdmarb {

SpectralOrdering TrialPlan::prefab_order() const {
  return r.size() ? r : SpectralOrdering::natural(grid.n_ch);
}

SpectralOrdering TrialPlan::target_order() const { return s.size() ? s : prefab_order(); }

long ClassCounts::total() const { return std::accumulate(by_class.begin(), by_class.end(), 0L); }

ClassCounts& ClassCounts::operator+=(const ClassCounts& o) {
  for (int i = 0; i < kOutcomeClassCount; ++i) by_class[i] += o.by_class[i];
  return *this;
}

double StatRecord::afp() const {
  return trials ? static_cast<double>(ideal_failures) / static_cast<double>(trials) : 0.0;
}

std::optional<double> StatRecord::cafp(std::size_t algorithm_index) const {
  if (ideal_successes == 0) return std::nullopt;
  const auto& alg = algorithms.at(algorithm_index);
  return static_cast<double>(alg.given_ideal_success.failures()) / static_cast<double>(ideal_successes);
}

bool composition_identity_holds(const StatRecord& rec, const AlgorithmStats& alg) {
  return alg.all.total() == rec.trials && alg.given_ideal_success.total() == rec.ideal_successes &&
         alg.failures() == alg.given_ideal_success.failures() + rec.ideal_failures &&
         alg.failures_given_ideal_failure == rec.ideal_failures;
}

namespace {

// Splits rows over `jobs` workers; each fills its own record, merged in
// worker order. Counts are integers, so the merge is order-independent.
template <typename Body>
StatRecord parallel_rows(const TrialSet& trials, int jobs, std::size_t n_algorithms, Body body) {
  const int n_rows = static_cast<int>(trials.rows.size());
  jobs = std::clamp(jobs, 1, std::max(1, n_rows));
  std::vector<StatRecord> parts(jobs);
  for (auto& p : parts) p.algorithms.resize(n_algorithms);
  std::vector<std::exception_ptr> errors(jobs);
  auto run = [&](int t) {
    try {
      for (int b = n_rows * t / jobs; b < n_rows * (t + 1) / jobs; ++b)
        for (const MwlSample& mwl : trials.lasers) body(mwl, trials.rows[b], parts[t]);
    } catch (...) {
      errors[t] = std::current_exception();
    }
  };
  if (jobs == 1) {
    run(0);
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(run, t);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  StatRecord out;
  out.algorithms.resize(n_algorithms);
  for (const auto& p : parts) {
    out.trials += p.trials;
    out.ideal_successes += p.ideal_successes;
    out.ideal_failures += p.ideal_failures;
    for (std::size_t k = 0; k < n_algorithms; ++k) {
      out.algorithms[k].all += p.algorithms[k].all;
      out.algorithms[k].given_ideal_success += p.algorithms[k].given_ideal_success;
      out.algorithms[k].failures_given_ideal_failure += p.algorithms[k].failures_given_ideal_failure;
    }
  }
  return out;
}

}  // namespace

StatRecord run_afp(const TrialSet& trials, Policy policy, const SpectralOrdering& s, int jobs) {
  return parallel_rows(trials, jobs, 0, [&](const MwlSample& mwl, const RingRowSample& row, StatRecord& rec) {
    ++rec.trials;
    if (arbitrate_ideal(ReachMatrix(mwl, row), policy, s).feasible)
      ++rec.ideal_successes;
    else
      ++rec.ideal_failures;
  });
}

StatRecord run_afp(const TrialPlan& plan) {
  const TrialSet trials = sample_trials(plan.grid, plan.variation, plan.prefab_order(), plan.n_lasers,
                                        plan.n_rows, plan.sample_seed());
  return run_afp(trials, plan.policy, plan.target_order(), plan.jobs);
}

StatRecord run_cafp(const TrialSet& trials, const SpectralOrdering& s, const std::vector<Algorithm>& algorithms,
                    int jobs) {
  if (algorithms.empty()) throw std::invalid_argument("run_cafp: no algorithm selected");
  StatRecord rec = parallel_rows(
      trials, jobs, algorithms.size(), [&](const MwlSample& mwl, const RingRowSample& row, StatRecord& part) {
        ++part.trials;
        const bool ideal_ok = arbitrate_ideal(ReachMatrix(mwl, row), Policy::LtC, s).feasible;
        ideal_ok ? ++part.ideal_successes : ++part.ideal_failures;
        for (std::size_t k = 0; k < algorithms.size(); ++k) {
          const ArbitrationOutcome out = run_algorithm(mwl, row, s, algorithms[k]);
          AlgorithmStats& st = part.algorithms[k];
          ++st.all[out.kind];
          if (ideal_ok) {
            ++st.given_ideal_success[out.kind];
          } else if (!out.success()) {
            ++st.failures_given_ideal_failure;
          } else {
            throw InvariantViolation(std::string(to_string(algorithms[k])) +
                                     " succeeded where ideal Lock-to-Cyclic arbitration is infeasible");
          }
        }
      });
  for (std::size_t k = 0; k < algorithms.size(); ++k) {
    rec.algorithms[k].algorithm = algorithms[k];
    if (!composition_identity_holds(rec, rec.algorithms[k]))
      throw InvariantViolation("failure composition identity violated for " + std::string(to_string(algorithms[k])));
  }
  return rec;
}

StatRecord run_cafp(const TrialPlan& plan) {
  if (plan.policy != Policy::LtC)
    throw std::invalid_argument("run_cafp: the oblivious algorithms implement Lock-to-Cyclic only");
  const TrialSet trials = sample_trials(plan.grid, plan.variation, plan.prefab_order(), plan.n_lasers,
                                        plan.n_rows, plan.sample_seed());
  return run_cafp(trials, plan.target_order(), plan.algorithms, plan.jobs);
}

std::string_view to_string(SweepParameter p) noexcept {
  switch (p) {
    case SweepParameter::GridOffset: return "grid_offset";
    case SweepParameter::LaserLocal: return "laser_local";
    case SweepParameter::RingLocal: return "ring_local";
    case SweepParameter::FsrMean: return "fsr_mean";
    case SweepParameter::FsrVariation: return "fsr_var";
    case SweepParameter::TrMean: return "tr_mean";
    case SweepParameter::TrVariation: return "tr_var";
  }
  return "?";
}

SweepParameter parse_sweep_parameter(std::string_view text) {
  for (auto p : {SweepParameter::GridOffset, SweepParameter::LaserLocal, SweepParameter::RingLocal,
                 SweepParameter::FsrMean, SweepParameter::FsrVariation, SweepParameter::TrMean,
                 SweepParameter::TrVariation})
    if (to_string(p) == text) return p;
  throw std::invalid_argument("unknown sweep parameter '" + std::string(text) + "'");
}

bool is_relative(SweepParameter p) noexcept {
  return p == SweepParameter::FsrVariation || p == SweepParameter::TrVariation;
}

void set_parameter(VariationParams& var, SweepParameter p, double value) {
  switch (p) {
    case SweepParameter::GridOffset: var.grid_offset_bound = value; break;
    case SweepParameter::LaserLocal: var.laser_local_bound = value; break;
    case SweepParameter::RingLocal: var.ring_local_bound = value; break;
    case SweepParameter::FsrMean: var.fsr_mean = value; break;
    case SweepParameter::FsrVariation: var.fsr_rel_bound = value; break;
    case SweepParameter::TrMean: var.tr_mean = value; break;
    case SweepParameter::TrVariation: var.tr_rel_bound = value; break;
  }
}

double get_parameter(const VariationParams& var, SweepParameter p) {
  switch (p) {
    case SweepParameter::GridOffset: return var.grid_offset_bound;
    case SweepParameter::LaserLocal: return var.laser_local_bound;
    case SweepParameter::RingLocal: return var.ring_local_bound;
    case SweepParameter::FsrMean: return var.fsr_mean;
    case SweepParameter::FsrVariation: return var.fsr_rel_bound;
    case SweepParameter::TrMean: return var.tr_mean;
    case SweepParameter::TrVariation: return var.tr_rel_bound;
  }
  return 0.0;
}

MinTrResult min_tuning_range(const TrialPlan& plan, const MinTrSettings& settings) {
  const double ceiling = settings.ceiling > 0.0 ? settings.ceiling : 2.0 * plan.variation.fsr_mean;
  const TrialSet trials = sample_trials(plan.grid, plan.variation, plan.prefab_order(), plan.n_lasers,
                                        plan.n_rows, plan.sample_seed());
  return min_tuning_range(trials, plan.policy, plan.target_order(), ceiling, settings.resolution, plan.jobs);
}

std::vector<std::pair<double, MinTrResult>> sensitivity_sweep(const TrialPlan& plan, SweepParameter parameter,
                                                              const std::vector<double>& values,
                                                              const MinTrSettings& settings) {
  if (parameter == SweepParameter::TrMean)
    throw std::invalid_argument("sensitivity_sweep: tr_mean is the searched quantity");
  if (values.empty()) throw std::invalid_argument("sensitivity_sweep: empty value list");
  std::vector<std::pair<double, MinTrResult>> out;
  out.reserve(values.size());
  for (double v : values) {
    TrialPlan point = plan;
    set_parameter(point.variation, parameter, v);
    out.emplace_back(v, min_tuning_range(point, settings));
  }
  return out;
}

}  // namespace wdmarb
