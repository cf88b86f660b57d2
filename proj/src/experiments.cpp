#include "wdmarb/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace wdmarb {

namespace {

Cell i64(long long v) { return Cell{std::in_place_type<std::int64_t>, static_cast<std::int64_t>(v)}; }
Cell u64(std::uint64_t v) { return Cell{std::in_place_type<std::uint64_t>, v}; }
Cell num(double v) { return Cell{std::in_place_type<double>, v}; }
Cell str(std::string_view v) { return Cell{std::in_place_type<std::string>, std::string(v)}; }
Cell opt(const std::optional<double>& v) { return v ? num(*v) : Cell{}; }

AxisSpec axis(SweepParameter p, std::string_view range) { return {p, expand_range(range)}; }

struct Context {
  DwdmGridSpec grid;
  VariationParams var;
  std::vector<OrderingSpec> r;
  int jobs = 1;
};

Context context(const ExperimentConfig& cfg) {
  Context c;
  c.grid = cfg.grid_spec();
  c.var = cfg.variation_for(c.grid);
  c.r = cfg.arbiter.r.empty() ? std::vector<OrderingSpec>{OrderingSpec{}} : cfg.arbiter.r;
  c.jobs = cfg.effective_jobs();
  return c;
}

TrialPlan base_plan(const ExperimentConfig& cfg, const DwdmGridSpec& grid, const VariationParams& var,
                    const OrderingSpec& r, int jobs) {
  TrialPlan plan;
  plan.grid = grid;
  plan.variation = var;
  plan.r = r.resolve(grid.n_ch, SpectralOrdering{});
  plan.s = cfg.arbiter.s.resolve(grid.n_ch, plan.r);
  plan.n_lasers = cfg.run.n_lasers;
  plan.n_rows = cfg.run.n_rows;
  plan.seed = cfg.run.seed;
  plan.jobs = jobs;
  return plan;
}

void apply(TrialPlan& plan, const AxisSpec& a, std::size_t i) {
  set_parameter(plan.variation, a.parameter, resolve_quantity(a.parameter, a.values.at(i), plan.grid));
}

void validate(const VariationParams& var) {
  try {
    var.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::vector<Policy> policies_or(const ExperimentConfig& cfg, std::vector<Policy> fallback) {
  return cfg.arbiter.policies.empty() ? fallback : cfg.arbiter.policies;
}

// The oblivious algorithms are referenced against Lock-to-Cyclic only.
void require_ltc_for_algorithms(const ExperimentConfig& cfg, const std::vector<Algorithm>& algorithms) {
  if (algorithms.empty()) return;
  for (Policy p : cfg.arbiter.policies)
    if (p != Policy::LtC)
      throw ConfigError("arbiter.algorithms run under LtC only; arbiter.policy lists " + std::string(to_string(p)));
}

// "natural" / "permuted" when the ordering is one of the named ones.
std::string order_label(const SpectralOrdering& o) {
  if (o == SpectralOrdering::natural(o.size())) return "natural";
  if (o == SpectralOrdering::permuted(o.size())) return "permuted";
  return o.to_string();
}

std::string s_label(Policy p, const TrialPlan& plan) {
  return p == Policy::LtA ? "any" : order_label(plan.target_order());
}

// Iterates the x (and optional y) grid of a two-axis experiment.
template <typename Body>
void for_each_cell(const AxisSpec& x, const std::optional<AxisSpec>& y, Body body) {
  const std::size_t ny = y ? y->values.size() : 1;
  for (std::size_t xi = 0; xi < x.values.size(); ++xi)
    for (std::size_t yi = 0; yi < ny; ++yi) body(xi, yi);
}

struct Grid2 {
  AxisSpec x;
  std::optional<AxisSpec> y;
};

Grid2 shmoo_axes(const ExperimentConfig& cfg) {
  if (cfg.sweep.x) return {*cfg.sweep.x, cfg.sweep.y};
  return {axis(SweepParameter::RingLocal, "0.28:8.96:0.28 nm"), axis(SweepParameter::TrMean, "1.12:10.08:0.56 nm")};
}

std::vector<Cell> axis_cells(const TrialPlan& plan, const Grid2& g) {
  std::vector<Cell> out{str(to_string(g.x.parameter)), num(get_parameter(plan.variation, g.x.parameter))};
  if (g.y) {
    out.push_back(str(to_string(g.y->parameter)));
    out.push_back(num(get_parameter(plan.variation, g.y->parameter)));
  } else {
    out.emplace_back();
    out.emplace_back();
  }
  return out;
}

TrialPlan cell_plan(const TrialPlan& base, const Grid2& g, std::size_t xi, std::size_t yi) {
  TrialPlan plan = base;
  apply(plan, g.x, xi);
  if (g.y) apply(plan, *g.y, yi);
  validate(plan.variation);
  plan.cell = shmoo_cell_key(g.x, static_cast<int>(xi), g.y ? &*g.y : nullptr, static_cast<int>(yi));
  return plan;
}

TrialSet trials_for(const TrialPlan& plan) {
  return sample_trials(plan.grid, plan.variation, plan.prefab_order(), plan.n_lasers, plan.n_rows,
                       plan.sample_seed());
}

std::string join(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + std::to_string(v[i]);
  return out;
}

std::string join_codes(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v[i]);
    out += (i ? " " : "") + std::string(buf);
  }
  return out;
}

}  // namespace

std::uint64_t shmoo_cell_key(const AxisSpec& x, int xi, const AxisSpec* y, int yi) {
  const std::uint64_t kx = x.parameter == SweepParameter::TrMean ? 0 : static_cast<std::uint64_t>(xi) + 1;
  const std::uint64_t ky = !y || y->parameter == SweepParameter::TrMean ? 0 : static_cast<std::uint64_t>(yi) + 1;
  return (kx << 32) | ky;
}

Table cmd_shmoo(const ExperimentConfig& cfg) {
  const Context ctx = context(cfg);
  const Grid2 g = shmoo_axes(cfg);
  const auto policies = policies_or(cfg, {Policy::LtC});
  const auto& algorithms = cfg.arbiter.algorithms;
  require_ltc_for_algorithms(cfg, algorithms);

  Table t;
  t.kind = "shmoo";
  t.columns = {"r",       "s",           "x_param",    "x",         "y_param",  "y",         "policy",
               "algorithm", "trials",    "ideal_successes", "ideal_failures", "afp", "failures", "cafp",
               "zero_lock", "dupl_lock", "lane_order", "seed"};
  for (const OrderingSpec& r : ctx.r) {
    const TrialPlan base = base_plan(cfg, ctx.grid, ctx.var, r, ctx.jobs);
    for_each_cell(g.x, g.y, [&](std::size_t xi, std::size_t yi) {
      const TrialPlan plan = cell_plan(base, g, xi, yi);
      const TrialSet trials = trials_for(plan);
      auto prefix = [&](Policy p) {
        std::vector<Cell> row{str(order_label(plan.prefab_order())), str(s_label(p, plan))};
        for (Cell& c : axis_cells(plan, g)) row.push_back(std::move(c));
        return row;
      };
      if (algorithms.empty()) {
        for (Policy p : policies) {
          const StatRecord rec = run_afp(trials, p, plan.target_order(), plan.jobs);
          auto row = prefix(p);
          for (Cell c : {str(to_string(p)), str("ideal"), i64(rec.trials), i64(rec.ideal_successes),
                         i64(rec.ideal_failures), num(rec.afp()), i64(rec.ideal_failures), Cell{}, Cell{}, Cell{},
                         Cell{}, u64(plan.sample_seed())})
            row.push_back(std::move(c));
          t.rows.push_back(std::move(row));
        }
        return;
      }
      const StatRecord rec = run_cafp(trials, plan.target_order(), algorithms, plan.jobs);
      for (std::size_t k = 0; k < algorithms.size(); ++k) {
        const ClassCounts& c = rec.algorithms[k].given_ideal_success;
        auto row = prefix(Policy::LtC);
        for (Cell cell : {str(to_string(Policy::LtC)), str(to_string(algorithms[k])), i64(rec.trials),
                          i64(rec.ideal_successes), i64(rec.ideal_failures), num(rec.afp()), i64(c.failures()),
                          opt(rec.cafp(k)), i64(c[OutcomeClass::ZeroLock]), i64(c[OutcomeClass::DuplLock]),
                          i64(c[OutcomeClass::LaneOrderError]), u64(plan.sample_seed())})
          row.push_back(std::move(cell));
        t.rows.push_back(std::move(row));
      }
    });
  }
  return t;
}

Table cmd_breakdown(const ExperimentConfig& cfg) {
  const Context ctx = context(cfg);
  const Grid2 g = shmoo_axes(cfg);
  const std::vector<Algorithm> algorithms =
      cfg.arbiter.algorithms.empty() ? std::vector<Algorithm>{Algorithm::Sequential} : cfg.arbiter.algorithms;
  require_ltc_for_algorithms(cfg, algorithms);

  Table t;
  t.kind = "breakdown";
  t.columns = {"r",         "s",          "x_param",         "x",           "y_param",          "y",
               "algorithm", "trials",     "ideal_successes", "lock_error",  "wrong_order",      "lock_error_cafp",
               "wrong_order_cafp", "majority", "seed"};
  for (const OrderingSpec& r : ctx.r) {
    const TrialPlan base = base_plan(cfg, ctx.grid, ctx.var, r, ctx.jobs);
    for_each_cell(g.x, g.y, [&](std::size_t xi, std::size_t yi) {
      const TrialPlan plan = cell_plan(base, g, xi, yi);
      const StatRecord rec = run_cafp(trials_for(plan), plan.target_order(), algorithms, plan.jobs);
      for (std::size_t k = 0; k < algorithms.size(); ++k) {
        const ClassCounts& c = rec.algorithms[k].given_ideal_success;
        const long lock = c.lock_errors();
        const long order = c[OutcomeClass::LaneOrderError];
        std::optional<double> lock_p, order_p;
        if (rec.ideal_successes > 0) {
          lock_p = static_cast<double>(lock) / static_cast<double>(rec.ideal_successes);
          order_p = static_cast<double>(order) / static_cast<double>(rec.ideal_successes);
        }
        const char* majority = lock + order == 0 ? "none" : lock > order ? "lock_error" : order > lock ? "wrong_order" : "tie";
        std::vector<Cell> row{str(order_label(plan.prefab_order())), str(order_label(plan.target_order()))};
        for (Cell& cell : axis_cells(plan, g)) row.push_back(std::move(cell));
        for (Cell cell : {str(to_string(algorithms[k])), i64(rec.trials), i64(rec.ideal_successes), i64(lock),
                          i64(order), opt(lock_p), opt(order_p), str(std::string(majority)), u64(plan.sample_seed())})
          row.push_back(std::move(cell));
        t.rows.push_back(std::move(row));
      }
    });
  }
  return t;
}

Table cmd_mintr(const ExperimentConfig& cfg) {
  if (cfg.sweep.y) throw ConfigError("mintr sweeps one axis; remove sweep.y");
  const AxisSpec x = cfg.sweep.x ? *cfg.sweep.x : axis(SweepParameter::RingLocal, "0:800:25 %");
  if (x.parameter == SweepParameter::TrMean) throw ConfigError("mintr: tr_mean is the searched quantity");
  const std::vector<std::string> presets =
      cfg.sweep.configs.empty() ? std::vector<std::string>{"wdm8-g200", "wdm8-g400", "wdm16-g200", "wdm16-g400"}
                                : cfg.sweep.configs;
  const auto policies = policies_or(cfg, {Policy::LtA, Policy::LtC});
  const std::vector<OrderingSpec> orders =
      cfg.arbiter.r.empty() ? std::vector<OrderingSpec>{OrderingSpec{}, OrderingSpec{OrderingSpec::Kind::Permuted, {}}}
                            : cfg.arbiter.r;
  const double center = cfg.grid_spec().center;
  const int jobs = cfg.effective_jobs();

  Table t;
  t.kind = "mintr";
  t.columns = {"config", "n_ch",   "grid_spacing", "policy", "r",          "s",       "x_param", "x",
               "x_norm", "min_tr", "min_tr_norm",  "above_max", "ceiling", "resolution", "trials", "seed"};
  for (const std::string& name : presets) {
    const DwdmGridSpec grid = parse_preset(name, center);
    const VariationParams var = cfg.variation_for(grid);
    const MinTrSettings settings{cfg.resolution_for(grid), cfg.sweep.ceiling ? cfg.ceiling_for(var) : 0.0};
    for (Policy p : policies) {
      for (const OrderingSpec& r : orders) {
        TrialPlan base = base_plan(cfg, grid, var, r, jobs);
        base.policy = p;
        for (std::size_t i = 0; i < x.values.size(); ++i) {
          TrialPlan plan = base;
          apply(plan, x, i);
          validate(plan.variation);
          const MinTrResult res = min_tuning_range(plan, settings);
          const double xv = get_parameter(plan.variation, x.parameter);
          const Cell x_norm = is_relative(x.parameter) ? Cell{} : num(xv / grid.grid_spacing);
          t.rows.push_back({str(name), i64(grid.n_ch), num(grid.grid_spacing), str(to_string(p)),
                            str(order_label(plan.prefab_order())), str(s_label(p, plan)), str(to_string(x.parameter)),
                            num(xv), x_norm, opt(res.min_tr),
                            res.min_tr ? num(*res.min_tr / grid.grid_spacing) : Cell{}, i64(res.above_max() ? 1 : 0),
                            num(res.ceiling), num(res.resolution), i64(res.trials), u64(plan.sample_seed())});
        }
      }
    }
  }
  return t;
}

Table cmd_ltd(const ExperimentConfig& cfg) {
  const Context ctx = context(cfg);
  const Grid2 g = cfg.sweep.x ? Grid2{*cfg.sweep.x, cfg.sweep.y}
                              : Grid2{axis(SweepParameter::GridOffset, "0:6:1 nm"),
                                      axis(SweepParameter::RingLocal, "0:2.24:0.28 nm")};
  if (g.x.parameter == SweepParameter::TrMean || (g.y && g.y->parameter == SweepParameter::TrMean))
    throw ConfigError("ltd: tr_mean is the searched quantity");
  Table t;
  t.kind = "ltd";
  t.columns = {"r", "x_param", "x", "y_param", "y", "policy", "min_tr", "above_max", "exceeds_fsr",
               "fsr_mean", "ceiling", "resolution", "trials", "seed"};
  for (const OrderingSpec& r : ctx.r) {
    TrialPlan base = base_plan(cfg, ctx.grid, ctx.var, r, ctx.jobs);
    base.policy = Policy::LtD;
    for_each_cell(g.x, g.y, [&](std::size_t xi, std::size_t yi) {
      TrialPlan plan = base;
      apply(plan, g.x, xi);
      if (g.y) apply(plan, *g.y, yi);
      validate(plan.variation);
      const MinTrSettings settings{cfg.resolution_for(plan.grid),
                                   cfg.sweep.ceiling ? cfg.ceiling_for(plan.variation) : 0.0};
      const MinTrResult res = min_tuning_range(plan, settings);
      const bool exceeds = res.above_max() || *res.min_tr > plan.variation.fsr_mean;
      std::vector<Cell> row{str(order_label(plan.prefab_order()))};
      for (Cell& c : axis_cells(plan, g)) row.push_back(std::move(c));
      for (Cell c : {str(to_string(Policy::LtD)), opt(res.min_tr), i64(res.above_max() ? 1 : 0), i64(exceeds ? 1 : 0),
                     num(plan.variation.fsr_mean), num(res.ceiling), num(res.resolution), i64(res.trials),
                     u64(plan.sample_seed())})
        row.push_back(std::move(c));
      t.rows.push_back(std::move(row));
    });
  }
  return t;
}

Table cmd_sensitivity(const ExperimentConfig& cfg) {
  if (cfg.sweep.y) throw ConfigError("sensitivity sweeps one axis; remove sweep.y");
  const Context ctx = context(cfg);
  std::vector<AxisSpec> panels;
  if (cfg.sweep.x) {
    panels.push_back(*cfg.sweep.x);
  } else {
    panels = {axis(SweepParameter::GridOffset, "0:1.12:0.112 nm"), axis(SweepParameter::LaserLocal, "1:45:4 %"),
              axis(SweepParameter::TrVariation, "0:20:2 %"), axis(SweepParameter::FsrVariation, "0:5:0.5 %")};
  }
  const auto policies = policies_or(cfg, {Policy::LtA, Policy::LtC});

  Table t;
  t.kind = "sensitivity";
  t.columns = {"parameter", "input", "value", "policy", "r", "s", "min_tr", "above_max", "delta_min_tr",
               "trials", "seed"};
  for (const AxisSpec& panel : panels) {
    if (panel.parameter == SweepParameter::TrMean) throw ConfigError("sensitivity: tr_mean is the searched quantity");
    for (Policy p : policies) {
      for (const OrderingSpec& r : ctx.r) {
        TrialPlan base = base_plan(cfg, ctx.grid, ctx.var, r, ctx.jobs);
        base.policy = p;
        std::vector<double> values;
        for (const Quantity& q : panel.values) values.push_back(resolve_quantity(panel.parameter, q, ctx.grid));
        for (double v : values) {
          VariationParams probe = base.variation;
          set_parameter(probe, panel.parameter, v);
          validate(probe);
        }
        const MinTrSettings settings{cfg.resolution_for(ctx.grid), cfg.sweep.ceiling ? cfg.ceiling_for(ctx.var) : 0.0};
        const auto points = sensitivity_sweep(base, panel.parameter, values, settings);
        const std::optional<double> first = points.front().second.min_tr;
        for (std::size_t i = 0; i < points.size(); ++i) {
          const auto& [v, res] = points[i];
          const Cell delta = res.min_tr && first ? num(*res.min_tr - *first) : Cell{};
          t.rows.push_back({str(to_string(panel.parameter)), str(format_quantity(panel.values[i])), num(v),
                            str(to_string(p)), str(order_label(base.prefab_order())), str(s_label(p, base)),
                            opt(res.min_tr), i64(res.above_max() ? 1 : 0), delta, i64(res.trials),
                            u64(base.sample_seed())});
        }
      }
    }
  }
  return t;
}

Table cmd_fsr(const ExperimentConfig& cfg) {
  const Context ctx = context(cfg);
  const Grid2 g = cfg.sweep.x ? Grid2{*cfg.sweep.x, cfg.sweep.y}
                              : Grid2{axis(SweepParameter::FsrMean, "6.72:15.68:0.14 nm"), std::nullopt};
  if (g.x.parameter != SweepParameter::FsrMean) throw ConfigError("fsr: sweep.x must be fsr_mean");
  if (g.y && g.y->parameter == SweepParameter::TrMean) throw ConfigError("fsr: tr_mean is the searched quantity");
  const auto policies = policies_or(cfg, {Policy::LtA, Policy::LtC});

  Table t;
  t.kind = "fsr";
  t.columns = {"r", "s", "x_param", "x", "y_param", "y", "policy", "min_tr", "above_max", "ceiling", "trials",
               "seed"};
  for (Policy p : policies) {
    for (const OrderingSpec& r : ctx.r) {
      TrialPlan base = base_plan(cfg, ctx.grid, ctx.var, r, ctx.jobs);
      base.policy = p;
      for_each_cell(g.x, g.y, [&](std::size_t xi, std::size_t yi) {
        TrialPlan plan = base;
        apply(plan, g.x, xi);
        if (g.y) apply(plan, *g.y, yi);
        validate(plan.variation);
        const MinTrSettings settings{cfg.resolution_for(plan.grid),
                                     cfg.sweep.ceiling ? cfg.ceiling_for(plan.variation) : 0.0};
        const MinTrResult res = min_tuning_range(plan, settings);
        std::vector<Cell> row{str(order_label(plan.prefab_order())), str(s_label(p, plan))};
        for (Cell& c : axis_cells(plan, g)) row.push_back(std::move(c));
        for (Cell c : {str(to_string(p)), opt(res.min_tr), i64(res.above_max() ? 1 : 0), num(res.ceiling),
                       i64(res.trials), u64(plan.sample_seed())})
          row.push_back(std::move(c));
        t.rows.push_back(std::move(row));
      });
    }
  }
  return t;
}

Table cmd_sample(const ExperimentConfig& cfg) {
  const Context ctx = context(cfg);
  const TrialPlan plan = base_plan(cfg, ctx.grid, ctx.var, ctx.r.front(), 1);
  const TrialSet ts = sample_trials(plan.grid, plan.variation, plan.prefab_order(), 1, 1, plan.sample_seed());
  const MwlSample& mwl = ts.lasers.front();
  const RingRowSample& row = ts.rows.front();
  const SpectralOrdering s = plan.target_order();
  const std::vector<Algorithm> algorithms =
      cfg.arbiter.algorithms.empty()
          ? std::vector<Algorithm>{Algorithm::Sequential, Algorithm::RsSsm, Algorithm::VtRsSsm}
          : cfg.arbiter.algorithms;

  const ReachMatrix reach(mwl, row);
  const IdealResult ideal[] = {arbitrate_ideal(reach, Policy::LtD, s), arbitrate_ideal(reach, Policy::LtC, s),
                               arbitrate_ideal(reach, Policy::LtA, s)};
  std::vector<ArbitrationOutcome> outcomes;
  for (Algorithm a : algorithms) outcomes.push_back(run_algorithm(mwl, row, s, a));
  const TransceiverEnv env(mwl, row);

  Table t;
  t.kind = "sample";
  t.columns = {"index", "laser_nm", "ring_resonance_nm", "ring_fsr_nm", "ring_tr_nm", "rank_r", "rank_s",
               "reachable", "search_table", "ltd", "ltc", "lta"};
  for (Algorithm a : algorithms) t.columns.push_back(std::string(to_string(a)));
  auto assigned = [](const IdealResult& r, int i) { return r.feasible ? i64(r.assignment[i]) : Cell{}; };
  for (int i = 0; i < row.size(); ++i) {
    std::vector<Cell> line{i64(i),
                           num(mwl.wavelengths[i]),
                           num(row.rings[i].resonance),
                           num(row.rings[i].fsr),
                           num(row.rings[i].tr),
                           i64(row.order.rank_of(i)),
                           i64(s.rank_of(i)),
                           str(join(reachable_lasers(row.rings[i], mwl))),
                           str(join_codes(env.sweep(i).entries)),
                           assigned(ideal[0], i),
                           assigned(ideal[1], i),
                           assigned(ideal[2], i)};
    for (const ArbitrationOutcome& o : outcomes) {
      std::string cellv = std::string(to_string(o.kind)) + ":";
      cellv += o.assignment[i] >= 0 ? std::to_string(o.assignment[i]) : "-";
      line.push_back(str(cellv));
    }
    t.rows.push_back(std::move(line));
  }
  return t;
}

}  // namespace wdmarb
