#pragma once

// Experiment configuration: a TOML document with [grid], [variation],
// [arbiter], [sweep] and [run] tables. Physical quantities are strings with
// an explicit unit, e.g. "2.24 nm" or "25 %". Unknown keys are errors.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wdmarb/algorithms.hpp"
#include "wdmarb/ideal_arbiter.hpp"
#include "wdmarb/metrics.hpp"
#include "wdmarb/model.hpp"

namespace wdmarb {

class ConfigError final : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Unit : std::uint8_t { Nm, Percent };

struct Quantity final {
  double value = 0.0;
  Unit unit = Unit::Nm;

  static Quantity nm(double v) { return {v, Unit::Nm}; }
  static Quantity percent(double v) { return {v, Unit::Percent}; }
  bool operator==(const Quantity&) const = default;
};

// "<number> nm" or "<number> %"; the space is optional.
Quantity parse_quantity(std::string_view text);
std::string format_quantity(const Quantity& q);

// Shortest decimal that parses back to the same double.
std::string format_number(double v);

// Converts a quantity to the unit the parameter is stored in. Percent means
// a fraction of the grid spacing for grid_offset / laser_local / ring_local,
// and a plain fraction for fsr_var / tr_var. fsr_mean and tr_mean take nm
// only.
double resolve_quantity(SweepParameter p, const Quantity& q, const DwdmGridSpec& grid);

// "natural", "permuted", "same" (target ordering only) or an explicit rank
// list such as "0,2,1,3".
struct OrderingSpec final {
  enum class Kind : std::uint8_t { Natural, Permuted, Same, Explicit };
  Kind kind = Kind::Natural;
  std::vector<int> ranks;  // Explicit only

  static OrderingSpec parse(std::string_view text);
  std::string to_string() const;
  // `same` is substituted when kind == Same.
  SpectralOrdering resolve(int n_ch, const SpectralOrdering& same) const;
  bool operator==(const OrderingSpec&) const = default;
};

struct AxisSpec final {
  SweepParameter parameter = SweepParameter::RingLocal;
  std::vector<Quantity> values;
  bool operator==(const AxisSpec&) const = default;
};

// "start:stop:step unit" (inclusive of stop within 1e-9 relative slack) or a
// single quantity.
std::vector<Quantity> expand_range(std::string_view text);

struct GridSection final {
  std::optional<int> n_ch;
  std::optional<Quantity> grid_spacing;
  std::optional<Quantity> center;
  std::optional<Quantity> ring_bias;
  bool operator==(const GridSection&) const = default;
};

struct VariationSection final {
  std::optional<Quantity> grid_offset;
  std::optional<Quantity> laser_local;
  std::optional<Quantity> ring_local;
  std::optional<Quantity> fsr_mean;
  std::optional<Quantity> fsr_var;
  std::optional<Quantity> tr_mean;
  std::optional<Quantity> tr_var;
  bool operator==(const VariationSection&) const = default;
};

struct ArbiterSection final {
  std::vector<Policy> policies;        // empty: command default
  std::vector<OrderingSpec> r;         // empty: natural
  OrderingSpec s{OrderingSpec::Kind::Same, {}};
  std::vector<Algorithm> algorithms;   // empty: command default
  bool operator==(const ArbiterSection&) const = default;
};

struct SweepSection final {
  std::optional<AxisSpec> x;
  std::optional<AxisSpec> y;
  std::vector<std::string> configs;     // DWDM presets such as "wdm8-g200"
  std::optional<Quantity> resolution;   // absent: grid_spacing / 20
  std::optional<Quantity> ceiling;      // absent: 2 * fsr_mean
  bool operator==(const SweepSection&) const = default;
};

enum class OutputFormat : std::uint8_t { Csv, Jsonl };

struct RunSection final {
  std::uint64_t seed = 1;
  int n_lasers = 100;
  int n_rows = 100;
  int jobs = 0;  // 0: hardware concurrency
  std::string output;  // empty: stdout
  OutputFormat format = OutputFormat::Csv;
  bool operator==(const RunSection&) const = default;
};

struct ExperimentConfig final {
  GridSection grid;
  VariationSection variation;
  ArbiterSection arbiter;
  SweepSection sweep;
  RunSection run;

  DwdmGridSpec grid_spec() const;
  // Missing entries take VariationParams::defaults_for(grid).
  VariationParams variation_for(const DwdmGridSpec& grid) const;
  double resolution_for(const DwdmGridSpec& grid) const;
  double ceiling_for(const VariationParams& var) const;  // 0 selects the default
  int effective_jobs() const;

  bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig parse_config(std::string_view toml_text, std::string_view source = "<config>");
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& config);

// "wdm<N>-g<200|400>": N channels at 1.12 nm (200 GHz) or 2.24 nm (400 GHz).
DwdmGridSpec parse_preset(std::string_view name, double center = 1300.0);

std::string_view to_string(OutputFormat f) noexcept;
OutputFormat parse_output_format(std::string_view text);

}  // namespace wdmarb
