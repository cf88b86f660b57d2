#pragma once

// Experiment drivers behind the CLI subcommands. Each returns a flat table
// with a fixed column order; rendering lives in output.hpp.

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "wdmarb/config.hpp"

namespace wdmarb {

// Empty cell (monostate) renders as an empty CSV field / JSON null.
using Cell = std::variant<std::monostate, std::int64_t, std::uint64_t, double, std::string>;

struct Table final {
  std::string kind;  // subcommand name, used by the plot emitter
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

// Two-axis grid (default ring_local x tr_mean). Without algorithms each row
// is the ideal AFP of one policy; with algorithms each row is one
// algorithm's CAFP and class breakdown against ideal Lock-to-Cyclic.
Table cmd_shmoo(const ExperimentConfig& cfg);

// Minimum tuning range vs one parameter (default ring_local in % of the grid
// spacing) for every DWDM preset, policy and pre-fab ordering.
Table cmd_mintr(const ExperimentConfig& cfg);

// Lock-to-Deterministic min-TR over grid_offset (x) and ring_local (y).
Table cmd_ltd(const ExperimentConfig& cfg);

// Local sensitivity of min-TR to one parameter (or the four default panels:
// grid_offset, laser_local, tr_var, fsr_var) at ring_local = 2.24 nm.
Table cmd_sensitivity(const ExperimentConfig& cfg);

// Min-TR vs fsr_mean.
Table cmd_fsr(const ExperimentConfig& cfg);

// Sequential-tuning failure split (lock error vs wrong order) over a shmoo grid.
Table cmd_breakdown(const ExperimentConfig& cfg);

// One sampled (laser, row) system, one line per ring, for inspection.
Table cmd_sample(const ExperimentConfig& cfg);

// Per-cell sample seed key: axis indices, with any tr_mean axis left out so
// cells along tr_mean share their draws.
std::uint64_t shmoo_cell_key(const AxisSpec& x, int xi, const AxisSpec* y, int yi);

}  // namespace wdmarb
