#pragma once

#include <ostream>
#include <string>

#include "wdmarb/config.hpp"
#include "wdmarb/experiments.hpp"

namespace wdmarb {

// Floats use 9 significant digits ("%.9g"); empty cells are empty fields.
void write_csv(const Table& table, std::ostream& out);
// One JSON object per row, keys in column order; empty cells are null.
void write_jsonl(const Table& table, std::ostream& out);
void write_table(const Table& table, OutputFormat format, std::ostream& out);

std::string format_cell(const Cell& cell);

// Standalone matplotlib script that reads `data_path` and plots it in the
// layout of the table kind.
std::string plot_script(const Table& table, const std::string& data_path, OutputFormat format);

}  // namespace wdmarb
