#include "wdmarb/output.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "json.hpp"

namespace wdmarb {

namespace {

std::string fixed9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string format_cell(const Cell& cell) {
  struct Visitor {
    std::string operator()(std::monostate) const { return {}; }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(std::uint64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const { return fixed9(v); }
    std::string operator()(const std::string& v) const { return v; }
  };
  return std::visit(Visitor{}, cell);
}

void write_csv(const Table& table, std::ostream& out) {
  for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << csv_escape(table.columns[i]);
  out << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_escape(format_cell(row[i]));
    out << "\n";
  }
}

void write_jsonl(const Table& table, std::ostream& out) {
  for (const auto& row : table.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size() && i < table.columns.size(); ++i) {
      const Cell& c = row[i];
      nlohmann::ordered_json v;
      if (const auto* p = std::get_if<std::int64_t>(&c)) v = *p;
      else if (const auto* p = std::get_if<std::uint64_t>(&c)) v = *p;
      // Same 9-digit rounding as the CSV, then shortest repr.
      else if (const auto* p = std::get_if<double>(&c)) v = std::strtod(fixed9(*p).c_str(), nullptr);
      else if (const auto* p = std::get_if<std::string>(&c)) v = *p;
      obj[table.columns[i]] = std::move(v);
    }
    out << obj.dump() << "\n";
  }
}

void write_table(const Table& table, OutputFormat format, std::ostream& out) {
  if (format == OutputFormat::Csv) write_csv(table, out);
  else write_jsonl(table, out);
}

std::string plot_script(const Table& table, const std::string& data_path, OutputFormat format) {
  std::ostringstream py;
  py << "#!/usr/bin/env python3\n"
     << "# Plot for `wdmarb " << table.kind << "` output. Needs pandas and matplotlib.\n"
     << "import sys\n"
     << "import matplotlib\n"
     << "matplotlib.use(\"Agg\")\n"
     << "import matplotlib.pyplot as plt\n"
     << "import pandas as pd\n\n"
     << "path = sys.argv[1] if len(sys.argv) > 1 else " << nlohmann::json(data_path).dump() << "\n"
     << (format == OutputFormat::Csv ? "df = pd.read_csv(path)\n" : "df = pd.read_json(path, lines=True)\n")
     << "out = sys.argv[2] if len(sys.argv) > 2 else path.rsplit(\".\", 1)[0] + \".png\"\n\n";

  if (table.kind == "shmoo" || table.kind == "breakdown") {
    if (table.kind == "shmoo")
      py << "df[\"metric\"] = df[\"cafp\"].where(df[\"algorithm\"] != \"ideal\", df[\"afp\"])\n";
    py << "keys = [\"r\", \"algorithm\"" << (table.kind == "shmoo" ? ", \"policy\"" : "") << "]\n"
       << "groups = list(df.groupby(keys))\n"
       << "cols = " << (table.kind == "breakdown" ? 2 : 1) << "\n"
       << "fig, axes = plt.subplots(len(groups), cols, figsize=(5 * cols, 4 * len(groups)), squeeze=False)\n"
       << "for i, (key, g) in enumerate(groups):\n"
       << "    for j, col in enumerate(["
       << (table.kind == "shmoo" ? "\"metric\"" : "\"lock_error_cafp\", \"wrong_order_cafp\"") << "]):\n"
       << "        ax = axes[i][j]\n"
       << "        if g[\"y\"].isna().all():\n"
       << "            ax.plot(g[\"x\"], g[col], marker=\".\")\n"
       << "            ax.set_ylim(0, 1)\n"
       << "            ax.set_xlabel(g[\"x_param\"].iloc[0] + \" (nm)\")\n"
       << "            ax.set_title(\" \".join(map(str, key)) + \" \" + col)\n"
       << "            continue\n"
       << "        grid = g.pivot_table(index=\"y\", columns=\"x\", values=col, aggfunc=\"first\")\n"
       << "        im = ax.pcolormesh(grid.columns, grid.index, grid.values, vmin=0, vmax=1, cmap=\"Greys\", shading=\"nearest\")\n"
       << "        ax.set_xlabel(g[\"x_param\"].iloc[0] + \" (nm)\")\n"
       << "        ax.set_ylabel(str(g[\"y_param\"].iloc[0]) + \" (nm)\")\n"
       << "        ax.set_title(\" \".join(map(str, key)) + \" \" + col)\n"
       << "        fig.colorbar(im, ax=ax)\n";
  } else if (table.kind == "mintr") {
    py << "fig, axes = plt.subplots(1, 2, figsize=(11, 4))\n"
       << "for key, g in df.groupby([\"config\", \"policy\", \"r\"]):\n"
       << "    label = \" \".join(map(str, key))\n"
       << "    axes[0].plot(g[\"x\"], g[\"min_tr\"], marker=\".\", label=label)\n"
       << "    axes[1].plot(g[\"x_norm\"], g[\"min_tr_norm\"], marker=\".\", label=label)\n"
       << "axes[0].set_xlabel(df[\"x_param\"].iloc[0] + \" (nm)\")\n"
       << "axes[0].set_ylabel(\"min tuning range (nm)\")\n"
       << "axes[1].set_xlabel(df[\"x_param\"].iloc[0] + \" / grid spacing\")\n"
       << "axes[1].set_ylabel(\"min tuning range / grid spacing\")\n"
       << "axes[1].legend(fontsize=6)\n";
  } else if (table.kind == "ltd" || table.kind == "fsr") {
    const bool ltd = table.kind == "ltd";
    py << "fig, ax = plt.subplots(figsize=(6, 4))\n"
       << "keys = " << (ltd ? "[\"x\"]" : "[\"policy\", \"r\", \"y\"]") << "\n"
       << "for key, g in df.groupby(keys, dropna=False):\n"
       << "    ax.plot(g[" << (ltd ? "\"y\"" : "\"x\"") << "], g[\"min_tr\"], marker=\".\", label=str(key))\n"
       << "ax.set_xlabel(df[" << (ltd ? "\"y_param\"" : "\"x_param\"") << "].iloc[0] + \" (nm)\")\n"
       << "ax.set_ylabel(\"min tuning range (nm)\")\n"
       << "ax.legend(fontsize=7" << (ltd ? ", title=df[\"x_param\"].iloc[0]" : "") << ")\n";
  } else if (table.kind == "sensitivity") {
    py << "params = list(df[\"parameter\"].unique())\n"
       << "fig, axes = plt.subplots(1, len(params), figsize=(4 * len(params), 3.5), squeeze=False)\n"
       << "for ax, p in zip(axes[0], params):\n"
       << "    for key, g in df[df[\"parameter\"] == p].groupby([\"policy\", \"r\"]):\n"
       << "        ax.plot(g[\"value\"], g[\"min_tr\"], marker=\".\", label=\" \".join(key))\n"
       << "    ax.set_xlabel(p)\n"
       << "    ax.set_ylabel(\"min tuning range (nm)\")\n"
       << "    ax.legend(fontsize=7)\n";
  } else {
    py << "fig, ax = plt.subplots(figsize=(7, 3))\n"
       << "ax.scatter(df[\"laser_nm\"], [1] * len(df), marker=\"|\", s=400, label=\"lasers\")\n"
       << "ax.scatter(df[\"ring_resonance_nm\"], [0] * len(df), marker=\"o\", label=\"ring resonances\")\n"
       << "for _, r in df.iterrows():\n"
       << "    ax.plot([r.ring_resonance_nm, r.ring_resonance_nm + r.ring_tr_nm], [0, 0], alpha=0.3)\n"
       << "ax.set_yticks([0, 1], [\"rings\", \"lasers\"])\n"
       << "ax.set_xlabel(\"wavelength (nm)\")\n"
       << "ax.legend(fontsize=7)\n";
  }
  py << "fig.tight_layout()\n"
     << "fig.savefig(out, dpi=150)\n"
     << "print(out)\n";
  return py.str();
}

}  // namespace wdmarb
