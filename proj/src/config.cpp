#include "wdmarb/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "toml.hpp"

namespace wdmarb {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

double parse_number(std::string_view text, std::string_view context) {
  text = trim(text);
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v))
    throw ConfigError("invalid number '" + std::string(text) + "' in " + std::string(context));
  return v;
}

// Snaps range arithmetic noise (0.28 * 3 = 0.8400000000000001) to 12
// significant digits.
double tidy(double v) {
  if (v == 0.0) return 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::logic_error("format_number: buffer too small");
  return std::string(buf, ptr);
}

Quantity parse_quantity(std::string_view text) {
  const std::string_view t = trim(text);
  if (t.ends_with("%")) return Quantity::percent(parse_number(t.substr(0, t.size() - 1), t));
  if (t.size() >= 2 && lower(t.substr(t.size() - 2)) == "nm")
    return Quantity::nm(parse_number(t.substr(0, t.size() - 2), t));
  throw ConfigError("quantity '" + std::string(t) + "' needs an explicit unit (nm or %)");
}

std::string format_quantity(const Quantity& q) {
  return format_number(q.value) + (q.unit == Unit::Nm ? " nm" : " %");
}

double resolve_quantity(SweepParameter p, const Quantity& q, const DwdmGridSpec& grid) {
  const std::string name(to_string(p));
  switch (p) {
    case SweepParameter::GridOffset:
    case SweepParameter::LaserLocal:
    case SweepParameter::RingLocal:
      return q.unit == Unit::Nm ? q.value : q.value / 100.0 * grid.grid_spacing;
    case SweepParameter::FsrMean:
    case SweepParameter::TrMean:
      if (q.unit != Unit::Nm) throw ConfigError(name + " takes nm, got " + format_quantity(q));
      return q.value;
    case SweepParameter::FsrVariation:
    case SweepParameter::TrVariation:
      if (q.unit != Unit::Percent) throw ConfigError(name + " takes %, got " + format_quantity(q));
      return q.value / 100.0;
  }
  return q.value;
}

OrderingSpec OrderingSpec::parse(std::string_view text) {
  const std::string t = lower(trim(text));
  if (t == "natural" || t == "n") return {Kind::Natural, {}};
  if (t == "permuted" || t == "p") return {Kind::Permuted, {}};
  if (t == "same") return {Kind::Same, {}};
  OrderingSpec spec{Kind::Explicit, {}};
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const double v = parse_number(item, "ordering '" + t + "'");
    if (v != std::floor(v) || v < 0) throw ConfigError("ordering '" + t + "' must list non-negative integers");
    spec.ranks.push_back(static_cast<int>(v));
  }
  if (spec.ranks.empty()) throw ConfigError("empty ordering");
  try {
    SpectralOrdering check(spec.ranks);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return spec;
}

std::string OrderingSpec::to_string() const {
  switch (kind) {
    case Kind::Natural: return "natural";
    case Kind::Permuted: return "permuted";
    case Kind::Same: return "same";
    case Kind::Explicit: break;
  }
  std::string out;
  for (std::size_t i = 0; i < ranks.size(); ++i) out += (i ? "," : "") + std::to_string(ranks[i]);
  return out;
}

SpectralOrdering OrderingSpec::resolve(int n_ch, const SpectralOrdering& same) const {
  switch (kind) {
    case Kind::Natural: return SpectralOrdering::natural(n_ch);
    case Kind::Permuted: return SpectralOrdering::permuted(n_ch);
    case Kind::Same: return same.size() ? same : SpectralOrdering::natural(n_ch);
    case Kind::Explicit: break;
  }
  if (static_cast<int>(ranks.size()) != n_ch)
    throw ConfigError("ordering " + to_string() + " has " + std::to_string(ranks.size()) + " entries, n_ch is " +
                      std::to_string(n_ch));
  return SpectralOrdering(ranks);
}

std::vector<Quantity> expand_range(std::string_view text) {
  const std::string_view t = trim(text);
  if (std::count(t.begin(), t.end(), ':') == 0) return {parse_quantity(t)};
  const auto c1 = t.find(':');
  const auto c2 = t.find(':', c1 + 1);
  if (c2 == std::string_view::npos || t.find(':', c2 + 1) != std::string_view::npos)
    throw ConfigError("range '" + std::string(t) + "' must be start:stop:step followed by a unit");
  const Quantity step = parse_quantity(t.substr(c2 + 1));
  const double start = parse_number(t.substr(0, c1), t);
  const double stop = parse_number(t.substr(c1 + 1, c2 - c1 - 1), t);
  if (!(step.value > 0.0)) throw ConfigError("range '" + std::string(t) + "' needs a positive step");
  if (stop < start) throw ConfigError("range '" + std::string(t) + "' has stop < start");
  const long count = static_cast<long>(std::floor((stop - start) / step.value * (1.0 + 1e-9) + 1e-9)) + 1;
  if (count > 100000) throw ConfigError("range '" + std::string(t) + "' expands to too many points");
  std::vector<Quantity> out;
  out.reserve(count);
  for (long i = 0; i < count; ++i) out.push_back({tidy(start + static_cast<double>(i) * step.value), step.unit});
  return out;
}

DwdmGridSpec parse_preset(std::string_view name, double center) {
  const std::string t = lower(trim(name));
  const auto dash = t.find("-g");
  if (!t.starts_with("wdm") || dash == std::string::npos)
    throw ConfigError("unknown DWDM preset '" + std::string(name) + "' (expected wdm<N>-g200 or wdm<N>-g400)");
  const double n = parse_number(std::string_view(t).substr(3, dash - 3), t);
  const std::string ghz = t.substr(dash + 2);
  double spacing = 0.0;
  if (ghz == "200") spacing = 1.12;
  else if (ghz == "400") spacing = 2.24;
  else throw ConfigError("preset '" + std::string(name) + "': channel spacing must be g200 or g400");
  if (n != std::floor(n) || n < 2 || n > 64) throw ConfigError("preset '" + std::string(name) + "': bad channel count");
  return DwdmGridSpec::preset(static_cast<int>(n), spacing, center);
}

std::string_view to_string(OutputFormat f) noexcept { return f == OutputFormat::Csv ? "csv" : "jsonl"; }

OutputFormat parse_output_format(std::string_view text) {
  const std::string t = lower(trim(text));
  if (t == "csv") return OutputFormat::Csv;
  if (t == "jsonl" || t == "json") return OutputFormat::Jsonl;
  throw ConfigError("unknown output format '" + std::string(text) + "' (expected csv or jsonl)");
}

DwdmGridSpec ExperimentConfig::grid_spec() const {
  auto nm_only = [](const std::optional<Quantity>& q, const char* key, double fallback) {
    if (!q) return fallback;
    if (q->unit != Unit::Nm) throw ConfigError(std::string("grid.") + key + " takes nm");
    return q->value;
  };
  try {
    DwdmGridSpec spec = DwdmGridSpec::preset(grid.n_ch.value_or(8), nm_only(grid.grid_spacing, "grid_spacing", 1.12),
                                             nm_only(grid.center, "center", 1300.0));
    if (grid.ring_bias) spec.ring_bias = nm_only(grid.ring_bias, "ring_bias", spec.ring_bias);
    spec.validate();
    return spec;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

VariationParams ExperimentConfig::variation_for(const DwdmGridSpec& g) const {
  VariationParams var = VariationParams::defaults_for(g);
  const std::pair<SweepParameter, const std::optional<Quantity>*> fields[] = {
      {SweepParameter::GridOffset, &variation.grid_offset}, {SweepParameter::LaserLocal, &variation.laser_local},
      {SweepParameter::RingLocal, &variation.ring_local},   {SweepParameter::FsrMean, &variation.fsr_mean},
      {SweepParameter::FsrVariation, &variation.fsr_var},   {SweepParameter::TrMean, &variation.tr_mean},
      {SweepParameter::TrVariation, &variation.tr_var},
  };
  for (const auto& [param, q] : fields)
    if (*q) set_parameter(var, param, resolve_quantity(param, **q, g));
  try {
    var.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return var;
}

double ExperimentConfig::resolution_for(const DwdmGridSpec& g) const {
  if (!sweep.resolution) return g.grid_spacing / 20.0;
  const double r = sweep.resolution->unit == Unit::Nm ? sweep.resolution->value
                                                      : sweep.resolution->value / 100.0 * g.grid_spacing;
  if (!(r > 0.0)) throw ConfigError("sweep.resolution must be > 0");
  return r;
}

double ExperimentConfig::ceiling_for(const VariationParams& var) const {
  if (!sweep.ceiling) return 2.0 * var.fsr_mean;
  if (sweep.ceiling->unit != Unit::Nm || !(sweep.ceiling->value > 0.0))
    throw ConfigError("sweep.ceiling must be a positive nm value");
  return sweep.ceiling->value;
}

int ExperimentConfig::effective_jobs() const {
  if (run.jobs > 0) return run.jobs;
  return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

namespace {

class TableReader {
 public:
  TableReader(const toml::table& t, std::string name) : t_(t), name_(std::move(name)) {}

  void finish() const {
    for (auto&& [k, v] : t_) {
      (void)v;
      if (!seen_.count(std::string(k.str())))
        throw ConfigError("unknown key '" + std::string(k.str()) + "' in [" + name_ + "]");
    }
  }

  const toml::node* get(const std::string& key) {
    seen_.insert(key);
    return t_.get(key);
  }

  std::string where(const std::string& key) const { return name_ + "." + key; }

  std::optional<std::string> string(const std::string& key) {
    const toml::node* n = get(key);
    if (!n) return std::nullopt;
    if (!n->is_string()) throw ConfigError(where(key) + " must be a string");
    return std::string(n->as_string()->get());
  }

  std::optional<std::int64_t> integer(const std::string& key) {
    const toml::node* n = get(key);
    if (!n) return std::nullopt;
    if (!n->is_integer()) throw ConfigError(where(key) + " must be an integer");
    return n->as_integer()->get();
  }

  std::optional<Quantity> quantity(const std::string& key) {
    if (auto s = string(key)) {
      try {
        return parse_quantity(*s);
      } catch (const ConfigError& e) {
        throw ConfigError(where(key) + ": " + e.what());
      }
    }
    return std::nullopt;
  }

  // A string or an array of strings.
  std::vector<std::string> strings(const std::string& key) {
    const toml::node* n = get(key);
    if (!n) return {};
    if (n->is_string()) return {std::string(n->as_string()->get())};
    std::vector<std::string> out;
    if (const auto* arr = n->as_array()) {
      for (const auto& item : *arr) {
        if (!item.is_string()) throw ConfigError(where(key) + " must contain strings only");
        out.emplace_back(item.as_string()->get());
      }
      if (out.empty()) throw ConfigError(where(key) + " is an empty list");
      return out;
    }
    throw ConfigError(where(key) + " must be a string or an array of strings");
  }

 private:
  const toml::table& t_;
  std::string name_;
  std::set<std::string> seen_;
};

template <typename T, typename F>
std::vector<T> map_strings(const std::vector<std::string>& in, const std::string& where, F f) {
  std::vector<T> out;
  for (const auto& s : in) {
    try {
      out.push_back(f(s));
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  return out;
}

std::optional<AxisSpec> read_axis(TableReader& r, const std::string& axis) {
  const auto name = r.string(axis);
  const auto values = r.strings(axis + "_values");
  if (!name && values.empty()) return std::nullopt;
  if (!name) throw ConfigError(r.where(axis) + " is required when " + axis + "_values is set");
  if (values.empty()) throw ConfigError(r.where(axis + "_values") + " is required when " + axis + " is set");
  AxisSpec spec;
  try {
    spec.parameter = parse_sweep_parameter(*name);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(r.where(axis) + ": " + e.what());
  }
  for (const auto& v : values) {
    try {
      for (const Quantity& q : expand_range(v)) spec.values.push_back(q);
    } catch (const ConfigError& e) {
      throw ConfigError(r.where(axis + "_values") + ": " + e.what());
    }
  }
  return spec;
}

int checked_int(std::int64_t v, std::int64_t lo, std::int64_t hi, const std::string& where) {
  if (v < lo || v > hi)
    throw ConfigError(where + " must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<int>(v);
}

}  // namespace

ExperimentConfig parse_config(std::string_view toml_text, std::string_view source) {
  toml::table doc;
  try {
    doc = toml::parse(toml_text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << e.description() << " (" << e.source().begin << ")";
    throw ConfigError(std::string(source) + ": " + os.str());
  }

  static const char* const kSections[] = {"grid", "variation", "arbiter", "sweep", "run"};
  for (auto&& [k, v] : doc) {
    if (std::find(std::begin(kSections), std::end(kSections), k.str()) == std::end(kSections))
      throw ConfigError("unknown section [" + std::string(k.str()) + "]");
    if (!v.is_table()) throw ConfigError("'" + std::string(k.str()) + "' must be a table");
  }
  auto section = [&](const char* name) -> const toml::table& {
    static const toml::table empty;
    const toml::table* t = doc[name].as_table();
    return t ? *t : empty;
  };

  ExperimentConfig cfg;
  {
    TableReader r(section("grid"), "grid");
    if (auto v = r.integer("n_ch")) cfg.grid.n_ch = checked_int(*v, 2, 1024, r.where("n_ch"));
    cfg.grid.grid_spacing = r.quantity("grid_spacing");
    cfg.grid.center = r.quantity("center");
    cfg.grid.ring_bias = r.quantity("ring_bias");
    r.finish();
  }
  {
    TableReader r(section("variation"), "variation");
    cfg.variation.grid_offset = r.quantity("grid_offset");
    cfg.variation.laser_local = r.quantity("laser_local");
    cfg.variation.ring_local = r.quantity("ring_local");
    cfg.variation.fsr_mean = r.quantity("fsr_mean");
    cfg.variation.fsr_var = r.quantity("fsr_var");
    cfg.variation.tr_mean = r.quantity("tr_mean");
    cfg.variation.tr_var = r.quantity("tr_var");
    if (auto d = r.string("distribution"); d && lower(*d) != "uniform")
      throw ConfigError("variation.distribution: only \"uniform\" is supported");
    r.finish();
  }
  {
    TableReader r(section("arbiter"), "arbiter");
    cfg.arbiter.policies = map_strings<Policy>(r.strings("policy"), r.where("policy"), parse_policy);
    cfg.arbiter.r = map_strings<OrderingSpec>(r.strings("r"), r.where("r"), OrderingSpec::parse);
    for (const auto& o : cfg.arbiter.r)
      if (o.kind == OrderingSpec::Kind::Same) throw ConfigError("arbiter.r cannot be \"same\"");
    if (auto s = r.string("s")) {
      try {
        cfg.arbiter.s = OrderingSpec::parse(*s);
      } catch (const ConfigError& e) {
        throw ConfigError(r.where("s") + ": " + e.what());
      }
    }
    cfg.arbiter.algorithms = map_strings<Algorithm>(r.strings("algorithms"), r.where("algorithms"), parse_algorithm);
    r.finish();
  }
  {
    TableReader r(section("sweep"), "sweep");
    cfg.sweep.x = read_axis(r, "x");
    cfg.sweep.y = read_axis(r, "y");
    if (cfg.sweep.y && !cfg.sweep.x) throw ConfigError("sweep.y requires sweep.x");
    cfg.sweep.configs = r.strings("configs");
    for (const auto& c : cfg.sweep.configs) parse_preset(c);
    if (auto s = r.string("resolution"); s && lower(*s) != "auto") {
      cfg.sweep.resolution = parse_quantity(*s);
      if (!(cfg.sweep.resolution->value > 0.0)) throw ConfigError("sweep.resolution must be > 0");
    }
    if (auto s = r.string("ceiling"); s && lower(*s) != "auto") cfg.sweep.ceiling = parse_quantity(*s);
    r.finish();
  }
  {
    TableReader r(section("run"), "run");
    if (auto v = r.integer("seed")) {
      if (*v < 0) throw ConfigError("run.seed must be >= 0");
      cfg.run.seed = static_cast<std::uint64_t>(*v);
    }
    if (auto v = r.integer("n_lasers")) cfg.run.n_lasers = checked_int(*v, 1, 1000000, r.where("n_lasers"));
    if (auto v = r.integer("n_rows")) cfg.run.n_rows = checked_int(*v, 1, 1000000, r.where("n_rows"));
    if (auto v = r.integer("jobs")) cfg.run.jobs = checked_int(*v, 0, 4096, r.where("jobs"));
    if (auto v = r.string("output")) cfg.run.output = *v;
    if (auto v = r.string("format")) cfg.run.format = parse_output_format(*v);
    r.finish();
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

namespace {

std::string quoted(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

template <typename T, typename F>
std::string string_list(const std::vector<T>& items, F f) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", " : "") + quoted(f(items[i]));
  return out + "]";
}

}  // namespace

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream os;
  auto qline = [&](const char* key, const std::optional<Quantity>& q) {
    if (q) os << key << " = " << quoted(format_quantity(*q)) << "\n";
  };

  os << "[grid]\n";
  if (c.grid.n_ch) os << "n_ch = " << *c.grid.n_ch << "\n";
  qline("grid_spacing", c.grid.grid_spacing);
  qline("center", c.grid.center);
  qline("ring_bias", c.grid.ring_bias);

  os << "\n[variation]\n";
  qline("grid_offset", c.variation.grid_offset);
  qline("laser_local", c.variation.laser_local);
  qline("ring_local", c.variation.ring_local);
  qline("fsr_mean", c.variation.fsr_mean);
  qline("fsr_var", c.variation.fsr_var);
  qline("tr_mean", c.variation.tr_mean);
  qline("tr_var", c.variation.tr_var);

  os << "\n[arbiter]\n";
  if (!c.arbiter.policies.empty())
    os << "policy = " << string_list(c.arbiter.policies, [](Policy p) { return std::string(to_string(p)); }) << "\n";
  if (!c.arbiter.r.empty())
    os << "r = " << string_list(c.arbiter.r, [](const OrderingSpec& o) { return o.to_string(); }) << "\n";
  os << "s = " << quoted(c.arbiter.s.to_string()) << "\n";
  if (!c.arbiter.algorithms.empty())
    os << "algorithms = "
       << string_list(c.arbiter.algorithms, [](Algorithm a) { return std::string(to_string(a)); }) << "\n";

  os << "\n[sweep]\n";
  auto axis = [&](const char* name, const std::optional<AxisSpec>& a) {
    if (!a) return;
    os << name << " = " << quoted(to_string(a->parameter)) << "\n";
    os << name << "_values = " << string_list(a->values, format_quantity) << "\n";
  };
  axis("x", c.sweep.x);
  axis("y", c.sweep.y);
  if (!c.sweep.configs.empty())
    os << "configs = " << string_list(c.sweep.configs, [](const std::string& s) { return s; }) << "\n";
  qline("resolution", c.sweep.resolution);
  qline("ceiling", c.sweep.ceiling);

  os << "\n[run]\n";
  os << "seed = " << c.run.seed << "\n";
  os << "n_lasers = " << c.run.n_lasers << "\n";
  os << "n_rows = " << c.run.n_rows << "\n";
  os << "jobs = " << c.run.jobs << "\n";
  if (!c.run.output.empty()) os << "output = " << quoted(c.run.output) << "\n";
  os << "format = " << quoted(to_string(c.run.format)) << "\n";
  return os.str();
}

}  // namespace wdmarb
