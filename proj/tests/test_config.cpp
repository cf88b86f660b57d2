#include <cmath>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "wdmarb/config.hpp"
#include "wdmarb/experiments.hpp"
#include "wdmarb/output.hpp"

using namespace wdmarb;

namespace {

// Random configs for the round-trip property.
class ConfigGen {
 public:
  explicit ConfigGen(std::uint64_t seed) : rng_(seed) {}

  ExperimentConfig next() {
    ExperimentConfig c;
    if (coin()) c.grid.n_ch = pick({4, 8, 16});
    if (coin()) c.grid.grid_spacing = Quantity::nm(pick({1.12, 2.24, 0.8}));
    if (coin()) c.grid.center = Quantity::nm(1300.0 + pick({0.0, 10.5, -3.25}));
    if (coin()) c.grid.ring_bias = Quantity::nm(pick({0.0, 4.48, 2.5}));
    if (coin()) c.variation.grid_offset = Quantity::nm(number());
    if (coin()) c.variation.laser_local = coin() ? Quantity::nm(number()) : Quantity::percent(number() * 10);
    if (coin()) c.variation.ring_local = Quantity::percent(number() * 100);
    if (coin()) c.variation.fsr_mean = Quantity::nm(8.0 + number());
    if (coin()) c.variation.fsr_var = Quantity::percent(number());
    if (coin()) c.variation.tr_mean = Quantity::nm(number());
    if (coin()) c.variation.tr_var = Quantity::percent(number() * 5);
    if (coin()) c.arbiter.policies = {Policy::LtA, Policy::LtC};
    if (coin()) c.arbiter.policies = {Policy::LtD};
    if (coin()) c.arbiter.r = {OrderingSpec::parse("natural"), OrderingSpec::parse("permuted")};
    if (coin()) c.arbiter.s = OrderingSpec::parse(coin() ? "permuted" : "natural");
    if (coin()) c.arbiter.algorithms = {Algorithm::Sequential, Algorithm::VtRsSsm};
    if (coin()) {
      AxisSpec x{SweepParameter::RingLocal, {}};
      const int n = 1 + static_cast<int>(rng_.canonical() * 5);
      for (int i = 0; i < n; ++i) x.values.push_back(Quantity::nm(number()));
      c.sweep.x = x;
      if (coin()) c.sweep.y = AxisSpec{SweepParameter::TrMean, {Quantity::nm(2.24), Quantity::nm(number())}};
    }
    if (coin()) c.sweep.configs = {"wdm8-g200", "wdm16-g400"};
    if (coin()) c.sweep.resolution = coin() ? Quantity::nm(0.02) : Quantity::percent(5);
    if (coin()) c.sweep.ceiling = Quantity::nm(20);
    c.run.seed = static_cast<std::uint64_t>(rng_.canonical() * 9.0e18);
    c.run.n_lasers = 1 + static_cast<int>(rng_.canonical() * 200);
    c.run.n_rows = 1 + static_cast<int>(rng_.canonical() * 200);
    c.run.jobs = static_cast<int>(rng_.canonical() * 8);
    if (coin()) c.run.output = "out dir/result \"x\".csv";
    c.run.format = coin() ? OutputFormat::Csv : OutputFormat::Jsonl;
    return c;
  }

 private:
  bool coin() { return rng_.canonical() < 0.5; }
  double number() { return std::round(rng_.canonical() * 1e6) / 1e5 + rng_.canonical() * 1e-3; }
  template <typename T>
  T pick(std::initializer_list<T> xs) {
    return *(xs.begin() + static_cast<int>(rng_.canonical() * xs.size()));
  }
  Rng rng_;
};

ExperimentConfig tiny(const std::string& body) {
  ExperimentConfig c = parse_config(body);
  c.run.n_lasers = 6;
  c.run.n_rows = 6;
  c.run.jobs = 1;
  return c;
}

std::string csv(const Table& t) {
  std::ostringstream os;
  write_csv(t, os);
  return os.str();
}

std::size_t column(const Table& t, const std::string& name) {
  for (std::size_t i = 0; i < t.columns.size(); ++i)
    if (t.columns[i] == name) return i;
  FAIL("no column " << name);
  return 0;
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("quantities need explicit units") {
  CHECK(parse_quantity("2.24 nm") == Quantity::nm(2.24));
  CHECK(parse_quantity("25%") == Quantity::percent(25));
  CHECK(parse_quantity(" 1e-3nm ") == Quantity::nm(0.001));
  CHECK_THROWS_AS(parse_quantity("2.24"), ConfigError);
  CHECK_THROWS_AS(parse_quantity("2.24 um"), ConfigError);
  CHECK_THROWS_AS(parse_quantity("abc nm"), ConfigError);
  CHECK(format_quantity(Quantity::nm(0.1)) == "0.1 nm");
  CHECK(format_number(0.1 + 0.2) == "0.30000000000000004");
}

TEST_CASE("percent resolves against the grid spacing or as a fraction") {
  const DwdmGridSpec g{};
  CHECK(resolve_quantity(SweepParameter::RingLocal, Quantity::percent(200), g) == doctest::Approx(2.24));
  CHECK(resolve_quantity(SweepParameter::LaserLocal, Quantity::percent(25), g) == doctest::Approx(0.28));
  CHECK(resolve_quantity(SweepParameter::TrVariation, Quantity::percent(10), g) == doctest::Approx(0.10));
  CHECK(resolve_quantity(SweepParameter::FsrVariation, Quantity::percent(1), g) == doctest::Approx(0.01));
  CHECK(resolve_quantity(SweepParameter::RingLocal, Quantity::nm(1.5), g) == 1.5);
  CHECK_THROWS_AS(resolve_quantity(SweepParameter::TrMean, Quantity::percent(5), g), ConfigError);
  CHECK_THROWS_AS(resolve_quantity(SweepParameter::TrVariation, Quantity::nm(0.1), g), ConfigError);
}

TEST_CASE("ranges") {
  const auto r = expand_range("0.28:1.12:0.28 nm");
  REQUIRE(r.size() == 4);
  CHECK(r.back() == Quantity::nm(1.12));
  CHECK(expand_range("1:45:4 %").size() == 12);
  CHECK(expand_range("3 nm").size() == 1);
  CHECK_THROWS_AS(expand_range("1:0:0.5 nm"), ConfigError);
  CHECK_THROWS_AS(expand_range("0:1:0 nm"), ConfigError);
  CHECK_THROWS_AS(expand_range("0:1:0.5"), ConfigError);
}

TEST_CASE("orderings and presets") {
  CHECK(OrderingSpec::parse("permuted").resolve(8, {}) == SpectralOrdering::permuted(8));
  CHECK(OrderingSpec::parse("0,2,1,3").resolve(4, {}) == SpectralOrdering({0, 2, 1, 3}));
  CHECK(OrderingSpec::parse("same").resolve(4, SpectralOrdering::permuted(4)) == SpectralOrdering::permuted(4));
  CHECK_THROWS_AS(OrderingSpec::parse("0,0,1").resolve(3, {}), ConfigError);
  CHECK_THROWS_AS(OrderingSpec::parse("0,1,2").resolve(4, {}), ConfigError);

  const DwdmGridSpec g = parse_preset("wdm16-g400");
  CHECK(g.n_ch == 16);
  CHECK(g.grid_spacing == doctest::Approx(2.24));
  CHECK(g.ring_bias == doctest::Approx(17.92));
  CHECK(parse_preset("wdm8-g200") == DwdmGridSpec{});
  CHECK_THROWS_AS(parse_preset("wdm8-g300"), ConfigError);
  CHECK_THROWS_AS(parse_preset("cwdm4"), ConfigError);
}

TEST_CASE("full document parses into the expected fields") {
  const ExperimentConfig c = parse_config(R"(
[grid]
n_ch = 16
grid_spacing = "2.24 nm"
[variation]
ring_local = "200 %"
tr_var = "20 %"
distribution = "uniform"
[arbiter]
policy = ["LtA", "LtC"]
r = ["natural", "permuted"]
s = "same"
algorithms = "vt-rs-ssm"
[sweep]
x = "ring_local"
x_values = ["0:0.56:0.28 nm", "1 nm"]
resolution = "auto"
[run]
seed = 42
n_lasers = 10
n_rows = 20
jobs = 2
format = "jsonl"
)");
  CHECK(c.grid.n_ch == 16);
  const DwdmGridSpec g = c.grid_spec();
  CHECK(g.ring_bias == doctest::Approx(17.92));
  const VariationParams v = c.variation_for(g);
  CHECK(v.ring_local_bound == doctest::Approx(4.48));
  CHECK(v.tr_rel_bound == doctest::Approx(0.2));
  CHECK(v.laser_local_bound == doctest::Approx(0.56));  // 25 % of the spacing
  CHECK(v.fsr_mean == doctest::Approx(35.84));
  CHECK(c.arbiter.policies.size() == 2);
  CHECK(c.arbiter.algorithms == std::vector<Algorithm>{Algorithm::VtRsSsm});
  REQUIRE(c.sweep.x);
  CHECK(c.sweep.x->values.size() == 4);
  CHECK_FALSE(c.sweep.resolution.has_value());
  CHECK(c.resolution_for(g) == doctest::Approx(0.112));
  CHECK(c.ceiling_for(v) == doctest::Approx(71.68));
  CHECK(c.run.seed == 42);
  CHECK(c.run.format == OutputFormat::Jsonl);
  CHECK(c.effective_jobs() == 2);
}

TEST_CASE("unknown keys, sections and malformed values are rejected") {
  CHECK_THROWS_AS(parse_config("[grid]\nn_chan = 8\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[grids]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[run]\nseeds = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[variation]\nring_local = 2.24\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[variation]\nring_local = \"2.24\"\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[variation]\ndistribution = \"gaussian\"\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[arbiter]\npolicy = \"LtX\"\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[arbiter]\nr = \"same\"\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[sweep]\nx = \"ring_local\"\nx_values = []\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[sweep]\nx = \"ring_local\"\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[sweep]\nx = \"sigma\"\nx_values = \"1 nm\"\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[sweep]\nconfigs = [\"wdm8-g999\"]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[run]\nn_lasers = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[run]\nseed = -1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[run]\nformat = \"xml\"\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("grid = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[grid\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/cfg.toml"), ConfigError);
  CHECK_THROWS_AS(parse_config("[grid]\ngrid_spacing = \"10 %\"\n").grid_spec(), ConfigError);
  CHECK_THROWS_AS(parse_config("[variation]\nfsr_mean = \"0 nm\"\n").variation_for(DwdmGridSpec{}), ConfigError);
}

TEST_CASE("property: parse, serialize, parse is the identity") {
  ConfigGen gen(2718);
  for (int i = 0; i < 500; ++i) {
    const ExperimentConfig c = gen.next();
    const std::string text = serialize_config(c);
    const ExperimentConfig back = parse_config(text);
    CHECK(back == c);
    CHECK(serialize_config(back) == text);
  }
  CHECK(parse_config(serialize_config(ExperimentConfig{})) == ExperimentConfig{});
}

}  // TEST_SUITE

TEST_SUITE("output") {

TEST_CASE("CSV uses nine significant digits and empty fields") {
  Table t{"x", {"a", "b", "c", "d"}, {}};
  t.rows.push_back({Cell{std::int64_t{-3}}, Cell{1.0 / 3.0}, Cell{}, Cell{std::string("p,q")}});
  t.rows.push_back({Cell{std::uint64_t{18446744073709551615ULL}}, Cell{1300.0}, Cell{2.5e-12}, Cell{std::string("z")}});
  CHECK(csv(t) == "a,b,c,d\n-3,0.333333333,,\"p,q\"\n18446744073709551615,1300,2.5e-12,z\n");

  std::ostringstream js;
  write_jsonl(t, js);
  std::istringstream lines(js.str());
  std::string line;
  std::getline(lines, line);
  const auto row = nlohmann::json::parse(line);
  CHECK(row["a"] == -3);
  CHECK(row["b"].get<double>() == 0.333333333);
  CHECK(row["c"].is_null());
  CHECK(row["d"] == "p,q");
  CHECK(line.find("\"a\"") < line.find("\"b\""));
}

TEST_CASE("plot scripts reference the data file") {
  Table t{"shmoo", {"x"}, {}};
  const std::string py = plot_script(t, "out.csv", OutputFormat::Csv);
  CHECK(py.find("import matplotlib") != std::string::npos);
  CHECK(py.find("\"out.csv\"") != std::string::npos);
  CHECK(py.find("read_csv") != std::string::npos);
  CHECK(plot_script(t, "o.jsonl", OutputFormat::Jsonl).find("lines=True") != std::string::npos);
}

}  // TEST_SUITE

TEST_SUITE("experiments") {

TEST_CASE("single-cell shmoo gives one row per policy") {
  const ExperimentConfig c = tiny(R"(
[arbiter]
policy = "LtA"
[sweep]
x = "ring_local"
x_values = "2.24 nm"
y = "tr_mean"
y_values = "4.48 nm"
)");
  const Table t = cmd_shmoo(c);
  REQUIRE(t.rows.size() == 1);
  CHECK(std::get<std::int64_t>(t.rows[0][column(t, "trials")]) == 36);
  CHECK(std::get<std::string>(t.rows[0][column(t, "algorithm")]) == "ideal");
  CHECK(std::get<std::string>(t.rows[0][column(t, "s")]) == "any");
}

TEST_CASE("shmoo with algorithms gives CAFP rows; undefined CAFP renders empty") {
  const ExperimentConfig c = tiny(R"(
[arbiter]
algorithms = ["sequential", "vt-rs-ssm"]
[sweep]
x = "ring_local"
x_values = ["0.28 nm", "8.96 nm"]
y = "tr_mean"
y_values = ["0.2 nm", "9 nm"]
)");
  const Table t = cmd_shmoo(c);
  REQUIRE(t.rows.size() == 8);
  const std::size_t cafp = column(t, "cafp"), succ = column(t, "ideal_successes");
  int undefined = 0;
  for (const auto& row : t.rows) {
    if (std::get<std::int64_t>(row[succ]) == 0) {
      CHECK(std::holds_alternative<std::monostate>(row[cafp]));
      ++undefined;
    } else {
      CHECK(std::holds_alternative<double>(row[cafp]));
    }
  }
  CHECK(undefined > 0);
}

TEST_CASE("shmoo CSV is byte-identical across reruns and job counts") {
  ExperimentConfig c = tiny(R"(
[arbiter]
algorithms = ["sequential", "rs-ssm", "vt-rs-ssm"]
[sweep]
x = "ring_local"
x_values = "0.28:2.24:0.98 nm"
y = "tr_mean"
y_values = "2.24:8.96:3.36 nm"
)");
  c.run.n_lasers = 12;
  c.run.n_rows = 12;
  const std::string one = csv(cmd_shmoo(c));
  CHECK(csv(cmd_shmoo(c)) == one);
  c.run.jobs = 4;
  CHECK(csv(cmd_shmoo(c)) == one);
  c.run.seed = 2;
  CHECK(csv(cmd_shmoo(c)) != one);
}

TEST_CASE("cells along tr_mean share their draws") {
  AxisSpec ring{SweepParameter::RingLocal, {}};
  AxisSpec tr{SweepParameter::TrMean, {}};
  CHECK(shmoo_cell_key(ring, 2, &tr, 0) == shmoo_cell_key(ring, 2, &tr, 5));
  CHECK(shmoo_cell_key(ring, 2, &tr, 0) != shmoo_cell_key(ring, 3, &tr, 0));
  CHECK(shmoo_cell_key(tr, 1, &ring, 4) == shmoo_cell_key(tr, 7, &ring, 4));
}

TEST_CASE("ltd at zero variation needs the ring bias") {
  const ExperimentConfig c = tiny(R"(
[variation]
laser_local = "0 nm"
fsr_var = "0 %"
tr_var = "0 %"
[sweep]
x = "grid_offset"
x_values = "0 nm"
y = "ring_local"
y_values = "0 nm"
)");
  const Table t = cmd_ltd(c);
  REQUIRE(t.rows.size() == 1);
  const double v = std::get<double>(t.rows[0][column(t, "min_tr")]);
  CHECK(std::abs(v - 4.48) <= 0.056);
}

TEST_CASE("mintr normalises by the grid spacing") {
  const ExperimentConfig c = tiny(R"(
[variation]
grid_offset = "0 nm"
laser_local = "0 nm"
fsr_var = "0 %"
tr_var = "0 %"
[arbiter]
policy = "LtC"
r = "natural"
[sweep]
configs = ["wdm8-g400"]
x = "ring_local"
x_values = "0 %"
)");
  const Table t = cmd_mintr(c);
  REQUIRE(t.rows.size() == 1);
  CHECK(std::get<double>(t.rows[0][column(t, "grid_spacing")]) == doctest::Approx(2.24));
  CHECK(std::get<double>(t.rows[0][column(t, "min_tr")]) <= 0.112 + 1e-12);
}

TEST_CASE("sample dumps one line per ring") {
  ExperimentConfig c;
  c.grid.n_ch = 4;
  const Table t = cmd_sample(c);
  CHECK(t.rows.size() == 4);
  CHECK(t.columns.front() == "index");
}

TEST_CASE("command-specific config errors") {
  CHECK_THROWS_AS(cmd_fsr(tiny("[sweep]\nx = \"ring_local\"\nx_values = \"1 nm\"\n")), ConfigError);
  CHECK_THROWS_AS(cmd_mintr(tiny("[sweep]\nx = \"tr_mean\"\nx_values = \"1 nm\"\n")), ConfigError);
  CHECK_THROWS_AS(cmd_shmoo(tiny("[arbiter]\nalgorithms = \"rs\"\npolicy = \"LtA\"\n[sweep]\nx = \"ring_local\"\n"
                                 "x_values = \"1 nm\"\n")),
                  ConfigError);
}

}  // TEST_SUITE
