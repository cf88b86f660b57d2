// wdmarb: command-line front end for the arbitration experiments.
//
// Exit codes: 0 success, 1 unexpected error, 2 configuration or usage
// error, 3 internal invariant violation.

#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "wdmarb/config.hpp"
#include "wdmarb/experiments.hpp"
#include "wdmarb/metrics.hpp"
#include "wdmarb/output.hpp"

namespace {

constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInvariant = 3;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::string out;
  std::string format;
  std::string plot;
  bool dump_config = false;
};

void add_common(CLI::App& sub, Options& o) {
  sub.add_option("-c,--config", o.config, "TOML experiment config")->check(CLI::ExistingFile);
  sub.add_option("--seed", o.seed, "master seed, overrides [run].seed")
      ->check(CLI::Range(std::uint64_t{0}, static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())));
  sub.add_option("-j,--jobs", o.jobs, "worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
  sub.add_option("-o,--out", o.out, "output file (default stdout)");
  sub.add_option("--format", o.format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
  sub.add_option("--plot", o.plot, "also write a matplotlib script here (needs --out)");
  sub.add_flag("--dump-config", o.dump_config, "print the effective config and exit");
}

int run(const std::string& name, const Options& o) {
  using Cmd = std::function<wdmarb::Table(const wdmarb::ExperimentConfig&)>;
  static const std::map<std::string, Cmd> commands = {
      {"shmoo", wdmarb::cmd_shmoo},   {"mintr", wdmarb::cmd_mintr},
      {"ltd", wdmarb::cmd_ltd},       {"sensitivity", wdmarb::cmd_sensitivity},
      {"fsr", wdmarb::cmd_fsr},       {"breakdown", wdmarb::cmd_breakdown},
      {"sample", wdmarb::cmd_sample},
  };

  wdmarb::ExperimentConfig cfg = o.config.empty() ? wdmarb::ExperimentConfig{} : wdmarb::load_config(o.config);
  if (o.seed) cfg.run.seed = *o.seed;
  if (o.jobs) cfg.run.jobs = *o.jobs;
  if (!o.out.empty()) cfg.run.output = o.out;
  if (!o.format.empty()) cfg.run.format = wdmarb::parse_output_format(o.format);

  if (o.dump_config) {
    std::cout << wdmarb::serialize_config(cfg);
    return 0;
  }
  if (!o.plot.empty() && cfg.run.output.empty())
    throw wdmarb::ConfigError("--plot needs an output file (--out or [run].output)");

  const wdmarb::Table table = commands.at(name)(cfg);

  if (cfg.run.output.empty()) {
    wdmarb::write_table(table, cfg.run.format, std::cout);
  } else {
    std::ofstream f(cfg.run.output, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + cfg.run.output + " for writing");
    wdmarb::write_table(table, cfg.run.format, f);
    if (!f.flush()) throw std::runtime_error("write failed: " + cfg.run.output);
  }
  if (!o.plot.empty()) {
    std::ofstream p(o.plot, std::ios::binary);
    if (!p) throw std::runtime_error("cannot open " + o.plot + " for writing");
    p << wdmarb::plot_script(table, cfg.run.output, cfg.run.format);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wavelength arbitration Monte Carlo experiments for microring DWDM links"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", "wdmarb 0.1.0");

  Options opts;
  const std::pair<const char*, const char*> subs[] = {
      {"shmoo", "AFP / CAFP over a two-parameter grid"},
      {"mintr", "minimum tuning range vs ring local variation per DWDM preset"},
      {"ltd", "Lock-to-Deterministic min tuning range vs grid offset and ring variation"},
      {"sensitivity", "local sensitivity of the min tuning range"},
      {"fsr", "min tuning range vs mean FSR"},
      {"breakdown", "lock-error vs wrong-order split of algorithm failures"},
      {"sample", "dump one sampled laser and ring row"},
  };
  for (const auto& [name, help] : subs) add_common(*app.add_subcommand(name, help), opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    return run(app.get_subcommands().front()->get_name(), opts);
  } catch (const wdmarb::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const wdmarb::InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}
