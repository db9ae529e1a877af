#include "CLI11.hpp"

#include "varan/catalogue.hpp"
#include "varan/scenario.hpp"
#include "varan/uniform_infimum.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace {

void write_to(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("TOOLKIT_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(raw, &used);
    if (used != std::string(raw).size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string("TOOLKIT_SEED: not a non-negative integer: '") + raw + "'");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-schedule checks for uniform infima, penalties, slopes and sum rules"};
  app.set_version_flag("--version", varan::toolkit_version());
  app.require_subcommand(1);

  std::string scenario_path, out_path, csv_path;
  std::optional<std::uint64_t> seed;
  bool no_timings = false;
  auto* run = app.add_subcommand("run", "Execute a scenario file and print its JSON report");
  run->add_option("scenario", scenario_path, "Scenario file")->required();
  run->add_option("--out", out_path, "Write the report here instead of stdout");
  run->add_option("--csv", csv_path, "Write the numeric table as CSV");
  run->add_option("--seed", seed, "Seed (overrides TOOLKIT_SEED and the scenario)");
  run->add_flag("--no-timings", no_timings, "Omit timings so reports are byte-stable");

  int n_max = 5, dim_trunc = 256, k_max = 0;
  auto* repro = app.add_subcommand("reproduce-example-4-2", "Exact r / inf table of the sparse counterexample");
  repro->add_option("--n-max", n_max, "Rows n = 1..n-max")->check(CLI::PositiveNumber);
  repro->add_option("--dim-trunc", dim_trunc, "Truncation dimension")->check(CLI::PositiveNumber);
  repro->add_option("--k-max", k_max, "Delta ladder 2^-1..2^-k (0 = smallest admissible)")->check(CLI::NonNegativeNumber);
  repro->add_option("--out", out_path, "Write the report here instead of stdout");
  repro->add_option("--csv", csv_path, "Write the table as CSV");
  repro->add_flag("--no-timings", no_timings, "Omit timings");

  std::string filter;
  bool as_json = false;
  auto* cat = app.add_subcommand("catalogue", "List the named instances");
  cat->add_option("--filter", filter, "Only instances carrying this tag");
  cat->add_flag("--json", as_json, "Machine-readable listing");

  varan::SweepSpec sweep_spec;
  std::string schedule_kind = "geometric";
  double n_first = 1, n_last = 256, factor = 2;
  auto* sweep = app.add_subcommand("sweep", "Penalty values over exponents and n schedules, as CSV");
  sweep->add_option("instance", sweep_spec.instance, "Catalogue instance with a constraint set")->required();
  sweep->add_option("--exponents", sweep_spec.exponents, "Penalty exponents")->delimiter(',');
  sweep->add_option("--schedule", schedule_kind, "linear or geometric");
  sweep->add_option("--n-first", n_first, "First n");
  sweep->add_option("--n-last", n_last, "Last n");
  sweep->add_option("--factor", factor, "Ratio of the geometric schedule");
  sweep->add_option("--resolution", sweep_spec.resolution, "Mesh spacing");
  sweep->add_option("--tol", sweep_spec.tol, "Tolerance");
  sweep->add_option("--seed", seed, "Seed (overrides TOOLKIT_SEED)");
  sweep->add_option("--out", out_path, "Write the CSV here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const varan::Scenario s = varan::load_scenario(scenario_path);
      varan::RunOptions opt;
      opt.seed = seed;
      opt.env_seed = env_seed();
      opt.timings = !no_timings;
      const varan::RunReport r = varan::run_scenario(s, opt);
      write_to(out_path, r.text());
      if (!csv_path.empty()) write_to(csv_path, r.csv);
      return r.exit_code();
    }
    if (*repro) {
      try {
        const varan::RunReport r = varan::reproduce_counterexample(n_max, dim_trunc, k_max, !no_timings);
        write_to(out_path, r.text());
        if (!csv_path.empty()) write_to(csv_path, r.csv);
        return r.exit_code();
      } catch (const varan::TruncationTooSmall& e) {
        std::cerr << "error: " << e.what() << " (dim-trunc must be at least " << e.required() << ")\n";
        return 1;
      }
    }
    if (*cat) {
      const auto entries = varan::catalogue_filter(filter);
      if (as_json)
        std::cout << varan::catalogue_json(entries).dump(2) << "\n";
      else
        std::cout << varan::catalogue_text(entries);
      return 0;
    }
    if (*sweep) {
      sweep_spec.n_schedule = varan::sweep_schedule(schedule_kind, n_first, n_last, factor);
      if (seed)
        sweep_spec.seed = *seed;
      else if (const auto env = env_seed())
        sweep_spec.seed = *env;
      write_to(out_path, varan::penalty_sweep_csv(sweep_spec));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
