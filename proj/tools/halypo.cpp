// Copyright 2026 The halypo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// halypo command-line front end.
//
//   halypo run      --config <path> --out <dir>
//   halypo sweep    --config <path> --seeds <n> [--out <json>]
//   halypo plot     --input <csv> --series <col>[,<col>...] [--logy] --out <svg>
//   halypo validate --suite <name> [--seed <n>] [--out <json>]
//
// Exit status: 0 success, 1 failed check or run, 2 configuration error,
// 3 I/O error.

#include "halypo/halypo.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace halypo;

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kConfigError = 2, kIoError = 3 };

std::string opt_str(const std::optional<double>& v) {
  return v ? io::format_double(*v) : std::string("-");
}

int cmd_run(const std::string& config_path, const std::string& out_dir) {
  const io::RunConfig config = io::load_config(config_path);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError(out_dir, "cannot create directory: " + ec.message());

  const RunOutcome run = run_experiment(config);
  const fs::path dir(out_dir);
  io::persist_log(run.log, io::LogFormat::kCsv, (dir / config.csv_name).string());
  io::persist_log(run.log, io::LogFormat::kJson, (dir / config.json_name).string());
  io::json meta = run_metadata_to_json(run.meta);
  meta["fingerprint"] = run.log.fingerprint;
  io::write_file((dir / "run_meta.json").string(), meta.dump(2) + "\n");
  if (config.svg_name && run.log.records.size() >= 2) {
    plot::Series s{"V", {}, {}};
    for (const auto& r : run.log.records) {
      s.x.push_back(static_cast<double>(r.k));
      s.y.push_back(r.V);
    }
    plot::PlotOptions opt;
    opt.title = run.meta.game + " / " + std::string(to_string(config.optimizer.variant));
    opt.y_label = "V";
    opt.log_y = true;
    io::write_file((dir / *config.svg_name).string(), plot::render_plot({s}, opt));
  }

  const auto& s = run.log.summary;
  std::cout << "game            " << run.meta.game << "\n"
            << "fingerprint     " << run.log.fingerprint << "\n"
            << "steps           " << run.meta.steps_completed << " / " << config.n_steps << "\n"
            << "steady_state_V  " << io::format_double(s.steady_state_V) << "\n"
            << "mean_alignment  " << opt_str(s.mean_alignment) << "\n"
            << "gcr             " << io::format_double(s.gcr) << "\n"
            << "gap_decay_rate  " << opt_str(s.gap_decay_rate) << "\n"
            << "convergence     "
            << (s.convergence_step ? std::to_string(*s.convergence_step) : std::string("-"))
            << "\n"
            << "field evals     " << run.meta.independent_field_evals << " ind, "
            << run.meta.team_field_evals << " team\n"
            << "wall time       " << run.meta.wall_time_s << " s\n";
  if (run.meta.failure) {
    std::cerr << "run stopped early: " << *run.meta.failure << "\n";
    return kCheckFailed;
  }
  return kOk;
}

int cmd_sweep(const std::string& config_path, long n_seeds, const std::string& out_path) {
  const io::RunConfig config = io::load_config(config_path);
  if (n_seeds < 1) throw ConfigError("--seeds", "need at least one seed");
  std::uint64_t base = 0;
  if (const auto* g = std::get_if<io::GaussianInit>(&config.theta0)) base = g->seed;
  std::vector<std::uint64_t> seeds;
  for (long i = 0; i < n_seeds; ++i) seeds.push_back(base + static_cast<std::uint64_t>(i));

  const SweepResult res = sweep(config, seeds);
  std::printf("%-18s %14s %14s %6s\n", "field", "mean", "std", "n");
  for (const auto& [name, a] : res.fields) {
    std::printf("%-18s %14.6g %14.6g %6zu\n", name.c_str(), a.mean, a.stddev, a.count);
  }
  std::printf("failures: %zu of %zu\n", res.failures, res.runs.size());
  if (!out_path.empty()) io::write_file(out_path, sweep_to_json(res).dump(2) + "\n");
  return res.failures == 0 ? kOk : kCheckFailed;
}

std::vector<std::string> split_commas(const std::vector<std::string>& in) {
  std::vector<std::string> out;
  for (const auto& s : in) {
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ',')) {
      if (!part.empty()) out.push_back(part);
    }
  }
  return out;
}

int cmd_plot(const std::string& input, const std::vector<std::string>& series_args, bool log_y,
             const std::string& out, const std::string& title) {
  const std::string text = io::read_file(input);
  std::vector<plot::Series> series;
  for (const auto& col : split_commas(series_args)) {
    const auto c = io::read_csv_column(text, col, input);
    series.push_back({col, c.steps, c.values});
  }
  if (series.empty()) throw ConfigError("--series", "no columns given");
  plot::PlotOptions opt;
  opt.title = title;
  opt.y_label = series.size() == 1 ? series.front().label : "value";
  opt.log_y = log_y;
  std::string svg;
  try {
    svg = plot::render_plot(series, opt);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("--input", e.what());
  }
  io::write_file(out, svg);
  return kOk;
}

int cmd_validate(const std::string& suite, std::uint64_t seed, const std::string& out_path) {
  const auto rep = validate::run_suite(suite, seed);
  std::size_t failed = 0;
  for (const auto& c : rep.checks) {
    if (!c.passed) ++failed;
    std::printf("%-4s %-12s %-34s measured=%-12.4g tol=%-9.3g %s\n", c.passed ? "PASS" : "FAIL",
                c.suite.c_str(), c.name.c_str(), c.measured, c.tolerance, c.detail.c_str());
  }
  std::printf("%zu checks, %zu failed\n", rep.checks.size(), failed);
  if (!out_path.empty()) io::write_file(out_path, validate::report_to_json(rep).dump(2) + "\n");
  return rep.passed() ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"halypo: stability-projected multi-agent gradient dynamics"};
  app.require_subcommand(1);

  std::string config_path, out_dir, out_path, input, svg_out, suite, title;
  std::vector<std::string> series;
  long n_seeds = 1;
  bool log_y = false;
  std::uint64_t seed = validate::kDefaultSeed;

  auto* run = app.add_subcommand("run", "run one configured trajectory");
  run->add_option("--config", config_path, "run configuration (JSON)")->required();
  run->add_option("--out", out_dir, "output directory")->required();

  auto* sw = app.add_subcommand("sweep", "repeat a run over consecutive seeds");
  sw->add_option("--config", config_path, "run configuration (JSON)")->required();
  sw->add_option("--seeds", n_seeds, "number of seeds")->required();
  sw->add_option("--out", out_path, "write per-seed summaries and aggregates (JSON)");

  auto* pl = app.add_subcommand("plot", "render CSV columns as an SVG line chart");
  pl->add_option("--input", input, "trajectory CSV")->required();
  pl->add_option("--series", series, "column name(s), comma separated")->required();
  pl->add_flag("--logy", log_y, "logarithmic y axis");
  pl->add_option("--out", svg_out, "output SVG")->required();
  pl->add_option("--title", title, "chart title");

  auto* va = app.add_subcommand("validate", "run a property-check suite");
  va->add_option("--suite", suite,
                 "projection | gradients | descent | convergence | metrics | all")
      ->required();
  va->add_option("--seed", seed, "seed for randomized instances");
  va->add_option("--out", out_path, "write the report (JSON)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir);
    if (sw->parsed()) return cmd_sweep(config_path, n_seeds, out_path);
    if (pl->parsed()) return cmd_plot(input, series, log_y, svg_out, title);
    if (va->parsed()) return cmd_validate(suite, seed, out_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kCheckFailed;
  }
  return kConfigError;
}
