// Command-line front end: run, feedback, select-gauge, make-fixture.

#include <cstdio>
#include <iostream>

#include "CLI11.hpp"

#include "aquah/error.hpp"
#include "aquah/gauge.hpp"
#include "aquah/grid.hpp"
#include "aquah/pipeline.hpp"

namespace {

using namespace aquah;

int report_run(const RunResult& r) {
  std::cout << "Output: " << r.out_dir.string() << "\n";
  std::cout << "Gauge: " << r.gauge_id.value_or("none (ungauged)") << "\n";
  if (r.metrics) {
    std::cout << r.metrics->to_key_values();
  } else {
    std::cout << "metrics: no observations\n";
  }
  std::cout << "ledger_relative_error=" << text::exact(r.ledger_relative_error) << "\n";
  std::cout << "notifications=" << r.notifications.size() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AQUAH distributed hydrologic simulation pipeline"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Simulate a basin from a request");
  std::string prompt, basin, start, end, data_root = "data", out = "out", decider = "none";
  std::int64_t dt = 3600;
  std::string gauge_hint;
  std::vector<std::string> run_sets;
  run->add_option("--prompt", prompt, "Free-form request, e.g. 'simulate the Synthetic basin from 2021-06-01 to 2021-06-10'");
  run->add_option("--basin", basin, "Basin name (overrides the prompt)");
  run->add_option("--start", start, "First day YYYY-MM-DD (inclusive)");
  run->add_option("--end", end, "Last day YYYY-MM-DD (inclusive)");
  run->add_option("--dt", dt, "Model step in seconds")->check(CLI::PositiveNumber);
  run->add_option("--gauge", gauge_hint, "Outlet gauge id or name");
  run->add_option("--set", run_sets, "Parameter override name=value (repeatable)");
  run->add_option("--data-root", data_root, "Directory holding <basin>/ fixtures");
  run->add_option("--out", out, "Output directory");
  run->add_option("--decider", decider, "none | exec:PATH | http:URL");

  auto* fb = app.add_subcommand("feedback", "Rerun a previous run with directives");
  std::string manifest, extend_end, fb_gauge, fb_out;
  std::vector<std::string> sets;
  fb->add_option("--run", manifest, "run_manifest.txt of the previous run")->required();
  fb->add_option("--set", sets, "Parameter override name=value (repeatable)");
  fb->add_option("--gauge", fb_gauge, "Outlet gauge id (rule 0 hint)");
  fb->add_option("--extend-end", extend_end, "New last day YYYY-MM-DD (inclusive)");
  fb->add_option("--out", fb_out, "Output directory (default: <previous>_rerun)");

  auto* sel = app.add_subcommand("select-gauge", "Apply the outlet rules to a gauge inventory");
  std::string gauges_csv, hint, sel_dem, sel_fam;
  sel->add_option("--gauges", gauges_csv, "gauges.csv")->required();
  sel->add_option("--hint", hint, "User hint (id or name)");
  sel->add_option("--dem", sel_dem, "DEM for blank elevations");
  sel->add_option("--fam", sel_fam, "Flow accumulation for blank fam values");

  auto* fx = app.add_subcommand("make-fixture", "Write the synthetic test basin");
  std::string fx_root = "data", fx_name = "synthetic";
  FixtureOptions fx_opt;
  fx->add_option("--root", fx_root, "Data root");
  fx->add_option("--name", fx_name, "Basin directory name");
  fx->add_option("--size", fx_opt.size, "Rows and columns")->check(CLI::Range(4, 512));
  fx->add_option("--days", fx_opt.days, "Days of forcing")->check(CLI::Range(1, 366));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      RequestDefaults defaults;
      defaults.data_root = data_root;
      defaults.dt = dt;
      defaults.decider = decider;
      if (!basin.empty()) defaults.basin = basin;
      if (!start.empty() && !end.empty())
        defaults.window = window_from_dates(parse_instant(start), parse_instant(end), dt);
      else if (!start.empty() || !end.empty())
        throw RequestParseError("--start and --end must be given together");
      SimulationRequest req;
      if (prompt.empty()) {
        if (!defaults.basin || !defaults.window)
          throw RequestParseError("give --prompt, or --basin with --start and --end");
        req.basin = *defaults.basin;
        req.window = *defaults.window;
        req.data_root = defaults.data_root;
        req.decider = defaults.decider;
      } else {
        req = parse_request(prompt, defaults);
        // Explicit flags beat what the prompt implied.
        if (defaults.basin) req.basin = *defaults.basin;
        if (defaults.window) req.window = *defaults.window;
      }
      if (!gauge_hint.empty()) req.gauge_hint = gauge_hint;
      if (!run_sets.empty()) {
        std::vector<FeedbackDirective> ds;
        for (const auto& s : run_sets) ds.emplace_back(parse_set_param(s));
        req = apply_feedback(request_to_manifest(req), ds);
      }
      return report_run(run_pipeline(req, out));
    }
    if (*fb) {
      std::vector<FeedbackDirective> ds;
      for (const auto& s : sets) ds.emplace_back(parse_set_param(s));
      if (!fb_gauge.empty()) ds.emplace_back(SetGauge{fb_gauge});
      if (!extend_end.empty()) ds.emplace_back(ExtendWindow{parse_instant(extend_end)});
      ds.emplace_back(Rerun{});
      const SimulationRequest req = apply_feedback(std::filesystem::path(manifest), ds);
      std::filesystem::path target = fb_out;
      if (target.empty()) {
        const auto prev = std::filesystem::path(manifest).parent_path();
        target = prev.string() + "_rerun";
      }
      return report_run(run_pipeline(req, target));
    }
    if (*sel) {
      const auto candidates = load_gauges(gauges_csv);
      std::optional<Raster> dem, fam;
      if (!sel_dem.empty()) dem = read_ascii_grid(sel_dem);
      if (!sel_fam.empty()) fam = read_ascii_grid(sel_fam);
      const auto r = select_outlet(candidates, hint.empty() ? std::nullopt : std::optional<std::string>(hint),
                                   TerrainContext{dem ? &*dem : nullptr, fam ? &*fam : nullptr});
      std::cout << render_selection(r);
      return 0;
    }
    if (*fx) {
      std::cout << write_synthetic_basin(fx_root, fx_name, fx_opt).string() << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.describe() << "\n";
    return static_cast<int>(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
