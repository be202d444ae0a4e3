// Acceptance suite: one line per criterion, exit status 1 when any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include "aquah/error.hpp"
#include "aquah/metrics.hpp"
#include "aquah/pipeline.hpp"
#include "aquah/report.hpp"
#include "aquah/routing.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace aquah;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// Pinned tolerances and budgets.
constexpr double kTerrainBudgetS = 5.0;
constexpr double kCellBalanceTol = 1e-9;
constexpr double kMonotoneTol = 1e-9;
constexpr double kLedgerTol = 1e-6;
constexpr double kSteadyStateTol = 0.02;
constexpr double kSteadyBudgetS = 10.0;
constexpr double kMetricTol = 1e-12;
constexpr double kEndToEndBudgetS = 30.0;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ForcingSeries uniform_forcing(const GridSpec& g, const TimeWindow& w, double precip, double pet) {
  ForcingSeries f;
  f.window = w;
  f.timestamps = w.timestamps();
  for (std::size_t k = 0; k < f.timestamps.size(); ++k) {
    f.precip.push_back(Raster::filled(g, precip));
    f.pet.push_back(Raster::filled(g, pet));
  }
  return f;
}

TimeWindow hourly(std::size_t n) {
  TimeWindow w;
  w.start = parse_instant("2022-01-01");
  w.end = w.start + std::chrono::hours{n};
  w.dt = 3600;
  return w;
}

// 1: D8, accumulation and delineation against the brute-force oracles.
Outcome terrain() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  for (int k = 0; k < 200 && o.pass; ++k) {
    const Raster dem = oracle::random_distinct_dem(rng, 6, 6, 1.0 + (k % 3));
    const DirectionGrid dirs = d8_flow_directions(dem);
    const auto codes = oracle::d8(dem);
    for (std::size_t i = 0; i < codes.size(); ++i) o.require(dirs.code(i) == codes[i], "D8 code mismatch");
    const std::vector<std::uint8_t> active(dem.size(), 1);
    const auto acc = oracle::accumulation(dem.spec(), codes, active);
    const Raster fam = flow_accumulation(dirs);
    for (std::size_t i = 0; i < acc.size(); ++i) o.require(fam.at(i) == acc[i], "accumulation mismatch");
    const std::size_t outlet = static_cast<std::size_t>(rng() % dem.size());
    const auto ref = oracle::basin(dem.spec(), codes, active, outlet);
    const BasinMask mask = delineate_basin(dirs, {outlet / 6, outlet % 6});
    std::size_t members = 0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      o.require(mask.contains(i) == (ref[i] != 0), "basin membership mismatch");
      members += ref[i];
    }
    o.require(static_cast<std::size_t>(fam.at(outlet)) == members, "outlet accumulation differs from basin size");
  }
  const double s = seconds_since(t0);
  o.require(s < kTerrainBudgetS, "took " + fmt("%.2f s", s));
  if (o.pass) o.detail = "200 DEMs in " + fmt("%.3f s", s);
  return o;
}

// 2: cell water balance closes and runoff responds monotonically.
Outcome water_balance() {
  Outcome o;
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 100000 && o.pass; ++k) {
    const CrestParams p = oracle::random_crest(rng);
    const CellState s{p.wm * u(rng)};
    const double precip = u(rng) < 0.3 ? 0.0 : 80.0 * u(rng) * u(rng);
    const double pet = 2.0 * u(rng);
    const double dt = u(rng) < 0.5 ? 3600.0 : 86400.0;
    const auto r = cell_step(s, p, precip, pet, dt);
    const double err = s.w + precip - r.state.w - r.fluxes.actual_et - r.fluxes.runoff();
    worst = std::max(worst, std::abs(err));
    o.require(std::abs(err) <= kCellBalanceTol, "balance error " + fmt("%.3g", err));
    o.require(r.state.w >= 0.0 && r.state.w <= p.wm, "soil water out of [0, wm]");
    o.require(r.fluxes.overland >= 0.0 && r.fluxes.interflow_recharge >= 0.0 && r.fluxes.actual_et >= 0.0,
              "negative flux");
  }
  for (int k = 0; k < 10000 && o.pass; ++k) {
    const CrestParams p = oracle::random_crest(rng);
    const CellState s{std::min(p.wm, 25.0 * u(rng))};
    const double precip = 40.0 * u(rng), pet = 1.5 * u(rng);
    const double base = cell_step(s, p, precip, pet, 3600).fluxes.runoff();
    o.require(cell_step(s, p, precip + 5.0 * u(rng), pet, 3600).fluxes.runoff() >= base - kMonotoneTol,
              "runoff fell with more rain");
    CrestParams q = p;
    q.wm = std::min(250.0, p.wm + 50.0 * u(rng));
    o.require(cell_step(s, q, precip, pet, 3600).fluxes.runoff() <= base + kMonotoneTol, "runoff rose with wm");
    q = p;
    q.b = std::min(20.0, p.b + 5.0 * u(rng));
    o.require(cell_step(s, q, precip, pet, 3600).fluxes.runoff() >= base - kMonotoneTol, "runoff fell with b");
    q = p;
    q.im = std::min(0.5, p.im + 0.2 * u(rng));
    o.require(cell_step(s, q, precip, pet, 3600).fluxes.runoff() >= base - kMonotoneTol, "runoff fell with im");
    q = p;
    q.ke = std::min(1.0, p.ke + 0.5 * u(rng));
    o.require(cell_step(s, q, precip, pet, 3600).fluxes.runoff() <= base + kMonotoneTol, "runoff rose with ke");
  }
  if (o.pass) o.detail = "1e5 balance draws, worst " + fmt("%.2g mm", worst) + "; 1e4 monotonicity pairs";
  return o;
}

// 3: basin ledger over a long run and the hand-stepped routing impulse.
Outcome routing() {
  Outcome o;
  std::mt19937_64 rng(303);
  const Raster dem = oracle::random_distinct_dem(rng, 20, 20, 1000.0);
  const DirectionGrid dirs = d8_flow_directions(dem);
  const Raster fam = flow_accumulation(dirs);
  const BasinMask all(dirs.spec(), std::vector<std::uint8_t>(400, 1), {0, 0});
  const TimeWindow w = hourly(500);
  ForcingSeries f = uniform_forcing(dirs.spec(), w, 0.0, 0.15);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t k = 0; k < 500; ++k)
    if (u(rng) < 0.15) f.precip[k] = Raster::filled(dirs.spec(), 12.0 * u(rng));
  CrestParams cp;
  RoutingParams rp;
  rp.th = 30.0;
  rp.isu = 5.0;
  const auto out = simulate(dirs, fam, all, f, cp, rp, w);
  const double rel = out.ledger_relative_error();
  o.require(rel <= kLedgerTol, "ledger relative error " + fmt("%.3g", rel));
  for (double q : out.outlet_q) o.require(q >= 0.0 && std::isfinite(q), "negative or non-finite discharge");

  const GridSpec strip = testing::spec(1, 3, 1000.0);
  const DirectionGrid sd(strip, {1, 1, 0});
  const BasinMask sm(strip, {1, 1, 1}, {0, 2});
  const std::vector<std::uint8_t> channels{1, 1, 1};
  const RoutingNetwork net = build_network(sd, sm, channels);
  RoutingParams unit;
  unit.alpha = 3.0;
  unit.beta = 0.01;
  RoutingState st{Raster(strip, {10, 0, 0}), Raster(strip, {0, 0, 0})};
  const double expected_out[3] = {0, 0, 10};
  for (int k = 0; k < 3; ++k) {
    const auto r = route_step(st, net, unit, 3600);
    o.require(r.outlet_flux_mm == expected_out[k], "impulse outlet flux at step " + std::to_string(k + 1));
    st = r.state;
  }
  if (o.pass) o.detail = "500-step ledger error " + fmt("%.2g", rel) + "; impulse exits at step 3";
  return o;
}

// 4: steady rain on a saturated, sealed basin reaches rain times area.
Outcome steady_state() {
  Outcome o;
  const auto t0 = Clock::now();
  const std::size_t n = 10;
  GridSpec g = testing::spec(n, n, 1000.0);
  std::vector<double> z(g.size());
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      z[g.index(r, c)] = 10.0 * static_cast<double>(n - r) + 2.0 * std::abs(static_cast<double>(c) - 4.6);
  const Raster dem(g, z);
  const DirectionGrid dirs = d8_flow_directions(dem);
  const Raster fam = flow_accumulation(dirs);
  std::size_t outlet = 0;
  for (std::size_t i = 0; i < fam.size(); ++i)
    if (fam.at(i) > fam.at(outlet)) outlet = i;
  const BasinMask mask = delineate_basin(dirs, {outlet / n, outlet % n});

  CrestParams cp{5.0, 1.0, 0.5, 0.7, 0.0, 5.0};
  RoutingParams rp;
  rp.th = 30.0;
  rp.alpha = 3.0;
  rp.alpha0 = 5.0;
  const double rain = 10.0;
  const TimeWindow w = hourly(240);
  const auto out = simulate(dirs, fam, mask, uniform_forcing(g, w, rain, 0.0), cp, rp, w);
  const double expected = rain / 1000.0 * static_cast<double>(mask.count()) * g.cell_area_km2() * 1e6 / 3600.0;
  double tail = 0.0;
  for (std::size_t k = 216; k < 240; ++k) tail += out.outlet_q[k];
  tail /= 24.0;
  const double rel = std::abs(tail - expected) / expected;
  o.require(rel <= kSteadyStateTol, "outlet " + fmt("%.4g", tail) + " vs " + fmt("%.4g m3/s", expected));
  const double s = seconds_since(t0);
  o.require(s < kSteadyBudgetS, "took " + fmt("%.2f s", s));
  if (o.pass) o.detail = "outlet within " + fmt("%.3g %%", 100 * rel) + " of rain x area";
  return o;
}

// 5: metric identities from the definitions.
Outcome metrics() {
  Outcome o;
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> u(0.1, 50.0);
  auto near = [](double a, double b) { return std::abs(a - b) <= kMetricTol * std::max(1.0, std::abs(b)); };
  for (int k = 0; k < 500 && o.pass; ++k) {
    const std::size_t n = 2 + static_cast<std::size_t>(k % 60);
    std::vector<double> obs(n), sim(n);
    for (auto& v : obs) v = u(rng);
    for (auto& v : sim) v = u(rng);
    const PairedSeries p{obs, sim}, self{obs, obs};
    o.require(nse(self) == 1.0 && kge(self) == 1.0 && rmse(self) == 0.0 && bias_mean(self) == 0.0,
              "perfect-fit identities");
    o.require(near(cc(self), 1.0), "cc of a series with itself");
    double mean = 0.0;
    for (double v : obs) mean += v;
    mean /= static_cast<double>(n);
    o.require(std::abs(nse({obs, std::vector<double>(n, mean)})) <= kMetricTol, "mean predictor nse");

    const oracle::Stats s = oracle::stats(obs, sim);
    o.require(near(nse(p), static_cast<double>(1 - s.sse / s.so)), "nse vs oracle");
    o.require(near(rmse(p), static_cast<double>(std::sqrt(s.sse / n))), "rmse vs oracle");
    o.require(near(bias_mean(p), static_cast<double>(s.ms - s.mo)), "bias vs oracle");
    o.require(near(cc(p), static_cast<double>(s.cov / std::sqrt(s.so * s.ss))), "cc vs oracle");
    long double var_err = 0;
    const long double me = s.ms - s.mo;
    for (std::size_t i = 0; i < n; ++i) var_err += (sim[i] - obs[i] - me) * (sim[i] - obs[i] - me);
    var_err /= n;
    const double e = rmse(p), b = bias_mean(p);
    o.require(near(e * e, b * b + static_cast<double>(var_err)), "rmse^2 = bias^2 + error variance");
    o.require(nse(p) <= 1.0 && kge(p) <= 1.0 && std::abs(cc(p)) <= 1.0 + kMetricTol, "metric bounds");
  }
  if (o.pass) o.detail = "500 random series at " + fmt("%.0e", kMetricTol);
  return o;
}

GaugeCandidate gauge(std::string id, double elev, double area = 100.0) {
  GaugeCandidate g;
  g.id = std::move(id);
  g.name = "Gauge " + g.id;
  g.elevation_m = elev;
  g.drainage_area_km2 = area;
  g.fam_value = area;
  g.record_start = parse_instant("2000-01-01");
  g.record_end = parse_instant("2020-01-01");
  g.record_completeness = 0.9;
  return g;
}

// 6: each selection rule decides its fixture; dominated gauges never win.
Outcome gauge_rules() {
  Outcome o;
  auto decides = [&](const std::vector<GaugeCandidate>& gs, const std::optional<std::string>& hint,
                     const std::string& id, SelectionRule rule, const char* what) {
    const auto r = select_outlet(gs, hint);
    o.require(r.gauge_id == id && r.decisive_rule == rule, what);
  };
  decides({gauge("A", 10), gauge("02110500", 900)}, "02110500", "02110500", SelectionRule::UserHint, "rule 0");
  auto dam = gauge("DAM", 5);
  dam.on_or_below_reservoir = true;
  decides({dam, gauge("B", 50)}, std::nullopt, "B", SelectionRule::ReservoirExclusion, "rule 1");
  decides({gauge("HI", 80), gauge("LO", 20)}, std::nullopt, "LO", SelectionRule::LowestElevation, "rule 2");
  decides({gauge("S", 20, 50), gauge("L", 20, 500)}, std::nullopt, "L", SelectionRule::LargestDrainage, "rule 3");
  auto good = gauge("GOOD", 20), poor = gauge("POOR", 20);
  good.record_completeness = 0.99;
  poor.record_completeness = 0.5;
  decides({poor, good}, std::nullopt, "GOOD", SelectionRule::RecordQuality, "rule 4");
  auto reg = gauge("REG", 10);
  reg.upstream_reservoir_free = false;
  decides({reg, gauge("FREE", 30)}, std::nullopt, "FREE", SelectionRule::SecondVerification, "rule 5");
  decides({gauge("Y", 10), gauge("X", 10)}, std::nullopt, "X", SelectionRule::IdTieBreak, "id tie-break");

  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int inserted = 0;
  while (inserted < 1000 && o.pass) {
    std::vector<GaugeCandidate> gs;
    const int n = 1 + static_cast<int>(6 * u(rng));
    for (int k = 0; k < n; ++k) {
      auto g = gauge("G" + std::to_string(k), std::round(5 * u(rng)) * 10, std::round(3 * u(rng)) * 100);
      g.record_completeness = std::round(4 * u(rng)) / 4;
      g.on_or_below_reservoir = u(rng) < 0.2;
      g.upstream_reservoir_free = u(rng) > 0.25;
      gs.push_back(g);
    }
    const std::string expected = oracle::select_outlet(gs);
    if (expected.empty()) continue;
    o.require(select_outlet(gs).gauge_id == expected, "selection differs from the sort oracle");
    const auto& w = *std::find_if(gs.begin(), gs.end(), [&](const auto& g) { return g.id == expected; });
    auto d = gauge("Z" + std::to_string(inserted), w.elevation_m + 1 + 100 * u(rng), w.drainage_area_km2 * u(rng));
    d.record_completeness = w.record_completeness * u(rng);
    gs.push_back(d);
    o.require(select_outlet(gs).gauge_id == expected, "dominated insertion changed the winner");
    ++inserted;
  }
  if (o.pass) o.detail = "rules 0-5 and tie-break fixtures; 1000 dominated insertions";
  return o;
}

// 7: every parameter path ends inside the range table.
Outcome parameter_ranges() {
  Outcome o;
  std::mt19937_64 rng(707);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SimulationRequest base;
  base.basin = "Synthetic";
  base.window = hourly(24);
  base.data_root = ".";
  const KeyValues manifest = request_to_manifest(base);
  for (int k = 0; k < 10000 && o.pass; ++k) {
    BasinDescriptors d;
    d.area_km2 = std::pow(10.0, -1.0 + 6.0 * u(rng));
    d.relief_m = 4000.0 * u(rng);
    d.mean_slope = 0.6 * u(rng);
    d.drainage_density = u(rng);
    d.impervious_fraction = u(rng);
    const ParamProposal h = heuristic_init(d);
    o.require(within_ranges(h), "heuristic out of range");

    std::string code = "ns(";
    for (ParamId id : kAllParams) {
      const auto& r = range_of(id);
      char buf[64];
      std::snprintf(buf, sizeof buf, "%s=%.6g, ", std::string(r.name).c_str(), r.lerp(4 * u(rng) - 2) * 2 * u(rng));
      code += buf;
    }
    code += ")";
    o.require(within_ranges(parse_decider_json("{\"code\":\"" + code + "\",\"explanation\":\"\"}").proposal),
              "decider answer out of range");

    const ParamId id = kAllParams[static_cast<std::size_t>(rng() % kAllParams.size())];
    const auto& r = range_of(id);
    const double v = r.lerp(4 * u(rng) - 1.5);
    const auto req = apply_feedback(manifest, {SetParam{std::string(r.name), v}});
    o.require(req.overrides.size() == 1 && req.overrides[0].second >= r.lower && req.overrides[0].second <= r.upper,
              "feedback override out of range");
    const bool clamped = v < r.lower || v > r.upper;
    o.require(req.override_violations.size() == (clamped ? 1u : 0u), "clamp not recorded");
  }
  if (o.pass) o.detail = "1e4 draws each for heuristic, decider and feedback";
  return o;
}

std::pair<std::uint32_t, std::uint32_t> png_size(const std::string& png) {
  if (png.size() < 24 || png.compare(0, 8, "\x89PNG\r\n\x1a\n") != 0) return {0, 0};
  auto be32 = [&](std::size_t at) {
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v = (v << 8) | static_cast<unsigned char>(png[at + static_cast<std::size_t>(k)]);
    return v;
  };
  return {be32(16), be32(20)};
}

struct EndToEnd {
  bool ran = false;
  std::string error;
  RunResult first;
  double seconds = 0.0;
  bool identical = false;
};

EndToEnd end_to_end(const fs::path& out_root) {
  EndToEnd e;
  const fs::path data = AQUAH_DATA_DIR;
  if (!fs::is_directory(data / "synthetic")) {
    e.error = "bundled fixture missing under " + data.string();
    return e;
  }
  try {
    RequestDefaults d;
    d.data_root = data;
    const auto req = parse_request("simulate the Synthetic basin from 2021-06-01 to 2021-06-10", d);
    const auto t0 = Clock::now();
    e.first = run_pipeline(req, out_root / "a");
    run_pipeline(req, out_root / "b");
    e.seconds = seconds_since(t0);
    e.ran = true;
    e.identical = true;
    for (const char* f : {"report.md", "results.png", "combined_maps.png", "metrics.csv", "ledger.csv",
                          "simulation.csv", "selection.txt"})
      e.identical = e.identical && slurp(out_root / "a" / f) == slurp(out_root / "b" / f);
  } catch (const Error& err) {
    e.error = err.describe();
  }
  return e;
}

std::vector<std::string> lines_with_prefix(const std::string& md, const std::string& prefix) {
  std::vector<std::string> out;
  std::istringstream in(md);
  for (std::string line; std::getline(in, line);)
    if (line.rfind(prefix, 0) == 0) out.push_back(line);
  return out;
}

// 8: the written report and figures follow their contract.
Outcome report_contract(const EndToEnd& e, const fs::path& out) {
  Outcome o;
  o.require(e.ran, "pipeline failed: " + e.error);
  if (!o.pass) return o;
  const std::string md = slurp(out / "report.md");
  o.require(md.rfind("# Synthetic Basin: Hydrological Simulation Report\n", 0) == 0, "title line");
  o.require(lines_with_prefix(md, "## ") == std::vector<std::string>{"## Basin Information", "## Analysis",
                                                                      "## Figures", "## Data Tables",
                                                                      "## Discussion"},
            "section order");
  const auto subs = lines_with_prefix(md, "### ");
  const std::vector<std::string> required{"### Simulation vs Observation", "### Model Performance Metrics",
                                          "### CREST Parameters", "### Conclusion", "### Run Arguments",
                                          "### Metrics", "### Parameters", "### Notifications",
                                          "### Model Performance Evaluation", "### Recommendations"};
  std::size_t at = 0;
  for (const auto& h : subs)
    if (at < required.size() && h == required[at]) ++at;
  o.require(at == required.size(), "subsection order");
  auto count = [&](const std::string& needle) {
    std::size_t n = 0;
    for (auto p = md.find(needle); p != std::string::npos; p = md.find(needle, p + 1)) ++n;
    return n;
  };
  o.require(count("](combined_maps.png)") == 1 && count("](results.png)") == 1 && count("![") == 2,
            "figures embedded once each");
  for (ParamId id : kAllParams) {
    const auto p = md.find("| " + std::string(param_name(id)) + " | ");
    o.require(p != std::string::npos, "parameter row missing");
    if (p != std::string::npos)
      o.require(md.substr(p, md.find('\n', p) - p).find(e.first.params.why(id)) != std::string::npos,
                "rationale missing");
  }
  o.require(e.first.metrics.has_value(), "metrics missing");
  if (e.first.metrics)
    o.require(md.find("```\n" + e.first.metrics->to_key_values() + "```\n") != std::string::npos,
              "metrics block differs from the computed bundle");
  o.require(png_size(slurp(out / "results.png")) == std::pair<std::uint32_t, std::uint32_t>{1200, 600},
            "hydrograph size");
  o.require(png_size(slurp(out / "combined_maps.png")) == std::pair<std::uint32_t, std::uint32_t>{1200, 680},
            "maps size");
  if (o.pass) o.detail = "sections, figures, parameter rationales and metrics block";
  return o;
}

// 9: the bundled basin runs end to end, twice, with identical artifacts.
Outcome determinism(const EndToEnd& e) {
  Outcome o;
  o.require(e.ran, "pipeline failed: " + e.error);
  if (!o.pass) return o;
  o.require(e.first.gauge_id == std::optional<std::string>("01000100"), "unexpected outlet gauge");
  o.require(e.identical, "artifacts differ between runs");
  o.require(e.first.ledger_relative_error <= kLedgerTol, "ledger error " + fmt("%.3g", e.first.ledger_relative_error));
  o.require(e.seconds < kEndToEndBudgetS, "took " + fmt("%.2f s", e.seconds));
  if (o.pass && e.first.metrics && e.first.metrics->nse)
    o.detail = "two runs in " + fmt("%.2f s", e.seconds) + ", NSE " + fmt("%.3f", *e.first.metrics->nse);
  return o;
}

Outcome guarded(const std::function<Outcome()>& f) {
  try {
    return f();
  } catch (const std::exception& ex) {
    return {false, std::string("exception: ") + ex.what()};
  }
}

}  // namespace

int main() {
  testing::TempDir tmp("acceptance");
  const EndToEnd e2e = end_to_end(tmp.path());
  const std::vector<std::function<Outcome()>> criteria{
      terrain,
      water_balance,
      routing,
      steady_state,
      metrics,
      gauge_rules,
      parameter_ranges,
      [&] { return report_contract(e2e, tmp / "a"); },
      [&] { return determinism(e2e); },
  };
  bool all = true;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const Outcome o = guarded(criteria[k]);
    all = all && o.pass;
    std::printf("criterion %zu: %s", k + 1, o.pass ? "PASS" : "FAIL");
    if (!o.detail.empty()) std::printf("  (%s)", o.detail.c_str());
    std::printf("\n");
  }
  return all ? 0 : 1;
}
