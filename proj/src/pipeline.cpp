#include "aquah/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <regex>

#include "aquah/decider.hpp"
#include "aquah/error.hpp"
#include "aquah/forcing.hpp"
#include "aquah/gauge.hpp"
#include "aquah/grid.hpp"
#include "aquah/report.hpp"
#include "aquah/routing.hpp"

namespace aquah {

namespace fs = std::filesystem;
using namespace std::chrono;

void SimulationRequest::validate() const {
  window.validate();
  if (!fs::is_directory(data_root))
    throw MissingDataError("data root " + data_root.string() + " does not exist");
}

namespace {

bool is_upper_ascii(char c) { return c >= 'A' && c <= 'Z'; }

std::string strip_punct(const std::string& tok) {
  std::size_t a = 0, b = tok.size();
  while (a < b && std::ispunct(static_cast<unsigned char>(tok[a]))) ++a;
  while (b > a && std::ispunct(static_cast<unsigned char>(tok[b - 1]))) --b;
  return tok.substr(a, b - a);
}

std::optional<std::string> quoted_token(const std::string& text) {
  static const std::string curly_open = "\xE2\x80\x9C", curly_close = "\xE2\x80\x9D";
  const auto q = text.find('"');
  if (q != std::string::npos) {
    const auto e = text.find('"', q + 1);
    if (e != std::string::npos && e > q + 1) return text::trim(text.substr(q + 1, e - q - 1));
  }
  const auto c = text.find(curly_open);
  if (c != std::string::npos) {
    const auto s = c + curly_open.size();
    const auto e = text.find(curly_close, s);
    if (e != std::string::npos && e > s) return text::trim(text.substr(s, e - s));
  }
  return std::nullopt;
}

std::optional<std::string> capitalised_before_basin(const std::string& text) {
  const auto toks = text::split_ws(text);
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (text::lower(strip_punct(toks[i])) != "basin") continue;
    std::size_t j = i;
    while (j > 0 && is_upper_ascii(toks[j - 1].front())) --j;
    if (j < i && text::lower(toks[j]) == "the") ++j;
    if (j == i) continue;
    std::string name;
    for (std::size_t k = j; k < i; ++k) name += (name.empty() ? "" : " ") + toks[k];
    return strip_punct(name);
  }
  return std::nullopt;
}

Instant day_of(int y, unsigned m, unsigned d) { return sys_days{year{y} / month{m} / day{d}}; }

}  // namespace

SimulationRequest parse_request(const std::string& raw, const RequestDefaults& defaults) {
  SimulationRequest req;
  req.prompt = text::trim(raw);
  req.data_root = defaults.data_root;
  req.decider = defaults.decider;
  std::string rest = req.prompt;

  static const std::regex gauge_re(R"(\bgauges?\s+(?:id\s+|station\s+)?["']?([A-Za-z0-9_.-]*[0-9][A-Za-z0-9_.-]*))",
                                   std::regex::icase);
  std::smatch gm;
  if (std::regex_search(rest, gm, gauge_re)) {
    req.gauge_hint = strip_punct(gm[1].str());
    rest = gm.prefix().str() + " " + gm.suffix().str();
  }

  auto basin = quoted_token(rest);
  if (!basin) basin = capitalised_before_basin(rest);
  if (!basin || basin->empty()) basin = defaults.basin;
  if (!basin || basin->empty()) throw RequestParseError("request names no basin and no default basin is set");
  req.basin = *basin;

  static const std::regex iso_re(R"(\b(\d{4}-\d{2}-\d{2})\b)");
  static const std::regex year_re(R"(\b((?:19|20)\d{2})\b)");
  std::vector<std::string> dates;
  for (auto it = std::sregex_iterator(rest.begin(), rest.end(), iso_re); it != std::sregex_iterator(); ++it)
    dates.push_back((*it)[1]);
  std::optional<TimeWindow> window;
  if (dates.size() >= 2) {
    const Instant a = parse_instant(dates[0]), b = parse_instant(dates[1]);
    if (b < a) throw RequestParseError("window ends (" + dates[1] + ") before it starts (" + dates[0] + ")");
    window = window_from_dates(a, b, defaults.dt);
  } else {
    const std::string no_dates = std::regex_replace(rest, iso_re, " ");
    std::vector<int> years;
    for (auto it = std::sregex_iterator(no_dates.begin(), no_dates.end(), year_re); it != std::sregex_iterator(); ++it)
      years.push_back(std::stoi((*it)[1]));
    if (years.size() >= 2) {
      if (years[1] < years[0])
        throw RequestParseError("window ends (" + std::to_string(years[1]) + ") before it starts (" +
                                std::to_string(years[0]) + ")");
      window = window_from_dates(day_of(years[0], 1, 1), day_of(years[1], 12, 31), defaults.dt);
    } else if (years.size() == 1) {
      window = window_from_dates(day_of(years[0], 1, 1), day_of(years[0], 12, 31), defaults.dt);
    }
  }
  if (!window) window = defaults.window;
  if (!window) throw RequestParseError("request gives no date or year range and no default window is set");
  req.window = *window;
  req.window.validate();
  return req;
}

std::string basin_slug(const std::string& basin) {
  std::string out;
  bool gap = false;
  for (unsigned char c : basin) {
    if (std::isalnum(c)) {
      if (gap && !out.empty()) out += '_';
      out += static_cast<char>(std::tolower(c));
      gap = false;
    } else {
      gap = true;
    }
  }
  return out;
}

DatasetManifest retrieve_datasets(const SimulationRequest& req) {
  DatasetManifest m;
  const fs::path direct = req.data_root / req.basin;
  const fs::path slugged = req.data_root / basin_slug(req.basin);
  if (fs::is_directory(direct))
    m.basin_dir = direct;
  else if (fs::is_directory(slugged))
    m.basin_dir = slugged;
  else
    throw MissingDataError("no data for basin '" + req.basin + "' (looked for " + direct.string() + " and " +
                           slugged.string() + ")");

  m.dem = m.basin_dir / "dem.asc";
  if (!fs::is_regular_file(m.dem)) throw MissingDataError("mandatory DEM missing: " + m.dem.string());

  auto optional_file = [&](const char* name, fs::path& slot, const std::string& fallback) {
    const fs::path p = m.basin_dir / name;
    if (fs::is_regular_file(p))
      slot = p;
    else
      m.notifications.push_back({"retrieve", p.string() + " absent; " + fallback});
  };
  auto optional_dir = [&](const char* name, fs::path& slot, const std::string& fallback) {
    const fs::path p = m.basin_dir / name;
    if (fs::is_directory(p))
      slot = p;
    else
      m.notifications.push_back({"retrieve", p.string() + " absent; " + fallback});
  };
  optional_file("ddm.asc", m.ddm, "flow directions derived from the DEM");
  optional_file("fam.asc", m.fam, "flow accumulation derived from flow directions");
  optional_file("gauges.csv", m.gauges, "no gauge inventory, run is ungauged");
  optional_dir("precip", m.precip, "precipitation filled with 0 mm");
  optional_dir("pet", m.pet, "PET filled with 3 mm/day");
  optional_dir("discharge", m.discharge, "no observations for metrics");
  optional_file("landcover.asc", m.landcover, "impervious fraction defaults to 0.05");
  if (!m.landcover.empty()) optional_file("impervious.txt", m.impervious, "built-in impervious table");
  return m;
}

const std::vector<StageRecord>& pipeline_topology() {
  static const std::vector<StageRecord> stages{
      {"retrieve", {}, 0},
      {"terrain", {"retrieve"}, 0},
      {"select_outlet", {"retrieve", "terrain"}, 0},
      {"delineate", {"terrain", "select_outlet"}, 0},
      {"descriptors", {"retrieve", "terrain", "delineate"}, 0},
      {"params", {"descriptors"}, 0},
      {"forcing", {"retrieve", "terrain"}, 0},
      {"simulate", {"terrain", "delineate", "params", "forcing"}, 0},
      {"metrics", {"retrieve", "select_outlet", "simulate"}, 0},
      {"report", {"terrain", "select_outlet", "delineate", "descriptors", "params", "simulate", "metrics"}, 0},
  };
  return stages;
}

namespace {

// Channel cells for the drainage-density descriptor use the finest network
// the th range admits.
double descriptor_threshold_cells(const GridSpec& grid) {
  return range_of(ParamId::th).lower / grid.cell_area_km2();
}

class StageRunner {
public:
  explicit StageRunner(std::vector<StageRecord>& log) : log_(log) {}

  template <class F>
  void operator()(std::size_t index, F&& body) {
    const StageRecord& spec = pipeline_topology()[index];
    const auto t0 = steady_clock::now();
    try {
      body();
    } catch (Error& e) {
      if (e.stage().empty()) e.set_stage(spec.name);
      throw;
    } catch (const fs::filesystem_error& e) {
      MissingDataError err(e.what());
      err.set_stage(spec.name);
      throw err;
    }
    StageRecord rec = spec;
    rec.elapsed_ms = duration<double, std::milli>(steady_clock::now() - t0).count();
    log_.push_back(std::move(rec));
  }

private:
  std::vector<StageRecord>& log_;
};

std::size_t max_accumulation_cell(const Raster& fam) {
  std::size_t best = fam.size();
  for (std::size_t i = 0; i < fam.size(); ++i)
    if (fam.valid(i) && (best == fam.size() || fam.at(i) > fam.at(best))) best = i;
  if (best == fam.size()) throw EmptyInputError("flow accumulation has no valid cell");
  return best;
}

Raster read_matching(const fs::path& path, const GridSpec& grid, const char* what) {
  Raster r = read_ascii_grid(path);
  if (!r.spec().matches(grid))
    throw ShapeError(std::string(what) + " " + path.string() + " does not match the DEM grid");
  return r;
}

}  // namespace

KeyValues request_to_manifest(const SimulationRequest& req) {
  KeyValues kv;
  kv.set("basin", req.basin);
  kv.set("start", format_instant(req.window.start));
  kv.set("end", format_instant(req.window.end));
  kv.set("dt", std::to_string(req.window.dt));
  if (req.gauge_hint) kv.set("gauge_hint", *req.gauge_hint);
  kv.set("data_root", req.data_root.string());
  kv.set("decider", req.decider);
  if (!req.prompt.empty()) kv.set("prompt", req.prompt);
  for (const auto& [id, v] : req.overrides) kv.set("override." + std::string(param_name(id)), text::exact(v));
  return kv;
}

SimulationRequest request_from_manifest(const KeyValues& kv) {
  SimulationRequest req;
  req.basin = kv.require("basin");
  req.window.start = parse_instant(kv.require("start"));
  req.window.end = parse_instant(kv.require("end"));
  const auto dt = text::to_double(kv.require("dt"));
  if (!dt || *dt <= 0) throw ParseError("run manifest: dt must be a positive integer");
  req.window.dt = static_cast<std::int64_t>(*dt);
  if (auto g = kv.get("gauge_hint")) req.gauge_hint = *g;
  req.data_root = kv.require("data_root");
  req.decider = kv.get("decider").value_or("none");
  req.prompt = kv.get("prompt").value_or("");
  for (const auto& [name, value] : kv.with_prefix("override.")) {
    const auto id = param_from_name(name);
    const auto v = text::to_double(value);
    if (!id || !v) throw ParseError("run manifest: bad override '" + name + "=" + value + "'");
    req.overrides.emplace_back(*id, *v);
  }
  return req;
}

RunResult run_pipeline(const SimulationRequest& req, const fs::path& out_dir, const PipelineOptions& options) {
  RunResult result;
  result.out_dir = out_dir;
  StageRunner stage(result.stages);
  NotificationLog& log = result.notifications;

  DatasetManifest data;
  std::optional<Raster> dem, fam;
  std::optional<DirectionGrid> dirs;
  std::vector<GaugeCandidate> gauges;
  std::optional<SelectionResult> selection;
  Cell outlet;
  std::optional<BasinMask> mask;
  BasinDescriptors desc;
  ParamProposal params;
  std::vector<Violation> violations;
  std::optional<ForcingSeries> forcing;
  std::optional<SimulationOutput> sim;
  std::optional<DischargeSeries> observed;

  stage(0, [&] {
    req.validate();
    data = retrieve_datasets(req);
    log.insert(log.end(), data.notifications.begin(), data.notifications.end());
  });

  stage(1, [&] {
    dem = read_ascii_grid(data.dem);
    if (!data.ddm.empty()) {
      dirs = DirectionGrid::from_raster(read_matching(data.ddm, dem->spec(), "drainage directions"));
    } else {
      dirs = d8_flow_directions(*dem);
    }
    fam = data.fam.empty() ? flow_accumulation(*dirs) : read_matching(data.fam, dem->spec(), "flow accumulation");
  });

  stage(2, [&] {
    if (!data.gauges.empty()) gauges = load_gauges(data.gauges);
    if (!gauges.empty()) {
      selection = select_outlet(gauges, req.gauge_hint, TerrainContext{&*dem, &*fam});
      const auto& g = *std::find_if(gauges.begin(), gauges.end(),
                                    [&](const GaugeCandidate& c) { return c.id == selection->gauge_id; });
      outlet = {g.row, g.col};
      result.gauge_id = selection->gauge_id;
      text::write_file(out_dir / "selection.txt", render_selection(*selection));
    } else {
      if (!data.gauges.empty()) log.push_back({"select_outlet", "gauge inventory is empty; run is ungauged"});
      if (req.gauge_hint)
        log.push_back({"select_outlet", "gauge hint '" + *req.gauge_hint + "' ignored without an inventory"});
      const std::size_t i = max_accumulation_cell(*fam);
      outlet = {i / dem->cols(), i % dem->cols()};
      log.push_back({"select_outlet", "ungauged run; outlet at the maximum flow accumulation cell (row " +
                                          std::to_string(outlet.row) + ", col " + std::to_string(outlet.col) + ")"});
      text::write_file(out_dir / "selection.txt", "Selected gauge: none\nExplanation: ungauged run, outlet at row " +
                                                      std::to_string(outlet.row) + " col " +
                                                      std::to_string(outlet.col) + "\n");
    }
  });

  stage(3, [&] { mask = delineate_basin(*dirs, outlet); });

  stage(4, [&] {
    std::optional<Raster> landcover;
    ImperviousTable table;
    if (!data.landcover.empty()) {
      landcover = read_matching(data.landcover, dem->spec(), "land cover");
      if (!data.impervious.empty()) table = ImperviousTable::read(data.impervious);
    }
    desc = basin_descriptors(*dem, *fam, *mask, descriptor_threshold_cells(dem->spec()),
                             landcover ? &*landcover : nullptr, table);
  });

  stage(5, [&] {
    auto init = initialize_params(desc, DeciderSpec::parse(req.decider), log, options.decider_timeout);
    params = std::move(init.proposal);
    violations = std::move(init.violations);
    for (const auto& [id, v] : req.overrides) {
      params.set(id, v);
      params.set_why(id, "user override");
    }
    for (const auto& v : req.override_violations) {
      violations.push_back(v);
      log.push_back({"params", "override " + v.describe()});
    }
    auto checked = validate(params);
    params = std::move(checked.proposal);
    for (const auto& v : checked.violations) {
      violations.push_back(v);
      log.push_back({"params", v.describe()});
    }
    result.params = params;
  });

  stage(6, [&] {
    std::optional<ForcingManifest> precip, pet;
    if (!data.precip.empty()) precip = ForcingManifest::read(data.precip);
    if (!data.pet.empty()) pet = ForcingManifest::read(data.pet);
    forcing = fallback_fill(ingest_forcing_partial(precip, pet, req.window, dem->spec()), {}, log);
  });

  stage(7, [&] {
    sim = simulate(*dirs, *fam, *mask, *forcing, params.crest, params.routing, req.window);
    for (const auto& n : sim->notifications) log.push_back(n);
    result.ledger_relative_error = sim->ledger_relative_error();
    write_simulation_csv(out_dir / "simulation.csv", *sim);
    write_ledger_csv(out_dir / "ledger.csv", *sim);
  });

  stage(8, [&] {
    if (selection && !data.discharge.empty()) {
      try {
        observed = load_discharge(data.discharge, selection->gauge_id, req.window);
      } catch (const MissingDataError& e) {
        log.push_back({"metrics", e.what()});
      }
    }
    if (observed && observed->valid_count() == 0) {
      log.push_back({"metrics", "discharge record for gauge " + observed->gauge_id + " has no value in the window"});
      observed.reset();
    }
    if (observed) result.metrics = compute_metrics(PairedSeries(observed->q_m3s, sim->outlet_q));
    text::write_file(out_dir / "metrics.csv",
                     result.metrics ? result.metrics->to_csv() : "metric,value\nstatus,no observations\n");
  });

  stage(9, [&] {
    std::vector<double> precip_mm, et_mm;
    for (const auto& row : sim->ledger) {
      precip_mm.push_back(row.precip);
      et_mm.push_back(row.actual_et);
    }
    const std::span<const double> obs =
        observed ? std::span<const double>(observed->q_m3s) : std::span<const double>();
    render_maps(out_dir / "combined_maps.png", *dem, *fam, *mask, gauges, result.gauge_id.value_or(""));
    render_hydrograph(out_dir / "results.png", sim->timestamps, sim->outlet_q, obs, precip_mm);

    ReportContext ctx;
    ctx.basin_name = req.basin;
    ctx.window = req.window;
    ctx.gauge = selection;
    ctx.descriptors = desc;
    ctx.basin_cells = mask->count();
    ctx.params = params;
    ctx.violations = violations;
    ctx.metrics = result.metrics;
    ctx.summary = summarize(sim->timestamps, sim->outlet_q, obs, precip_mm, et_mm, sim->ledger_relative_error());
    ctx.maps_figure = "combined_maps.png";
    ctx.hydrograph_figure = "results.png";
    ctx.notifications = log;
    const KeyValues args = request_to_manifest(req);
    for (const auto& [k, v] : args.entries()) ctx.run_arguments.emplace_back(k, v);
    text::write_file(out_dir / "report.md", render_markdown(ctx));
    text::write_file(out_dir / "notifications.log", format_notifications(log));
  });

  KeyValues manifest = request_to_manifest(req);
  manifest.set("result.gauge", result.gauge_id.value_or("none"));
  manifest.set("result.outlet", std::to_string(outlet.row) + "," + std::to_string(outlet.col));
  manifest.set("result.basin_cells", std::to_string(mask->count()));
  manifest.set("result.ledger_relative_error", text::exact(result.ledger_relative_error));
  for (ParamId id : kAllParams) manifest.set("param." + std::string(param_name(id)), text::exact(params.get(id)));
  for (std::size_t i = 0; i < result.stages.size(); ++i) {
    const auto& s = result.stages[i];
    std::string deps;
    for (const auto& d : s.depends_on) deps += (deps.empty() ? "" : ",") + d;
    manifest.set("stage." + std::to_string(i + 1),
                 s.name + ";deps=" + deps + ";ms=" + text::fixed(s.elapsed_ms, 3));
  }
  result.manifest_path = out_dir / "run_manifest.txt";
  manifest.write(result.manifest_path);
  return result;
}

SetParam parse_set_param(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw DirectiveError("expected name=value, got '" + text + "'");
  const std::string name = text::trim(text.substr(0, eq));
  const auto v = text::to_double(text::trim(text.substr(eq + 1)));
  if (name.empty() || !v) throw DirectiveError("expected name=value, got '" + text + "'");
  return {name, *v};
}

SimulationRequest apply_feedback(const KeyValues& manifest, const std::vector<FeedbackDirective>& directives) {
  SimulationRequest req = request_from_manifest(manifest);
  for (const auto& d : directives) {
    if (const auto* sp = std::get_if<SetParam>(&d)) {
      const auto id = param_from_name(sp->name);
      if (!id) {
        std::string known;
        for (ParamId k : kAllParams) known += (known.empty() ? "" : ", ") + std::string(param_name(k));
        throw DirectiveError("unknown parameter '" + sp->name + "' (known: " + known + ")");
      }
      if (!std::isfinite(sp->value)) throw DirectiveError("parameter " + sp->name + " needs a finite value");
      const auto& r = range_of(*id);
      const double v = std::clamp(sp->value, r.lower, r.upper);
      if (v != sp->value) req.override_violations.push_back({*id, sp->value, v});
      auto it = std::find_if(req.overrides.begin(), req.overrides.end(), [&](const auto& o) { return o.first == *id; });
      if (it != req.overrides.end())
        it->second = v;
      else
        req.overrides.emplace_back(*id, v);
    } else if (const auto* sg = std::get_if<SetGauge>(&d)) {
      if (text::trim(sg->id).empty()) throw DirectiveError("gauge id must not be empty");
      req.gauge_hint = text::trim(sg->id);
    } else if (const auto* ew = std::get_if<ExtendWindow>(&d)) {
      const Instant end = floor<days>(ew->new_last_day) + days{1};
      if (end <= req.window.end)
        throw DirectiveError("new end " + format_date(ew->new_last_day) + " does not extend the window ending " +
                             format_instant(req.window.end));
      req.window.end = end;
    }
  }
  return req;
}

SimulationRequest apply_feedback(const fs::path& manifest_path, const std::vector<FeedbackDirective>& directives) {
  return apply_feedback(KeyValues::read(manifest_path), directives);
}

}  // namespace aquah
