#include "aquah/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "aquah/error.hpp"

namespace aquah {

namespace {

constexpr Rgb kInk{0, 0, 0};
constexpr Rgb kGridline{232, 232, 232};
constexpr Rgb kMarker{255, 140, 0};
constexpr Rgb kSelectedMarker{0, 160, 60};

// Bars never reach below this fraction of the plot height.
constexpr double kBarDepth = 0.3;

std::string num(double v, int decimals) { return text::fixed(v, decimals); }

std::string g6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

int decimals_for(double span) {
  if (span >= 100.0) return 0;
  if (span >= 1.0) return 2;
  return 4;
}

double finite_max(std::span<const double> x) {
  double m = 0.0;
  for (double v : x)
    if (std::isfinite(v)) m = std::max(m, v);
  return m;
}

}  // namespace

int PlotFrame::x_of(std::size_t step) const {
  if (steps <= 1) return (left + right) / 2;
  return left + static_cast<int>(std::lround(static_cast<double>(step) * (right - left) /
                                             static_cast<double>(steps - 1)));
}

int PlotFrame::y_of(double q) const {
  const double t = std::clamp(q / q_top, 0.0, 1.0);
  return bottom - static_cast<int>(std::lround(t * (bottom - top)));
}

PlotFrame hydrograph_frame(std::size_t steps, double q_max) {
  PlotFrame f;
  f.left = 90;
  f.top = 50;
  f.right = kHydrographWidth - 90;
  f.bottom = kHydrographHeight - 70;
  f.steps = steps;
  // Leave the band under the precipitation bars mostly free of lines.
  f.q_top = q_max > 0.0 ? q_max / (1.0 - kBarDepth) : 1.0;
  return f;
}

void draw_series(Canvas& canvas, const PlotFrame& frame, std::span<const double> q, Rgb color) {
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!std::isfinite(q[i])) continue;
    const int x = frame.x_of(i), y = frame.y_of(q[i]);
    const bool next = i + 1 < q.size() && std::isfinite(q[i + 1]);
    if (next)
      canvas.line(x, y, frame.x_of(i + 1), frame.y_of(q[i + 1]), color, 2);
    else
      canvas.fill_rect(x, y, x + 1, y + 1, color);
  }
}

Canvas hydrograph_canvas(std::span<const Instant> timestamps, std::span<const double> sim,
                         std::span<const double> obs, std::span<const double> precip) {
  if (sim.empty()) throw EmptyInputError("hydrograph needs a non-empty simulated series");
  if (timestamps.size() != sim.size() || precip.size() != sim.size() ||
      (!obs.empty() && obs.size() != sim.size()))
    throw ShapeError("hydrograph series lengths disagree");

  const bool has_obs = !obs.empty();
  const double q_max = std::max(finite_max(sim), has_obs ? finite_max(obs) : 0.0);
  const PlotFrame f = hydrograph_frame(sim.size(), q_max);
  Canvas c(kHydrographWidth, kHydrographHeight);

  const std::string title = has_obs ? "Simulated vs observed discharge" : "Simulated discharge";
  c.text((kHydrographWidth - Canvas::text_width(title, 2)) / 2, 14, title, kInk, 2);

  // Discharge axis on the left, five divisions.
  const int dq = decimals_for(f.q_top);
  for (int k = 0; k <= 5; ++k) {
    const double q = f.q_top * k / 5.0;
    const int y = f.y_of(q);
    if (k > 0 && k < 5) c.line(f.left + 1, y, f.right - 1, y, kGridline);
    c.line(f.left - 5, y, f.left, y, kInk);
    const std::string label = num(q, dq);
    c.text(f.left - 8 - Canvas::text_width(label), y - 3, label, kInk);
  }
  c.text(8, f.top - 16, "Q (m3/s)", kInk);

  // Precipitation hangs from the top edge; the right axis reads it.
  const double p_max = finite_max(precip);
  const int bar_span = static_cast<int>(std::lround(kBarDepth * (f.bottom - f.top)));
  const int half = std::max(0, static_cast<int>((f.right - f.left) / std::max<std::size_t>(sim.size(), 1) / 2));
  if (p_max > 0.0) {
    for (std::size_t i = 0; i < precip.size(); ++i) {
      if (!std::isfinite(precip[i]) || precip[i] <= 0.0) continue;
      const int depth = std::max(1, static_cast<int>(std::lround(precip[i] / p_max * bar_span)));
      const int x = f.x_of(i);
      c.fill_rect(std::max(f.left + 1, x - half), f.top + 1, std::min(f.right - 1, x + std::max(0, half - 1)),
                  f.top + depth, kPrecipColor);
    }
  }
  const int dp = decimals_for(p_max);
  for (int k = 0; k <= 2; ++k) {
    const int y = f.top + bar_span * k / 2;
    c.line(f.right, y, f.right + 5, y, kInk);
    c.text(f.right + 8, y - 3, num(p_max * k / 2.0, dp), kInk);
  }
  c.text(f.right - 20, f.top - 16, "P (mm/step)", kInk);

  // Time axis: up to six date labels.
  const std::size_t labels = std::min<std::size_t>(6, sim.size());
  for (std::size_t k = 0; k < labels; ++k) {
    const std::size_t i = labels == 1 ? 0 : k * (sim.size() - 1) / (labels - 1);
    const int x = f.x_of(i);
    c.line(x, f.bottom, x, f.bottom + 5, kInk);
    const std::string d = format_date(timestamps[i]);
    c.text(x - Canvas::text_width(d) / 2, f.bottom + 10, d, kInk);
  }

  if (has_obs) draw_series(c, f, obs, kObsColor);
  draw_series(c, f, sim, kSimColor);
  c.rect_outline(f.left, f.top, f.right, f.bottom, kInk);

  // Legend, lower right inside the plot.
  const int rows = has_obs ? 3 : 2;
  const int lx = f.right - 170, ly = f.bottom - 14 - rows * 16;
  c.fill_rect(lx, ly, f.right - 10, f.bottom - 10, {255, 255, 255});
  c.rect_outline(lx, ly, f.right - 10, f.bottom - 10, kInk);
  int row_y = ly + 8;
  c.line(lx + 8, row_y + 3, lx + 32, row_y + 3, kSimColor, 2);
  c.text(lx + 40, row_y, "Simulated", kInk);
  row_y += 16;
  if (has_obs) {
    c.line(lx + 8, row_y + 3, lx + 32, row_y + 3, kObsColor, 2);
    c.text(lx + 40, row_y, "Observed", kInk);
    row_y += 16;
  }
  c.fill_rect(lx + 8, row_y, lx + 32, row_y + 6, kPrecipColor);
  c.text(lx + 40, row_y, "Precipitation", kInk);
  return c;
}

void render_hydrograph(const std::filesystem::path& path, std::span<const Instant> timestamps,
                       std::span<const double> sim, std::span<const double> obs,
                       std::span<const double> precip) {
  write_png(path, hydrograph_canvas(timestamps, sim, obs, precip));
}

namespace {

constexpr int kMapsWidth = 1200;
constexpr int kMapsHeight = 680;
constexpr int kPanel = 560;
constexpr int kPanelTop = 60;

Rgb lerp_rgb(Rgb a, Rgb b, double t) {
  auto mix = [t](std::uint8_t x, std::uint8_t y) {
    return static_cast<std::uint8_t>(std::lround(x + t * (static_cast<double>(y) - x)));
  };
  return {mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b)};
}

struct Range {
  double lo = 0.0, hi = 0.0;
  bool any = false;
};

Range valid_range(const Raster& r) {
  Range out;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!r.valid(i)) continue;
    const double v = r.at(i);
    if (!out.any) {
      out = {v, v, true};
    } else {
      out.lo = std::min(out.lo, v);
      out.hi = std::max(out.hi, v);
    }
  }
  return out;
}

template <class ColorOf>
void draw_panel(Canvas& c, int x0, const GridSpec& spec, const BasinMask& mask,
                const std::vector<GaugeCandidate>& gauges, const std::string& selected, ColorOf color_of) {
  const double s = std::min(static_cast<double>(kPanel) / static_cast<double>(spec.cols),
                            static_cast<double>(kPanel) / static_cast<double>(spec.rows));
  const int w = std::max(1, static_cast<int>(std::floor(static_cast<double>(spec.cols) * s)));
  const int h = std::max(1, static_cast<int>(std::floor(static_cast<double>(spec.rows) * s)));
  const int ox = x0 + (kPanel - w) / 2, oy = kPanelTop + (kPanel - h) / 2;

  std::vector<std::size_t> col_of(static_cast<std::size_t>(w)), row_of(static_cast<std::size_t>(h));
  for (int px = 0; px < w; ++px)
    col_of[static_cast<std::size_t>(px)] = std::min(spec.cols - 1, static_cast<std::size_t>(px / s));
  for (int py = 0; py < h; ++py)
    row_of[static_cast<std::size_t>(py)] = std::min(spec.rows - 1, static_cast<std::size_t>(py / s));

  auto member_at = [&](int px, int py) {
    if (px < 0 || py < 0 || px >= w || py >= h) return false;
    return mask.contains(row_of[static_cast<std::size_t>(py)], col_of[static_cast<std::size_t>(px)]);
  };
  for (int py = 0; py < h; ++py)
    for (int px = 0; px < w; ++px) {
      const std::size_t idx = spec.index(row_of[static_cast<std::size_t>(py)], col_of[static_cast<std::size_t>(px)]);
      Rgb col = color_of(idx);
      if (member_at(px, py) && !(member_at(px - 1, py) && member_at(px + 1, py) && member_at(px, py - 1) &&
                                 member_at(px, py + 1)))
        col = kOutlineColor;
      c.set(ox + px, oy + py, col);
    }
  c.rect_outline(ox - 1, oy - 1, ox + w, oy + h, kInk);

  // Gauges sharing a cell get stacked labels; the selected marker goes on top.
  std::vector<std::size_t> order;
  for (std::size_t k = 0; k < gauges.size(); ++k)
    if (gauges[k].row < spec.rows && gauges[k].col < spec.cols) order.push_back(k);
  std::stable_partition(order.begin(), order.end(), [&](std::size_t k) { return gauges[k].id != selected; });
  std::vector<std::size_t> seen_cells;
  for (std::size_t k : order) {
    const auto& gauge = gauges[k];
    const std::size_t cell_idx = spec.index(gauge.row, gauge.col);
    const int stacked = static_cast<int>(std::count(seen_cells.begin(), seen_cells.end(), cell_idx));
    seen_cells.push_back(cell_idx);
    const int cx = ox + static_cast<int>(std::lround((static_cast<double>(gauge.col) + 0.5) * s));
    const int cy = oy + static_cast<int>(std::lround((static_cast<double>(gauge.row) + 0.5) * s));
    const bool chosen = !selected.empty() && gauge.id == selected;
    c.fill_rect(cx - 3, cy - 3, cx + 3, cy + 3, chosen ? kSelectedMarker : kMarker);
    c.rect_outline(cx - 4, cy - 4, cx + 4, cy + 4, kInk);
    c.text(cx + 7, cy - 3 - 10 * stacked, gauge.id, kInk);
  }
}

}  // namespace

Canvas maps_canvas(const Raster& dem, const Raster& fam, const BasinMask& mask,
                   const std::vector<GaugeCandidate>& gauges, const std::string& selected_id) {
  if (!dem.spec().matches(fam.spec()) || !dem.spec().matches(mask.spec()))
    throw ShapeError("map layers have different shapes");
  const GridSpec& spec = dem.spec();
  Canvas c(kMapsWidth, kMapsHeight);
  const std::string title = "Basin terrain and gauges";
  c.text((kMapsWidth - Canvas::text_width(title, 2)) / 2, 14, title, kInk, 2);

  const Range z = valid_range(dem);
  auto dem_color = [&](std::size_t idx) -> Rgb {
    if (!dem.valid(idx)) return kNodataColor;
    const double t = z.hi > z.lo ? (dem.at(idx) - z.lo) / (z.hi - z.lo) : 0.5;
    return lerp_rgb({30, 30, 30}, {245, 245, 245}, t);
  };
  const Range a = valid_range(fam);
  const double log_hi = std::log10(std::max(1.0, a.hi));
  auto fam_color = [&](std::size_t idx) -> Rgb {
    if (!fam.valid(idx)) return kNodataColor;
    const double t = log_hi > 0.0 ? std::log10(std::max(1.0, fam.at(idx))) / log_hi : 0.0;
    return lerp_rgb({240, 248, 255}, {8, 48, 107}, std::clamp(t, 0.0, 1.0));
  };

  const int left = 20, right = kMapsWidth - 20 - kPanel;
  c.text(left, kPanelTop - 16, "Elevation (m)", kInk);
  c.text(right, kPanelTop - 16, "Flow accumulation (cells, log scale)", kInk);
  draw_panel(c, left, spec, mask, gauges, selected_id, dem_color);
  draw_panel(c, right, spec, mask, gauges, selected_id, fam_color);

  const int ly = kPanelTop + kPanel + 18;
  c.text(left, ly, "min " + num(z.lo, 1) + "  max " + num(z.hi, 1), kInk);
  c.text(right, ly, "min " + num(a.any ? a.lo : 0.0, 0) + "  max " + num(a.any ? a.hi : 0.0, 0), kInk);
  const int ky = ly + 20;
  c.fill_rect(left, ky, left + 12, ky + 6, kOutlineColor);
  c.text(left + 18, ky, "Basin outline", kInk);
  c.fill_rect(left + 140, ky, left + 152, ky + 6, kSelectedMarker);
  c.text(left + 158, ky, "Outlet gauge", kInk);
  c.fill_rect(left + 270, ky, left + 282, ky + 6, kMarker);
  c.text(left + 288, ky, "Other gauge", kInk);
  c.fill_rect(left + 390, ky, left + 402, ky + 6, kNodataColor);
  c.text(left + 408, ky, "No data", kInk);
  return c;
}

void render_maps(const std::filesystem::path& path, const Raster& dem, const Raster& fam,
                 const BasinMask& mask, const std::vector<GaugeCandidate>& gauges,
                 const std::string& selected_id) {
  write_png(path, maps_canvas(dem, fam, mask, gauges, selected_id));
}

SeriesSummary summarize(std::span<const Instant> timestamps, std::span<const double> sim,
                        std::span<const double> obs, std::span<const double> precip_mm,
                        std::span<const double> et_mm, double ledger_relative_error) {
  if (timestamps.size() != sim.size() || (!obs.empty() && obs.size() != sim.size()))
    throw ShapeError("summary series lengths disagree");
  SeriesSummary s;
  s.steps = sim.size();
  s.ledger_relative_error = ledger_relative_error;
  double total = 0.0;
  for (std::size_t i = 0; i < sim.size(); ++i) {
    total += sim[i];
    if (i == 0 || sim[i] > s.sim_peak) {
      s.sim_peak = sim[i];
      s.sim_peak_time = timestamps[i];
    }
  }
  if (!sim.empty()) s.sim_mean = total / static_cast<double>(sim.size());
  double obs_total = 0.0;
  std::size_t n_obs = 0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (!std::isfinite(obs[i])) continue;
    obs_total += obs[i];
    ++n_obs;
    if (!s.obs_peak || obs[i] > *s.obs_peak) {
      s.obs_peak = obs[i];
      s.obs_peak_time = timestamps[i];
    }
  }
  if (n_obs > 0) s.obs_mean = obs_total / static_cast<double>(n_obs);
  for (double p : precip_mm) s.precip_total_mm += p;
  for (double e : et_mm) s.et_total_mm += e;
  return s;
}

bool needs_warmup_note(const std::optional<MetricBundle>& metrics) {
  return metrics && metrics->bias_percent && *metrics->bias_percent < -90.0;
}

std::string format_notifications(const NotificationLog& log) {
  std::string out;
  for (const auto& n : log) out += n.stage + ": " + n.message + "\n";
  return out;
}

namespace {

std::string cell(std::string s) {
  std::string out;
  for (char ch : s) {
    if (ch == '|')
      out += "\\|";
    else if (ch == '\n')
      out += ' ';
    else
      out += ch;
  }
  return out;
}

std::string metric(const std::optional<double>& v, int decimals = 4) {
  return v ? num(*v, decimals) : "undefined";
}

std::string title_name(const std::string& basin) {
  const std::string l = text::lower(basin);
  if (l.size() >= 5 && l.compare(l.size() - 5, 5, "basin") == 0) return basin;
  return basin + " Basin";
}

std::string nse_grade(double v) {
  if (v > 0.75) return "very good";
  if (v > 0.65) return "good";
  if (v > 0.5) return "satisfactory";
  return "unsatisfactory";
}

}  // namespace

std::string render_markdown(const ReportContext& ctx) {
  if (ctx.basin_name.empty()) throw IncompleteContextError("report context has no basin name");
  if (ctx.maps_figure.empty()) throw IncompleteContextError("report context lacks the basin map figure");
  if (ctx.hydrograph_figure.empty()) throw IncompleteContextError("report context lacks the hydrograph figure");

  const SeriesSummary& s = ctx.summary;
  const std::string start = format_instant(ctx.window.start);
  const std::string end = format_instant(ctx.window.end);
  const std::string gauge_id = ctx.gauge ? ctx.gauge->gauge_id : std::string();
  const auto& m = ctx.metrics;
  std::string md;

  md += "# " + title_name(ctx.basin_name) + ": Hydrological Simulation Report\n\n";

  md += "## Basin Information\n\n";
  md += "This report covers a distributed CREST simulation of the " + title_name(ctx.basin_name) + " from " +
        start + " to " + end + ". ";
  md += ctx.gauge ? "The basin drains to gauge " + gauge_id + ". " : "No outlet gauge was available, so the run is ungauged. ";
  md += "The basin and gauge map is shown in the Figures section (combined maps).\n\n";
  md += "- Basin: " + ctx.basin_name + "\n";
  md += "- Outlet gauge: " + (ctx.gauge ? gauge_id : std::string("none (ungauged run)")) + "\n";
  md += "- Simulation window: " + start + " to " + end + " (" + std::to_string(s.steps) + " steps of " +
        std::to_string(ctx.window.dt) + " s, end exclusive)\n";
  md += "- Drainage area: " + num(ctx.descriptors.area_km2, 2) + " km2 (" + std::to_string(ctx.basin_cells) +
        " cells)\n";
  md += "- Relief: " + num(ctx.descriptors.relief_m, 1) + " m\n";
  md += "- Mean slope: " + num(ctx.descriptors.mean_slope, 4) + " m/m\n";
  md += "- Drainage density: " + num(ctx.descriptors.drainage_density, 4) + "\n";
  md += "- Impervious fraction: " + num(ctx.descriptors.impervious_fraction, 4) + "\n\n";

  md += "## Analysis\n\n";
  md += "### Simulation vs Observation\n\n";
  md += "Simulated discharge peaks at " + num(s.sim_peak, 3) + " m3/s on " + format_instant(s.sim_peak_time) +
        " with a mean of " + num(s.sim_mean, 3) + " m3/s. ";
  if (s.obs_peak) {
    md += "Observed discharge peaks at " + num(*s.obs_peak, 3) + " m3/s on " + format_instant(*s.obs_peak_time) +
          " with a mean of " + num(*s.obs_mean, 3) + " m3/s.";
  } else {
    md += "There are no observations to compare against.";
  }
  md += "\n\nBasin-mean precipitation totals " + num(s.precip_total_mm, 2) + " mm and actual evapotranspiration " +
        num(s.et_total_mm, 2) + " mm. The water ledger closes to a relative error of " +
        g6(s.ledger_relative_error) + ".\n\n";

  md += "### Model Performance Metrics\n\n";
  if (!m) {
    md += "Metrics: no observations. Performance metrics were not computed.\n\n";
  } else {
    md += "Computed over " + std::to_string(m->valid_pairs) + " paired steps: NSE " + metric(m->nse) + ", KGE " +
          metric(m->kge) + ", CC " + metric(m->cc) + ", RMSE " + metric(m->rmse) + " m3/s, bias " +
          metric(m->bias_percent, 2) + " %.";
    if (m->nse) md += " The NSE rates as " + nse_grade(*m->nse) + ".";
    md += "\n\n";
  }

  md += "### CREST Parameters\n\n";
  md += "Water balance: wm " + g6(ctx.params.crest.wm) + " mm, b " + g6(ctx.params.crest.b) + ", im " +
        g6(ctx.params.crest.im) + ", ke " + g6(ctx.params.crest.ke) + ", fc " + g6(ctx.params.crest.fc) +
        " mm/h, iwu " + g6(ctx.params.crest.iwu) + " mm. Routing: th " + g6(ctx.params.routing.th) +
        " km2, under " + g6(ctx.params.routing.under) + " m/s, leaki " + g6(ctx.params.routing.leaki) +
        ", isu " + g6(ctx.params.routing.isu) + " mm, alpha " + g6(ctx.params.routing.alpha) + ", beta " +
        g6(ctx.params.routing.beta) + ", alpha0 " + g6(ctx.params.routing.alpha0) + ".";
  if (!ctx.violations.empty())
    md += " " + std::to_string(ctx.violations.size()) + " proposed value(s) were clamped into range.";
  md += "\n\n";

  md += "### Conclusion\n\n";
  if (m && m->nse)
    md += "Against the gauge record the simulation shows " + nse_grade(*m->nse) + " skill (NSE " + metric(m->nse) +
          ").\n\n";
  else if (m)
    md += "Skill scores are undefined for this record; see the metrics table.\n\n";
  else
    md += "Without observations the run documents simulated response only.\n\n";

  md += "## Figures\n\n";
  md += "![Basin map with DEM, flow accumulation and gauges](" + ctx.maps_figure + ")\n\n";
  md += "Figure 1: elevation and flow accumulation with the basin outline and gauge locations.\n\n";
  md += "![Simulated and observed discharge with precipitation](" + ctx.hydrograph_figure + ")\n\n";
  md += "Figure 2: outlet discharge" + std::string(s.obs_peak ? " against observations" : "") +
        " with basin-mean precipitation bars.\n\n";

  md += "## Data Tables\n\n";
  md += "### Run Arguments\n\n| Argument | Value |\n|---|---|\n";
  for (const auto& [k, v] : ctx.run_arguments) md += "| " + cell(k) + " | " + cell(v) + " |\n";
  md += "\n### Metrics\n\n| Metric | Value |\n|---|---|\n";
  if (!m) {
    md += "| status | no observations |\n";
  } else {
    md += "| valid_pairs | " + std::to_string(m->valid_pairs) + " |\n";
    md += "| NSE | " + metric(m->nse, 6) + " |\n";
    md += "| KGE | " + metric(m->kge, 6) + " |\n";
    md += "| CC | " + metric(m->cc, 6) + " |\n";
    md += "| RMSE (m3/s) | " + metric(m->rmse, 6) + " |\n";
    md += "| Bias (m3/s) | " + metric(m->bias_mean, 6) + " |\n";
    md += "| Bias (%) | " + metric(m->bias_percent, 6) + " |\n";
    md += "\n```\n" + m->to_key_values() + "```\n";
  }
  md += "\n### Parameters\n\n| Parameter | Value | Range | Rationale |\n|---|---|---|---|\n";
  for (ParamId id : kAllParams) {
    const auto& r = range_of(id);
    md += "| " + std::string(param_name(id)) + " | " + g6(ctx.params.get(id)) + " | [" + g6(r.lower) + ", " +
          g6(r.upper) + "] " + r.unit + " | " + cell(ctx.params.why(id)) + " |\n";
  }
  md += "\n### Notifications\n\n";
  if (ctx.notifications.empty() && ctx.violations.empty()) md += "None.\n";
  for (const auto& v : ctx.violations) md += "- params: " + cell(v.describe()) + "\n";
  constexpr std::size_t kListedNotifications = 20;
  for (std::size_t i = 0; i < ctx.notifications.size() && i < kListedNotifications; ++i)
    md += "- " + ctx.notifications[i].stage + ": " + cell(ctx.notifications[i].message) + "\n";
  if (ctx.notifications.size() > kListedNotifications)
    md += "- ... " + std::to_string(ctx.notifications.size() - kListedNotifications) +
          " more in notifications.log\n";
  md += "\n";

  md += "## Discussion\n\n";
  md += "### Model Performance Evaluation\n\n";
  if (!m) {
    md += "No observations were available, so performance cannot be judged.\n\n";
  } else {
    if (m->nse) md += "NSE of " + metric(m->nse) + " is " + nse_grade(*m->nse) + ". ";
    if (m->kge)
      md += "KGE of " + metric(m->kge) + (*m->kge > -0.41 ? " improves on" : " does not improve on") +
            " the mean-flow benchmark. ";
    if (m->bias_percent)
      md += "Simulated volume departs from the observed volume by " + metric(m->bias_percent, 2) + " %.";
    md += "\n\n";
  }
  if (needs_warmup_note(m)) {
    md += "### Warm-up Period Considerations\n\n";
    md += "The bias of " + metric(m->bias_percent, 2) +
          " % indicates that soil and routing stores start far below their equilibrium. Extend the window "
          "backwards to add a spin-up period, or raise iwu, and discard the spin-up steps when scoring.\n\n";
  }
  md += "### Recommendations\n\n";
  if (!ctx.gauge) md += "- Add a gauge inventory for this basin to enable outlet selection and evaluation.\n";
  if (ctx.gauge && !m) md += "- Provide observed discharge for gauge " + gauge_id + " to enable evaluation.\n";
  if (m && m->bias_percent && *m->bias_percent > 10.0)
    md += "- Simulated volume is high: raise wm or ke, or lower im.\n";
  if (m && m->bias_percent && *m->bias_percent < -10.0)
    md += "- Simulated volume is low: lower wm or ke, or raise b.\n";
  if (m && m->nse && *m->nse < 0.5)
    md += "- Revisit the routing parameters alpha, beta and alpha0, or select an alternative gauge.\n";
  if (!ctx.violations.empty()) md += "- Review the clamped parameters listed under Notifications.\n";
  md += "- Rerun with overrides through the feedback command, e.g. `aquah feedback --run run_manifest.txt --set wm=120`.\n";
  return md;
}

}  // namespace aquah
