#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <zlib.h>

#include <cmath>
#include <cstring>

#include "aquah/error.hpp"
#include "aquah/report.hpp"
#include "support.hpp"

using namespace aquah;

namespace {

std::uint32_t be32(const std::string& s, std::size_t at) {
  return (static_cast<std::uint32_t>(static_cast<unsigned char>(s[at])) << 24) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(s[at + 1])) << 16) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(s[at + 2])) << 8) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(s[at + 3]));
}

/// Minimal decoder for what encode_png emits: checks chunk CRCs and returns
/// width, height and the raw RGB bytes.
struct Decoded {
  std::uint32_t width = 0, height = 0;
  std::vector<std::uint8_t> rgb;
};
Decoded decode_png(const std::string& png) {
  Decoded d;
  REQUIRE(png.size() > 8);
  REQUIRE(png.compare(0, 8, "\x89PNG\r\n\x1a\n") == 0);
  std::string idat;
  std::size_t pos = 8;
  bool ended = false;
  while (pos + 12 <= png.size()) {
    const std::uint32_t len = be32(png, pos);
    const std::string type = png.substr(pos + 4, 4);
    const std::string body = png.substr(pos + 8, len);
    const uLong crc = crc32(crc32(0L, Z_NULL, 0), reinterpret_cast<const Bytef*>(png.data() + pos + 4), len + 4);
    REQUIRE(crc == be32(png, pos + 8 + len));
    if (type == "IHDR") {
      d.width = be32(body, 0);
      d.height = be32(body, 4);
      REQUIRE(static_cast<unsigned char>(body[8]) == 8);
      REQUIRE(static_cast<unsigned char>(body[9]) == 2);
    } else if (type == "IDAT") {
      idat += body;
    } else if (type == "IEND") {
      ended = true;
    }
    pos += 12 + len;
  }
  REQUIRE(ended);
  const std::size_t stride = 1 + 3 * static_cast<std::size_t>(d.width);
  std::vector<std::uint8_t> raw(stride * d.height);
  uLongf out_len = raw.size();
  REQUIRE(uncompress(raw.data(), &out_len, reinterpret_cast<const Bytef*>(idat.data()), idat.size()) == Z_OK);
  REQUIRE(out_len == raw.size());
  for (std::uint32_t y = 0; y < d.height; ++y) {
    REQUIRE(raw[y * stride] == 0);
    d.rgb.insert(d.rgb.end(), raw.begin() + static_cast<long>(y * stride + 1),
                 raw.begin() + static_cast<long>((y + 1) * stride));
  }
  return d;
}

std::vector<Instant> hours(std::size_t n) {
  std::vector<Instant> t;
  for (std::size_t k = 0; k < n; ++k) t.push_back(parse_instant("2021-06-01") + std::chrono::hours{k});
  return t;
}

std::vector<double> wave(std::size_t n, double scale) {
  std::vector<double> q(n);
  for (std::size_t k = 0; k < n; ++k) q[k] = scale * (1.0 + std::sin(0.2 * static_cast<double>(k)));
  return q;
}

MetricBundle bundle_with_bias(double bias) {
  MetricBundle m;
  m.valid_pairs = 10;
  m.nse = 0.42;
  m.kge = 0.3;
  m.cc = 0.8;
  m.rmse = 1.1;
  m.bias_mean = -0.5;
  m.bias_percent = bias;
  return m;
}

ReportContext context() {
  ReportContext c;
  c.basin_name = "Upper Gila";
  c.window = window_from_dates(parse_instant("2020-01-01"), parse_instant("2020-01-02"), 3600);
  SelectionResult sel;
  sel.gauge_id = "06294000";
  sel.explanation = "Rule 2: lowest elevation.";
  c.gauge = sel;
  c.descriptors = {1200.0, 850.0, 0.05, 0.1, 0.04};
  c.basin_cells = 1200;
  c.params = heuristic_init(c.descriptors);
  c.metrics = bundle_with_bias(-10);
  c.summary.steps = 48;
  c.maps_figure = "combined_maps.png";
  c.hydrograph_figure = "results.png";
  c.run_arguments = {{"basin", "Upper Gila"}, {"start", "2020-01-01T00:00:00"}};
  return c;
}

std::size_t occurrences(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + needle.size())) ++n;
  return n;
}

std::vector<std::string> headings(const std::string& md, const std::string& prefix) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < md.size()) {
    const std::size_t end = md.find('\n', start);
    const std::string line = md.substr(start, end == std::string::npos ? std::string::npos : end - start);
    if (line.rfind(prefix, 0) == 0) out.push_back(line);
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

}  // namespace

TEST_CASE("markdown: warm-up paragraph follows the -90 % boundary") {
  ReportContext c = context();
  const std::string heading = "### Warm-up Period Considerations";
  for (auto [bias, expected] : std::vector<std::pair<double, bool>>{
           {-95, true}, {-10, false}, {-90.0 - 1e-9, true}, {-90.0, false}, {-90.0 + 1e-9, false}}) {
    c.metrics = bundle_with_bias(bias);
    const std::string md = render_markdown(c);
    CHECK(needs_warmup_note(c.metrics) == expected);
    CHECK((md.find(heading) != std::string::npos) == expected);
  }
  c.metrics.reset();
  CHECK_FALSE(needs_warmup_note(c.metrics));
}

TEST_CASE("markdown: sections in order and images embedded exactly once") {
  ReportContext c = context();
  c.metrics = bundle_with_bias(-95);
  const std::string md = render_markdown(c);
  CHECK(md.rfind("# Upper Gila Basin: Hydrological Simulation Report\n", 0) == 0);
  CHECK(headings(md, "## ") == std::vector<std::string>{"## Basin Information", "## Analysis", "## Figures",
                                                          "## Data Tables", "## Discussion"});
  CHECK(headings(md, "# ").size() == 1);
  const auto sub = headings(md, "### ");
  const std::vector<std::string> expected{"### Simulation vs Observation", "### Model Performance Metrics",
                                          "### CREST Parameters", "### Conclusion", "### Run Arguments",
                                          "### Metrics", "### Parameters", "### Notifications",
                                          "### Model Performance Evaluation",
                                          "### Warm-up Period Considerations", "### Recommendations"};
  CHECK(sub == expected);
  CHECK(occurrences(md, "](combined_maps.png)") == 1);
  CHECK(occurrences(md, "](results.png)") == 1);
  CHECK(occurrences(md, "![") == 2);
}

TEST_CASE("markdown: every parameter appears with its rationale") {
  const ReportContext c = context();
  const std::string md = render_markdown(c);
  for (ParamId id : kAllParams) {
    const std::string row = "| " + std::string(param_name(id)) + " | ";
    const auto at = md.find(row);
    REQUIRE(at != std::string::npos);
    const std::string line = md.substr(at, md.find('\n', at) - at);
    CHECK(line.find(c.params.why(id)) != std::string::npos);
  }
}

TEST_CASE("markdown: metrics block, no-observation variant and notifications") {
  ReportContext c = context();
  std::string md = render_markdown(c);
  CHECK(md.find("```\n" + c.metrics->to_key_values() + "```\n") != std::string::npos);
  CHECK(md.find("None.\n") != std::string::npos);

  c.metrics.reset();
  for (int k = 0; k < 25; ++k) c.notifications.push_back({"forcing", "gap " + std::to_string(k)});
  md = render_markdown(c);
  CHECK(md.find("Metrics: no observations.") != std::string::npos);
  CHECK(md.find("| status | no observations |") != std::string::npos);
  CHECK(md.find("- forcing: gap 19\n") != std::string::npos);
  CHECK(md.find("gap 20") == std::string::npos);
  CHECK(md.find("... 5 more in notifications.log") != std::string::npos);
  CHECK(format_notifications(c.notifications).find("forcing: gap 24\n") != std::string::npos);

  c.gauge.reset();
  md = render_markdown(c);
  CHECK(md.find("none (ungauged run)") != std::string::npos);
}

TEST_CASE("markdown: title keeps a trailing basin word and rendering is pure") {
  ReportContext c = context();
  c.basin_name = "Coos-Millicoma basin";
  const std::string md = render_markdown(c);
  CHECK(md.rfind("# Coos-Millicoma basin: Hydrological", 0) == 0);
  CHECK(render_markdown(c) == md);
}

TEST_CASE("markdown: incomplete context is refused") {
  ReportContext c = context();
  c.maps_figure.clear();
  CHECK_THROWS_AS(render_markdown(c), IncompleteContextError);
  c = context();
  c.hydrograph_figure.clear();
  CHECK_THROWS_AS(render_markdown(c), IncompleteContextError);
  c = context();
  c.basin_name.clear();
  CHECK_THROWS_AS(render_markdown(c), IncompleteContextError);
}

TEST_CASE("png: decodes back to the canvas and is deterministic") {
  Canvas c(37, 11, {1, 2, 3});
  c.line(0, 0, 36, 10, {250, 0, 0}, 2);
  c.text(2, 2, "Q 1.5", {0, 0, 0});
  const std::string png = encode_png(c);
  CHECK(encode_png(c) == png);
  const Decoded d = decode_png(png);
  CHECK(d.width == 37);
  CHECK(d.height == 11);
  CHECK(d.rgb == c.pixels());
}

TEST_CASE("hydrograph: fixed size, byte-identical re-render") {
  testing::TempDir tmp("report");
  const auto t = hours(72);
  const auto sim = wave(72, 3), obs = wave(72, 2.5), p = wave(72, 1);
  render_hydrograph(tmp / "a.png", t, sim, obs, p);
  render_hydrograph(tmp / "b.png", t, sim, obs, p);
  const std::string a = text::read_file(tmp / "a.png");
  CHECK(a == text::read_file(tmp / "b.png"));
  const Decoded d = decode_png(a);
  CHECK(d.width == 1200);
  CHECK(d.height == 600);
  CHECK_THROWS_AS(hydrograph_canvas({}, {}, {}, {}), EmptyInputError);
  CHECK_THROWS_AS(hydrograph_canvas(t, sim, wave(5, 1), p), ShapeError);
}

TEST_CASE("hydrograph: identical series give coincident lines") {
  const auto q = wave(50, 4);
  const PlotFrame f = hydrograph_frame(50, 8);
  Canvas obs_layer(kHydrographWidth, kHydrographHeight), sim_layer(kHydrographWidth, kHydrographHeight);
  draw_series(obs_layer, f, q, kObsColor);
  draw_series(sim_layer, f, q, kSimColor);
  std::size_t diff = 0;
  for (int y = 0; y < kHydrographHeight; ++y)
    for (int x = 0; x < kHydrographWidth; ++x)
      diff += (obs_layer.get(x, y) == Rgb{255, 255, 255}) != (sim_layer.get(x, y) == Rgb{255, 255, 255});
  CHECK(diff == 0);

  // In the full figure the simulated line covers the observed one; only the
  // legend swatch keeps the observed colour.
  const auto t = hours(50);
  const Canvas c = hydrograph_canvas(t, q, q, std::vector<double>(50, 0.0));
  const PlotFrame full = hydrograph_frame(50, *std::max_element(q.begin(), q.end()));
  const int lx = full.right - 170, ly = full.bottom - 14 - 3 * 16;
  for (int y = 0; y < kHydrographHeight; ++y)
    for (int x = 0; x < kHydrographWidth; ++x) {
      const bool in_legend = x >= lx && x <= full.right - 10 && y >= ly && y <= full.bottom - 10;
      if (!in_legend) REQUIRE_FALSE(c.get(x, y) == kObsColor);
    }
  CHECK(c.count(kObsColor) > 0);
}

TEST_CASE("hydrograph: without observations the legend drops the observed entry") {
  const auto t = hours(30);
  const auto sim = wave(30, 2);
  const Canvas with = hydrograph_canvas(t, sim, wave(30, 1), wave(30, 1));
  const Canvas without = hydrograph_canvas(t, sim, {}, wave(30, 1));
  CHECK(with.count(kObsColor) > 0);
  CHECK(without.count(kObsColor) == 0);
  CHECK(without.count(kSimColor) > 0);
  CHECK(without.count(kPrecipColor) > 0);
  CHECK_FALSE(with == without);
}

TEST_CASE("hydrograph: missing values break the line") {
  std::vector<double> q = wave(40, 2);
  const PlotFrame f = hydrograph_frame(40, 4);
  Canvas full(kHydrographWidth, kHydrographHeight), gappy(kHydrographWidth, kHydrographHeight);
  draw_series(full, f, q, kSimColor);
  for (std::size_t k = 10; k < 20; ++k) q[k] = std::nan("");
  draw_series(gappy, f, q, kSimColor);
  CHECK(gappy.count(kSimColor) < full.count(kSimColor));
  // Nothing is drawn strictly between the last point before and the first after the gap.
  for (int x = f.x_of(9) + 2; x < f.x_of(20); ++x)
    for (int y = f.top; y <= f.bottom; ++y) REQUIRE_FALSE(gappy.get(x, y) == kSimColor);
}

TEST_CASE("maps: 1x1 basin with one marker") {
  const GridSpec s = testing::spec(1, 1, 90);
  const Raster one(s, {100});
  const BasinMask m(s, {1}, {0, 0});
  GaugeCandidate g;
  g.id = "0001";
  const Canvas c = maps_canvas(one, one, m, {g}, "0001");
  CHECK(c.width() == 1200);
  CHECK(c.height() == 680);
  // A 7x7 marker per panel plus the legend swatch (13x7).
  CHECK(c.count({0, 160, 60}) == 2 * 49 + 91);
  CHECK(c.count(kOutlineColor) > 0);
}

TEST_CASE("maps: nodata is neutral, layers must agree, output is deterministic") {
  const GridSpec s = testing::spec(4, 4, 90);
  std::vector<double> z{-9999, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15};
  const Raster dem(s, z), fam(s, z);
  const BasinMask m(s, std::vector<std::uint8_t>{0, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1}, {3, 3});
  const Canvas legend_only = maps_canvas(Raster(s, std::vector<double>(16, 1.0)), Raster(s, std::vector<double>(16, 1.0)), m, {});
  const Canvas c = maps_canvas(dem, fam, m, {});
  // Each panel is 560 px across 4 cells, so one nodata cell is 140x140 px.
  CHECK(c.count(kNodataColor) == legend_only.count(kNodataColor) + 2 * 140 * 140);
  CHECK(encode_png(c) == encode_png(maps_canvas(dem, fam, m, {})));
  CHECK_THROWS_AS(maps_canvas(dem, testing::raster(2, 2, {1, 2, 3, 4}), m, {}), ShapeError);
}

TEST_CASE("summary: peaks, means and totals") {
  const auto t = hours(4);
  const std::vector<double> sim{1, 5, 3, 2}, obs{2, std::nan(""), 6, 1};
  const SeriesSummary s = summarize(t, sim, obs, std::vector<double>{1, 2, 0, 0}, std::vector<double>{0.5, 0, 0, 0}, 1e-15);
  CHECK(s.sim_peak == 5);
  CHECK(s.sim_peak_time == t[1]);
  CHECK(s.sim_mean == 2.75);
  CHECK(*s.obs_peak == 6);
  CHECK(*s.obs_peak_time == t[2]);
  CHECK(*s.obs_mean == 3);
  CHECK(s.precip_total_mm == 3);
  CHECK(s.et_total_mm == 0.5);
  CHECK_FALSE(summarize(t, sim, {}, {}, {}, 0).obs_peak.has_value());
}
