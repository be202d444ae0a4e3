#include <cmath>

#include "aquah/error.hpp"
#include "aquah/forcing.hpp"
#include "aquah/gauge.hpp"
#include "aquah/grid.hpp"
#include "aquah/pipeline.hpp"
#include "aquah/routing.hpp"

namespace aquah {

namespace fs = std::filesystem;
using namespace std::chrono;

namespace {

constexpr double kNodata = -9999.0;

// Hourly storm intensity (mm/h) at a cell; zero outside the two storms.
double storm(int day, int hour, std::size_t row, std::size_t rows) {
  const double north = 1.0 - static_cast<double>(row) / static_cast<double>(rows - 1);
  if (day == 1 && hour >= 6 && hour < 12) return 4.0 * (1.0 + 0.5 * north) * (hour < 9 ? 1.0 : 0.6);
  if (day == 5 && hour >= 14 && hour < 18) return 9.0 * (1.0 + 0.3 * north);
  return 0.0;
}

}  // namespace

fs::path write_synthetic_basin(const fs::path& root, const std::string& name, const FixtureOptions& opt) {
  if (opt.size < 4) throw ShapeError("synthetic basin needs at least 4x4 cells");
  if (opt.days < 1) throw StepError("synthetic basin needs at least one day");
  const std::size_t n = opt.size;
  const fs::path dir = root / name;
  fs::create_directories(dir);

  GridSpec spec;
  spec.rows = spec.cols = n;
  spec.cell_size = opt.cell_size;
  spec.nodata = kNodata;

  // A valley just west of the centre line, falling southwards; the top-left
  // corner is nodata.
  const double axis = static_cast<double>(n - 1) / 2.0 - 0.2;
  std::vector<double> z(spec.size());
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      const bool corner = r < 2 && c < 2;
      z[spec.index(r, c)] = corner ? kNodata
                                   : 100.0 + 4.37 * static_cast<double>(n - 1 - r) +
                                         10.0 * std::abs(static_cast<double>(c) - axis) +
                                         0.001 * static_cast<double>(c);
    }
  const Raster dem(spec, z);
  const DirectionGrid dirs = d8_flow_directions(dem);
  const Raster fam = flow_accumulation(dirs);
  write_ascii_grid(dir / "dem.asc", dem);
  write_ascii_grid(dir / "ddm.asc", dirs.to_raster());
  write_ascii_grid(dir / "fam.asc", fam);

  // Forest upstream, grass midway, a town by the outlet.
  std::vector<double> lc(spec.size());
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      lc[spec.index(r, c)] = dem.is_nodata(spec.index(r, c)) ? kNodata : (r < n / 2 ? 1.0 : (r + 3 < n ? 2.0 : 3.0));
  write_ascii_grid(dir / "landcover.asc", Raster(spec, lc));
  text::write_file(dir / "impervious.txt", "# land-cover class = impervious fraction\n1=0.01\n2=0.03\n3=0.45\ndefault=0.05\n");

  const Instant first = floor<days>(parse_instant(opt.first_day));
  const Instant last = first + days{opt.days - 1};
  const TimeWindow window = window_from_dates(first, last, 3600);
  const std::size_t outlet_col = static_cast<std::size_t>(std::lround(std::floor(axis + 0.5)));
  const std::size_t mid = n / 2;

  if (opt.with_gauges) {
    const std::string start = format_date(first - days{3650}), end = format_date(last);
    auto area = [&](std::size_t r, std::size_t c) {
      return text::fixed(fam(r, c) * spec.cell_area_km2(), 1);
    };
    std::string csv = std::string(kGaugeCsvHeader) + "\n";
    // Outlet gauge; wins after the rule-5 rejection of the datum gauge.
    csv += "01000100,Valley Outlet," + std::to_string(n - 1) + "," + std::to_string(outlet_col) + ",," +
           area(n - 1, outlet_col) + ",," + start + "," + end + ",0.95,false,true\n";
    // Same site, below a reservoir: dropped by rule 1.
    csv += "01000200,Valley Dam," + std::to_string(n - 1) + "," + std::to_string(outlet_col) + ",," +
           area(n - 1, outlet_col) + ",," + start + "," + end + ",0.99,true,false\n";
    // Lowest datum but regulated upstream: rejected by rule 5.
    csv += "01000050,Lower Creek," + std::to_string(n - 1) + "," + std::to_string(outlet_col) + ",95.0," +
           area(n - 1, outlet_col) + ",," + start + "," + end + ",0.90,false,false\n";
    // Mid-valley headwater gauge.
    csv += "01000300,Upper Valley," + std::to_string(mid) + "," + std::to_string(outlet_col) + ",," +
           area(mid, outlet_col) + ",," + start + "," + end + ",1.0,false,true\n";
    text::write_file(dir / "gauges.csv", csv);
  }

  const fs::path precip_dir = dir / "precip";
  text::write_file(precip_dir / "manifest.txt", "pattern=precip_%Y%m%d%H.asc\nunits=mm/h\ndt=3600\n");
  std::vector<Raster> precip, pet;
  for (int d = 0; d < opt.days; ++d)
    for (int h = 0; h < 24; ++h) {
      std::vector<double> p(spec.size());
      for (std::size_t i = 0; i < spec.size(); ++i)
        p[i] = dem.is_nodata(i) ? kNodata : storm(d, h, i / n, n);
      Raster layer(spec, p);
      write_ascii_grid(precip_dir / format_pattern(window.step_time(static_cast<std::size_t>(d * 24 + h)),
                                                   "precip_%Y%m%d%H.asc"),
                       layer);
      precip.push_back(std::move(layer));
    }

  std::vector<Raster> daily_pet;
  for (int d = 0; d < opt.days; ++d) {
    std::vector<double> e(spec.size());
    for (std::size_t i = 0; i < spec.size(); ++i)
      e[i] = dem.is_nodata(i) ? kNodata : 3.5 + 0.5 * std::sin(0.7 * d) + 0.02 * static_cast<double>(i / n);
    daily_pet.emplace_back(spec, e);
  }
  if (opt.with_pet) {
    const fs::path pet_dir = dir / "pet";
    text::write_file(pet_dir / "manifest.txt", "pattern=pet_%Y%m%d.asc\nunits=mm/day\ndt=86400\n");
    for (int d = 0; d < opt.days; ++d)
      write_ascii_grid(pet_dir / format_pattern(first + days{d}, "pet_%Y%m%d.asc"),
                       daily_pet[static_cast<std::size_t>(d)]);
  }

  if (opt.with_discharge && opt.with_gauges) {
    ForcingSeries f;
    f.window = window;
    f.timestamps = window.timestamps();
    f.precip = precip;
    f.pet = disaggregate_pet(daily_pet, window.dt);
    // "Truth" parameters differ from anything the heuristic proposes.
    const CrestParams truth_cp{60.0, 2.0, 0.08, 0.8, 4.0, 20.0};
    RoutingParams truth_rp;
    truth_rp.th = 40.0;
    truth_rp.under = 0.05;
    truth_rp.leaki = 0.1;
    truth_rp.alpha = 1.5;
    truth_rp.alpha0 = 2.0;
    const BasinMask mask = delineate_basin(dirs, {n - 1, outlet_col});
    const SimulationOutput truth = simulate(dirs, fam, mask, f, truth_cp, truth_rp, window);
    std::string csv = "timestamp,q_m3s\n";
    for (std::size_t k = 0; k < truth.outlet_q.size(); ++k) {
      csv += format_instant(truth.timestamps[k]) + ",";
      // Six-hour gauge outage on the third day.
      if (k < 48 || k >= 54) csv += text::fixed(truth.outlet_q[k] * (1.0 + 0.05 * std::sin(0.37 * k)), 6);
      csv += "\n";
    }
    text::write_file(dir / "discharge" / "01000100.csv", csv);
  }
  return dir;
}

}  // namespace aquah
