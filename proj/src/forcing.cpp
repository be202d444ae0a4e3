#include "aquah/forcing.hpp"

#include <map>

#include "aquah/error.hpp"

namespace aquah {

namespace {

constexpr std::int64_t kDay = 86400;

Raster scaled(const Raster& r, double factor) {
  std::vector<double> v(r.values().begin(), r.values().end());
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!r.is_nodata(i)) v[i] *= factor;
  return Raster(r.spec(), std::move(v));
}

double to_mm_per_file(ForcingUnits units, std::int64_t dt_src) {
  switch (units) {
    case ForcingUnits::MmPerHour: return static_cast<double>(dt_src) / 3600.0;
    case ForcingUnits::MmPerDay: return static_cast<double>(dt_src) / 86400.0;
    case ForcingUnits::MmPerStep: return 1.0;
  }
  return 1.0;
}

void check_nonnegative(const Raster& r, const std::string& where) {
  for (std::size_t i = 0; i < r.size(); ++i)
    if (!r.is_nodata(i) && r.at(i) < 0)
      throw DataRangeError(where + ": negative value " + text::exact(r.at(i)) + " at cell (" +
                           std::to_string(i / r.cols()) + ", " + std::to_string(i % r.cols()) + ")");
}

std::vector<std::size_t> gaps_of(const std::vector<std::optional<Raster>>& layer) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < layer.size(); ++k)
    if (!layer[k]) out.push_back(k);
  return out;
}

}  // namespace

void ForcingSeries::validate() const {
  window.validate();
  if (precip.size() != timestamps.size() || pet.size() != timestamps.size())
    throw ShapeError("forcing layers and timestamps differ in length");
  for (std::size_t k = 1; k < timestamps.size(); ++k)
    if ((timestamps[k] - timestamps[k - 1]).count() != window.dt)
      throw StepError("forcing timestamps are not uniformly spaced at " + std::to_string(window.dt) +
                      " s");
  for (std::size_t k = 0; k < timestamps.size(); ++k) {
    check_nonnegative(precip[k], "precip " + format_instant(timestamps[k]));
    check_nonnegative(pet[k], "pet " + format_instant(timestamps[k]));
  }
}

std::vector<std::size_t> PartialForcing::precip_gaps() const { return gaps_of(precip); }
std::vector<std::size_t> PartialForcing::pet_gaps() const { return gaps_of(pet); }

ForcingUnits parse_units(const std::string& s) {
  const std::string u = text::lower(text::trim(s));
  if (u == "mm/h" || u == "mm/hr" || u == "mm/hour") return ForcingUnits::MmPerHour;
  if (u == "mm/day" || u == "mm/d") return ForcingUnits::MmPerDay;
  if (u == "mm" || u == "mm/step") return ForcingUnits::MmPerStep;
  throw ParseError("unknown forcing units '" + s + "'");
}

ForcingManifest ForcingManifest::read(const std::filesystem::path& dir) {
  const auto kv = KeyValues::read(dir / "manifest.txt");
  ForcingManifest m;
  m.dir = dir;
  m.pattern = kv.require("pattern");
  m.units = parse_units(kv.require("units"));
  const auto dt = text::to_double(kv.require("dt"));
  if (!dt || *dt <= 0 || *dt != static_cast<double>(static_cast<std::int64_t>(*dt)))
    throw ParseError((dir / "manifest.txt").string() + ": dt must be a positive integer");
  m.dt = static_cast<std::int64_t>(*dt);
  return m;
}

std::filesystem::path ForcingManifest::file_for(Instant t) const {
  return dir / format_pattern(t, pattern);
}

std::vector<std::optional<Raster>> load_layer(const ForcingManifest& m, const TimeWindow& window,
                                              const GridSpec& grid) {
  window.validate();
  if (m.dt % window.dt != 0)
    throw StepError(m.dir.string() + ": source step " + std::to_string(m.dt) +
                    " s is not a multiple of the model step " + std::to_string(window.dt) + " s");
  const double parts = static_cast<double>(m.dt / window.dt);
  const double factor = to_mm_per_file(m.units, m.dt);

  std::map<std::int64_t, std::optional<Raster>> cache;
  std::vector<std::optional<Raster>> out;
  out.reserve(window.steps());
  for (const Instant t : window.timestamps()) {
    const std::int64_t secs = t.time_since_epoch().count();
    const std::int64_t file_secs = secs - (((secs % m.dt) + m.dt) % m.dt);
    auto it = cache.find(file_secs);
    if (it == cache.end()) {
      const auto path = m.file_for(Instant{std::chrono::seconds{file_secs}});
      std::optional<Raster> loaded;
      if (std::filesystem::exists(path)) {
        const Raster r = read_ascii_grid(path);
        if (!r.spec().matches(grid))
          throw ShapeError(path.string() + ": forcing grid does not match the model grid");
        check_nonnegative(r, path.string());
        if (m.dt == kDay && window.dt < kDay && m.units != ForcingUnits::MmPerStep) {
          loaded = disaggregate_pet({scaled(r, factor)}, window.dt).front();
        } else {
          loaded = scaled(r, factor / parts);
        }
      }
      it = cache.emplace(file_secs, std::move(loaded)).first;
    }
    out.push_back(it->second);
  }
  return out;
}

PartialForcing ingest_forcing_partial(const std::optional<ForcingManifest>& precip,
                                      const std::optional<ForcingManifest>& pet,
                                      const TimeWindow& window, const GridSpec& grid) {
  window.validate();
  PartialForcing p;
  p.window = window;
  p.grid = grid;
  p.timestamps = window.timestamps();
  p.precip = precip ? load_layer(*precip, window, grid)
                    : std::vector<std::optional<Raster>>(p.timestamps.size());
  p.pet = pet ? load_layer(*pet, window, grid) : std::vector<std::optional<Raster>>(p.timestamps.size());
  return p;
}

ForcingSeries ingest_forcing(const ForcingManifest& precip, const std::optional<ForcingManifest>& pet,
                             const TimeWindow& window, const GridSpec& grid) {
  PartialForcing p = ingest_forcing_partial(precip, pet, window, grid);
  for (std::size_t k : p.precip_gaps())
    throw MissingDataError("precipitation missing for step " + std::to_string(k + 1) + " at " +
                           format_instant(p.timestamps[k]) + " (" +
                           precip.file_for(p.timestamps[k]).string() + ")");
  for (std::size_t k : p.pet_gaps())
    throw MissingDataError("PET missing for step " + std::to_string(k + 1) + " at " +
                           format_instant(p.timestamps[k]));
  NotificationLog unused;
  return fallback_fill(std::move(p), {}, unused);
}

ForcingSeries fallback_fill(PartialForcing p, const FallbackPolicy& policy, NotificationLog& log) {
  ForcingSeries s;
  s.window = p.window;
  s.timestamps = p.timestamps;
  s.precip.reserve(p.timestamps.size());
  s.pet.reserve(p.timestamps.size());
  const double pet_fill = policy.pet_mm_per_day * static_cast<double>(p.window.dt) / 86400.0;
  for (std::size_t k = 0; k < p.timestamps.size(); ++k) {
    if (p.precip[k]) {
      s.precip.push_back(std::move(*p.precip[k]));
    } else {
      s.precip.push_back(Raster::filled(p.grid, policy.precip_mm_per_step));
      log.push_back({"forcing", "precipitation missing at " + format_instant(p.timestamps[k]) +
                                    "; filled with " + text::exact(policy.precip_mm_per_step) +
                                    " mm"});
    }
    if (p.pet[k]) {
      s.pet.push_back(std::move(*p.pet[k]));
    } else {
      s.pet.push_back(Raster::filled(p.grid, pet_fill));
      log.push_back({"forcing", "PET missing at " + format_instant(p.timestamps[k]) +
                                    "; filled with " + text::exact(policy.pet_mm_per_day) +
                                    " mm/day (" + text::exact(pet_fill) + " mm per step)"});
    }
  }
  return s;
}

std::vector<Raster> disaggregate_pet(const std::vector<Raster>& daily_pet, std::int64_t dt) {
  if (dt <= 0 || kDay % dt != 0)
    throw StepError("model step " + std::to_string(dt) + " s does not divide a day");
  const std::size_t parts = static_cast<std::size_t>(kDay / dt);
  std::vector<Raster> out;
  out.reserve(daily_pet.size() * parts);
  for (const Raster& day : daily_pet) {
    const Raster share = scaled(day, 1.0 / static_cast<double>(parts));
    for (std::size_t k = 0; k < parts; ++k) out.push_back(share);
  }
  return out;
}

}  // namespace aquah
