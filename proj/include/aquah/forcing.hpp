#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "aquah/common.hpp"
#include "aquah/grid.hpp"
#include "aquah/time.hpp"

namespace aquah {

/// Precipitation and PET in mm per model step, one raster per step.
struct ForcingSeries {
  TimeWindow window;
  std::vector<Instant> timestamps;
  std::vector<Raster> precip;
  std::vector<Raster> pet;

  std::size_t steps() const { return timestamps.size(); }
  /// Throws ShapeError/DataRangeError/StepError when an invariant fails.
  void validate() const;
};

/// A series under assembly: missing steps are nullopt.
struct PartialForcing {
  TimeWindow window;
  GridSpec grid;
  std::vector<Instant> timestamps;
  std::vector<std::optional<Raster>> precip;
  std::vector<std::optional<Raster>> pet;

  std::vector<std::size_t> precip_gaps() const;
  std::vector<std::size_t> pet_gaps() const;
};

enum class ForcingUnits { MmPerHour, MmPerDay, MmPerStep };

/// Contents of the manifest.txt inside a forcing directory:
///   pattern=precip_%Y%m%d%H.asc   (relative to the directory)
///   units=mm/h | mm/day | mm      (mm = per file step)
///   dt=3600                       (seconds between files)
struct ForcingManifest {
  std::filesystem::path dir;
  std::string pattern;
  ForcingUnits units = ForcingUnits::MmPerHour;
  std::int64_t dt = 3600;

  static ForcingManifest read(const std::filesystem::path& dir);
  std::filesystem::path file_for(Instant t) const;
};

ForcingUnits parse_units(const std::string& text);

/// Default fills: zero precipitation and 3 mm/day PET.
struct FallbackPolicy {
  double precip_mm_per_step = 0.0;
  double pet_mm_per_day = 3.0;
};

/// Load one layer over the window, converting to mm per model step. Source
/// files may be coarser than the model step (e.g. daily PET) as long as the
/// source step is a whole multiple of window.dt; the coarse amount is split
/// evenly. Missing files become nullopt. Throws DataRangeError on a negative
/// value and ShapeError when a raster does not match `grid`.
std::vector<std::optional<Raster>> load_layer(const ForcingManifest& manifest,
                                              const TimeWindow& window, const GridSpec& grid);

/// Strict ingest: throws MissingDataError naming the first missing timestamp.
/// A missing PET manifest is itself a gap for every step.
ForcingSeries ingest_forcing(const ForcingManifest& precip,
                             const std::optional<ForcingManifest>& pet, const TimeWindow& window,
                             const GridSpec& grid);

/// Lenient ingest that records gaps for fallback_fill.
PartialForcing ingest_forcing_partial(const std::optional<ForcingManifest>& precip,
                                      const std::optional<ForcingManifest>& pet,
                                      const TimeWindow& window, const GridSpec& grid);

/// Fill every gap per `policy`, logging one notification per filled step and
/// layer. Present steps are moved through untouched.
ForcingSeries fallback_fill(PartialForcing partial, const FallbackPolicy& policy,
                            NotificationLog& log);

/// Split daily totals evenly into steps of dt seconds, 86400/dt per day.
/// Throws StepError unless dt divides a day.
std::vector<Raster> disaggregate_pet(const std::vector<Raster>& daily_pet, std::int64_t dt);

}  // namespace aquah
