#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aquah/grid.hpp"
#include "aquah/time.hpp"

namespace aquah {

struct GaugeCandidate {
  std::string id;
  std::string name;
  std::size_t row = 0;
  std::size_t col = 0;
  double elevation_m = 0.0;        // NaN when the inventory leaves it blank
  double drainage_area_km2 = 0.0;
  double fam_value = 0.0;          // NaN when blank
  Instant record_start;
  Instant record_end;
  double record_completeness = 1.0;
  bool on_or_below_reservoir = false;
  bool upstream_reservoir_free = true;

  double record_span_days() const;
};

/// Column header of the gauge inventory file.
inline constexpr const char* kGaugeCsvHeader =
    "id,name,row,col,elevation_m,drainage_area_km2,fam_value,record_start,record_end,completeness,"
    "on_or_below_reservoir,upstream_reservoir_free";

/// Throws MissingDataError for a missing file, ParseError (with row number)
/// for a malformed header or row, DataRangeError for out-of-range values.
std::vector<GaugeCandidate> load_gauges(const std::filesystem::path& path);
std::vector<GaugeCandidate> parse_gauges(const std::string& csv, const std::string& origin = "<text>");

enum class SelectionRule {
  UserHint = 0,
  ReservoirExclusion = 1,
  LowestElevation = 2,
  LargestDrainage = 3,
  RecordQuality = 4,
  SecondVerification = 5,
  IdTieBreak = 6,
};

struct RuleStep {
  SelectionRule rule;
  std::size_t survivors;
};

struct SelectionResult {
  std::string gauge_id;
  std::string explanation;
  std::vector<RuleStep> rule_trace;
  SelectionRule decisive_rule = SelectionRule::IdTieBreak;
};

/// Terrain layers used to fill blank elevation / fam_value entries.
struct TerrainContext {
  const Raster* dem = nullptr;
  const Raster* fam = nullptr;
};

/// Ordered outlet selection:
///   0. an exact id hint, or a unique case-insensitive name substring, wins
///   1. drop gauges on or below a reservoir
///   2. lowest elevation
///   3. then largest drainage area, then highest flow accumulation
///   4. then highest completeness, then longest record
///   5. the winner must have a reservoir-free upstream; otherwise it is
///      dropped and selection restarts at rule 2
/// Remaining ties go to the lexicographically smallest id.
///
/// Throws EmptyInputError on an empty inventory, AmbiguousHintError when the
/// hint matches two or more names, NoViableGaugeError when every candidate is
/// eliminated.
SelectionResult select_outlet(const std::vector<GaugeCandidate>& candidates,
                              const std::optional<std::string>& user_hint = std::nullopt,
                              const TerrainContext& context = {});

/// "Selected gauge: <id>\nExplanation: <text>\n"
std::string render_selection(const SelectionResult& result);
/// Parses the two-line format back into (id, explanation). Throws ParseError.
std::pair<std::string, std::string> parse_selection(const std::string& text);

/// Observed discharge aligned to model steps; NaN marks a missing step.
struct DischargeSeries {
  std::string gauge_id;
  std::vector<Instant> timestamps;
  std::vector<double> q_m3s;

  std::size_t valid_count() const;
};

/// Reads <dir>/<gauge_id>.csv (timestamp,q_m3s) and aligns it to the window
/// steps. Records outside the window are dropped; steps without a record, or
/// with a blank / negative / non-numeric value, are NaN. Throws
/// MissingDataError when the file is absent.
DischargeSeries load_discharge(const std::filesystem::path& dir, const std::string& gauge_id,
                               const TimeWindow& window);

}  // namespace aquah
