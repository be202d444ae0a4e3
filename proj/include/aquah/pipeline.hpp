#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "aquah/common.hpp"
#include "aquah/metrics.hpp"
#include "aquah/params.hpp"
#include "aquah/time.hpp"

namespace aquah {

struct SimulationRequest {
  std::string basin;
  TimeWindow window;
  std::optional<std::string> gauge_hint;
  /// Already inside their ranges; the clamps that got them there follow.
  std::vector<std::pair<ParamId, double>> overrides;
  std::vector<Violation> override_violations;
  std::filesystem::path data_root;
  std::string decider = "none";
  std::string prompt;

  /// Throws StepError for a bad window and MissingDataError when the data
  /// root does not exist.
  void validate() const;
};

struct RequestDefaults {
  std::optional<std::string> basin;
  std::optional<TimeWindow> window;
  std::filesystem::path data_root = ".";
  std::int64_t dt = 3600;
  std::string decider = "none";
};

/// Minimal pattern matching over one free-form line:
///   basin   a quoted token, else the capitalised words before "basin"
///   window  an ISO date pair (inclusive), else a year pair or a single year
///   gauge   "gauge <id>" where the id contains a digit
/// Unresolved fields take the defaults. Throws RequestParseError when no basin
/// or window can be found.
SimulationRequest parse_request(const std::string& text, const RequestDefaults& defaults = {});

/// Lower case, every run of non-alphanumerics collapsed to '_'.
std::string basin_slug(const std::string& basin);

/// Resolved input locations for one basin. Absent optional layers are empty
/// paths and have a notification each.
struct DatasetManifest {
  std::filesystem::path basin_dir;
  std::filesystem::path dem;
  std::filesystem::path ddm;
  std::filesystem::path fam;
  std::filesystem::path gauges;
  std::filesystem::path precip;
  std::filesystem::path pet;
  std::filesystem::path discharge;
  std::filesystem::path landcover;
  std::filesystem::path impervious;
  NotificationLog notifications;
};

/// Looks in <root>/<basin>, then <root>/<slug>. Throws MissingDataError for a
/// missing basin directory or DEM.
DatasetManifest retrieve_datasets(const SimulationRequest& req);

struct StageRecord {
  std::string name;
  std::vector<std::string> depends_on;
  double elapsed_ms = 0.0;
};

/// Stage names in execution order with their data dependencies.
const std::vector<StageRecord>& pipeline_topology();

struct RunResult {
  std::filesystem::path out_dir;
  std::filesystem::path manifest_path;
  std::vector<StageRecord> stages;
  std::optional<std::string> gauge_id;  // nullopt: ungauged
  std::optional<MetricBundle> metrics;
  ParamProposal params;
  NotificationLog notifications;
  double ledger_relative_error = 0.0;
};

struct PipelineOptions {
  std::chrono::milliseconds decider_timeout{60000};
};

/// retrieve, terrain, descriptors, select_outlet, delineate, params, forcing,
/// simulate, metrics, report. Writes report.md, combined_maps.png,
/// results.png, metrics.csv, ledger.csv, simulation.csv, selection.txt,
/// notifications.log and run_manifest.txt into `out_dir`. An error escaping a
/// stage carries that stage's name.
RunResult run_pipeline(const SimulationRequest& req, const std::filesystem::path& out_dir,
                       const PipelineOptions& options = {});

/// key=value form of a request, the part of the run manifest that feedback
/// reads back.
KeyValues request_to_manifest(const SimulationRequest& req);
SimulationRequest request_from_manifest(const KeyValues& manifest);

struct SetParam {
  std::string name;
  double value;
};
struct SetGauge {
  std::string id;
};
struct ExtendWindow {
  Instant new_last_day;  // inclusive
};
struct Rerun {};
using FeedbackDirective = std::variant<SetParam, SetGauge, ExtendWindow, Rerun>;

/// Parse "name=value" into SetParam. Throws DirectiveError.
SetParam parse_set_param(const std::string& text);

/// Merge directives into the request stored in a run manifest. Parameter
/// values are clamped into range and each clamp is kept in
/// override_violations. Throws DirectiveError for an unknown parameter or a
/// window that would not grow.
SimulationRequest apply_feedback(const KeyValues& manifest, const std::vector<FeedbackDirective>& directives);
SimulationRequest apply_feedback(const std::filesystem::path& manifest_path,
                                 const std::vector<FeedbackDirective>& directives);

/// Options for write_synthetic_basin.
struct FixtureOptions {
  std::size_t size = 24;          // rows and columns
  double cell_size = 1000.0;      // metres
  std::string first_day = "2021-06-01";
  int days = 10;
  bool with_discharge = true;
  bool with_pet = true;
  bool with_gauges = true;
};

/// Deterministic synthetic basin under <root>/<name>: a south-draining valley
/// DEM, four gauges (one on a reservoir), hourly storms, daily PET and
/// discharge generated with a second parameter set.
std::filesystem::path write_synthetic_basin(const std::filesystem::path& root, const std::string& name,
                                            const FixtureOptions& options = {});

}  // namespace aquah
