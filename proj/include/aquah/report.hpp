#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aquah/common.hpp"
#include "aquah/gauge.hpp"
#include "aquah/grid.hpp"
#include "aquah/image.hpp"
#include "aquah/metrics.hpp"
#include "aquah/params.hpp"
#include "aquah/time.hpp"

namespace aquah {

inline constexpr int kHydrographWidth = 1200;
inline constexpr int kHydrographHeight = 600;
inline constexpr Rgb kSimColor{200, 30, 30};
inline constexpr Rgb kObsColor{20, 20, 20};
inline constexpr Rgb kPrecipColor{110, 160, 215};
inline constexpr Rgb kNodataColor{215, 215, 215};
inline constexpr Rgb kOutlineColor{230, 0, 120};

/// Plot area of the hydrograph and its discharge scale.
struct PlotFrame {
  int left = 0, top = 0, right = 0, bottom = 0;
  std::size_t steps = 0;
  double q_top = 1.0;  // discharge at the top edge, m^3/s

  int x_of(std::size_t step) const;
  int y_of(double q) const;
};

PlotFrame hydrograph_frame(std::size_t steps, double q_max);

/// One discharge line; NaN values break the line.
void draw_series(Canvas& canvas, const PlotFrame& frame, std::span<const double> q, Rgb color);

/// Discharge lines over inverted precipitation bars (basin-mean mm per step).
/// An empty `obs` gives the sim-only variant. Throws EmptyInputError for an
/// empty `sim` and ShapeError when lengths disagree.
Canvas hydrograph_canvas(std::span<const Instant> timestamps, std::span<const double> sim,
                         std::span<const double> obs, std::span<const double> precip);
void render_hydrograph(const std::filesystem::path& path, std::span<const Instant> timestamps,
                       std::span<const double> sim, std::span<const double> obs,
                       std::span<const double> precip);

/// DEM grey ramp and log flow-accumulation panels side by side, each with the
/// basin outline and labelled gauge markers. Throws ShapeError when the grids
/// disagree.
Canvas maps_canvas(const Raster& dem, const Raster& fam, const BasinMask& mask,
                   const std::vector<GaugeCandidate>& gauges, const std::string& selected_id = {});
void render_maps(const std::filesystem::path& path, const Raster& dem, const Raster& fam,
                 const BasinMask& mask, const std::vector<GaugeCandidate>& gauges,
                 const std::string& selected_id = {});

/// Headline numbers of a run, in m^3/s and basin-mean mm.
struct SeriesSummary {
  std::size_t steps = 0;
  double sim_peak = 0.0;
  Instant sim_peak_time{};
  double sim_mean = 0.0;
  std::optional<double> obs_peak;
  std::optional<Instant> obs_peak_time;
  std::optional<double> obs_mean;
  double precip_total_mm = 0.0;
  double et_total_mm = 0.0;
  double ledger_relative_error = 0.0;
};

SeriesSummary summarize(std::span<const Instant> timestamps, std::span<const double> sim,
                        std::span<const double> obs, std::span<const double> precip_mm,
                        std::span<const double> et_mm, double ledger_relative_error);

struct ReportContext {
  std::string basin_name;
  TimeWindow window;
  std::optional<SelectionResult> gauge;  // nullopt: ungauged run
  BasinDescriptors descriptors;
  std::size_t basin_cells = 0;
  ParamProposal params;
  std::vector<Violation> violations;
  std::optional<MetricBundle> metrics;  // nullopt: no observations
  SeriesSummary summary;
  std::string maps_figure;        // as referenced from the report
  std::string hydrograph_figure;
  NotificationLog notifications;
  std::vector<std::pair<std::string, std::string>> run_arguments;
};

/// Title, basin information, analysis, figures, data tables, discussion; in
/// that order. Throws IncompleteContextError when a figure path or the basin
/// name is empty.
std::string render_markdown(const ReportContext& ctx);

/// True when the discussion carries the warm-up paragraph.
bool needs_warmup_note(const std::optional<MetricBundle>& metrics);

/// One "stage: message" line per notification.
std::string format_notifications(const NotificationLog& log);

}  // namespace aquah
