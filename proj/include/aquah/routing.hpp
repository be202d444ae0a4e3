#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "aquah/common.hpp"
#include "aquah/forcing.hpp"
#include "aquah/grid.hpp"
#include "aquah/time.hpp"
#include "aquah/waterbalance.hpp"

namespace aquah {

/// Kinematic-wave routing parameters.
struct RoutingParams {
  double th = 100.0;      // channel drainage-area threshold, km^2
  double under = 0.001;   // interflow velocity, m/s
  double leaki = 0.05;    // interflow-to-surface leakage per step
  double isu = 0.0;       // initial subsurface storage, mm
  double alpha = 1.0;     // channel velocity coefficient
  double beta = 0.6;      // channel velocity exponent
  double alpha0 = 1.0;    // overland velocity coefficient (exponent 0.6)
};

/// Overland velocity exponent.
inline constexpr double kOverlandExponent = 0.6;
/// Depth floor (mm) used when evaluating velocities.
inline constexpr double kMinRoutingDepth = 0.001;

/// Surface and subsurface water depth in mm; nodata outside the basin.
struct RoutingState {
  Raster surface;
  Raster subsurface;
};

/// Channel iff fam * cell_area_km2 >= th. Nodata cells are never channels.
std::vector<std::uint8_t> classify_channels(const Raster& fam, double cell_area_km2, double th);

/// Static routing topology for one basin.
struct RoutingNetwork {
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  GridSpec grid;
  std::vector<std::size_t> order;       // members, upstream first
  std::vector<std::size_t> downstream;  // per cell; npos leaves the basin
  std::vector<double> hop;              // per cell, metres
  std::vector<std::uint8_t> channel;
  std::vector<std::uint8_t> member;
};

/// `cell_len` <= 0 means the grid cell size. Throws CycleError/ShapeError.
RoutingNetwork build_network(const DirectionGrid& dirs, const BasinMask& mask,
                             std::span<const std::uint8_t> channels, double cell_len = 0.0);

struct RouteStepResult {
  RoutingState state;
  double outlet_flux_mm = 0.0;  // summed over cells, mm * cells
  double surface_out_mm = 0.0;
  double subsurface_out_mm = 0.0;
};

/// One explicit step. Leakage leaki*subsurface goes to the surface first; then
/// each cell sends f = min(1, v*dt/hop) of its storage one cell downstream,
/// with v = alpha*q^beta on channels, alpha0*q^0.6 overland and `under` for the
/// subsurface. Velocities use the step-start depth, so no parcel moves more
/// than one cell per step.
RouteStepResult route_step(const RoutingState& state, const RoutingNetwork& net,
                           const RoutingParams& params, double dt_seconds);

/// Convenience form: the basin is taken as the cells where state.surface is
/// not nodata, draining to wherever that set is left.
RouteStepResult route_step(const RoutingState& state, const DirectionGrid& dirs,
                           std::span<const std::uint8_t> channels, const RoutingParams& params,
                           double dt_seconds, double cell_len);

/// Basin-mean depths (mm) for one step.
struct LedgerRow {
  Instant t;
  double precip = 0;
  double actual_et = 0;
  double outlet = 0;
  double storage_before = 0;
  double storage_after = 0;
  double clamp_residue = 0;

  /// before + precip - et - outlet - after
  double residual() const { return storage_before + precip - actual_et - outlet - storage_after; }
};

struct SimulationOutput {
  std::vector<Instant> timestamps;
  std::vector<double> outlet_q;            // m^3/s
  std::vector<double> basin_storage_mm;    // soil + surface + subsurface, basin mean
  std::vector<LedgerRow> ledger;
  NotificationLog notifications;
  std::size_t basin_cells = 0;

  /// |sum of residuals| relative to max(total precip, initial storage).
  double ledger_relative_error() const;
};

/// Run the coupled water balance and routing over `window`. Each step: cell
/// water balance, overland onto the surface and recharge into the subsurface,
/// then route_step. Outlet discharge is flux_mm * cell_area / (1000 dt).
/// Throws ShapeError when grids disagree and MissingDataError when the forcing
/// does not cover the window.
SimulationOutput simulate(const DirectionGrid& dirs, const Raster& fam, const BasinMask& mask,
                          const ForcingSeries& forcing, const CrestParams& cp,
                          const RoutingParams& rp, const TimeWindow& window);

/// timestamp,outlet_q_m3s,basin_storage_mm
void write_simulation_csv(const std::filesystem::path& path, const SimulationOutput& out);
/// timestamp,precip_mm,actual_et_mm,outlet_mm,storage_before_mm,storage_after_mm,clamp_residue_mm,residual_mm
void write_ledger_csv(const std::filesystem::path& path, const SimulationOutput& out);

}  // namespace aquah
