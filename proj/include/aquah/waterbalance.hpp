#pragma once

namespace aquah {

/// CREST runoff-generation parameters.
struct CrestParams {
  double wm = 100.0;  // maximum soil-water storage, mm
  double b = 1.0;     // infiltration curve exponent
  double im = 0.05;   // impervious fraction
  double ke = 0.7;    // PET utilisation coefficient
  double fc = 10.0;   // infiltration-rate threshold, mm/h
  double iwu = 10.0;  // initial soil water, mm
};

struct CellState {
  double w = 0.0;  // soil water, mm
};

struct CellFluxes {
  double actual_et = 0.0;
  double overland = 0.0;
  double interflow_recharge = 0.0;

  double runoff() const { return overland + interflow_recharge; }
};

struct CellStepResult {
  CellState state;
  CellFluxes fluxes;
  /// Water moved into runoff by clamping soil storage into [0, wm], mm.
  double clamp_residue = 0.0;
};

/// Soil water starts at iwu, capped at wm.
CellState init_cell(const CrestParams& params);

/// One water-balance step for a cell, all depths in mm per step:
///
///   ET demand E = pet*ke, met from rainfall first and then from soil water.
///   Peff = max(0, precip - E); im*Peff runs off directly, the rest enters the
///   variable infiltration curve with point capacity imax = wm*(1+b).
///   Soil runoff above the fc intensity (mm/h) leaves as overland flow, the
///   remainder recharges interflow.
///
/// precip = dw + actual_et + overland + interflow_recharge holds to rounding.
/// Throws DataRangeError on negative or non-finite forcing.
CellStepResult cell_step(const CellState& state, const CrestParams& params, double precip, double pet,
                         double dt_seconds);

}  // namespace aquah
