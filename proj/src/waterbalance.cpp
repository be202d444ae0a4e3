#include "aquah/waterbalance.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "aquah/error.hpp"

namespace aquah {

CellState init_cell(const CrestParams& p) { return {std::clamp(p.iwu, 0.0, p.wm)}; }

CellStepResult cell_step(const CellState& state, const CrestParams& p, double precip, double pet,
                         double dt_seconds) {
  if (!(precip >= 0) || !(pet >= 0) || !std::isfinite(precip) || !std::isfinite(pet))
    throw DataRangeError("cell forcing must be finite and non-negative (precip=" +
                         std::to_string(precip) + ", pet=" + std::to_string(pet) + ")");
  if (!(dt_seconds > 0)) throw DataRangeError("time step must be positive");

  CellStepResult out;
  double w = std::clamp(state.w, 0.0, p.wm);

  // Evapotranspiration: rainfall first, then soil water.
  const double demand = pet * p.ke;
  const double from_rain = std::min(demand, precip);
  const double from_soil = std::min(demand - from_rain, w);
  w -= from_soil;
  out.fluxes.actual_et = from_rain + from_soil;
  const double peff = precip - from_rain;

  const double direct = p.im * peff;
  const double psoil = peff - direct;

  // Variable infiltration curve.
  double runoff = 0.0;
  if (psoil > 0) {
    const double imax = p.wm * (1.0 + p.b);
    const double deficit = p.wm - w;
    const double i = imax * (1.0 - std::pow(1.0 - w / p.wm, 1.0 / (1.0 + p.b)));
    if (i + psoil >= imax)
      runoff = psoil - deficit;
    else
      runoff = psoil - deficit + p.wm * std::pow(1.0 - (i + psoil) / imax, 1.0 + p.b);
    runoff = std::clamp(runoff, 0.0, psoil);
  }
  // runoff <= psoil keeps w_new >= w >= 0; only the upper bound can bind.
  double w_new = w + (psoil - runoff);
  if (w_new > p.wm) {
    out.clamp_residue = w_new - p.wm;
    runoff += out.clamp_residue;
    w_new = p.wm;
  }
  out.state.w = w_new;

  // Intensity above fc is overland flow.
  const double rate = psoil / (dt_seconds / 3600.0);
  const double frac_over = rate <= p.fc ? 0.0 : (rate - p.fc) / rate;
  const double over = runoff * frac_over;
  out.fluxes.overland = direct + over;
  out.fluxes.interflow_recharge = runoff - over;
  return out;
}

}  // namespace aquah
