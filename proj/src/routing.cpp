#include "aquah/routing.hpp"

#include <algorithm>
#include <cmath>

#include "aquah/error.hpp"

namespace aquah {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

double velocity(bool channel, double depth_mm, const RoutingParams& p) {
  const double q = std::max(depth_mm, kMinRoutingDepth);
  return channel ? p.alpha * std::pow(q, p.beta) : p.alpha0 * std::pow(q, kOverlandExponent);
}

std::vector<double> member_values(const Raster& r, const RoutingNetwork& net) {
  std::vector<double> v(r.size(), 0.0);
  for (std::size_t i : net.order) v[i] = r.valid(i) ? r.at(i) : 0.0;
  return v;
}

Raster to_raster(const std::vector<double>& v, const RoutingNetwork& net) {
  std::vector<double> out(v.size(), net.grid.nodata);
  for (std::size_t i : net.order) out[i] = v[i];
  return Raster(net.grid, std::move(out));
}

}  // namespace

std::vector<std::uint8_t> classify_channels(const Raster& fam, double cell_area_km2, double th) {
  std::vector<std::uint8_t> out(fam.size(), 0);
  for (std::size_t i = 0; i < fam.size(); ++i)
    out[i] = fam.valid(i) && fam.at(i) * cell_area_km2 >= th;
  return out;
}

RoutingNetwork build_network(const DirectionGrid& dirs, const BasinMask& mask,
                             std::span<const std::uint8_t> channels, double cell_len) {
  if (!dirs.spec().matches(mask.spec())) throw ShapeError("direction grid and mask differ");
  if (!channels.empty() && channels.size() != dirs.size())
    throw ShapeError("channel mask size does not match the grid");
  RoutingNetwork net;
  net.grid = dirs.spec();
  const std::size_t n = dirs.size();
  net.member.assign(mask.members().begin(), mask.members().end());
  for (std::size_t i = 0; i < n; ++i) net.member[i] = net.member[i] && dirs.active(i);
  net.order = topological_order(dirs, net.member);
  net.downstream.assign(n, RoutingNetwork::npos);
  net.hop.assign(n, 0.0);
  net.channel.assign(n, 0);
  const double len = cell_len > 0 ? cell_len : dirs.spec().cell_size;
  for (std::size_t i : net.order) {
    const auto d = dirs.downstream(i);
    if (d && net.member[*d]) net.downstream[i] = *d;
    const auto off = d8_offset(dirs.code(i));
    net.hop[i] = (off && off->diagonal) ? len * kSqrt2 : len;
    net.channel[i] = channels.empty() ? 0 : channels[i];
  }
  return net;
}

RouteStepResult route_step(const RoutingState& state, const RoutingNetwork& net,
                           const RoutingParams& p, double dt) {
  if (!state.surface.spec().matches(net.grid) || !state.subsurface.spec().matches(net.grid))
    throw ShapeError("routing state does not match the network grid");

  std::vector<double> surf = member_values(state.surface, net);
  std::vector<double> sub = member_values(state.subsurface, net);

  for (std::size_t i : net.order) {
    const double leak = p.leaki * sub[i];
    sub[i] -= leak;
    surf[i] += leak;
  }

  std::vector<double> surf_next = surf, sub_next = sub;
  double surface_out = 0.0, subsurface_out = 0.0;
  for (std::size_t i : net.order) {
    const double f_surf = std::min(1.0, velocity(net.channel[i], surf[i], p) * dt / net.hop[i]);
    const double f_sub = std::min(1.0, p.under * dt / net.hop[i]);
    const double send_surf = f_surf * surf[i];
    const double send_sub = f_sub * sub[i];
    surf_next[i] -= send_surf;
    sub_next[i] -= send_sub;
    const std::size_t d = net.downstream[i];
    if (d == RoutingNetwork::npos) {
      surface_out += send_surf;
      subsurface_out += send_sub;
    } else {
      surf_next[d] += send_surf;
      sub_next[d] += send_sub;
    }
  }
  // Clear rounding dust so storages stay non-negative.
  for (std::size_t i : net.order) {
    surf_next[i] = std::max(surf_next[i], 0.0);
    sub_next[i] = std::max(sub_next[i], 0.0);
  }
  return {{to_raster(surf_next, net), to_raster(sub_next, net)},
          surface_out + subsurface_out,
          surface_out,
          subsurface_out};
}

RouteStepResult route_step(const RoutingState& state, const DirectionGrid& dirs,
                           std::span<const std::uint8_t> channels, const RoutingParams& p,
                           double dt, double cell_len) {
  const auto& s = state.surface.spec();
  std::vector<std::uint8_t> members(s.size(), 0);
  std::size_t first = s.size();
  for (std::size_t i = 0; i < s.size(); ++i)
    if (state.surface.valid(i) && dirs.active(i)) {
      members[i] = 1;
      if (first == s.size()) first = i;
    }
  RoutingNetwork net;
  if (first == s.size()) {
    net.grid = s;
    net.downstream.assign(s.size(), RoutingNetwork::npos);
    net.hop.assign(s.size(), 0.0);
    net.channel.assign(s.size(), 0);
    net.member = members;
  } else {
    // The mask constructor wants an outlet; any member will do since the
    // network only uses membership.
    const BasinMask mask(s, members, {first / s.cols, first % s.cols});
    net = build_network(dirs, mask, channels, cell_len);
  }
  return route_step(state, net, p, dt);
}

double SimulationOutput::ledger_relative_error() const {
  if (ledger.empty()) return 0.0;
  double residual = 0.0, precip = 0.0;
  for (const auto& row : ledger) {
    residual += row.residual();
    precip += row.precip;
  }
  const double scale = std::max({precip, ledger.front().storage_before, 1e-12});
  return std::abs(residual) / scale;
}

SimulationOutput simulate(const DirectionGrid& dirs, const Raster& fam, const BasinMask& mask,
                          const ForcingSeries& forcing, const CrestParams& cp,
                          const RoutingParams& rp, const TimeWindow& window) {
  window.validate();
  const GridSpec& grid = dirs.spec();
  if (!grid.matches(fam.spec()) || !grid.matches(mask.spec()))
    throw ShapeError("simulate: terrain layers do not share one grid");
  if (forcing.window.dt != window.dt)
    throw StepError("forcing step " + std::to_string(forcing.window.dt) +
                    " s differs from the model step " + std::to_string(window.dt) + " s");
  if (forcing.steps() == 0 || window.start < forcing.timestamps.front() ||
      window.step_time(window.steps() - 1) > forcing.timestamps.back())
    throw MissingDataError("forcing does not cover the simulation window " +
                           format_instant(window.start) + " .. " + format_instant(window.end));
  const std::size_t offset =
      static_cast<std::size_t>((window.start - forcing.timestamps.front()).count() / window.dt);
  for (std::size_t k = 0; k < forcing.steps(); ++k)
    if (!forcing.precip[k].spec().matches(grid) || !forcing.pet[k].spec().matches(grid))
      throw ShapeError("forcing raster at " + format_instant(forcing.timestamps[k]) +
                       " does not match the model grid");

  const auto channels = classify_channels(fam, grid.cell_area_km2(), rp.th);
  const RoutingNetwork net = build_network(dirs, mask, channels);
  const std::size_t n_cells = net.order.size();
  const double cells = static_cast<double>(n_cells);
  const double dt = static_cast<double>(window.dt);
  const double to_m3s = grid.cell_size * grid.cell_size / (1000.0 * dt);

  SimulationOutput out;
  out.basin_cells = n_cells;

  std::vector<double> soil(grid.size(), 0.0), surf_init(grid.size(), grid.nodata),
      sub_init(grid.size(), grid.nodata);
  for (std::size_t i : net.order) {
    soil[i] = init_cell(cp).w;
    surf_init[i] = 0.0;
    sub_init[i] = rp.isu;
  }
  RoutingState state{Raster(grid, surf_init), Raster(grid, sub_init)};

  auto storage = [&](const RoutingState& st) {
    double total = 0.0;
    for (std::size_t i : net.order) total += soil[i] + st.surface.at(i) + st.subsurface.at(i);
    return total;
  };

  bool warned_precip = false, warned_pet = false;
  double before = storage(state);
  for (std::size_t k = 0; k < window.steps(); ++k) {
    const Raster& precip = forcing.precip[offset + k];
    const Raster& pet = forcing.pet[offset + k];
    LedgerRow row;
    row.t = window.step_time(k);
    row.storage_before = before / cells;

    std::vector<double> surf(state.surface.values().begin(), state.surface.values().end());
    std::vector<double> sub(state.subsurface.values().begin(), state.subsurface.values().end());
    double p_sum = 0.0, et_sum = 0.0, residue = 0.0;
    for (std::size_t i : net.order) {
      double p = precip.at(i), e = pet.at(i);
      if (precip.is_nodata(i)) {
        p = 0.0;
        if (!warned_precip) {
          out.notifications.push_back({"simulate", "precipitation nodata inside the basin treated as 0"});
          warned_precip = true;
        }
      }
      if (pet.is_nodata(i)) {
        e = 0.0;
        if (!warned_pet) {
          out.notifications.push_back({"simulate", "PET nodata inside the basin treated as 0"});
          warned_pet = true;
        }
      }
      const CellStepResult r = cell_step({soil[i]}, cp, p, e, dt);
      soil[i] = r.state.w;
      surf[i] += r.fluxes.overland;
      sub[i] += r.fluxes.interflow_recharge;
      p_sum += p;
      et_sum += r.fluxes.actual_et;
      residue += r.clamp_residue;
    }
    const RoutingState loaded{Raster(grid, std::move(surf)), Raster(grid, std::move(sub))};
    RouteStepResult routed = route_step(loaded, net, rp, dt);
    state = std::move(routed.state);
    const double after = storage(state);

    row.precip = p_sum / cells;
    row.actual_et = et_sum / cells;
    row.outlet = routed.outlet_flux_mm / cells;
    row.storage_after = after / cells;
    row.clamp_residue = residue / cells;
    out.ledger.push_back(row);
    out.timestamps.push_back(row.t);
    out.outlet_q.push_back(std::max(0.0, routed.outlet_flux_mm * to_m3s));
    out.basin_storage_mm.push_back(row.storage_after);
    before = after;
  }
  return out;
}

void write_simulation_csv(const std::filesystem::path& path, const SimulationOutput& out) {
  std::string body = "timestamp,outlet_q_m3s,basin_storage_mm\n";
  for (std::size_t k = 0; k < out.timestamps.size(); ++k)
    body += format_instant(out.timestamps[k]) + "," + text::exact(out.outlet_q[k]) + "," +
            text::exact(out.basin_storage_mm[k]) + "\n";
  text::write_file(path, body);
}

void write_ledger_csv(const std::filesystem::path& path, const SimulationOutput& out) {
  std::string body =
      "timestamp,precip_mm,actual_et_mm,outlet_mm,storage_before_mm,storage_after_mm,"
      "clamp_residue_mm,residual_mm\n";
  for (const auto& r : out.ledger)
    body += format_instant(r.t) + "," + text::exact(r.precip) + "," + text::exact(r.actual_et) + "," +
            text::exact(r.outlet) + "," + text::exact(r.storage_before) + "," +
            text::exact(r.storage_after) + "," + text::exact(r.clamp_residue) + "," +
            text::exact(r.residual()) + "\n";
  text::write_file(path, body);
}

}  // namespace aquah
