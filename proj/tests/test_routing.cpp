#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "aquah/error.hpp"
#include "aquah/routing.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace aquah;
using testing::raster;
using testing::spec;

namespace {

double total(const Raster& r) {
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i)
    if (r.valid(i)) s += r.at(i);
  return s;
}

ForcingSeries uniform_forcing(const GridSpec& g, const TimeWindow& w, double precip, double pet) {
  ForcingSeries f;
  f.window = w;
  f.timestamps = w.timestamps();
  for (std::size_t k = 0; k < f.timestamps.size(); ++k) {
    f.precip.push_back(Raster::filled(g, precip));
    f.pet.push_back(Raster::filled(g, pet));
  }
  return f;
}

TimeWindow window_hours(int n, std::int64_t dt = 3600) {
  TimeWindow w;
  w.start = parse_instant("2022-03-01");
  w.end = w.start + std::chrono::seconds{static_cast<std::int64_t>(n) * dt};
  w.dt = dt;
  return w;
}

/// Three cells draining east, all channel, active everywhere.
struct Strip {
  DirectionGrid dirs{spec(1, 3, 1000.0), {1, 1, 0}};
  BasinMask mask{spec(1, 3, 1000.0), {1, 1, 1}, {0, 2}};
  std::vector<std::uint8_t> channels{1, 1, 1};
  RoutingNetwork net = build_network(dirs, mask, channels);
};

RoutingState state_of(const GridSpec& g, std::vector<double> surface, std::vector<double> sub) {
  return {Raster(g, std::move(surface)), Raster(g, std::move(sub))};
}

}  // namespace

TEST_CASE("classify_channels: threshold comparison") {
  const Raster fam = raster(1, 3, {31, 29, -9999});
  const auto ch = classify_channels(fam, 1.0, 30.0);
  CHECK(ch[0] == 1);
  CHECK(ch[1] == 0);
  CHECK(ch[2] == 0);
  const Raster tiny = raster(2, 2, {1, 2, 3, 4});
  for (auto c : classify_channels(tiny, 1.0, 300.0)) CHECK(c == 0);
  CHECK(classify_channels(raster(1, 1, {30}), 1.0, 30.0)[0] == 1);
}

TEST_CASE("route_step: zero state stays zero") {
  Strip s;
  const auto g = s.dirs.spec();
  const auto r = route_step(state_of(g, {0, 0, 0}, {0, 0, 0}), s.net, RoutingParams{}, 3600);
  CHECK(r.outlet_flux_mm == 0.0);
  CHECK(total(r.state.surface) == 0.0);
  CHECK(total(r.state.subsurface) == 0.0);
}

TEST_CASE("route_step: slow channel velocity keeps water in place") {
  Strip s;
  RoutingParams p;
  p.alpha = 0.01;
  p.beta = 1.0;
  p.leaki = 0.01;
  p.under = 0.0001;
  const auto g = s.dirs.spec();
  // v = 0.01 * 0.001 m/s, so v*dt/L = 3.6e-5.
  const auto r = route_step(state_of(g, {0.001, 0, 0}, {0, 0, 0}), s.net, p, 3600);
  CHECK(r.state.surface.at(0) == doctest::Approx(0.001).epsilon(0.01));
  CHECK(r.state.surface.at(0) < 0.001);
}

TEST_CASE("route_step: unit transfer walks an impulse down the strip") {
  Strip s;
  RoutingParams p;
  p.alpha = 3.0;
  p.beta = 0.01;
  p.leaki = 0.01;
  p.under = 0.0001;
  const auto g = s.dirs.spec();
  RoutingState st = state_of(g, {10, 0, 0}, {0, 0, 0});
  // Hand-stepped: the whole 10 mm advances one cell per step.
  const std::vector<std::vector<double>> expected{{0, 10, 0}, {0, 0, 10}, {0, 0, 0}};
  const std::vector<double> expected_out{0, 0, 10};
  for (std::size_t k = 0; k < 3; ++k) {
    const auto r = route_step(st, s.net, p, 3600);
    for (std::size_t i = 0; i < 3; ++i) CHECK(r.state.surface.at(i) == expected[k][i]);
    CHECK(r.outlet_flux_mm == expected_out[k]);
    st = r.state;
  }
}

TEST_CASE("route_step: leakage feeds the surface before advection") {
  Strip s;
  RoutingParams p;
  p.alpha = 0.01;
  p.alpha0 = 0.01;
  p.beta = 1.0;
  p.leaki = 0.5;
  p.under = 0.0001;
  const auto g = s.dirs.spec();
  const auto r = route_step(state_of(g, {0, 0, 0}, {0, 8, 0}), s.net, p, 1.0);
  CHECK(r.state.surface.at(1) == doctest::Approx(4.0).epsilon(1e-4));
  CHECK(r.state.subsurface.at(1) == doctest::Approx(4.0).epsilon(1e-4));
}

TEST_CASE("route_step: the grid form matches the network form") {
  Strip s;
  RoutingParams p;
  p.alpha = 1.2;
  const auto g = s.dirs.spec();
  const RoutingState st = state_of(g, {3, 1, 0.5}, {0.2, 0.1, 0});
  const auto a = route_step(st, s.net, p, 600);
  const auto b = route_step(st, s.dirs, s.channels, p, 600, 1000.0);
  CHECK(a.outlet_flux_mm == b.outlet_flux_mm);
  for (std::size_t i = 0; i < 3; ++i) CHECK(a.state.surface.at(i) == b.state.surface.at(i));
}

TEST_CASE("route_step: conservation and non-negativity on random basins") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Raster dem = oracle::random_distinct_dem(rng, 7, 7, 500.0);
    const DirectionGrid dirs = d8_flow_directions(dem);
    const Raster fam = flow_accumulation(dirs);
    const BasinMask all(dirs.spec(), std::vector<std::uint8_t>(49, 1), {0, 0});
    RoutingParams p;
    p.alpha = 0.01 + 2.99 * u(rng);
    p.alpha0 = 0.01 + 4.99 * u(rng);
    p.beta = 0.01 + 0.99 * u(rng);
    p.under = 0.0001 + 2.9999 * u(rng);
    p.leaki = 0.01 + 0.99 * u(rng);
    const auto channels = classify_channels(fam, dirs.spec().cell_area_km2(), 1.0);
    const RoutingNetwork net = build_network(dirs, all, channels);
    std::vector<double> surf(49), sub(49);
    for (auto& x : surf) x = 20 * u(rng);
    for (auto& x : sub) x = 5 * u(rng);
    RoutingState st = state_of(dirs.spec(), surf, sub);
    for (std::int64_t dt : {60, 3600, 7200}) {
      const double before = total(st.surface) + total(st.subsurface);
      const auto r = route_step(st, net, p, static_cast<double>(dt));
      const double after = total(r.state.surface) + total(r.state.subsurface);
      CHECK(std::abs(before - after - r.outlet_flux_mm) <= 1e-9 * std::max(1.0, before));
      for (std::size_t i = 0; i < 49; ++i) {
        CHECK(r.state.surface.at(i) >= 0.0);
        CHECK(r.state.subsurface.at(i) >= 0.0);
      }
      st = r.state;
    }
  }
}

TEST_CASE("route_step: larger alpha moves more water off a channel cell") {
  Strip s;
  const auto g = s.dirs.spec();
  double last = 0.0;
  for (double alpha : {0.01, 0.05, 0.1, 0.2}) {
    RoutingParams p;
    p.alpha = alpha;
    p.beta = 0.6;
    const auto r = route_step(state_of(g, {5, 0, 0}, {0, 0, 0}), s.net, p, 60);
    const double moved = 5.0 - r.state.surface.at(0);
    CHECK(moved > last);
    last = moved;
  }
}

TEST_CASE("build_network: cycles and shape errors") {
  const DirectionGrid cyc(spec(1, 2), {1, 16});
  const BasinMask m(spec(1, 2), {1, 1}, {0, 0});
  CHECK_THROWS_AS(build_network(cyc, m, {}), CycleError);
  const BasinMask wrong(spec(2, 2), {1, 1, 1, 1}, {0, 0});
  CHECK_THROWS_AS(build_network(cyc, wrong, {}), ShapeError);
}

TEST_CASE("simulate: zero forcing and zero storage gives zero discharge") {
  Strip s;
  CrestParams cp;
  cp.iwu = 0;
  RoutingParams rp;
  const auto w = window_hours(12);
  const Raster fam = flow_accumulation(s.dirs);
  const auto out = simulate(s.dirs, fam, s.mask, uniform_forcing(s.dirs.spec(), w, 0, 0), cp, rp, w);
  REQUIRE(out.outlet_q.size() == 12);
  for (double q : out.outlet_q) CHECK(q == 0.0);
  CHECK(out.basin_cells == 3);
}

TEST_CASE("simulate: initial subsurface storage shows up early and fades") {
  std::mt19937_64 rng(4);
  const Raster dem = oracle::random_distinct_dem(rng, 6, 6, 1000.0);
  const DirectionGrid dirs = d8_flow_directions(dem);
  const Raster fam = flow_accumulation(dirs);
  std::size_t outlet = 0;
  for (std::size_t i = 0; i < fam.size(); ++i)
    if (fam.at(i) > fam.at(outlet)) outlet = i;
  const BasinMask mask = delineate_basin(dirs, {outlet / 6, outlet % 6});
  CrestParams cp;
  RoutingParams a, b;
  a.th = b.th = 30.0;
  b.isu = 1e-5;
  a.under = b.under = 0.5;
  const auto w = window_hours(400);
  const auto f = uniform_forcing(dirs.spec(), w, 0.2, 0.05);
  const auto qa = simulate(dirs, fam, mask, f, cp, a, w).outlet_q;
  const auto qb = simulate(dirs, fam, mask, f, cp, b, w).outlet_q;
  CHECK(qb[0] > qa[0]);
  CHECK(std::abs(qb.back() - qa.back()) <= 1e-9 * std::max(1e-12, qa.back()) + 1e-15);
}

TEST_CASE("simulate: ledger closes and discharge is non-negative") {
  std::mt19937_64 rng(12);
  const Raster dem = oracle::random_distinct_dem(rng, 10, 10, 1000.0);
  const DirectionGrid dirs = d8_flow_directions(dem);
  const Raster fam = flow_accumulation(dirs);
  const BasinMask all(dirs.spec(), std::vector<std::uint8_t>(100, 1), {0, 0});
  const auto w = window_hours(120);
  ForcingSeries f = uniform_forcing(dirs.spec(), w, 0.0, 0.1);
  for (std::size_t k = 10; k < 30; ++k) f.precip[k] = Raster::filled(dirs.spec(), 6.0);
  CrestParams cp;
  RoutingParams rp;
  rp.th = 30;
  const auto out = simulate(dirs, fam, all, f, cp, rp, w);
  CHECK(out.ledger_relative_error() <= 1e-6);
  for (double q : out.outlet_q) CHECK(q >= 0.0);
  for (const auto& row : out.ledger) CHECK(std::abs(row.residual()) <= 1e-9);
}

TEST_CASE("simulate: forcing must cover the window and share its step") {
  Strip s;
  const auto w = window_hours(5);
  const auto short_f = uniform_forcing(s.dirs.spec(), window_hours(3), 1, 0);
  const Raster fam = flow_accumulation(s.dirs);
  CHECK_THROWS_AS(simulate(s.dirs, fam, s.mask, short_f, {}, {}, w), MissingDataError);
  const auto coarse = uniform_forcing(s.dirs.spec(), window_hours(5, 7200), 1, 0);
  CHECK_THROWS_AS(simulate(s.dirs, fam, s.mask, coarse, {}, {}, w), StepError);
}

TEST_CASE("csv writers") {
  testing::TempDir tmp("routing");
  Strip s;
  const auto w = window_hours(2);
  const auto out = simulate(s.dirs, flow_accumulation(s.dirs), s.mask, uniform_forcing(s.dirs.spec(), w, 1, 0), {},
                            {}, w);
  write_simulation_csv(tmp / "sim.csv", out);
  write_ledger_csv(tmp / "ledger.csv", out);
  const std::string sim = text::read_file(tmp / "sim.csv");
  CHECK(sim.rfind("timestamp,outlet_q_m3s,basin_storage_mm\n2022-03-01T00:00:00,", 0) == 0);
  CHECK(text::read_file(tmp / "ledger.csv").find("residual_mm") != std::string::npos);
}
