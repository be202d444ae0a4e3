#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "aquah/error.hpp"
#include "aquah/params.hpp"

using namespace aquah;

namespace {

BasinDescriptors random_descriptors(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  BasinDescriptors d;
  d.area_km2 = std::pow(10.0, -1.0 + 6.0 * u(rng));
  d.relief_m = 4000.0 * u(rng);
  d.mean_slope = 0.6 * u(rng);
  d.drainage_density = u(rng);
  d.impervious_fraction = u(rng);
  return d;
}

}  // namespace

TEST_CASE("ranges: bounds as tabulated") {
  const auto& t = default_ranges();
  CHECK(t.size() == 13);
  CHECK(range_of(ParamId::wm).lower == 5.0);
  CHECK(range_of(ParamId::wm).upper == 250.0);
  CHECK(range_of(ParamId::th).lower == 30.0);
  CHECK(range_of(ParamId::th).upper == 300.0);
  const std::vector<std::tuple<ParamId, double, double>> expected{
      {ParamId::b, 0.1, 20},        {ParamId::im, 0.01, 0.5},   {ParamId::ke, 0.001, 1.0},
      {ParamId::fc, 0, 150},        {ParamId::iwu, 0, 25},      {ParamId::under, 0.0001, 3.0},
      {ParamId::leaki, 0.01, 1.0},  {ParamId::isu, 0, 1e-5},    {ParamId::alpha, 0.01, 3.0},
      {ParamId::beta, 0.01, 1.0},   {ParamId::alpha0, 0.01, 5.0}};
  for (const auto& [id, lo, hi] : expected) {
    CHECK(range_of(id).lower == lo);
    CHECK(range_of(id).upper == hi);
  }
  for (std::size_t k = 0; k < t.size(); ++k) {
    CHECK(t[k].lower < t[k].upper);
    CHECK(static_cast<std::size_t>(t[k].id) == k);
    CHECK(t[k].name == param_name(t[k].id));
  }
}

TEST_CASE("names resolve case-insensitively") {
  CHECK(param_from_name("WM") == ParamId::wm);
  CHECK(param_from_name("alpha0") == ParamId::alpha0);
  CHECK_FALSE(param_from_name("gamma").has_value());
}

TEST_CASE("ranges export as csv") {
  const std::string csv = ranges_csv();
  CHECK(csv.rfind("name,lower,upper,unit,effect\nwm,5,250,mm,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 14);
}

TEST_CASE("validate: clamps with one violation each") {
  ParamProposal p = heuristic_init(midpoint_descriptors());
  REQUIRE(validate(p).violations.empty());
  p.crest.wm = 300;
  auto v = validate(p);
  CHECK(v.proposal.crest.wm == 250.0);
  REQUIRE(v.violations.size() == 1);
  CHECK(v.violations[0].id == ParamId::wm);
  CHECK(v.violations[0].original == 300.0);
  CHECK(v.violations[0].describe().find("clamped to 250") != std::string::npos);

  p = heuristic_init(midpoint_descriptors());
  p.crest.im = 0;
  v = validate(p);
  CHECK(v.proposal.crest.im == 0.01);
  CHECK(v.violations.size() == 1);

  p.routing.alpha = std::nan("");
  CHECK_THROWS_AS(validate(p), DataRangeError);
  CHECK_FALSE(within_ranges(p));
}

TEST_CASE("heuristic: impervious identity") {
  BasinDescriptors d = midpoint_descriptors();
  d.impervious_fraction = 0.30;
  CHECK(heuristic_init(d).crest.im == 0.30);
  d.impervious_fraction = 0.9;
  CHECK(heuristic_init(d).crest.im == 0.5);
  d.impervious_fraction = 0.0;
  CHECK(heuristic_init(d).crest.im == 0.01);
}

TEST_CASE("heuristic: midpoint descriptors give midpoint parameters") {
  const ParamProposal p = heuristic_init(midpoint_descriptors());
  for (ParamId id : {ParamId::wm, ParamId::b, ParamId::im, ParamId::fc, ParamId::th, ParamId::alpha, ParamId::alpha0})
    CHECK(p.get(id) == doctest::Approx(range_of(id).midpoint()).epsilon(1e-12));
  // Fixed defaults do not move with the descriptors.
  CHECK(p.crest.ke == 0.7);
  CHECK(p.routing.beta == 0.6);
  CHECK(p.routing.isu == 0.0);
}

TEST_CASE("heuristic: flat relief puts alpha0 at its low anchor") {
  BasinDescriptors d = midpoint_descriptors();
  d.relief_m = 0;
  CHECK(heuristic_init(d).routing.alpha0 == range_of(ParamId::alpha0).lower);
}

TEST_CASE("heuristic: in range, explained, deterministic, idempotent under validate") {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 2000; ++k) {
    const BasinDescriptors d = random_descriptors(rng);
    const ParamProposal p = heuristic_init(d);
    REQUIRE(within_ranges(p));
    for (ParamId id : kAllParams) REQUIRE_FALSE(p.why(id).empty());
    const auto again = heuristic_init(d);
    for (ParamId id : kAllParams) REQUIRE(again.get(id) == p.get(id));
    const auto v = validate(p);
    REQUIRE(v.violations.empty());
    for (ParamId id : kAllParams) REQUIRE(v.proposal.get(id) == p.get(id));
  }
}

TEST_CASE("heuristic: small perturbations give small changes") {
  std::mt19937_64 rng(19);
  for (int k = 0; k < 500; ++k) {
    BasinDescriptors d = random_descriptors(rng);
    d.area_km2 = std::max(d.area_km2, 1.0);
    const ParamProposal p = heuristic_init(d);
    BasinDescriptors e = d;
    e.area_km2 *= 1 + 1e-6;
    e.relief_m += 1e-6;
    e.mean_slope += 1e-6;
    e.drainage_density = std::min(1.0, e.drainage_density + 1e-6);
    e.impervious_fraction = std::min(1.0, e.impervious_fraction + 1e-6);
    const ParamProposal q = heuristic_init(e);
    for (ParamId id : kAllParams) {
      const auto& r = range_of(id);
      REQUIRE(std::abs(q.get(id) - p.get(id)) <= 1e-3 * (r.upper - r.lower));
    }
  }
}

TEST_CASE("decider json: tabulated example") {
  const std::string line =
      R"j({"code":"crest_args = types.SimpleNamespace(wm=120.0, b=1.5, im=0.05, ke=0.9, fc=30, iwu=10)","explanation":"moist upland"})j";
  const DeciderResult r = parse_decider_json(line);
  CHECK(r.proposal.crest.wm == 120.0);
  CHECK(r.proposal.crest.b == 1.5);
  CHECK(r.proposal.crest.im == 0.05);
  CHECK(r.proposal.crest.ke == 0.9);
  CHECK(r.proposal.crest.fc == 30.0);
  CHECK(r.proposal.crest.iwu == 10.0);
  CHECK(r.violations.empty());
  CHECK(r.warnings.empty());
  CHECK(r.proposal.why(ParamId::wm) == "external decider: moist upland");
  // Unnamed parameters come from the base.
  const auto base = heuristic_init(midpoint_descriptors());
  CHECK(r.proposal.routing.th == base.routing.th);
}

TEST_CASE("decider json: contract violations") {
  CHECK_THROWS_AS(parse_decider_json("{\"code\":\"wm=1\",\n\"explanation\":\"x\"}"), DeciderFormatError);
  CHECK_THROWS_AS(parse_decider_json("not json"), DeciderFormatError);
  CHECK_THROWS_AS(parse_decider_json(R"j({"code":"wm=100"})j"), DeciderFormatError);
  CHECK_THROWS_AS(parse_decider_json(R"j({"code":5,"explanation":""})j"), DeciderFormatError);
  CHECK_THROWS_AS(parse_decider_json("[1,2]"), DeciderFormatError);
  // One trailing newline is still one line.
  CHECK_NOTHROW(parse_decider_json(R"j({"code":"wm=100","explanation":""})j" "\n"));
}

TEST_CASE("decider json: clamping and unknown names") {
  const auto r = parse_decider_json(R"j({"code":"ns(wm=999, gamma=2, th=10)","explanation":"","note":1})j");
  CHECK(r.proposal.crest.wm == 250.0);
  CHECK(r.proposal.routing.th == 30.0);
  CHECK(r.violations.size() == 2);
  CHECK(r.warnings.size() == 2);
  CHECK(within_ranges(r.proposal));
}

TEST_CASE("decider json: randomized values always land in range") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 2000; ++k) {
    std::string code = "crest_args = types.SimpleNamespace(";
    for (ParamId id : kAllParams) {
      const auto& r = range_of(id);
      char buf[64];
      std::snprintf(buf, sizeof buf, "%s=%.6g, ", std::string(r.name).c_str(), r.lerp(u(rng)) * (1 + u(rng)));
      code += buf;
    }
    code += ")";
    const auto res = parse_decider_json("{\"code\":\"" + code + "\",\"explanation\":\"r\"}");
    REQUIRE(within_ranges(res.proposal));
  }
}

TEST_CASE("decider request carries descriptors and the range table") {
  const std::string req = decider_request(midpoint_descriptors());
  CHECK(req.find("area_km2=") != std::string::npos);
  CHECK(req.find("alpha0,0.01,5") != std::string::npos);
  CHECK(req.find("exactly one line of JSON") != std::string::npos);
}
