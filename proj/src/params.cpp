#include "aquah/params.hpp"

#include <algorithm>
#include <cmath>
#include <regex>

#include "json.hpp"

#include "aquah/common.hpp"
#include "aquah/error.hpp"

namespace aquah {

namespace {

double unit_clamp(double v) { return std::clamp(v, 0.0, 1.0); }

double* field(ParamProposal& p, ParamId id) {
  switch (id) {
    case ParamId::wm: return &p.crest.wm;
    case ParamId::b: return &p.crest.b;
    case ParamId::im: return &p.crest.im;
    case ParamId::ke: return &p.crest.ke;
    case ParamId::fc: return &p.crest.fc;
    case ParamId::iwu: return &p.crest.iwu;
    case ParamId::th: return &p.routing.th;
    case ParamId::under: return &p.routing.under;
    case ParamId::leaki: return &p.routing.leaki;
    case ParamId::isu: return &p.routing.isu;
    case ParamId::alpha: return &p.routing.alpha;
    case ParamId::beta: return &p.routing.beta;
    case ParamId::alpha0: return &p.routing.alpha0;
  }
  return nullptr;
}

std::string g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace

std::string_view param_name(ParamId id) {
  static constexpr std::array<std::string_view, kParamCount> names{
      "wm", "b", "im", "ke", "fc", "iwu", "th", "under", "leaki", "isu", "alpha", "beta", "alpha0"};
  return names[static_cast<std::size_t>(id)];
}

std::optional<ParamId> param_from_name(std::string_view name) {
  const std::string n = text::lower(name);
  for (ParamId id : kAllParams)
    if (param_name(id) == n) return id;
  return std::nullopt;
}

const ParamRangeTable& default_ranges() {
  static const ParamRangeTable table{{
      {ParamId::wm, "wm", 5.0, 250.0, "mm", "more storage gives less direct runoff"},
      {ParamId::b, "b", 0.1, 20.0, "-", "steeper infiltration curve gives more surface runoff"},
      {ParamId::im, "im", 0.01, 0.50, "fraction", "larger imperviousness gives more runoff"},
      {ParamId::ke, "ke", 0.001, 1.0, "-", "higher ET loss gives less runoff"},
      {ParamId::fc, "fc", 0.0, 150.0, "mm/h", "faster infiltration gives less runoff"},
      {ParamId::iwu, "iwu", 0.0, 25.0, "mm", "wetter initial state gives higher early runoff"},
      {ParamId::th, "th", 30.0, 300.0, "km2", "smaller threshold gives a finer channel network"},
      {ParamId::under, "under", 0.0001, 3.0, "m/s", "larger velocity gives quicker runoff response"},
      {ParamId::leaki, "leaki", 0.01, 1.0, "fraction/step", "higher leakage gives faster hydrograph rise"},
      {ParamId::isu, "isu", 0.0, 1e-5, "mm", "non-zero may cause a spurious early peak"},
      {ParamId::alpha, "alpha", 0.01, 3.0, "-", "channel wave celerity coefficient"},
      {ParamId::beta, "beta", 0.01, 1.0, "-", "channel celerity exponent"},
      {ParamId::alpha0, "alpha0", 0.01, 5.0, "-", "overland flow speed (exponent fixed at 0.6)"},
  }};
  return table;
}

const ParamRange& range_of(ParamId id) { return default_ranges()[static_cast<std::size_t>(id)]; }

std::string ranges_csv(const ParamRangeTable& table) {
  std::string out = "name,lower,upper,unit,effect\n";
  for (const auto& r : table)
    out += r.name + "," + text::exact(r.lower) + "," + text::exact(r.upper) + "," + r.unit + ",\"" +
           r.effect + "\"\n";
  return out;
}

double ParamProposal::get(ParamId id) const { return *field(const_cast<ParamProposal&>(*this), id); }

void ParamProposal::set(ParamId id, double value) { *field(*this, id) = value; }

std::string Violation::describe() const {
  const auto& r = range_of(id);
  return std::string(param_name(id)) + "=" + text::exact(original) + " outside [" + text::exact(r.lower) +
         ", " + text::exact(r.upper) + "]; clamped to " + text::exact(clamped);
}

ValidatedProposal validate(const ParamProposal& proposal) {
  ValidatedProposal out{proposal, {}};
  for (ParamId id : kAllParams) {
    const double v = proposal.get(id);
    if (!std::isfinite(v))
      throw DataRangeError("parameter " + std::string(param_name(id)) + " is not finite");
    const auto& r = range_of(id);
    const double c = std::clamp(v, r.lower, r.upper);
    if (c != v) {
      out.proposal.set(id, c);
      out.violations.push_back({id, v, c});
    }
  }
  return out;
}

bool within_ranges(const ParamProposal& p) {
  return std::all_of(kAllParams.begin(), kAllParams.end(), [&](ParamId id) {
    const double v = p.get(id);
    return std::isfinite(v) && range_of(id).contains(v);
  });
}

BasinDescriptors midpoint_descriptors(const HeuristicAnchors& a) {
  BasinDescriptors d;
  d.relief_m = 0.5 * a.relief_max_m;
  d.mean_slope = 0.5 * a.slope_max;
  d.drainage_density = 0.5;
  d.area_km2 = std::sqrt(a.area_min_km2 * a.area_max_km2);
  d.impervious_fraction = range_of(ParamId::im).midpoint();
  return d;
}

ParamProposal heuristic_init(const BasinDescriptors& d, const HeuristicAnchors& a) {
  const double slope_n = unit_clamp(d.mean_slope / a.slope_max);
  const double relief_n = unit_clamp(d.relief_m / a.relief_max_m);
  const double dd_n = unit_clamp(d.drainage_density);
  const double area_n =
      unit_clamp((std::log10(std::max(d.area_km2, 1e-12)) - std::log10(a.area_min_km2)) /
                 (std::log10(a.area_max_km2) - std::log10(a.area_min_km2)));
  const auto& im_r = range_of(ParamId::im);
  const double imp_n = unit_clamp((d.impervious_fraction - im_r.lower) / (im_r.upper - im_r.lower));

  auto clamp_to = [](ParamId id, double v) {
    const auto& r = range_of(id);
    return std::clamp(v, r.lower, r.upper);
  };

  ParamProposal p;
  // Larger basins hold deeper soils; high relief thins them.
  const double soil_bias = 1.0 + 0.2 * (area_n - 0.5) - 0.2 * (relief_n - 0.5);
  p.crest.wm = clamp_to(ParamId::wm, range_of(ParamId::wm).lerp(1.0 - slope_n) * soil_bias);
  p.set_why(ParamId::wm, "mean slope " + g(d.mean_slope) + " and soil bias " + g(soil_bias) +
                             ": gentler terrain stores more soil water, damping direct runoff");
  p.crest.b = range_of(ParamId::b).lerp(slope_n);
  p.set_why(ParamId::b, "steeper terrain (slope index " + g(slope_n) +
                            ") gets a steeper infiltration curve and more surface runoff");
  p.crest.im = clamp_to(ParamId::im, d.impervious_fraction);
  p.set_why(ParamId::im, "impervious fraction " + g(d.impervious_fraction) + " taken from land cover");
  p.crest.ke = 0.7;
  p.set_why(ParamId::ke, "default PET utilisation 0.7");
  p.crest.fc = range_of(ParamId::fc).lerp(1.0 - imp_n);
  p.set_why(ParamId::fc, "infiltration capacity falls as imperviousness rises (index " + g(imp_n) + ")");
  p.crest.iwu = std::min(0.3 * p.crest.wm, range_of(ParamId::iwu).upper);
  p.set_why(ParamId::iwu, "initial soil water at 30% of wm, capped at 25 mm");

  p.routing.th = range_of(ParamId::th).lerp(1.0 - dd_n);
  p.set_why(ParamId::th, "drainage density " + g(d.drainage_density) +
                             ": denser drainage warrants a lower channel threshold");
  p.routing.under = 0.001;
  p.set_why(ParamId::under, "default interflow velocity 0.001 m/s");
  p.routing.leaki = 0.05;
  p.set_why(ParamId::leaki, "default leakage 0.05 per step");
  p.routing.isu = 0.0;
  p.set_why(ParamId::isu, "no initial subsurface storage, avoiding a spurious early peak");
  p.routing.alpha = range_of(ParamId::alpha).lerp(slope_n);
  p.set_why(ParamId::alpha, "channel celerity coefficient scaled by slope index " + g(slope_n));
  p.routing.beta = 0.6;
  p.set_why(ParamId::beta, "kinematic-wave exponent anchored at 0.6");
  const double overland_n = std::sqrt(slope_n * relief_n);
  p.routing.alpha0 = range_of(ParamId::alpha0).lerp(overland_n);
  p.set_why(ParamId::alpha0, "overland speed from slope and relief (index " + g(overland_n) + ")");
  return p;
}

DeciderResult parse_decider_json(const std::string& raw, const ParamProposal& base) {
  std::string line = raw;
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.pop_back();
  if (line.find('\n') != std::string::npos)
    throw DeciderFormatError("decider answer must be exactly one line of JSON");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw DeciderFormatError(std::string("decider answer is not JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("code") || !j.contains("explanation") || !j["code"].is_string() ||
      !j["explanation"].is_string())
    throw DeciderFormatError("decider answer needs string keys \"code\" and \"explanation\"");

  DeciderResult res{base, {}, {}};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "code" && it.key() != "explanation")
      res.warnings.push_back("ignored extra key '" + it.key() + "'");

  const std::string code = j["code"].get<std::string>();
  const std::string explanation = text::trim(j["explanation"].get<std::string>());
  static const std::regex pair_re(
      R"(([A-Za-z_][A-Za-z0-9_]*)\s*=\s*([-+]?(?:[0-9]+\.?[0-9]*|\.[0-9]+)(?:[eE][-+]?[0-9]+)?))");
  for (auto it = std::sregex_iterator(code.begin(), code.end(), pair_re); it != std::sregex_iterator(); ++it) {
    const std::string name = (*it)[1];
    const auto id = param_from_name(name);
    if (!id) {
      res.warnings.push_back("ignored unknown parameter '" + name + "'");
      continue;
    }
    res.proposal.set(*id, std::stod((*it)[2]));
    res.proposal.set_why(*id, explanation.empty() ? "external decider" : "external decider: " + explanation);
  }
  auto checked = validate(res.proposal);
  res.proposal = std::move(checked.proposal);
  res.violations = std::move(checked.violations);
  return res;
}

DeciderResult parse_decider_json(const std::string& line) {
  return parse_decider_json(line, heuristic_init(midpoint_descriptors()));
}

std::string decider_request(const BasinDescriptors& d, const ParamRangeTable& table) {
  std::string out = "You are a hydrologist. Propose first-guess CREST parameters.\n";
  out += "Basin description:\n";
  out += "area_km2=" + text::exact(d.area_km2) + "\n";
  out += "relief_m=" + text::exact(d.relief_m) + "\n";
  out += "mean_slope=" + text::exact(d.mean_slope) + "\n";
  out += "drainage_density=" + text::exact(d.drainage_density) + "\n";
  out += "impervious_fraction=" + text::exact(d.impervious_fraction) + "\n";
  out += "Parameter guide:\n" + ranges_csv(table);
  out += "Return exactly one line of JSON: "
         "{\"code\":\"crest_args = types.SimpleNamespace(wm=<value>, b=<value>, im=<value>, ...)\","
         "\"explanation\":\"...\"}\n";
  return out;
}

}  // namespace aquah
