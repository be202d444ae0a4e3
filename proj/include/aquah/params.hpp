#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aquah/grid.hpp"
#include "aquah/routing.hpp"
#include "aquah/waterbalance.hpp"

namespace aquah {

enum class ParamId { wm, b, im, ke, fc, iwu, th, under, leaki, isu, alpha, beta, alpha0 };

inline constexpr std::size_t kParamCount = 13;

inline constexpr std::array<ParamId, kParamCount> kAllParams{
    ParamId::wm,    ParamId::b,   ParamId::im,    ParamId::ke,   ParamId::fc,
    ParamId::iwu,   ParamId::th,  ParamId::under, ParamId::leaki, ParamId::isu,
    ParamId::alpha, ParamId::beta, ParamId::alpha0};

std::string_view param_name(ParamId id);
/// Case-insensitive lookup.
std::optional<ParamId> param_from_name(std::string_view name);

struct ParamRange {
  ParamId id;
  std::string name;
  double lower;
  double upper;
  std::string unit;
  std::string effect;  // hydrologic response when the value increases

  double midpoint() const { return 0.5 * (lower + upper); }
  double lerp(double t) const { return lower + t * (upper - lower); }
  bool contains(double v) const { return v >= lower && v <= upper; }
};

using ParamRangeTable = std::array<ParamRange, kParamCount>;

/// Admissible ranges for the CREST water-balance and kinematic-wave routing
/// parameters, in ParamId order.
const ParamRangeTable& default_ranges();
const ParamRange& range_of(ParamId id);

/// name,lower,upper,unit,effect
std::string ranges_csv(const ParamRangeTable& table = default_ranges());

struct ParamProposal {
  CrestParams crest;
  RoutingParams routing;
  std::array<std::string, kParamCount> rationale;

  double get(ParamId id) const;
  void set(ParamId id, double value);
  const std::string& why(ParamId id) const { return rationale[static_cast<std::size_t>(id)]; }
  void set_why(ParamId id, std::string text) { rationale[static_cast<std::size_t>(id)] = std::move(text); }
};

struct Violation {
  ParamId id;
  double original;
  double clamped;

  std::string describe() const;
};

struct ValidatedProposal {
  ParamProposal proposal;
  std::vector<Violation> violations;
};

/// Clamp every value into its range, recording each clamp. Throws
/// DataRangeError on a non-finite value.
ValidatedProposal validate(const ParamProposal& proposal);

/// True when all 13 values lie inside their ranges.
bool within_ranges(const ParamProposal& proposal);

/// Descriptor normalisation anchors used by heuristic_init.
struct HeuristicAnchors {
  double relief_max_m = 2000.0;
  double slope_max = 0.3;
  double area_min_km2 = 10.0;
  double area_max_km2 = 10000.0;  // log-scaled between min and max
};

/// Deterministic first-guess parameters from basin descriptors. Every value
/// is inside its range and carries a rationale string.
ParamProposal heuristic_init(const BasinDescriptors& desc, const HeuristicAnchors& anchors = {});

/// Descriptors sitting at the midpoint of every normalisation anchor.
BasinDescriptors midpoint_descriptors(const HeuristicAnchors& anchors = {});

struct DeciderResult {
  ParamProposal proposal;
  std::vector<Violation> violations;
  std::vector<std::string> warnings;
};

/// Parse the one-line JSON answer {"code": "...", "explanation": "..."} where
/// the code holds name=value pairs (e.g. `types.SimpleNamespace(wm=120.0, ...)`).
/// Values not named in the code are taken from `base`. The result is passed
/// through validate. Unknown names produce a warning.
/// Throws DeciderFormatError on multi-line input, invalid JSON, or missing keys.
DeciderResult parse_decider_json(const std::string& line, const ParamProposal& base);
DeciderResult parse_decider_json(const std::string& line);

/// Text sent to an external decider: basin descriptors plus the range table.
std::string decider_request(const BasinDescriptors& desc, const ParamRangeTable& table = default_ranges());

}  // namespace aquah
