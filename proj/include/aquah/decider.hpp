#pragma once

#include <chrono>
#include <optional>
#include <string>

#include "aquah/common.hpp"
#include "aquah/grid.hpp"
#include "aquah/params.hpp"

namespace aquah {

/// Where parameter proposals come from: "none", "exec:PATH" or "http:URL".
struct DeciderSpec {
  enum class Kind { None, Exec, Http };
  Kind kind = Kind::None;
  std::string target;

  /// Throws RequestParseError on an unknown scheme or an empty target.
  static DeciderSpec parse(const std::string& text);
  std::string str() const;
};

inline constexpr std::chrono::milliseconds kDeciderTimeout{60000};

/// Send `request` and return the raw answer. Exec runs PATH with the request
/// on standard input and reads standard output; Http POSTs it as text/plain.
/// Returns nullopt and sets `error` on timeout, spawn or transport failure, or
/// a non-zero exit status.
std::optional<std::string> exchange(const DeciderSpec& spec, const std::string& request,
                                    std::chrono::milliseconds timeout, std::string& error);

struct ParamInitResult {
  ParamProposal proposal;
  std::vector<Violation> violations;
  bool external = false;  // false when the heuristic supplied the values
};

/// Heuristic for Kind::None. Otherwise queries the decider with the heuristic
/// proposal as the base for unnamed parameters; any failure falls back to the
/// heuristic and records a notification under stage "params".
ParamInitResult initialize_params(const BasinDescriptors& desc, const DeciderSpec& spec,
                                  NotificationLog& log,
                                  std::chrono::milliseconds timeout = kDeciderTimeout);

}  // namespace aquah
