#pragma once

#include <stdexcept>
#include <string>

namespace aquah {

/// Broad failure class, mapped onto CLI exit codes (2, 3, 4).
enum class ErrorCategory { Request = 2, Data = 3, Simulation = 4 };

/// Base of every library exception. A pipeline stage may tag the error on the
/// way out so that the caller can tell which stage aborted.
class Error : public std::runtime_error {
public:
  Error(ErrorCategory category, const std::string& kind, const std::string& message)
      : std::runtime_error(message), category_(category), kind_(kind) {}

  ErrorCategory category() const noexcept { return category_; }
  const std::string& kind() const noexcept { return kind_; }
  const std::string& stage() const noexcept { return stage_; }
  void set_stage(std::string stage) { stage_ = std::move(stage); }

  /// "[stage] Kind: message", or "Kind: message" when untagged.
  std::string describe() const {
    std::string out;
    if (!stage_.empty()) out += "[" + stage_ + "] ";
    out += kind_ + ": " + what();
    return out;
  }

private:
  ErrorCategory category_;
  std::string kind_;
  std::string stage_;
};

#define AQUAH_DEFINE_ERROR(Name, Category)                                   \
  class Name : public Error {                                                \
  public:                                                                    \
    explicit Name(const std::string& message)                                \
        : Error(ErrorCategory::Category, #Name, message) {}                  \
  };

AQUAH_DEFINE_ERROR(ParseError, Data)
AQUAH_DEFINE_ERROR(ShapeError, Data)
AQUAH_DEFINE_ERROR(EmptyInputError, Data)
AQUAH_DEFINE_ERROR(BoundsError, Data)
AQUAH_DEFINE_ERROR(MissingDataError, Data)
AQUAH_DEFINE_ERROR(DataRangeError, Data)
AQUAH_DEFINE_ERROR(NoViableGaugeError, Data)
AQUAH_DEFINE_ERROR(UndefinedMetricError, Data)
AQUAH_DEFINE_ERROR(IncompleteContextError, Data)
AQUAH_DEFINE_ERROR(CycleError, Simulation)
AQUAH_DEFINE_ERROR(StepError, Simulation)
AQUAH_DEFINE_ERROR(DeciderFormatError, Request)
AQUAH_DEFINE_ERROR(AmbiguousHintError, Request)
AQUAH_DEFINE_ERROR(RequestParseError, Request)
AQUAH_DEFINE_ERROR(DirectiveError, Request)

#undef AQUAH_DEFINE_ERROR

}  // namespace aquah
