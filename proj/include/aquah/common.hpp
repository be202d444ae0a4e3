#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace aquah {

/// One fallback or warning event raised during a run.
struct Notification {
  std::string stage;
  std::string message;
};

using NotificationLog = std::vector<Notification>;

/// Ordered key=value document. Blank lines and '#' comments are skipped;
/// keys and values are trimmed. Later duplicates do not replace earlier ones.
class KeyValues {
public:
  static KeyValues read(const std::filesystem::path& path);
  static KeyValues parse(std::string_view text, const std::string& origin = "<text>");

  std::optional<std::string> get(std::string_view key) const;
  std::string require(std::string_view key) const;
  /// All entries whose key begins with `prefix`, prefix stripped.
  std::vector<std::pair<std::string, std::string>> with_prefix(std::string_view prefix) const;

  void set(std::string key, std::string value);
  void append(std::string key, std::string value);
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  std::string str() const;
  void write(const std::filesystem::path& path) const;

private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::string origin_;
};

namespace text {

std::string trim(std::string_view s);
std::string lower(std::string_view s);
std::vector<std::string> split_ws(std::string_view s);
/// Comma-separated fields; double-quoted fields may contain commas and "".
std::vector<std::string> split_csv(std::string_view line);
/// Strict floating point parse of the whole token.
std::optional<double> to_double(std::string_view s);
/// "%.17g": round-trips every double exactly.
std::string exact(double v);
/// printf-style fixed formatting.
std::string fixed(double v, int decimals);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace text

}  // namespace aquah
