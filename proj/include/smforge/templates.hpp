#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace smforge {

class TemplateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Prompt templates keyed "<strategy>/<step>" (e.g. "structure_driven/S3").
/// Placeholders are written {{name}}.
class TemplateSet {
 public:
  /// Templates compiled into the library.
  static TemplateSet builtin();

  /// Built-ins overlaid with every *.txt under `dir` (same key layout).
  static TemplateSet with_overrides(const std::filesystem::path& dir);

  bool contains(std::string_view key) const;
  const std::string& get(std::string_view key) const;
  std::vector<std::string> keys() const;
  void set(std::string key, std::string text);

  /// Substitutes every placeholder. Throws TemplateError on an unknown key,
  /// a placeholder without a value, or an unterminated `{{`.
  std::string render(std::string_view key, const std::map<std::string, std::string>& values) const;

 private:
  std::map<std::string, std::string, std::less<>> templates_;
};

/// Placeholder names used by a template text, in order of first use.
std::vector<std::string> placeholders(std::string_view text);

std::string render_text(std::string_view text, const std::map<std::string, std::string>& values);

}  // namespace smforge
