#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace raider {

/// Named prompt templates with `{{placeholder}}` slots. Defaults are compiled
/// in from data/templates; a directory overrides them file by file
/// (`<name>.txt`).
class TemplateSet {
 public:
  static const TemplateSet& defaults();
  static TemplateSet with_overrides(const std::filesystem::path& directory);

  bool has(std::string_view name) const;
  /// Throws NotFoundError.
  const std::string& get(std::string_view name) const;
  /// Substitutes every `{{key}}`; throws ValidationError if a placeholder
  /// has no value.
  std::string render(std::string_view name,
                     const std::map<std::string, std::string>& values) const;

 private:
  std::map<std::string, std::string, std::less<>> templates_;
};

/// Strips one trailing newline so templates compose with explicit separators.
std::string chomp(std::string s);

}  // namespace raider
