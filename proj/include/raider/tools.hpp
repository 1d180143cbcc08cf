#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "raider/scene.hpp"
#include "raider/tool_call.hpp"

namespace raider {

enum class ArgKind {
  Object,  // resolved against detected objects
  Human,   // resolved against recognized humans
  Target,  // object first, then human
  Text,    // passed through
};

struct ToolSpec {
  std::string name;
  std::vector<std::string> arg_names;
  std::vector<ArgKind> arg_kinds;
  std::string description;
  std::string output_description;
  std::set<std::string> profiles;

  std::size_t arity() const { return arg_names.size(); }
  /// `dist_between_objs(object1, object2)`
  std::string signature() const;
};

struct ToolsetProfile {
  std::string label;
  std::vector<std::string> members;

  bool contains(std::string_view tool) const;
};

struct ToolResult {
  std::string tool;
  std::vector<std::string> raw_args;
  std::vector<std::string> resolved_args;
  std::string value;  // rendered return value, or the failure reason
  bool success = false;
  /// Object ids the arguments resolved to (humans and text excluded).
  std::vector<std::string> grounded_objects;

  /// "Call to tool {name} with args {args} returned {value}" on success,
  /// "... failed: {reason}" otherwise.
  std::string message() const;
};

inline constexpr double kDefaultFuzzyThreshold = 0.72;

/// Maps a model-supplied argument to a detected object id. An exact id wins;
/// otherwise ids, display names and aliases are compared after folding case
/// and separators, and the best edit similarity at or above `threshold` wins
/// (ties go to the lexicographically smallest id).
std::optional<std::string> resolve_argument(std::string_view raw, const Scene& scene,
                                            double threshold = kDefaultFuzzyThreshold);

/// Same rule over the names of recognized humans.
std::optional<std::string> resolve_human(std::string_view raw, const Scene& scene,
                                         double threshold = kDefaultFuzzyThreshold);

/// Statements about the user shipped as the default retrieval corpus.
const std::vector<std::string>& default_user_corpus();

using SimilarityScorer = std::function<double(std::string_view, std::string_view)>;

/// Corpus entry with the highest similarity to `query`; earlier entries win
/// ties. The default scorer is token-frequency cosine. Throws on an empty
/// corpus.
std::string retrieve_user_information(std::string_view query,
                                      std::span<const std::string> corpus,
                                      const SimilarityScorer& scorer = {});

struct RegistryOptions {
  double fuzzy_threshold = kDefaultFuzzyThreshold;
  std::vector<std::string> user_corpus = default_user_corpus();
  SimilarityScorer user_info_scorer;
  /// Extra or replacement profiles; members must name registered tools.
  std::vector<ToolsetProfile> profiles;
};

/// Immutable after construction; safe to share between sessions.
class ToolRegistry {
 public:
  static ToolRegistry standard(RegistryOptions options = {});

  const std::vector<ToolSpec>& specs() const { return specs_; }
  const ToolSpec* find(std::string_view name) const;
  /// Throws NotFoundError for an unknown label.
  const ToolsetProfile& profile(std::string_view label) const;
  std::vector<std::string> profile_labels() const;
  double fuzzy_threshold() const { return options_.fuzzy_threshold; }

  /// Runs a registered tool. Never mutates the scene. Unknown tool, wrong
  /// arity, unresolvable arguments and scene errors come back as
  /// `success = false`.
  ToolResult invoke(const ToolCall& call, const Scene& scene) const;

 private:
  using Handler = std::function<std::string(const Scene&, std::span<const std::string>)>;

  ToolRegistry() = default;
  void add(ToolSpec spec, Handler handler);

  RegistryOptions options_;
  std::vector<ToolSpec> specs_;
  std::map<std::string, Handler, std::less<>> handlers_;
  std::map<std::string, ToolsetProfile, std::less<>> profiles_;
};

/// One line per tool of the profile, in profile order.
std::string render_tool_descriptions(const ToolRegistry& registry, const ToolsetProfile& profile);

}  // namespace raider
