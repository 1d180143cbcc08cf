#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "raider/action_model.hpp"
#include "raider/pfm.hpp"
#include "raider/recovery.hpp"
#include "raider/scene.hpp"

namespace raider {

// ---------------------------------------------------------------------------
// Taxonomy

/// IA ambiguity, IN no issue, IU1 out of reach, IU2 obstructed, IU3 absent,
/// IU4 wrong state, IU5 wrong properties, IU6 robot-side.
enum class IssueType { IA, IN, IU1, IU2, IU3, IU4, IU5, IU6 };
inline constexpr IssueType kAllIssueTypes[] = {IssueType::IA,  IssueType::IN,  IssueType::IU1,
                                               IssueType::IU2, IssueType::IU3, IssueType::IU4,
                                               IssueType::IU5, IssueType::IU6};

enum class QueryType { QS, QU };
enum class Abstraction { AS, AN, AR, AC };
inline constexpr Abstraction kAllAbstractions[] = {Abstraction::AS, Abstraction::AN,
                                                   Abstraction::AR, Abstraction::AC};

std::string_view to_string(IssueType t);
std::string_view to_string(QueryType t);
std::string_view to_string(Abstraction a);
std::optional<IssueType> issue_type_from_string(std::string_view s);
std::optional<QueryType> query_type_from_string(std::string_view s);
std::optional<Abstraction> abstraction_from_string(std::string_view s);

/// IA -> ambiguity, IN -> no_issue, IU* -> unfeasibility.
OutcomeLabel coarse_label(IssueType t);

// ---------------------------------------------------------------------------
// Corpus

struct StateAssertion {
  std::string id;
  std::string state;
  bool value = true;
};

/// Every listed part must hold after the plan ran to completion.
struct RecoveryGoal {
  std::vector<StateAssertion> states;
  std::vector<std::string> path_free;
  std::optional<std::string> holding;
  /// Each group needs one synonym in some asked question or said sentence.
  std::vector<std::vector<std::string>> utterance_keywords;

  bool empty() const {
    return states.empty() && path_free.empty() && !holding && utterance_keywords.empty();
  }
};

struct RecoverySpec {
  RecoveryGoal goal;
  Json channel_answers = Json::array();
  /// Scripted planner output per context ("explanation", "scene",
  /// "explanation+scene"); "default" covers missing ones.
  std::map<std::string, std::string> plans;
};

struct TestCase {
  std::string id;
  std::string query;
  QueryType query_type = QueryType::QS;
  Abstraction abstraction = Abstraction::AS;
  IssueType expected_issue = IssueType::IN;
  std::vector<std::string> grounding;
  std::vector<std::vector<std::string>> explanation_keywords;
  std::string profile = "household";
  std::string scene_ref;
  Scene scene;
  /// Assistant responses for the scripted backend.
  std::vector<std::string> script;
  std::optional<std::string> visualobs_script;
  std::optional<RecoverySpec> recovery;

  /// Throws ValidationError for IA cases with fewer than two grounding ids.
  void validate() const;
};

/// `scene_dir` resolves the case's scene reference.
TestCase parse_case(const Json& j, const std::filesystem::path& scene_dir);
TestCase load_case(const std::filesystem::path& file, const std::filesystem::path& corpus_dir);

struct Corpus {
  std::string name;
  std::filesystem::path root;
  std::vector<TestCase> cases;

  const TestCase* find(std::string_view id) const;
};

/// Reads `<dir>/index.json`: {"name": ..., "cases": [relative paths]}.
Corpus load_corpus(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Scoring

struct CaseScores {
  bool det = false;
  bool expl = false;
  /// Only for cases with expected grounding.
  std::optional<bool> grnd;
  double time = 0.0;
};

bool keyword_groups_match(std::string_view text,
                          const std::vector<std::vector<std::string>>& groups);

/// Pure function of its inputs.
CaseScores score_case(const TestCase& test_case, const AgentOutcome& outcome);

// ---------------------------------------------------------------------------
// Methods

enum class Method { Raider, Precond, VisualObs };
std::string_view to_string(Method m);
std::optional<Method> method_from_string(std::string_view s);

/// Structured, specific queries only; everything else is not_supported.
ModelVerdict precond_baseline(const TestCase& test_case, const Scene& scene);

struct BenchConfig {
  Method method = Method::Raider;
  ProcedureVariant variant = ProcedureVariant::QgenGrnd;
  /// Scripted uses the per-case scripts; Live talks to the configured
  /// endpoint.
  ChatConfig chat;
  std::chrono::milliseconds deadline{20000};
  int max_iterations = 12;
  unsigned workers = 1;
  RegistryOptions registry;
};

/// Single model call with the tool-free prompt over the full scene
/// description. A reply without a final response is a failure
/// (no_final_response); there is no second attempt.
AgentOutcome visualobs_run(const TestCase& test_case, const Scene& scene, ChatBackend& backend,
                           const BenchConfig& config);

// ---------------------------------------------------------------------------
// Reports

struct CaseRecord {
  std::string case_id;
  IssueType issue = IssueType::IN;
  QueryType query_type = QueryType::QS;
  Abstraction abstraction = Abstraction::AS;
  std::string method;
  OutcomeLabel label = OutcomeLabel::NoFinalResponse;
  std::string explanation;
  std::vector<std::string> grounding;
  CaseScores scores;
  int iterations = 0;
  int tool_calls = 0;
  std::map<std::string, int> warnings;
  std::string error;

  Json to_json() const;
};

struct Aggregate {
  std::size_t cases = 0;
  std::size_t grounding_cases = 0;
  /// Percentages; grnd is nullopt without grounding cases.
  std::optional<double> grnd;
  double det = 0.0;
  double expl = 0.0;
  /// Mean seconds per case.
  double time = 0.0;

  Json to_json() const;
};

Aggregate aggregate(std::span<const CaseRecord> records);

struct RunReport {
  std::string corpus;
  std::string method;
  std::string variant;
  std::vector<CaseRecord> records;

  Aggregate overall() const;
  /// Issue types present in the records, in taxonomy order.
  std::map<IssueType, Aggregate> by_issue() const;
  std::map<Abstraction, Aggregate> by_abstraction() const;
  std::map<QueryType, Aggregate> by_query_type() const;

  Json to_json() const;
  /// method,IA,IN,IU1,...,IU6 with Expl percentages.
  std::string issue_table_csv() const;
  /// method,Grnd,Det,Expl,Time.
  std::string overall_csv() const;
};

CaseRecord run_case(const TestCase& test_case, const BenchConfig& config);
RunReport run_suite(const Corpus& corpus, const BenchConfig& config);

struct RepeatSummary {
  std::string case_id;
  std::vector<CaseRecord> runs;
  double success_rate = 0.0;  // share of runs with Expl
  double mean_time = 0.0;
  double min_time = 0.0;
  double max_time = 0.0;
  double stddev_time = 0.0;

  Json to_json() const;
};

/// `n` independent runs per case; throws ValidationError for n < 1.
std::vector<RepeatSummary> run_repeatability(std::span<const TestCase> cases, int n,
                                             const BenchConfig& config);

struct RecoveryRecord {
  std::string case_id;
  IssueType issue = IssueType::IN;
  bool success = false;
  /// "ok", "detection", "validation", "halted", "goal", "planner".
  std::string reason;
  std::string plan;
  std::optional<ExecutionLog> execution;

  Json to_json() const;
};

struct RecoveryReport {
  std::string context;
  std::vector<RecoveryRecord> records;

  /// Percentage of successful records.
  double recov_plan() const;
  std::map<IssueType, double> by_issue() const;
  Json to_json() const;
};

/// True when the scene and the execution log satisfy every part of the goal.
bool goal_satisfied(const RecoveryGoal& goal, const Scene& scene, const ExecutionLog& log);

/// Runs detection, then plans from the outcome with the chosen context and
/// executes the plan with the case's scripted answers. Cases without a
/// recovery spec are skipped.
RecoveryReport run_recovery_eval(std::span<const TestCase> cases, RecoveryContext context,
                                 const BenchConfig& config);

}  // namespace raider
