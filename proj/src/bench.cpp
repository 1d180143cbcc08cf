#include "raider/bench.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <thread>

#include "raider/error.hpp"
#include "raider/text.hpp"

namespace raider {

// ---------------------------------------------------------------------------
// Taxonomy

std::string_view to_string(IssueType t) {
  switch (t) {
    case IssueType::IA: return "IA";
    case IssueType::IN: return "IN";
    case IssueType::IU1: return "IU1";
    case IssueType::IU2: return "IU2";
    case IssueType::IU3: return "IU3";
    case IssueType::IU4: return "IU4";
    case IssueType::IU5: return "IU5";
    case IssueType::IU6: return "IU6";
  }
  return "?";
}

std::string_view to_string(QueryType t) { return t == QueryType::QS ? "QS" : "QU"; }

std::string_view to_string(Abstraction a) {
  switch (a) {
    case Abstraction::AS: return "AS";
    case Abstraction::AN: return "AN";
    case Abstraction::AR: return "AR";
    case Abstraction::AC: return "AC";
  }
  return "?";
}

std::optional<IssueType> issue_type_from_string(std::string_view s) {
  for (auto t : kAllIssueTypes) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

std::optional<QueryType> query_type_from_string(std::string_view s) {
  if (s == "QS") return QueryType::QS;
  if (s == "QU") return QueryType::QU;
  return std::nullopt;
}

std::optional<Abstraction> abstraction_from_string(std::string_view s) {
  for (auto a : kAllAbstractions) {
    if (to_string(a) == s) return a;
  }
  return std::nullopt;
}

OutcomeLabel coarse_label(IssueType t) {
  if (t == IssueType::IA) return OutcomeLabel::Ambiguity;
  if (t == IssueType::IN) return OutcomeLabel::NoIssue;
  return OutcomeLabel::Unfeasibility;
}

// ---------------------------------------------------------------------------
// Corpus

void TestCase::validate() const {
  if (id.empty()) throw ValidationError("test case needs an id");
  if (text::trim(query).empty()) throw ValidationError("empty query", id);
  if (expected_issue == IssueType::IA && grounding.size() < 2)
    throw ValidationError(
        fmt::format("case '{}': an ambiguity case needs at least two grounding ids", id), id);
  for (const auto& g : grounding) {
    if (scene.find(g) == nullptr)
      throw ValidationError(fmt::format("case '{}': grounding id '{}' is not in the scene", id, g),
                            id);
  }
}

namespace {

template <typename T>
T required(const Json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(fmt::format("missing '{}'", key), where);
  try {
    return it->get<T>();
  } catch (const Json::exception&) {
    throw ParseError(fmt::format("'{}' has the wrong type", key), where + "." + key);
  }
}

std::vector<std::vector<std::string>> keyword_groups(const Json& j, const std::string& where) {
  if (j.is_null()) return {};
  if (!j.is_array()) throw ParseError("keyword groups must be an array", where);
  std::vector<std::vector<std::string>> out;
  for (const auto& g : j) {
    if (g.is_string()) {
      out.push_back({g.get<std::string>()});
    } else if (g.is_array()) {
      out.push_back(g.get<std::vector<std::string>>());
    } else {
      throw ParseError("keyword group must be a string or an array", where);
    }
  }
  return out;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw NotFoundError(fmt::format("cannot open '{}'", p.string()));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TestCase parse_case(const Json& j, const std::filesystem::path& scene_dir) {
  if (!j.is_object()) throw ParseError("test case must be an object");
  TestCase c;
  c.id = required<std::string>(j, "id", "case");
  const std::string where = c.id;
  c.query = required<std::string>(j, "query", where);
  const auto qt = query_type_from_string(required<std::string>(j, "query_type", where));
  const auto ab = abstraction_from_string(required<std::string>(j, "abstraction", where));
  const auto it = issue_type_from_string(required<std::string>(j, "expected_issue", where));
  if (!qt) throw ParseError("unknown query_type", where + ".query_type");
  if (!ab) throw ParseError("unknown abstraction", where + ".abstraction");
  if (!it) throw ParseError("unknown expected_issue", where + ".expected_issue");
  c.query_type = *qt;
  c.abstraction = *ab;
  c.expected_issue = *it;
  c.grounding = j.value("grounding", std::vector<std::string>{});
  c.explanation_keywords =
      keyword_groups(j.value("explanation_keywords", Json()), where + ".explanation_keywords");
  c.profile = j.value("profile", std::string("household"));
  c.scene_ref = required<std::string>(j, "scene", where);
  c.scene = load_scene_file((scene_dir / c.scene_ref).string());
  c.script = j.value("script", std::vector<std::string>{});
  if (j.contains("visualobs_script")) c.visualobs_script = j["visualobs_script"].get<std::string>();
  if (j.contains("recovery")) {
    const auto& r = j["recovery"];
    RecoverySpec spec;
    const Json goal = r.value("goal", Json::object());
    for (const auto& s : goal.value("states", Json::array()))
      spec.goal.states.push_back({required<std::string>(s, "id", where + ".recovery.goal.states"),
                                  required<std::string>(s, "state", where + ".recovery.goal.states"),
                                  s.value("value", true)});
    spec.goal.path_free = goal.value("path_free", std::vector<std::string>{});
    if (goal.contains("holding") && goal["holding"].is_string())
      spec.goal.holding = goal["holding"].get<std::string>();
    spec.goal.utterance_keywords = keyword_groups(goal.value("utterance_keywords", Json()),
                                                  where + ".recovery.goal.utterance_keywords");
    spec.channel_answers = r.value("answers", Json::array());
    if (r.contains("plan")) spec.plans["default"] = r["plan"].get<std::string>();
    const Json plans = r.value("plans", Json::object());
    for (const auto& [k, v] : plans.items())
      spec.plans[k] = v.get<std::string>();
    c.recovery = std::move(spec);
  }
  c.validate();
  return c;
}

TestCase load_case(const std::filesystem::path& file, const std::filesystem::path& corpus_dir) {
  const std::string doc = read_file(file);
  const Json j = Json::parse(doc, nullptr, false);
  if (j.is_discarded()) throw ParseError("invalid JSON", file.string());
  try {
    return parse_case(j, corpus_dir);
  } catch (const ParseError& e) {
    throw ParseError(e.what(), file.string());
  }
}

const TestCase* Corpus::find(std::string_view id) const {
  for (const auto& c : cases) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

Corpus load_corpus(const std::filesystem::path& dir) {
  const auto index_path = dir / "index.json";
  const Json index = Json::parse(read_file(index_path), nullptr, false);
  if (index.is_discarded() || !index.is_object())
    throw ParseError("invalid index", index_path.string());
  Corpus corpus;
  corpus.root = dir;
  corpus.name = index.value("name", dir.filename().string());
  for (const auto& rel : index.value("cases", std::vector<std::string>{}))
    corpus.cases.push_back(load_case(dir / rel, dir));
  std::set<std::string> ids;
  for (const auto& c : corpus.cases) {
    if (!ids.insert(c.id).second)
      throw ValidationError(fmt::format("duplicate case id '{}'", c.id), c.id);
  }
  return corpus;
}

// ---------------------------------------------------------------------------
// Scoring

bool keyword_groups_match(std::string_view text,
                          const std::vector<std::vector<std::string>>& groups) {
  return std::all_of(groups.begin(), groups.end(), [&](const auto& group) {
    return std::any_of(group.begin(), group.end(),
                       [&](const std::string& k) { return text::contains_ci(text, k); });
  });
}

CaseScores score_case(const TestCase& test_case, const AgentOutcome& outcome) {
  CaseScores s;
  s.det = outcome.label == coarse_label(test_case.expected_issue);
  s.expl = s.det && keyword_groups_match(outcome.explanation, test_case.explanation_keywords);
  if (!test_case.grounding.empty()) {
    const bool ambiguity_hit = test_case.expected_issue == IssueType::IA &&
                               outcome.label == OutcomeLabel::Ambiguity;
    const bool covered = std::all_of(
        test_case.grounding.begin(), test_case.grounding.end(), [&](const std::string& id) {
          return std::find(outcome.grounding.begin(), outcome.grounding.end(), id) !=
                 outcome.grounding.end();
        });
    s.grnd = covered || ambiguity_hit;
  }
  s.time = outcome.stats.elapsed_seconds;
  return s;
}

// ---------------------------------------------------------------------------
// Methods

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Raider: return "raider";
    case Method::Precond: return "precond";
    case Method::VisualObs: return "visualobs";
  }
  return "?";
}

std::optional<Method> method_from_string(std::string_view s) {
  const std::string v = text::to_lower(s);
  if (v == "raider") return Method::Raider;
  if (v == "precond") return Method::Precond;
  if (v == "visualobs" || v == "llmvisualobs") return Method::VisualObs;
  return std::nullopt;
}

ModelVerdict precond_baseline(const TestCase& test_case, const Scene& scene) {
  if (test_case.query_type != QueryType::QS || test_case.abstraction != Abstraction::AS)
    return {OutcomeLabel::NotSupported,
            "only structured queries with specific arguments are supported"};
  const auto query = ActionQuery::parse(test_case.query);
  if (!query) return {OutcomeLabel::NotSupported, "query is not a structured action"};
  return judge_action(*query, scene);
}

AgentOutcome visualobs_run(const TestCase& test_case, const Scene& scene, ChatBackend& backend,
                           const BenchConfig& config) {
  using Clock = std::chrono::steady_clock;
  const auto started = Clock::now();
  AgentOutcome outcome;
  PromptConfig prompt = PromptConfig::defaults(test_case.profile);
  prompt.variant = config.variant;
  outcome.log = {{Role::System, build_visualobs_prompt(prompt, describe_scene(scene))},
                 {Role::User, build_user_message(test_case.query, scene.detectable_ids())}};
  try {
    ChatMessage reply =
        backend.complete(outcome.log, config.chat, std::min(config.deadline, config.chat.request_timeout));
    outcome.stats.iterations = 1;
    outcome.log.push_back(reply);
    if (const auto final_response = parse_final_response(reply.content)) {
      outcome.label = final_response->label;
      outcome.explanation = final_response->explanation;
    } else {
      outcome.label = OutcomeLabel::NoFinalResponse;
    }
  } catch (const TimeoutError& e) {
    outcome.label = OutcomeLabel::Timeout;
    outcome.error = e.what();
  } catch (const TransportError& e) {
    outcome.label = OutcomeLabel::TransportFailure;
    outcome.error = e.what();
  } catch (const ScriptError& e) {
    outcome.label = OutcomeLabel::TransportFailure;
    outcome.error = e.what();
  }
  outcome.stats.elapsed_seconds = std::chrono::duration<double>(Clock::now() - started).count();
  return outcome;
}

// ---------------------------------------------------------------------------
// Records and aggregates

Json CaseRecord::to_json() const {
  Json j = {{"case_id", case_id},
            {"issue", to_string(issue)},
            {"query_type", to_string(query_type)},
            {"abstraction", to_string(abstraction)},
            {"method", method},
            {"label", to_string(label)},
            {"explanation", explanation},
            {"grounding", grounding},
            {"det", scores.det},
            {"expl", scores.expl},
            {"grnd", scores.grnd ? Json(*scores.grnd) : Json()},
            {"time", scores.time},
            {"iterations", iterations},
            {"tool_calls", tool_calls},
            {"warnings", warnings}};
  if (!error.empty()) j["error"] = error;
  return j;
}

Json Aggregate::to_json() const {
  return {{"cases", cases},         {"grounding_cases", grounding_cases},
          {"grnd", grnd ? Json(*grnd) : Json()},
          {"det", det},             {"expl", expl},
          {"time", time}};
}

Aggregate aggregate(std::span<const CaseRecord> records) {
  Aggregate a;
  a.cases = records.size();
  if (records.empty()) return a;
  double det = 0, expl = 0, time = 0, grnd = 0;
  for (const auto& r : records) {
    det += r.scores.det ? 1 : 0;
    expl += r.scores.expl ? 1 : 0;
    time += r.scores.time;
    if (r.scores.grnd) {
      ++a.grounding_cases;
      grnd += *r.scores.grnd ? 1 : 0;
    }
  }
  const double n = static_cast<double>(records.size());
  a.det = 100.0 * det / n;
  a.expl = 100.0 * expl / n;
  a.time = time / n;
  if (a.grounding_cases > 0) a.grnd = 100.0 * grnd / static_cast<double>(a.grounding_cases);
  return a;
}

namespace {

template <typename Key, typename F>
std::map<Key, Aggregate> group_by(const std::vector<CaseRecord>& records, F key) {
  std::map<Key, std::vector<CaseRecord>> groups;
  for (const auto& r : records) groups[key(r)].push_back(r);
  std::map<Key, Aggregate> out;
  for (const auto& [k, rs] : groups) out[k] = aggregate(rs);
  return out;
}

std::string pct(std::optional<double> v) { return v ? fmt::format("{:.2f}", *v) : std::string(); }

}  // namespace

Aggregate RunReport::overall() const { return aggregate(records); }

std::map<IssueType, Aggregate> RunReport::by_issue() const {
  return group_by<IssueType>(records, [](const CaseRecord& r) { return r.issue; });
}

std::map<Abstraction, Aggregate> RunReport::by_abstraction() const {
  return group_by<Abstraction>(records, [](const CaseRecord& r) { return r.abstraction; });
}

std::map<QueryType, Aggregate> RunReport::by_query_type() const {
  return group_by<QueryType>(records, [](const CaseRecord& r) { return r.query_type; });
}

Json RunReport::to_json() const {
  Json recs = Json::array();
  for (const auto& r : records) recs.push_back(r.to_json());
  Json issues = Json::object();
  for (const auto& [k, a] : by_issue()) issues[std::string(to_string(k))] = a.to_json();
  Json abstractions = Json::object();
  for (const auto& [k, a] : by_abstraction()) abstractions[std::string(to_string(k))] = a.to_json();
  Json queries = Json::object();
  for (const auto& [k, a] : by_query_type()) queries[std::string(to_string(k))] = a.to_json();
  return {{"corpus", corpus},
          {"method", method},
          {"variant", variant},
          {"overall", overall().to_json()},
          {"by_issue", issues},
          {"by_abstraction", abstractions},
          {"by_query_type", queries},
          {"records", recs}};
}

std::string RunReport::issue_table_csv() const {
  const auto issues = by_issue();
  std::string header = "method";
  std::string row = method;
  for (auto t : kAllIssueTypes) {
    header += fmt::format(",{}", to_string(t));
    auto it = issues.find(t);
    row += "," + (it == issues.end() ? std::string() : pct(it->second.expl));
  }
  return header + "\n" + row + "\n";
}

std::string RunReport::overall_csv() const {
  const Aggregate a = overall();
  return fmt::format("method,Grnd,Det,Expl,Time\n{},{},{},{},{:.3f}\n", method, pct(a.grnd),
                     pct(a.det), pct(a.expl), a.time);
}

// ---------------------------------------------------------------------------
// Running

namespace {

std::unique_ptr<ChatBackend> backend_for(const BenchConfig& config,
                                         const std::vector<std::string>& script) {
  if (config.chat.backend == BackendKind::Live) return make_backend(config.chat);
  return make_backend(config.chat, ScriptedTranscript::from_responses(script));
}

AgentOutcome detect(const TestCase& test_case, const BenchConfig& config, const ToolRegistry& registry) {
  Scene scene = test_case.scene;
  switch (config.method) {
    case Method::Raider: {
      auto backend = backend_for(config, test_case.script);
      RunConfig rc;
      rc.variant = config.variant;
      rc.profile = test_case.profile;
      rc.chat = config.chat;
      rc.deadline = config.deadline;
      rc.max_iterations = config.max_iterations;
      ProgramFlowManager pfm(*backend, registry, rc);
      return pfm.run(test_case.query, scene);
    }
    case Method::Precond: {
      const auto started = std::chrono::steady_clock::now();
      const ModelVerdict v = precond_baseline(test_case, scene);
      AgentOutcome o;
      o.label = v.label;
      o.explanation = v.explanation;
      o.stats.elapsed_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      return o;
    }
    case Method::VisualObs: {
      std::vector<std::string> script;
      if (test_case.visualobs_script) script.push_back(*test_case.visualobs_script);
      auto backend = backend_for(config, script);
      return visualobs_run(test_case, scene, *backend, config);
    }
  }
  return {};
}

CaseRecord record_for(const TestCase& c, const BenchConfig& config, const AgentOutcome& o) {
  CaseRecord r;
  r.case_id = c.id;
  r.issue = c.expected_issue;
  r.query_type = c.query_type;
  r.abstraction = c.abstraction;
  r.method = std::string(to_string(config.method));
  r.label = o.label;
  r.explanation = o.explanation;
  r.grounding = o.grounding;
  r.scores = score_case(c, o);
  r.iterations = o.stats.iterations;
  r.tool_calls = o.stats.tool_calls;
  for (auto k : kAllWarnings) r.warnings[std::string(kind_key(k))] = o.stats.warning_count(k);
  r.error = o.error;
  return r;
}

CaseRecord run_case_with(const TestCase& test_case, const BenchConfig& config,
                         const ToolRegistry& registry) {
  try {
    return record_for(test_case, config, detect(test_case, config, registry));
  } catch (const std::exception& e) {
    AgentOutcome failed;
    failed.label = OutcomeLabel::TransportFailure;
    failed.error = e.what();
    spdlog::warn("case {} failed: {}", test_case.id, e.what());
    return record_for(test_case, config, failed);
  }
}

}  // namespace

CaseRecord run_case(const TestCase& test_case, const BenchConfig& config) {
  const ToolRegistry registry = ToolRegistry::standard(config.registry);
  return run_case_with(test_case, config, registry);
}

RunReport run_suite(const Corpus& corpus, const BenchConfig& config) {
  const ToolRegistry registry = ToolRegistry::standard(config.registry);
  RunReport report;
  report.corpus = corpus.name;
  report.method = std::string(to_string(config.method));
  report.variant = config.method == Method::Raider ? std::string(to_string(config.variant)) : "";
  report.records.resize(corpus.cases.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < corpus.cases.size(); i = next++)
      report.records[i] = run_case_with(corpus.cases[i], config, registry);
  };
  const unsigned n = std::max(1u, std::min<unsigned>(config.workers,
                                                     static_cast<unsigned>(corpus.cases.size())));
  std::vector<std::thread> threads;
  for (unsigned t = 1; t < n; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  return report;
}

Json RepeatSummary::to_json() const {
  Json runs_json = Json::array();
  for (const auto& r : runs) runs_json.push_back(r.to_json());
  return {{"case_id", case_id},   {"runs", runs_json},       {"success_rate", success_rate},
          {"mean_time", mean_time}, {"min_time", min_time}, {"max_time", max_time},
          {"stddev_time", stddev_time}};
}

std::vector<RepeatSummary> run_repeatability(std::span<const TestCase> cases, int n,
                                             const BenchConfig& config) {
  if (n < 1) throw ValidationError("repeat count must be at least 1");
  const ToolRegistry registry = ToolRegistry::standard(config.registry);
  std::vector<RepeatSummary> out;
  for (const auto& c : cases) {
    RepeatSummary s;
    s.case_id = c.id;
    for (int i = 0; i < n; ++i) s.runs.push_back(run_case_with(c, config, registry));
    double ok = 0, sum = 0, sq = 0;
    s.min_time = s.runs.front().scores.time;
    s.max_time = s.min_time;
    for (const auto& r : s.runs) {
      ok += r.scores.expl ? 1 : 0;
      sum += r.scores.time;
      s.min_time = std::min(s.min_time, r.scores.time);
      s.max_time = std::max(s.max_time, r.scores.time);
    }
    s.success_rate = ok / n;
    s.mean_time = sum / n;
    for (const auto& r : s.runs) sq += (r.scores.time - s.mean_time) * (r.scores.time - s.mean_time);
    s.stddev_time = std::sqrt(sq / n);
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Recovery evaluation

Json RecoveryRecord::to_json() const {
  Json j = {{"case_id", case_id},
            {"issue", to_string(issue)},
            {"success", success},
            {"reason", reason},
            {"plan", plan}};
  if (execution) j["execution"] = execution->to_json();
  return j;
}

double RecoveryReport::recov_plan() const {
  std::size_t n = 0, ok = 0;
  for (const auto& r : records) {
    if (r.reason == "detection") continue;
    ++n;
    ok += r.success ? 1 : 0;
  }
  return n == 0 ? 0.0 : 100.0 * static_cast<double>(ok) / static_cast<double>(n);
}

std::map<IssueType, double> RecoveryReport::by_issue() const {
  std::map<IssueType, std::pair<int, int>> counts;
  for (const auto& r : records) {
    if (r.reason == "detection") continue;
    auto& [ok, n] = counts[r.issue];
    ++n;
    ok += r.success ? 1 : 0;
  }
  std::map<IssueType, double> out;
  for (const auto& [k, v] : counts) out[k] = 100.0 * v.first / v.second;
  return out;
}

Json RecoveryReport::to_json() const {
  Json recs = Json::array();
  for (const auto& r : records) recs.push_back(r.to_json());
  Json issues = Json::object();
  for (const auto& [k, v] : by_issue()) issues[std::string(to_string(k))] = v;
  return {{"context", context}, {"recov_plan", recov_plan()}, {"by_issue", issues},
          {"records", recs}};
}

bool goal_satisfied(const RecoveryGoal& goal, const Scene& scene, const ExecutionLog& log) {
  for (const auto& s : goal.states) {
    const auto* o = scene.find(s.id);
    if (o == nullptr || o->state(s.state) != s.value) return false;
  }
  for (const auto& target : goal.path_free) {
    if (!check_free_path(scene, target)) return false;
  }
  if (goal.holding && scene.robot().holding != goal.holding) return false;
  if (!goal.utterance_keywords.empty()) {
    const auto said = log.utterances();
    const bool matched = std::all_of(
        goal.utterance_keywords.begin(), goal.utterance_keywords.end(), [&](const auto& group) {
          return std::any_of(said.begin(), said.end(), [&](const std::string& u) {
            return keyword_groups_match(u, {group});
          });
        });
    if (!matched) return false;
  }
  return true;
}

RecoveryReport run_recovery_eval(std::span<const TestCase> cases, RecoveryContext context,
                                 const BenchConfig& config) {
  const ToolRegistry registry = ToolRegistry::standard(config.registry);
  BenchConfig detection = config;
  detection.method = Method::Raider;
  RecoveryReport report;
  report.context = std::string(to_string(context));
  for (const auto& c : cases) {
    if (!c.recovery) continue;
    RecoveryRecord rec;
    rec.case_id = c.id;
    rec.issue = c.expected_issue;
    const AgentOutcome outcome = detect(c, detection, registry);
    if (!score_case(c, outcome).det || outcome.label == OutcomeLabel::NoIssue) {
      rec.reason = "detection";
      report.records.push_back(std::move(rec));
      continue;
    }
    Scene scene = c.scene;
    try {
      const auto query = RecoveryQuery::from_outcome(c.query, outcome, scene);
      const std::string description =
          context == RecoveryContext::Explanation ? std::string() : describe_scene(scene);
      std::unique_ptr<ChatBackend> planner;
      if (config.chat.backend == BackendKind::Live) {
        planner = make_backend(config.chat);
      } else {
        auto it = c.recovery->plans.find(std::string(to_string(context)));
        if (it == c.recovery->plans.end()) it = c.recovery->plans.find("default");
        if (it == c.recovery->plans.end()) throw NotFoundError("no scripted plan");
        planner = make_backend(config.chat, ScriptedTranscript::from_responses({it->second}));
      }
      const auto messages = build_recovery_messages(query, context, description);
      rec.plan = planner->complete(messages, config.chat).content;
      const RecoveryPlan plan = parse_plan(rec.plan);
      ScriptedChannel channel = ScriptedChannel::from_json(c.recovery->channel_answers);
      rec.execution = execute_plan(plan, scene, channel);
      if (!rec.execution->completed) {
        rec.reason = "halted";
      } else if (!goal_satisfied(c.recovery->goal, scene, *rec.execution)) {
        rec.reason = "goal";
      } else {
        rec.success = true;
        rec.reason = "ok";
      }
    } catch (const PlanError&) {
      rec.reason = "validation";
    } catch (const std::exception& e) {
      rec.reason = "planner";
      spdlog::warn("recovery for case {} failed: {}", c.id, e.what());
    }
    report.records.push_back(std::move(rec));
  }
  return report;
}

}  // namespace raider
