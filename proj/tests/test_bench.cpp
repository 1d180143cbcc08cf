#include <doctest.h>

#include "criteria.hpp"
#include "raider/bench.hpp"
#include "raider/error.hpp"

using namespace raider;

namespace {

const Corpus& desk() {
  static const Corpus c = load_corpus(criteria::data_dir() / "corpus");
  return c;
}

}  // namespace

TEST_CASE("criteria: metrics") {
  const auto r = criteria::metrics_math();
  INFO(r.detail);
  CHECK(r.passed);
}

TEST_CASE("criteria: corpus smoke") {
  const auto r = criteria::desk_corpus_smoke();
  INFO(r.detail);
  CHECK(r.passed);
}

TEST_CASE("criteria: relations") {
  const auto r = criteria::relation_oracle();
  INFO(r.detail);
  CHECK(r.passed);
}

TEST_CASE("taxonomy strings") {
  for (auto t : kAllIssueTypes) CHECK(issue_type_from_string(to_string(t)) == t);
  for (auto a : kAllAbstractions) CHECK(abstraction_from_string(to_string(a)) == a);
  CHECK(query_type_from_string("QU") == QueryType::QU);
  CHECK(coarse_label(IssueType::IA) == OutcomeLabel::Ambiguity);
  CHECK(coarse_label(IssueType::IN) == OutcomeLabel::NoIssue);
  CHECK(coarse_label(IssueType::IU4) == OutcomeLabel::Unfeasibility);
  CHECK(method_from_string("visualobs") == Method::VisualObs);
}

TEST_CASE("keyword groups need one synonym each") {
  const std::vector<std::vector<std::string>> groups = {{"far", "reach"}, {"banana"}};
  CHECK(keyword_groups_match("The Banana is out of REACH", groups));
  CHECK_FALSE(keyword_groups_match("The banana is there", groups));
  CHECK(keyword_groups_match("anything", {}));
}

TEST_CASE("case validation") {
  TestCase c;
  c.id = "x";
  c.query = "pick(mug)";
  c.scene = desk().find("ia_mug")->scene;
  c.expected_issue = IssueType::IA;
  c.grounding = {"mug_red"};
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c.grounding.push_back("mug_blue");
  CHECK_NOTHROW(c.validate());
  c.grounding.push_back("mug_green");
  CHECK_THROWS_AS(c.validate(), ValidationError);
  CHECK(desk().find("ia_mug") != nullptr);
  CHECK(desk().find("nope") == nullptr);
}

TEST_CASE("visual observation baseline") {
  BenchConfig cfg;
  cfg.method = Method::VisualObs;
  const auto report = run_suite(desk(), cfg);
  CHECK(report.overall().det == doctest::Approx(100.0));
  // Without tools only an ambiguity answer counts as grounded.
  REQUIRE(report.overall().grnd);
  CHECK(*report.overall().grnd > 0.0);
  CHECK(*report.overall().grnd < 100.0);

  const TestCase& c = *desk().find("ia_mug");
  ScriptedBackend prose(ScriptedTranscript::from_responses({"I think it is fine."}));
  const auto o = visualobs_run(c, c.scene, prose, cfg);
  CHECK(o.label == OutcomeLabel::NoFinalResponse);
  CHECK(prose.remaining() == 0);
}

TEST_CASE("precondition baseline handles only specific structured queries") {
  BenchConfig cfg;
  cfg.method = Method::Precond;
  const auto report = run_suite(desk(), cfg);
  for (const auto& r : report.records) {
    const TestCase& c = *desk().find(r.case_id);
    if (c.query_type == QueryType::QU || c.abstraction != Abstraction::AS)
      CHECK(r.label == OutcomeLabel::NotSupported);
    CHECK(r.label != OutcomeLabel::Ambiguity);
  }
  CHECK(report.overall().det < 100.0);
}

TEST_CASE("suite results do not depend on worker count") {
  BenchConfig one;
  BenchConfig many;
  many.workers = 8;
  const auto a = run_suite(desk(), one);
  const auto b = run_suite(desk(), many);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].case_id == b.records[i].case_id);
    CHECK(a.records[i].label == b.records[i].label);
    CHECK(a.records[i].scores.expl == b.records[i].scores.expl);
  }
  CHECK(a.issue_table_csv() == b.issue_table_csv());
}

TEST_CASE("repeatability") {
  std::vector<TestCase> cases = {*desk().find("ia_mug"), *desk().find("iu1_banana_qs")};
  const auto summary = run_repeatability(cases, 3, BenchConfig{});
  REQUIRE(summary.size() == 2);
  for (const auto& s : summary) {
    CHECK(s.runs.size() == 3);
    CHECK(s.success_rate == doctest::Approx(1.0));
    CHECK(s.min_time <= s.mean_time);
    CHECK(s.mean_time <= s.max_time);
    CHECK(s.stddev_time >= 0.0);
  }
  CHECK_THROWS_AS(run_repeatability(cases, 0, BenchConfig{}), ValidationError);
}

TEST_CASE("recovery evaluation") {
  const auto& cases = desk().cases;
  const auto expl = run_recovery_eval(cases, RecoveryContext::Explanation, BenchConfig{});
  const auto both = run_recovery_eval(cases, RecoveryContext::ExplanationAndScene, BenchConfig{});
  CHECK(expl.records.size() == 12);
  CHECK(both.records.size() == 12);
  CHECK(both.recov_plan() == doctest::Approx(100.0));
  CHECK(expl.recov_plan() < 100.0);
  for (const auto& r : expl.records) {
    if (!r.success) {
      CHECK(r.case_id == "iu2_bin_name");
      CHECK(r.reason == "goal");
    }
  }
}

TEST_CASE("goal checks") {
  const TestCase& c = *desk().find("ia_mug");
  Scene s = c.scene;
  ExecutionLog log;
  RecoveryGoal g;
  g.holding = "mug_red";
  CHECK_FALSE(goal_satisfied(g, s, log));
  s.apply(mutation::SetRobotHolding{"mug_red"});
  CHECK(goal_satisfied(g, s, log));
  g.utterance_keywords = {{"which"}};
  CHECK_FALSE(goal_satisfied(g, s, log));
  log.entries.push_back({ExecutionEntry::Kind::Said, 0, "say(\"Which one?\")", "Which one?", {}});
  CHECK(goal_satisfied(g, s, log));
}

TEST_CASE("report json") {
  const auto report = run_suite(desk(), BenchConfig{});
  const Json j = report.to_json();
  CHECK(j.contains("records"));
  CHECK(j.dump().find("\"IU6\"") != std::string::npos);
  CHECK(report.overall_csv().starts_with("method,Grnd,Det,Expl,Time\n"));
}
