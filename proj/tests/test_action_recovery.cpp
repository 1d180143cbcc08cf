#include <doctest.h>
#include <fmt/format.h>

#include "criteria.hpp"
#include "raider/action_model.hpp"
#include "raider/error.hpp"
#include "raider/recovery.hpp"

using namespace raider;
using namespace std::chrono_literals;

namespace {

Scene corpus_scene(const char* name) {
  return load_scene_file((criteria::data_dir() / "corpus/scenes" / name).string());
}

Scene demo(const char* name) {
  return load_scene_file((criteria::data_dir() / "scenes/demo" / name).string());
}

std::string final_json(const char* label, const char* why) {
  return fmt::format(R"({{"final_response": "{}", "explanation": "{}"}})", label, why);
}

}  // namespace

TEST_CASE("action query parsing") {
  const auto q = ActionQuery::parse(" pick( 'apple' , counter ) ");
  REQUIRE(q);
  CHECK(q->name == "pick");
  CHECK(q->args == std::vector<std::string>{"apple", "counter"});
  CHECK(q->to_string() == "pick(apple, counter)");
  CHECK(ActionQuery::parse("turnon()")->args.empty());
  CHECK_FALSE(ActionQuery::parse("pick apple"));
  CHECK_FALSE(ActionQuery::parse("pick(a(b))"));
  CHECK_FALSE(ActionQuery::parse("pick(a,,b)"));
  CHECK_FALSE(ActionQuery::parse("(apple)"));
}

TEST_CASE("criteria: precondition table") {
  const auto r = criteria::precond_baseline_table();
  INFO(r.detail);
  CHECK(r.passed);
}

TEST_CASE("verdict wording") {
  const Scene s = corpus_scene("kitchen.json");
  const auto ok = judge_action({"pick", {"apple"}}, s);
  CHECK(ok.label == OutcomeLabel::NoIssue);
  CHECK(ok.explanation ==
        "All preconditions hold: apple is present in the scene; the robot is not holding "
        "anything.");
  const auto bad = judge_action({"open", {"fridge", "x"}}, s);
  CHECK(bad.label == OutcomeLabel::NotSupported);
  const auto closed = judge_action({"pick", {"milk", "fridge"}}, s);
  CHECK(closed.explanation ==
        "Fridge is closed, so pick(milk, fridge) cannot be executed (failed check: is_open "
        "fridge).");
}

TEST_CASE("action effects") {
  Scene s = corpus_scene("kitchen_holding.json");
  const auto effects = action_effects({"place", {"mug_blue", "table"}}, s);
  for (const auto& e : effects) s.apply(e);
  CHECK_FALSE(s.robot().holding);
  const auto& mug = s.object("mug_blue").box;
  const auto& table = s.object("table").box;
  CHECK(mug.bottom() == doctest::Approx(table.top()));
  CHECK(mug.center.x == doctest::Approx(table.center.x));
  CHECK(std::get<mutation::SetState>(action_effects({"turnoff", {"lamp"}}, s)[0]).value == false);
}

TEST_CASE("criteria: recovery language") {
  const auto r = criteria::recovery_dsl();
  INFO(r.detail);
  CHECK(r.passed);
}

TEST_CASE("plan parsing skips prose and rejects bad statements") {
  const auto plan = parse_plan(
      "Here is the plan:\n```\n1. say(\"The path is blocked.\")\n"
      "m = ask(\"Which mug?\")\npick(m)\n```\n");
  REQUIRE(plan.statements.size() == 3);
  CHECK(render_plan(plan) == "say(\"The path is blocked.\")\nm = ask(\"Which mug?\")\npick(m)\n");
  const auto& pick = std::get<PlanCall>(plan.statements[2].body);
  CHECK(pick.args[0].kind == PlanArg::Kind::Variable);

  auto line_of = [](const char* text) -> std::size_t {
    try {
      parse_plan(text);
    } catch (const PlanError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of("say(\"hi\")\nfly(apple)") == 2);
  CHECK(line_of("pick(x)\nx = ask(\"?\")") == 1);
  CHECK(line_of("place(apple)") == 1);
  CHECK(line_of("say(\"a\")\nm = ask(\"?\")\nplace(m, n, o)") == 3);
  CHECK(line_of("turnon(lamp)") == 1);
  CHECK_NOTHROW(parse_plan("turnon(lamp)", {"turnon"}));
}

TEST_CASE("recovery prompt carries action, issue and context") {
  RecoveryQuery q{"pick(mug)", OutcomeLabel::Ambiguity, "There are two mugs.", std::nullopt};
  const auto msgs = build_recovery_messages(q);
  REQUIRE(msgs.size() == 2);
  CHECK(msgs[0].role == Role::System);
  CHECK(msgs[1].content.find("pick(mug)") != std::string::npos);
  CHECK(msgs[1].content.find("ambiguity") != std::string::npos);
  CHECK(msgs[1].content.find("There are two mugs.") != std::string::npos);
  const auto scene_only = build_recovery_messages(q, RecoveryContext::Scene, "A table.");
  CHECK(scene_only[1].content.find("There are two mugs.") == std::string::npos);
  CHECK(scene_only[1].content.find("A table.") != std::string::npos);
  CHECK_THROWS_AS(build_recovery_messages(q, RecoveryContext::Scene), ValidationError);
  RecoveryQuery none{"pick(mug)", OutcomeLabel::NoIssue, "", std::nullopt};
  CHECK_THROWS_AS(build_recovery_messages(none), ValidationError);
  CHECK(recovery_context_from_string("explanation_and_scene") ==
        RecoveryContext::ExplanationAndScene);
}

TEST_CASE("channel mutations land between steps") {
  Scene s = corpus_scene("kitchen.json");
  ScriptedChannel ch = ScriptedChannel::from_json(Json::array(
      {{{"answer", "yes"},
        {"mutations", {{{"kind", "set_state"}, {"id", "fridge"}, {"state", "open"}, {"value", true}}}}}}));
  const auto plan = parse_plan("ask(\"Can you open the fridge?\")\npick(milk, fridge)");
  const auto log = execute_plan(plan, s, ch);
  CHECK(log.completed);
  CHECK(s.robot().holding == std::optional<std::string>("milk"));
  CHECK(log.entries[1].kind == ExecutionEntry::Kind::SceneChanged);
  CHECK(ch.questions().size() == 1);
}

TEST_CASE("running out of answers halts the plan") {
  Scene s = corpus_scene("kitchen.json");
  ScriptedChannel ch;
  const auto log = execute_plan(parse_plan("x = ask(\"?\")\npick(x)"), s, ch);
  CHECK_FALSE(log.completed);
  CHECK(log.entries.back().kind == ExecutionEntry::Kind::Failed);
  CHECK(log.halt_reason.find("timeout") != std::string::npos);
}

TEST_CASE("move drives next to a reachable target") {
  Scene s = corpus_scene("kitchen.json");
  ScriptedChannel ch;
  const auto log = execute_plan(parse_plan("move(trash_can)"), s, ch);
  REQUIRE(log.completed);
  const Vec3 p = s.robot().position;
  const auto& bin = s.object("trash_can").box;
  const double planar = bin.distance_to(Vec3{p.x, p.y, bin.center.z});
  CHECK(planar == doctest::Approx(s.robot().body_radius + 0.05));
  CHECK(s.robot().position.z == doctest::Approx(0.9));
}

TEST_CASE("say uses the statement text") {
  Scene s = corpus_scene("kitchen.json");
  ScriptedChannel ch;
  const auto log = execute_plan(parse_plan("say(\"I cannot reach the banana.\")"), s, ch);
  CHECK(ch.utterances() == std::vector<std::string>{"I cannot reach the banana."});
  CHECK(log.utterances() == std::vector<std::string>{"I cannot reach the banana."});
}

TEST_CASE("detect, recover and detect again") {
  Scene s = corpus_scene("kitchen_blocked.json");
  const auto reg = ToolRegistry::standard();
  ScriptedBackend detector(ScriptedTranscript::from_responses(
      {"call_tool{tool: check_free_path, args: [trash_can]}",
       final_json("unfeasibility", "The path to the bin is blocked by a box."),
       "call_tool{tool: check_free_path, args: [trash_can]}",
       final_json("no_issue", "The path is free now.")}));
  ScriptedBackend planner(
      ScriptedTranscript::from_responses({"pick(box)\nplace(box, table)"}));
  ScriptedChannel ch;
  const auto report = run_plan_with_recovery({{"approach trash_can", "move(trash_can)"}}, s, ch,
                                             detector, planner, reg);
  REQUIRE(report.steps.size() == 1);
  const auto& step = report.steps[0];
  INFO(step.failure);
  CHECK(report.completed);
  CHECK(step.detections.size() == 2);
  CHECK(step.plans.size() == 1);
  CHECK(check_free_path(s, "trash_can"));
  CHECK(distance_robot_to(s, "trash_can") < 0.5);
}

TEST_CASE("driver stops when the issue persists") {
  Scene s = demo("step1.json");
  const auto reg = ToolRegistry::standard();
  const std::string blocked = final_json("unfeasibility", "blocked");
  ScriptedBackend detector(ScriptedTranscript::from_responses({blocked, blocked}));
  ScriptedBackend planner(ScriptedTranscript::from_responses({"say(\"Please clear the way.\")"}));
  ScriptedChannel ch;
  DriverConfig cfg;
  cfg.max_recoveries_per_step = 1;
  const auto report =
      run_plan_with_recovery({{"approach medicine_counter", ""}}, s, ch, detector, planner, reg, cfg);
  CHECK_FALSE(report.completed);
  CHECK(report.steps[0].failure.find("persists") != std::string::npos);
  CHECK(ch.utterances().size() == 1);
}
