#include <doctest.h>

#include <fstream>

#include "criteria.hpp"
#include "raider/error.hpp"
#include "raider/pfm.hpp"
#include "raider/prompts.hpp"

using namespace raider;

namespace {

Scene demo(const char* name) {
  return load_scene_file((criteria::data_dir() / "scenes/demo" / name).string());
}

class Recorder : public RunObserver {
 public:
  std::vector<MessageKind> kinds;
  std::vector<std::string> tools;
  int outcomes = 0;
  int between = 0;

  void on_message(const ChatMessage&, MessageKind k, std::optional<WarningKind>) override {
    kinds.push_back(k);
  }
  void on_tool_call(const ToolCall& c) override { tools.push_back(c.tool); }
  void on_outcome(const AgentOutcome&) override { ++outcomes; }
  void between_iterations(Scene&) override { ++between; }
};

class Broken : public ChatBackend {
 public:
  using ChatBackend::complete;
  ChatMessage complete(std::span<const ChatMessage>, const ChatConfig&,
                       std::chrono::milliseconds) override {
    throw TransportError("connection refused");
  }
};

const std::string kFinal = R"({"final_response": "no_issue", "explanation": "fine"})";

}  // namespace

TEST_CASE("system prompt is deterministic and carries the call grammar") {
  const auto r = ToolRegistry::standard();
  const std::string tools = render_tool_descriptions(r, r.profile("household"));
  const auto cfg = PromptConfig::defaults("household");
  const std::string a = build_system_prompt(cfg, tools);
  CHECK(a == build_system_prompt(cfg, tools));
  CHECK(a.find(kToolCallGrammar) != std::string::npos);
  CHECK(a.find(tools) != std::string::npos);
  CHECK(a.find("ambiguity") != std::string::npos);
  const auto assist = PromptConfig::defaults("assistive");
  CHECK(assist.constraints != cfg.constraints);
}

TEST_CASE("variant names") {
  for (auto v : {ProcedureVariant::QgenGrnd, ProcedureVariant::Qgen, ProcedureVariant::Grnd,
                 ProcedureVariant::Basic})
    CHECK(variant_from_string(to_string(v)) == v);
  CHECK(variant_from_string("qgen_grnd") == ProcedureVariant::QgenGrnd);
  CHECK_FALSE(variant_from_string("FULL"));
}

TEST_CASE("user message lists detected objects") {
  const std::vector<std::string> objs = {"apple", "knife"};
  const std::string m = build_user_message("pick apple", objs);
  CHECK(m.find("pick apple") == 0);
  CHECK(m.find("apple") != std::string::npos);
  CHECK(m.find("knife") != std::string::npos);
}

TEST_CASE("visual observation prompt drops the tool parts") {
  const auto cfg = PromptConfig::defaults("household");
  const std::string p = build_visualobs_prompt(cfg, "A red mug is on the counter.");
  CHECK(p.find("A red mug is on the counter.") != std::string::npos);
  CHECK(p.find(kToolCallGrammar) == std::string::npos);
  CHECK(p.find("call_tool") == std::string::npos);
}

TEST_CASE("template overrides replace single files") {
  const auto dir = std::filesystem::temp_directory_path() / "raider_tpl_test";
  std::filesystem::create_directories(dir);
  const auto& defaults = TemplateSet::defaults();
  REQUIRE(defaults.has("step_decision"));
  {
    std::ofstream(dir / "step_decision.txt") << "Decide now.\n";
  }
  const auto t = TemplateSet::with_overrides(dir);
  CHECK(t.get("step_decision") == "Decide now.\n");
  CHECK(t.get("step_iterate") == defaults.get("step_iterate"));
  CHECK_THROWS_AS(t.get("nope"), NotFoundError);
  CHECK(chomp("x\n") == "x");
  std::filesystem::remove_all(dir);
}

TEST_CASE("final response parsing") {
  auto f = parse_final_response(R"(Thinking... {"final_response": "No Issue", "explanation": "ok"})");
  REQUIRE(f);
  CHECK(f->label == OutcomeLabel::NoIssue);
  CHECK(f->explanation == "ok");
  CHECK(parse_final_response(R"({"final_response": "Unfeasible", "explanation": ""})")->label ==
        OutcomeLabel::Unfeasibility);
  CHECK_FALSE(parse_final_response(R"({"final_response": "maybe", "explanation": ""})"));
  CHECK_FALSE(parse_final_response("no json here"));
  CHECK(parse_issue_label("none") == OutcomeLabel::NoIssue);
  CHECK_FALSE(parse_issue_label("timeout"));
}

TEST_CASE("criteria: golden replay") {
  const auto r = criteria::golden_replay();
  INFO(r.detail);
  CHECK(r.passed);
}

TEST_CASE("criteria: warnings") {
  const auto r = criteria::warning_suite();
  INFO(r.detail);
  CHECK(r.passed);
}

TEST_CASE("criteria: parser grammar") {
  const auto r = criteria::tool_call_parser();
  INFO(r.detail);
  CHECK(r.passed);
}

TEST_CASE("criteria: prompt ablations") {
  const auto r = criteria::prompt_ablations();
  INFO(r.detail);
  CHECK(r.passed);
}

TEST_CASE("iteration cap ends without a final response") {
  Scene s = demo("step2a.json");
  const auto reg = ToolRegistry::standard();
  ScriptedBackend b(ScriptedTranscript::from_responses(
      {"call_tool{tool: robot_holding, args: []}", "call_tool{tool: robot_holding, args: []}",
       "call_tool{tool: robot_holding, args: []}"}));
  RunConfig rc;
  rc.max_iterations = 3;
  ProgramFlowManager pfm(b, reg, rc);
  const auto o = pfm.run("pick medicine1", s);
  CHECK(o.label == OutcomeLabel::NoFinalResponse);
  CHECK(o.stats.iterations == 3);
  CHECK(o.stats.tool_calls == 3);
}

TEST_CASE("backend failure is a transport failure") {
  Scene s = demo("step2a.json");
  const auto reg = ToolRegistry::standard();
  Broken b;
  ProgramFlowManager pfm(b, reg, RunConfig{});
  const auto o = pfm.run("pick medicine1", s);
  CHECK(o.label == OutcomeLabel::TransportFailure);
  CHECK(o.error.find("connection refused") != std::string::npos);
}

TEST_CASE("observer sees every message and the scene hook") {
  Scene s = demo("step2a.json");
  const auto reg = ToolRegistry::standard();
  ScriptedBackend b(ScriptedTranscript::from_responses(
      {"call_tool{tool: dist_robot_to_obj, args: [medicine1]}", kFinal}));
  ProgramFlowManager pfm(b, reg, RunConfig{});
  Recorder rec;
  const auto o = pfm.run("pick medicine1", s, &rec);
  CHECK(o.label == OutcomeLabel::NoIssue);
  CHECK(o.grounding == std::vector<std::string>{"medicine1"});
  CHECK(rec.tools == std::vector<std::string>{"dist_robot_to_obj"});
  CHECK(rec.outcomes == 1);
  CHECK(rec.between == 2);
  REQUIRE(rec.kinds.size() >= 4);
  CHECK(rec.kinds[0] == MessageKind::SystemPrompt);
  CHECK(rec.kinds[1] == MessageKind::Query);
  CHECK(std::count(rec.kinds.begin(), rec.kinds.end(), MessageKind::ToolResult) == 1);
  CHECK(o.log.front().role == Role::System);
}

TEST_CASE("scene changes between iterations reach the tools") {
  class Remover : public RunObserver {
   public:
    int n = 0;
    void between_iterations(Scene& s) override {
      if (++n == 2) s.apply(mutation::RemoveObject{"medicine2"});
    }
  };
  Scene s = demo("step2a.json");
  const auto reg = ToolRegistry::standard();
  ScriptedBackend b(ScriptedTranscript::from_responses(
      {"call_tool{tool: object_detection, args: []}", "call_tool{tool: object_detection, args: []}",
       kFinal}));
  ProgramFlowManager pfm(b, reg, RunConfig{});
  Remover rm;
  const auto o = pfm.run("pick medicine1", s, &rm);
  std::vector<std::string> results;
  for (const auto& m : o.log)
    if (m.content.starts_with("Call to tool object_detection")) results.push_back(m.content);
  REQUIRE(results.size() == 2);
  CHECK(results[0].find("'medicine2'") != std::string::npos);
  CHECK(results[1].find("'medicine2'") == std::string::npos);
}

TEST_CASE("tools outside the profile are made up names") {
  Scene s = demo("step4.json");
  const auto reg = ToolRegistry::standard();
  ScriptedBackend b(
      ScriptedTranscript::from_responses({"call_tool{tool: recognize_humans, args: []}", kFinal}));
  ProgramFlowManager pfm(b, reg, RunConfig{});
  const auto o = pfm.run("handover medicine to Adriana", s);
  CHECK(o.stats.warning_count(WarningKind::MadeUpToolName) == 1);
}

TEST_CASE("outcome json") {
  AgentOutcome o;
  o.label = OutcomeLabel::Ambiguity;
  o.explanation = "two";
  o.stats.warnings[WarningKind::MadeUpToolName] = 2;
  const Json j = o.to_json();
  CHECK(j["label"] == "ambiguity");
  CHECK(j["explanation"] == "two");
  CHECK(j.dump().find("made_up_tool_name") != std::string::npos);
}
