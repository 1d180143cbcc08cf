#include <doctest.h>

#include <algorithm>
#include <chrono>

#include "criteria.hpp"
#include "fake_chat.hpp"
#include "raider/error.hpp"
#include "raider/llm.hpp"
#include "raider/text.hpp"
#include "raider/tools.hpp"

using namespace raider;
using namespace std::chrono_literals;

namespace {

Scene demo(const char* name) {
  return load_scene_file((criteria::data_dir() / "scenes/demo" / name).string());
}

ToolResult call(const ToolRegistry& r, const Scene& s, std::string tool,
                std::vector<std::string> args = {}) {
  ToolCall c;
  c.tool = std::move(tool);
  c.args = std::move(args);
  return r.invoke(c, s);
}

std::vector<ChatMessage> one_message(std::string text) {
  return {{Role::System, "system"}, {Role::User, std::move(text)}};
}

}  // namespace

TEST_CASE("argument resolution") {
  const Scene s = demo("step2a.json");
  CHECK(resolve_argument("medicine1", s) == "medicine1");
  CHECK(resolve_argument("Medicine 1", s) == "medicine1");
  CHECK(resolve_argument("adrianas_medicine", s) == "medicine1");
  CHECK(resolve_argument("Adrianas Medicine", s) == "medicine1");
  CHECK(resolve_argument("medicine_countr", s) == "medicine_counter");
  CHECK_FALSE(resolve_argument("unicorn", s));
  CHECK(resolve_argument("medicine_counter", s, 1.01) == "medicine_counter");
  CHECK_FALSE(resolve_argument("Medicine 1", s, 1.01));

  const Scene hidden = demo("step1.json");
  CHECK_FALSE(resolve_argument("chair", hidden));

  const Scene h = demo("step4.json");
  CHECK(resolve_human("adriana", h) == "Adriana");
  CHECK_FALSE(resolve_human("Bob", h));
}

TEST_CASE("profiles") {
  const auto r = ToolRegistry::standard();
  const auto& household = r.profile("household");
  CHECK(household.members.size() == 8);
  CHECK(household.contains("check_free_path"));
  CHECK_FALSE(household.contains("recognize_humans"));
  const auto& assistive = r.profile("assistive");
  for (const auto& m : household.members) CHECK(assistive.contains(m));
  for (const char* t : {"recognize_humans", "detect_human_gaze", "human_hands_free",
                        "dist_robot_to_human"})
    CHECK(assistive.contains(t));
  CHECK(r.profile("user_prefs").contains("retrieve_user_information"));
  CHECK_THROWS_AS(r.profile("space"), NotFoundError);
  const std::string desc = render_tool_descriptions(r, household);
  CHECK(text::split_lines(text::trim(desc)).size() == 8);
  CHECK(desc.find("dist_between_objs(") != std::string::npos);
}

TEST_CASE("tool outputs use python formatting") {
  const auto r = ToolRegistry::standard();
  const Scene s = demo("step2b.json");
  const auto det = call(r, s, "object_detection");
  CHECK(det.success);
  CHECK(det.message() ==
        "Call to tool object_detection with args [] returned ['medicine1', 'medicine2', 'plant', "
        "'bottle']");
  CHECK(call(r, s, "robot_holding").value == "None");
  const auto d = call(r, s, "dist_robot_to_obj", {"adrianas_medicine"});
  CHECK(d.value == "0.6");
  CHECK(d.grounded_objects == std::vector<std::string>{"medicine1"});
  CHECK(call(r, s, "get_object_properties", {"medicine1"}).success);
  CHECK(call(r, s, "get_spatial_relations", {"plant"}).success);
}

TEST_CASE("tool failures are reported, never thrown") {
  const auto r = ToolRegistry::standard();
  const Scene s = demo("step2a.json");
  const auto unknown = call(r, s, "fly_to", {"x"});
  CHECK_FALSE(unknown.success);
  const auto arity = call(r, s, "dist_between_objs", {"plant"});
  CHECK_FALSE(arity.success);
  CHECK(arity.message().find("failed") != std::string::npos);
  const auto missing = call(r, s, "dist_robot_to_obj", {"unicorn"});
  CHECK_FALSE(missing.success);
  CHECK(missing.value.find("unicorn") != std::string::npos);
  const auto human = call(r, s, "detect_human_gaze", {"Zed"});
  CHECK_FALSE(human.success);
}

TEST_CASE("user information tool retrieves from the corpus") {
  const auto r = ToolRegistry::standard();
  const Scene s = demo("main.json");
  CHECK(call(r, s, "retrieve_user_information", {"favorite beverage"}).value ==
        "The user's favorite beverage is coke.");
}

TEST_CASE("scripted backend replays in order") {
  ScriptedTranscript t;
  t.steps.push_back({"first", {"hello"}, 0ms});
  t.steps.push_back({"second", {}, 0ms});
  ScriptedBackend b(t);
  CHECK(b.complete(one_message("hello there"), {}).content == "first");
  CHECK(b.consumed() == 1);
  CHECK(b.complete(one_message("x"), {}).content == "second");
  CHECK(b.remaining() == 0);
  CHECK_THROWS_AS(b.complete(one_message("x"), {}), ScriptError);
}

TEST_CASE("scripted backend checks expectations and latency") {
  ScriptedTranscript t;
  t.steps.push_back({"never", {"medicine"}, 0ms});
  ScriptedBackend strict(t);
  try {
    strict.complete(one_message("banana"), {});
    FAIL("expected ScriptError");
  } catch (const ScriptError& e) {
    CHECK(e.step() == 0);
  }

  ScriptedTranscript slow;
  slow.steps.push_back({"late", {}, 200ms});
  ScriptedBackend b(slow);
  const auto start = std::chrono::steady_clock::now();
  CHECK_THROWS_AS(b.complete(one_message("x"), {}, 50ms), TimeoutError);
  CHECK(std::chrono::steady_clock::now() - start < 180ms);
}

TEST_CASE("transcript json forms") {
  const auto a = ScriptedTranscript::from_json(Json::array({"a", "b"}));
  CHECK(a.steps.size() == 2);
  const auto b = ScriptedTranscript::from_json(
      {{"responses", {{{"response", "x"}, {"expect_contains", {"q"}}}}}});
  REQUIRE(b.steps.size() == 1);
  CHECK(b.steps[0].expect_contains == std::vector<std::string>{"q"});
  CHECK_THROWS(ScriptedTranscript::from_json(42));
}

TEST_CASE("request body shape") {
  ChatConfig c;
  c.model = "m";
  c.temperature = 0.0;
  const auto body = chat_request_body(one_message("hi"), c);
  CHECK(body["model"] == "m");
  CHECK(body["temperature"] == 0.0);
  CHECK(body["messages"][1]["role"] == "user");
  CHECK(body["messages"][1]["content"] == "hi");
}

TEST_CASE("http backend retries server errors and sends the key") {
  int calls = 0;
  testing::FakeChatServer server([&](const Json& req) {
    CHECK(req["messages"].size() == 2);
    return ++calls == 1 ? testing::FakeReply{500, ""} : testing::FakeReply{200, "pong"};
  });
  ChatConfig c;
  c.backend = BackendKind::Live;
  c.endpoint = server.endpoint();
  c.api_key = "secret";
  HttpBackend b;
  CHECK(b.complete(one_message("ping"), c, 5000ms).content == "pong");
  CHECK(b.retries() == 1);
  CHECK(server.last_authorization() == "Bearer secret");
}

TEST_CASE("http backend gives up after max retries") {
  testing::FakeChatServer server([](const Json&) { return testing::FakeReply{503, ""}; });
  ChatConfig c;
  c.endpoint = server.endpoint();
  c.max_retries = 2;
  HttpBackend b;
  CHECK_THROWS_AS(b.complete(one_message("ping"), c, 5000ms), TransportError);
  CHECK(server.requests() == 3);
}

TEST_CASE("http backend does not retry client errors") {
  testing::FakeChatServer server([](const Json&) { return testing::FakeReply{400, ""}; });
  ChatConfig c;
  c.endpoint = server.endpoint();
  HttpBackend b;
  CHECK_THROWS_AS(b.complete(one_message("ping"), c, 5000ms), TransportError);
  CHECK(server.requests() == 1);
}

TEST_CASE("http backend times out") {
  testing::FakeChatServer server([](const Json&) { return testing::FakeReply{200, "late", 800}; });
  ChatConfig c;
  c.endpoint = server.endpoint();
  c.max_retries = 0;
  HttpBackend b;
  CHECK_THROWS_AS(b.complete(one_message("ping"), c, 150ms), TimeoutError);
}

TEST_CASE("live backend without endpoint is a transport error") {
  ChatConfig c;
  c.backend = BackendKind::Live;
  c.endpoint = "";
  if (std::getenv("RAIDER_LLM_ENDPOINT") == nullptr) {
    auto b = make_backend(c);
    CHECK_THROWS_AS(b->complete(one_message("ping"), c, 200ms), TransportError);
  }
}
