#pragma once

// Minimal chat-completions endpoint on localhost for exercising HttpBackend.

#include <httplib.h>

#include <atomic>
#include <functional>
#include <string>
#include <thread>

#include "json.hpp"

namespace raider::testing {

struct FakeReply {
  int status = 200;
  std::string content;  // assistant text when status is 200
  int delay_ms = 0;
};

class FakeChatServer {
 public:
  using Handler = std::function<FakeReply(const nlohmann::json& request)>;

  explicit FakeChatServer(Handler handler) : handler_(std::move(handler)) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests_;
      last_authorization_ = req.get_header_value("Authorization");
      const auto body = nlohmann::json::parse(req.body, nullptr, false);
      const FakeReply reply = handler_(body);
      if (reply.delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(reply.delay_ms));
      res.status = reply.status;
      if (reply.status == 200) {
        nlohmann::json out = {
            {"id", "chatcmpl-test"},
            {"object", "chat.completion"},
            {"choices", {{{"index", 0},
                          {"message", {{"role", "assistant"}, {"content", reply.content}}},
                          {"finish_reason", "stop"}}}}};
        res.set_content(out.dump(), "application/json");
      } else {
        res.set_content(R"({"error": "unavailable"})", "application/json");
      }
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~FakeChatServer() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  std::string endpoint() const {
    return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
  }
  int requests() const { return requests_; }
  std::string last_authorization() const { return last_authorization_; }

 private:
  Handler handler_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> requests_{0};
  std::string last_authorization_;
};

}  // namespace raider::testing
