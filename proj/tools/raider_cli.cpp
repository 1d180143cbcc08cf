#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "raider/bench.hpp"
#include "raider/error.hpp"
#include "raider/pfm.hpp"
#include "raider/recovery.hpp"
#include "raider/scene.hpp"
#include "raider/service.hpp"
#include "raider/templates.hpp"
#include "raider/tools.hpp"

namespace fs = std::filesystem;
using namespace raider;

namespace {

Json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw NotFoundError(fmt::format("cannot open '{}'", p.string()));
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ParseError("invalid JSON", p.string());
  return j;
}

void write_file(const fs::path& p, const std::string& body) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  out << body;
  if (!out) throw Error(fmt::format("cannot write '{}'", p.string()));
}

struct ChatOptions {
  bool live = false;
  std::string endpoint;
  std::string model = "gpt-4o-2024-05-13";
  int timeout_ms = 20000;

  void add(CLI::App* app) {
    app->add_flag("--live", live, "Use the HTTP chat backend instead of scripted responses");
    app->add_option("--endpoint", endpoint, "Chat-completions URL (else RAIDER_LLM_ENDPOINT)");
    app->add_option("--model", model, "Model name sent to the live backend");
    app->add_option("--request-timeout-ms", timeout_ms, "Per-request timeout");
  }

  ChatConfig config() const {
    ChatConfig c;
    c.backend = live ? BackendKind::Live : BackendKind::Scripted;
    c.endpoint = endpoint;
    c.model = model;
    c.request_timeout = std::chrono::milliseconds(timeout_ms);
    return with_env_defaults(c);
  }
};

ProcedureVariant parse_variant(const std::string& s) {
  const auto v = variant_from_string(s);
  if (!v) throw ValidationError(fmt::format("unknown variant '{}'", s));
  return *v;
}

void print_outcome(const AgentOutcome& o, bool json, bool show_log) {
  if (json) {
    Json j = o.to_json();
    if (!show_log) j.erase("log");
    std::cout << j.dump(2) << "\n";
    return;
  }
  if (show_log) {
    for (const auto& m : o.log) {
      if (m.role == Role::System) continue;
      std::cout << "[" << to_string(m.role) << "]\n" << m.content << "\n\n";
    }
  }
  std::cout << "label: " << to_string(o.label) << "\n";
  if (!o.explanation.empty()) std::cout << "explanation: " << o.explanation << "\n";
  if (!o.error.empty()) std::cout << "error: " << o.error << "\n";
  std::cout << fmt::format("iterations: {}  tool calls: {}  warnings: {}  time: {:.3f}s\n",
                           o.stats.iterations, o.stats.tool_calls, o.stats.total_warnings(),
                           o.stats.elapsed_seconds);
}

void write_report(const RunReport& report, const std::string& out_dir) {
  if (out_dir.empty()) return;
  const fs::path dir(out_dir);
  write_file(dir / "report.json", report.to_json().dump(2) + "\n");
  write_file(dir / "issues.csv", report.issue_table_csv());
  write_file(dir / "overall.csv", report.overall_csv());
  spdlog::info("report written to {}", dir.string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Issue detection and recovery agent for robot actions"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  // run -------------------------------------------------------------------
  auto* run = app.add_subcommand("run", "Run detection for one query");
  std::string scene_file, query, script_file, variant = "QGEN_GRND", profile = "household",
                                              templates_dir;
  int deadline_ms = 20000, max_iterations = 12;
  bool json = false, show_log = false;
  ChatOptions run_chat;
  run->add_option("--scene", scene_file, "Scene JSON")->required()->check(CLI::ExistingFile);
  run->add_option("-q,--query", query, "Action query")->required();
  run->add_option("--script", script_file, "Scripted transcript JSON")->check(CLI::ExistingFile);
  run->add_option("--variant", variant, "QGEN_GRND, QGEN, GRND or BASIC");
  run->add_option("--profile", profile, "household, assistive or user_prefs");
  run->add_option("--deadline-ms", deadline_ms, "Run deadline");
  run->add_option("--max-iterations", max_iterations, "Model turns before giving up");
  run->add_option("--templates", templates_dir, "Directory overriding prompt templates");
  run->add_flag("--json", json, "Print the outcome as JSON");
  run->add_flag("--log", show_log, "Print the conversation");
  run_chat.add(run);

  // describe ----------------------------------------------------------------
  auto* describe = app.add_subcommand("describe", "Print the scene description");
  std::string describe_scene_file;
  describe->add_option("--scene", describe_scene_file, "Scene JSON")
      ->required()
      ->check(CLI::ExistingFile);

  // bench -------------------------------------------------------------------
  auto* bench = app.add_subcommand("bench", "Evaluation harness");
  bench->require_subcommand(1);
  std::string corpus_dir = RAIDER_DEFAULT_CORPUS, method = "raider", bench_variant = "QGEN_GRND",
              out_dir;
  unsigned workers = 1;
  ChatOptions bench_chat;

  auto* bench_run = bench->add_subcommand("run", "Run a method over the corpus");
  bench_run->add_option("--corpus", corpus_dir, "Corpus directory");
  bench_run->add_option("--method", method, "raider, precond or visualobs");
  bench_run->add_option("--variant", bench_variant, "Procedure variant for raider");
  bench_run->add_option("--workers", workers, "Parallel cases");
  bench_run->add_option("--out", out_dir, "Directory for report.json and CSV tables");
  bench_chat.add(bench_run);

  auto* bench_repeat = bench->add_subcommand("repeat", "Repeat cases to measure stability");
  std::vector<std::string> case_ids;
  int repeats = 10;
  bench_repeat->add_option("--corpus", corpus_dir, "Corpus directory");
  bench_repeat->add_option("--case", case_ids, "Case id (repeatable)")->required();
  bench_repeat->add_option("-n", repeats, "Runs per case");
  bench_repeat->add_option("--variant", bench_variant, "Procedure variant");
  bench_repeat->add_option("--out", out_dir, "Directory for repeat.json");
  bench_chat.add(bench_repeat);

  auto* bench_recovery = bench->add_subcommand("recovery", "Recovery plan evaluation");
  std::string recovery_context = "explanation";
  bench_recovery->add_option("--corpus", corpus_dir, "Corpus directory");
  bench_recovery->add_option("--variant", recovery_context,
                             "explanation, scene or explanation+scene");
  bench_recovery->add_option("--out", out_dir, "Directory for recovery.json");
  bench_chat.add(bench_recovery);

  // serve -------------------------------------------------------------------
  auto* serve = app.add_subcommand("serve", "Start the session service");
  ServiceConfig service;
  ChatOptions serve_chat;
  std::string scene_root = RAIDER_DEFAULT_SCENES;
  serve->add_option("--host", service.host, "Bind address");
  serve->add_option("--port", service.port, "Port");
  serve->add_option("--scene-root", scene_root, "Directory for scene_file references");
  serve->add_option("--cors", service.cors_allowlist, "Allowed origin (repeatable, * for any)");
  serve_chat.add(serve);

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    if (*run) {
      Scene scene = load_scene_file(scene_file);
      const ChatConfig chat = run_chat.config();
      std::optional<ScriptedTranscript> script;
      if (!script_file.empty()) script = ScriptedTranscript::from_json(read_json(script_file));
      if (chat.backend == BackendKind::Scripted && !script)
        throw ValidationError("--script is required without --live");
      auto backend = make_backend(chat, script);
      const ToolRegistry registry = ToolRegistry::standard();
      const TemplateSet templates =
          templates_dir.empty() ? TemplateSet::defaults() : TemplateSet::with_overrides(templates_dir);
      RunConfig rc;
      rc.variant = parse_variant(variant);
      rc.profile = profile;
      rc.chat = chat;
      rc.deadline = std::chrono::milliseconds(deadline_ms);
      rc.max_iterations = max_iterations;
      ProgramFlowManager pfm(*backend, registry, rc, templates);
      print_outcome(pfm.run(query, scene), json, show_log);
      return 0;
    }

    if (*describe) {
      std::cout << describe_scene(load_scene_file(describe_scene_file));
      return 0;
    }

    if (*bench) {
      const Corpus corpus = load_corpus(corpus_dir);
      BenchConfig config;
      config.chat = bench_chat.config();
      config.variant = parse_variant(bench_variant);
      config.workers = workers;

      if (*bench_run) {
        const auto m = method_from_string(method);
        if (!m) throw ValidationError(fmt::format("unknown method '{}'", method));
        config.method = *m;
        const RunReport report = run_suite(corpus, config);
        std::cout << report.issue_table_csv() << "\n" << report.overall_csv();
        write_report(report, out_dir);
        return 0;
      }
      if (*bench_repeat) {
        std::vector<TestCase> cases;
        for (const auto& id : case_ids) {
          const auto* c = corpus.find(id);
          if (c == nullptr) throw NotFoundError(fmt::format("no case '{}'", id));
          cases.push_back(*c);
        }
        Json out = Json::array();
        for (const auto& s : run_repeatability(cases, repeats, config)) {
          std::cout << fmt::format("{}: success {:.2f}  time mean {:.3f}s min {:.3f}s max {:.3f}s\n",
                                   s.case_id, s.success_rate, s.mean_time, s.min_time,
                                   s.max_time);
          out.push_back(s.to_json());
        }
        if (!out_dir.empty()) write_file(fs::path(out_dir) / "repeat.json", out.dump(2) + "\n");
        return 0;
      }
      if (*bench_recovery) {
        const auto ctx = recovery_context_from_string(recovery_context);
        if (!ctx) throw ValidationError(fmt::format("unknown variant '{}'", recovery_context));
        const RecoveryReport report = run_recovery_eval(corpus.cases, *ctx, config);
        for (const auto& r : report.records)
          std::cout << fmt::format("{:<12} {:<4} {}\n", r.case_id, to_string(r.issue), r.reason);
        std::cout << fmt::format("Recov_Plan ({}): {:.2f}%\n", report.context, report.recov_plan());
        if (!out_dir.empty())
          write_file(fs::path(out_dir) / "recovery.json", report.to_json().dump(2) + "\n");
        return 0;
      }
    }

    if (*serve) {
      service.chat = serve_chat.config();
      service.scene_root = scene_root;
      SessionManager manager(service);
      Server server(manager);
      server.listen();
      return 0;
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
