#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "raider/action_model.hpp"
#include "raider/bench.hpp"
#include "raider/error.hpp"
#include "raider/pfm.hpp"
#include "raider/recovery.hpp"
#include "raider/scene.hpp"

namespace py = pybind11;
using namespace raider;

namespace {

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(e.what());
  }
}

OutcomeLabel label_of(const std::string& s) {
  const auto l = outcome_label_from_string(s);
  if (!l) throw ValidationError("unknown label '" + s + "'", "label");
  return *l;
}

std::string run_detection(const std::string& query, Scene& scene,
                          const std::vector<std::string>& responses, const std::string& variant,
                          const std::string& profile, int max_iterations) {
  RunConfig rc;
  const auto v = variant_from_string(variant);
  if (!v) throw ValidationError("unknown variant '" + variant + "'", "variant");
  rc.variant = *v;
  rc.profile = profile;
  rc.max_iterations = max_iterations;
  const auto reg = ToolRegistry::standard();
  ScriptedBackend backend(ScriptedTranscript::from_responses(responses));
  ProgramFlowManager pfm(backend, reg, rc);
  py::gil_scoped_release release;
  return pfm.run(query, scene).to_json().dump();
}

std::string run_bench(const std::string& corpus_dir, const std::string& method, unsigned workers) {
  const auto m = method_from_string(method);
  if (!m) throw ValidationError("unknown method '" + method + "'", "method");
  BenchConfig cfg;
  cfg.method = *m;
  cfg.workers = workers;
  const Corpus corpus = load_corpus(corpus_dir);
  py::gil_scoped_release release;
  return run_suite(corpus, cfg).to_json().dump();
}

std::string run_plan(const std::string& plan_text, Scene& scene, const std::string& answers) {
  const RecoveryPlan plan = parse_plan(plan_text);
  ScriptedChannel channel = ScriptedChannel::from_json(parse_json(answers));
  return execute_plan(plan, scene, channel).to_json().dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "raider scene grounding and recovery core";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<NotFoundError>(m, "NotFoundError", base.ptr());
  py::register_exception<PlanError>(m, "PlanError", base.ptr());
  py::register_exception<ScriptError>(m, "ScriptError", base.ptr());
  py::register_exception<ConflictError>(m, "ConflictError", base.ptr());
  auto transport = py::register_exception<TransportError>(m, "TransportError", base.ptr());
  py::register_exception<TimeoutError>(m, "TimeoutError", transport.ptr());

  py::class_<Scene>(m, "Scene")
      .def_static("from_json", [](const std::string& text) { return load_scene(text); })
      .def_static("load", &load_scene_file)
      .def("to_json", [](const Scene& s) { return s.to_json().dump(); })
      .def("apply",
           [](Scene& s, const std::string& mutation) {
             s.apply(mutation_from_json(parse_json(mutation)));
           })
      .def("object_ids",
           [](const Scene& s) {
             std::vector<std::string> ids;
             for (const auto& o : s.objects()) ids.push_back(o.id);
             return ids;
           })
      .def("detectable_ids", &Scene::detectable_ids)
      .def("holding", [](const Scene& s) { return s.robot().holding; })
      .def("distance_robot_to",
           [](const Scene& s, const std::string& id) { return distance_robot_to(s, id); })
      .def("distance_between",
           [](const Scene& s, const std::string& a, const std::string& b) {
             return distance_between(s, a, b);
           })
      .def("check_free_path",
           [](const Scene& s, const std::string& id) { return check_free_path(s, id); })
      .def("relations",
           [](const Scene& s) {
             std::vector<std::tuple<std::string, std::string, std::string>> out;
             for (const auto& r : compute_relations(s))
               out.emplace_back(r.subject, std::string(to_string(r.relation)), r.object);
             return out;
           })
      .def("describe", &describe_scene)
      .def("__eq__", [](const Scene& a, const Scene& b) { return a == b; })
      .def("copy", [](const Scene& s) { return s; });

  m.def(
      "parse_tool_calls",
      [](const std::string& text) {
        py::list out;
        for (const auto& c : parse_tool_calls(text)) {
          py::dict d;
          d["tool"] = c.tool;
          d["args"] = c.args;
          d["malformed"] = c.malformed;
          d["error"] = c.error;
          d["source"] = c.source;
          out.append(d);
        }
        return out;
      },
      py::arg("text"));

  m.def(
      "judge_action",
      [](const std::string& query, const Scene& scene) {
        const auto q = ActionQuery::parse(query);
        if (!q) throw ParseError("not an action call: " + query);
        const auto v = judge_action(*q, scene);
        return py::make_tuple(std::string(to_string(v.label)), v.explanation);
      },
      py::arg("query"), py::arg("scene"));

  m.def("render_plan", [](const std::string& text) { return render_plan(parse_plan(text)); },
        py::arg("text"));
  m.def("execute_plan", &run_plan, py::arg("plan"), py::arg("scene"),
        py::arg("answers") = "[]");

  m.def("run_detection", &run_detection, py::arg("query"), py::arg("scene"),
        py::arg("responses"), py::arg("variant") = "QGEN_GRND",
        py::arg("profile") = "household", py::arg("max_iterations") = 12);

  m.def("run_suite", &run_bench, py::arg("corpus_dir"), py::arg("method") = "raider",
        py::arg("workers") = 1);

  m.def(
      "normalize_label", [](const std::string& s) { return std::string(to_string(label_of(s))); },
      py::arg("label"));
}
