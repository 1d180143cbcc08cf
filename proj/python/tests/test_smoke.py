import json

import pytest

import raider

AMBIGUOUS = json.dumps({"final_response": "ambiguity", "explanation": "Two medicines match."})


def test_scene_round_trip(demo):
    s = demo("main.json")
    assert raider.load_scene(s.to_json()) == s
    assert "medicine1" in s.object_ids()
    assert s.distance_between("plant", "medicine1") == pytest.approx(0.1)
    assert ("medicine1", "on_top_of", "medicine_counter") in s.relations()


def test_scene_errors():
    with pytest.raises(raider.ParseError):
        raider.load_scene("{")
    with pytest.raises(raider.Error):
        raider.load_scene({"objects": []})


def test_mutations_are_atomic(demo):
    s = demo("step1.json")
    assert not s.check_free_path("medicine_counter")
    before = s.copy()
    with pytest.raises(raider.NotFoundError):
        raider.apply(s, {"kind": "remove_object", "id": "ghost"})
    assert s == before
    raider.apply(s, {"kind": "remove_object", "id": "chair"})
    assert s.check_free_path("medicine_counter")


def test_tool_call_parser():
    calls = raider.parse_tool_calls(
        "call_tool{tool: dist_robot_to_obj, args: [apple]} then call_tool{tool: x, args: [}")
    assert calls[0]["tool"] == "dist_robot_to_obj"
    assert calls[0]["args"] == ["apple"]
    assert calls[-1]["malformed"]


def test_judge_action(data_dir):
    s = raider.load_scene(data_dir / "corpus" / "scenes" / "kitchen.json")
    label, why = raider.judge_action("pick(milk, fridge)", s)
    assert label == "unfeasibility"
    assert "is_open fridge" in why
    with pytest.raises(raider.ParseError):
        raider.judge_action("pick apple", s)


def test_detection_run(demo):
    s = demo("step2a.json")
    out = raider.run_detection(
        "pick adrianas_medicine", s,
        ["call_tool{tool: object_detection, args: []}", AMBIGUOUS])
    assert out["label"] == "ambiguity"
    assert out["stats"]["tool_calls"] == 1
    empty = raider.run_detection("pick medicine1", s, [])
    assert empty["label"] == "transport_failure"
    assert "exhausted" in empty["error"]
    with pytest.raises(raider.ValidationError):
        raider.run_detection("pick medicine1", s, [], variant="FULL")


def test_plan_execution(demo):
    assert raider.render_plan("Plan:\n1. say('hi')\n") == 'say("hi")\n'
    with pytest.raises(raider.PlanError):
        raider.render_plan("pick(x)\nx = ask(\"?\")")
    s = demo("step2a.json")
    log = raider.execute_plan('m = ask("Which one?")\npick(m, medicine_counter)', s,
                              [{"answer": "medicine2"}])
    assert log["completed"]
    assert s.holding() == "medicine2"


def test_suite(data_dir):
    report = raider.run_suite(data_dir / "corpus", workers=2)
    assert len(report["records"]) > 0
    assert all(r["label"] for r in report["records"])
