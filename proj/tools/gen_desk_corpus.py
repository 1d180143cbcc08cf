#!/usr/bin/env python3
"""Writes the desk corpus (scenes, cases, index.json) under data/corpus."""

import argparse
import copy
import json
import pathlib

ROBOT = {"position": [0.0, 0.0, 0.9], "reach": 0.5, "body_radius": 0.25}


def obj(id, center, half, name=None, states=None, props=None, **extra):
    o = {"id": id, "box": {"center": center, "half_extents": half}}
    if name:
        o["name"] = name
    o["states"] = states or {}
    o["properties"] = props or {}
    o.update(extra)
    return o


def pickable(**more):
    return {"pickable": True, **more}


BASE_OBJECTS = [
    obj("counter", [0.4, 0.0, 0.45], [0.15, 0.8, 0.45], props={"pickable": False, "openable": False}),
    obj("apple", [0.3, -0.25, 0.94], [0.04, 0.04, 0.04], props=pickable(sliceable=True),
        states={"sliced": False}),
    obj("knife", [0.45, -0.3, 0.91], [0.1, 0.02, 0.01], props=pickable()),
    obj("tomato", [0.3, -0.05, 0.94], [0.04, 0.04, 0.04], props=pickable(sliceable=True),
        states={"sliced": False}),
    obj("mug_red", [0.3, 0.15, 0.95], [0.04, 0.04, 0.05], name="red mug",
        props=pickable(sliceable=False, toggleable=False), states={"clean": True}),
    obj("mug_blue", [0.45, 0.25, 0.95], [0.04, 0.04, 0.05], name="blue mug",
        props=pickable(sliceable=False), states={"clean": False}),
    obj("banana", [0.35, 0.65, 0.93], [0.08, 0.03, 0.03], props=pickable(), states={"ripe": True}),
    obj("fridge", [-0.5, 0.0, 0.9], [0.2, 0.35, 0.9], props={"openable": True, "pickable": False},
        states={"open": False}),
    obj("milk", [-0.45, 0.0, 1.0], [0.04, 0.04, 0.1], name="milk bottle", props=pickable(),
        states={"cold": True}),
    obj("table", [0.0, -0.75, 0.375], [0.4, 0.3, 0.375], props={"pickable": False}),
    obj("lamp", [0.0, -0.52, 0.85], [0.05, 0.05, 0.1], props={"toggleable": True, "pickable": True},
        states={"on": True}),
    obj("laptop", [-0.25, -0.6, 0.77], [0.15, 0.1, 0.02], props={"toggleable": True, "pickable": True},
        states={"on": False}),
    obj("book", [0.25, -0.6, 0.77], [0.08, 0.06, 0.02], props=pickable(toggleable=False)),
    obj("plate", [0.0, -0.85, 0.76], [0.08, 0.08, 0.01], props=pickable(openable=False)),
    obj("shelf", [-0.6, 1.2, 0.6], [0.3, 0.15, 0.6], props={"pickable": False}),
    obj("cereal", [-0.6, 1.2, 1.3], [0.05, 0.08, 0.1], name="cereal box", props=pickable()),
    obj("trash_can", [0.0, 2.0, 0.3], [0.15, 0.15, 0.3], name="bin", props={"openable": True},
        states={"open": True}),
]


def base():
    return {"objects": copy.deepcopy(BASE_OBJECTS), "robot": dict(ROBOT)}


def find(scene, id):
    return next(o for o in scene["objects"] if o["id"] == id)


def variant_fridge_open():
    s = base()
    find(s, "fridge")["states"]["open"] = True
    s["objects"].append(obj("juice", [-0.55, 0.15, 1.0], [0.04, 0.04, 0.1], name="juice bottle",
                            props=pickable(), states={"cold": True}))
    return s


def variant_blocked():
    s = base()
    s["objects"].append(obj("box", [0.0, 1.3, 0.2], [0.15, 0.15, 0.2], name="cardboard box",
                            props=pickable()))
    return s


def variant_chair():
    s = base()
    s["objects"].append(obj("chair", [0.0, -0.33, 0.25], [0.2, 0.05, 0.25], props={"pickable": False}))
    return s


def variant_holding():
    s = base()
    s["robot"]["holding"] = "mug_blue"
    return s


def variant_knife():
    s = base()
    s["robot"]["holding"] = "knife"
    return s


def variant_two_apples():
    s = base()
    s["objects"].append(obj("green_apple", [0.3, 0.35, 0.94], [0.04, 0.04, 0.04], name="green apple",
                            props=pickable(sliceable=True), states={"sliced": False}))
    return s


SCENES = {
    "kitchen": base,
    "kitchen_fridge_open": variant_fridge_open,
    "kitchen_blocked": variant_blocked,
    "kitchen_chair": variant_chair,
    "kitchen_holding": variant_holding,
    "kitchen_knife": variant_knife,
    "kitchen_two_apples": variant_two_apples,
}

AMBIG = [["ambigu", "multiple", "two", "both", "which"]]
REACH = [["reach", "range", "far"]]
PATH = [["path", "obstruct", "block"]]
ABSENT = [["not present", "absent", "not found", "no ", "not detected", "missing"]]
PROPERTY = [["cannot", "not openable", "not toggleable", "not sliceable", "not possible"]]
HOLDING = [["holding", "gripper", "hand", "knife"]]

# id, query, qtype, abstraction, issue, scene, grounding, keywords, explanation, probes, profile
CASES = [
    ("in_pick_apple", "pick(apple, counter)", "QS", "AS", "IN", "kitchen", ["apple", "counter"],
     [], "", ["robot_holding", ("dist_robot_to_obj", "apple")]),
    ("in_open_fridge", "open(fridge)", "QS", "AS", "IN", "kitchen", ["fridge"], [], "",
     [("get_object_state", "fridge"), ("get_object_properties", "fridge")]),
    ("in_utensil", "Please pick up the utensil lying on the counter.", "QU", "AN", "IN", "kitchen",
     ["knife", "counter"], [], "", ["robot_holding", ("dist_robot_to_obj", "knife")]),
    ("in_clean_mug", "Pick the clean mug from the counter.", "QU", "AC", "IN", "kitchen",
     ["mug_red", "counter"], [], "",
     [("get_object_state", "mug_red"), ("get_object_state", "mug_blue"), ("dist_robot_to_obj", "mug_red")]),
    ("in_milk_in_fridge", "Grab the bottle inside the fridge, the white one.", "QU", "AR", "IN",
     "kitchen_fridge_open", ["milk", "fridge"], [], "",
     [("get_spatial_relations", "milk"), ("get_object_state", "fridge"), ("dist_robot_to_obj", "milk")]),
    ("in_lamp_off", "turnoff(lamp)", "QS", "AS", "IN", "kitchen", ["lamp"], [], "",
     [("get_object_state", "lamp"), ("get_object_properties", "lamp")]),
    ("in_apple_near_tomato", "Pick the fruit right next to the tomato, the apple.", "QU", "AR", "IN",
     "kitchen", ["apple", "tomato"], [], "",
     [("dist_between_objs", "apple", "tomato"), ("dist_robot_to_obj", "apple"), "robot_holding"]),
    ("in_close_fridge", "close(fridge)", "QS", "AS", "IN", "kitchen_fridge_open", ["fridge"], [], "",
     [("get_object_state", "fridge")]),

    ("ia_mug", "Pick up the mug from the counter.", "QU", "AN", "IA", "kitchen",
     ["mug_red", "mug_blue"], AMBIG, "There are two mugs on the counter, the red mug and the blue mug.",
     [("get_spatial_relations", "mug_red"), ("get_spatial_relations", "mug_blue")]),
    ("ia_apple_qs", "pick(apple)", "QS", "AS", "IA", "kitchen_two_apples", ["apple", "green_apple"],
     AMBIG, "Two apples are present, apple and green_apple, so the target is ambiguous.",
     [("get_object_properties", "green_apple")]),
    ("ia_mug_near_tomato", "Grab the mug that is near the tomato.", "QU", "AR", "IA", "kitchen",
     ["mug_red", "mug_blue"], AMBIG, "Both mugs are near the tomato, so it is unclear which one to grab.",
     [("dist_between_objs", "tomato", "mug_red"), ("dist_between_objs", "tomato", "mug_blue")]),
    ("ia_cold_drink", "Pick the cold drink from the fridge.", "QU", "AC", "IA", "kitchen_fridge_open",
     ["milk", "juice"], AMBIG, "Both the milk and the juice are cold drinks in the fridge.",
     [("get_object_state", "milk"), ("get_object_state", "juice")]),
    ("ia_mug_plain", "Pick the mug.", "QU", "AS", "IA", "kitchen", ["mug_red", "mug_blue"], AMBIG,
     "Multiple mugs match: mug_red and mug_blue.", []),

    ("iu1_banana_qs", "pick(banana, counter)", "QS", "AS", "IU1", "kitchen", ["banana", "counter"],
     REACH, "The banana is 0.68m away, beyond the robot's picking range of 0.5m.",
     ["robot_holding", ("dist_robot_to_obj", "banana")]),
    ("iu1_yellow_fruit", "Bring me the yellow fruit on the counter.", "QU", "AN", "IU1", "kitchen",
     ["banana", "counter"], REACH, "The banana is too far from the robot to pick it.",
     [("dist_robot_to_obj", "banana")]),
    ("iu1_box_on_shelf", "Pick the box on the shelf.", "QU", "AR", "IU1", "kitchen",
     ["cereal", "shelf"], REACH, "The cereal box is out of reach on the shelf.",
     [("get_spatial_relations", "cereal"), ("dist_robot_to_obj", "cereal")]),
    ("iu1_ripe_banana", "Hand me the ripe banana.", "QU", "AC", "IU1", "kitchen", ["banana"], REACH,
     "The ripe banana is beyond the robot's reach.",
     [("get_object_state", "banana"), ("dist_robot_to_obj", "banana")]),
    ("iu1_cereal_qs", "pick(cereal, shelf)", "QS", "AS", "IU1", "kitchen", ["cereal", "shelf"], REACH,
     "The cereal is too far away to be picked.", [("dist_robot_to_obj", "cereal")]),

    ("iu2_bin_qs", "approach(trash_can)", "QS", "AS", "IU2", "kitchen_blocked", ["trash_can"], PATH,
     "The path to the trash_can is not free, a box is in the way.", [("check_free_path", "trash_can")]),
    ("iu2_bin_name", "Go to the bin.", "QU", "AN", "IU2", "kitchen_blocked", ["trash_can"], PATH,
     "The path to the bin is blocked.", [("check_free_path", "trash_can")]),
    ("iu2_bin_behind_box", "Move to the bin behind the cardboard box.", "QU", "AR", "IU2",
     "kitchen_blocked", ["trash_can", "box"], PATH, "The cardboard box obstructs the path to the bin.",
     [("get_spatial_relations", "box"), ("check_free_path", "trash_can")]),
    ("iu2_open_bin", "Approach the open trash can.", "QU", "AC", "IU2", "kitchen_blocked", ["trash_can"],
     PATH, "The open trash can cannot be approached because the path is blocked.",
     [("get_object_state", "trash_can"), ("check_free_path", "trash_can")]),
    ("iu2_table_chair", "approach(table)", "QS", "AS", "IU2", "kitchen_chair", ["table"], PATH,
     "The path to the table is obstructed.", [("check_free_path", "table")]),

    ("iu3_orange_qs", "pick(orange, counter)", "QS", "AS", "IU3", "kitchen", ["counter"], ABSENT,
     "There is no orange in the scene, it is not present.", [("get_spatial_relations", "counter")]),
    ("iu3_vegetable_table", "Pick up the vegetable from the table.", "QU", "AN", "IU3", "kitchen",
     ["table"], ABSENT, "No vegetable is present on the table.", [("get_spatial_relations", "table")]),
    ("iu3_cup_in_microwave", "Take the cup inside the microwave.", "QU", "AR", "IU3", "kitchen", [],
     ABSENT, "The microwave is not present in the scene.", []),
    ("iu3_sliced_bread", "Pick the sliced bread.", "QU", "AC", "IU3", "kitchen", [], ABSENT,
     "There is no bread, it was not detected.", []),
    ("iu3_microwave_qs", "open(microwave)", "QS", "AS", "IU3", "kitchen", [], ABSENT,
     "The microwave is missing from the scene.", []),

    ("iu4_fridge_open", "open(fridge)", "QS", "AS", "IU4", "kitchen_fridge_open", ["fridge"],
     [["already"], ["open"]], "The fridge is already open.", [("get_object_state", "fridge")]),
    ("iu4_lamp_on", "turnon(lamp)", "QS", "AS", "IU4", "kitchen", ["lamp"], [["already"], ["on"]],
     "The lamp is already on.", [("get_object_state", "lamp")]),
    ("iu4_computer_off", "Turn off the computer on the table.", "QU", "AN", "IU4", "kitchen",
     ["laptop", "table"], [["already"], ["off"]], "The laptop is already off.",
     [("get_object_state", "laptop")]),
    ("iu4_light_on", "Switch on the light on the table.", "QU", "AN", "IU4", "kitchen",
     ["lamp", "table"], [["already"], ["on"]], "The lamp on the table is already on.",
     [("get_object_state", "lamp")]),
    ("iu4_milk_closed_fridge", "Grab the milk inside the fridge.", "QU", "AR", "IU4", "kitchen",
     ["milk", "fridge"], [["closed", "not open"]], "The fridge is closed, so the milk cannot be taken.",
     [("get_spatial_relations", "milk"), ("get_object_state", "fridge")]),

    ("iu5_open_counter", "open(counter)", "QS", "AS", "IU5", "kitchen", ["counter"], PROPERTY,
     "The counter is not openable.", [("get_object_properties", "counter")]),
    ("iu5_turnon_book", "turnon(book)", "QS", "AS", "IU5", "kitchen", ["book"], PROPERTY,
     "The book is not toggleable, it cannot be turned on.", [("get_object_properties", "book")]),
    ("iu5_slice_mug", "Slice the red mug.", "QU", "AS", "IU5", "kitchen_knife", ["mug_red"], PROPERTY,
     "The red mug is not sliceable.", [("get_object_properties", "mug_red")]),
    ("iu5_open_plate", "Open the plate on the table.", "QU", "AR", "IU5", "kitchen", ["plate", "table"],
     PROPERTY, "A plate cannot be opened.", [("get_object_properties", "plate")]),
    ("iu5_turnon_clean_mug", "Turn on the clean mug.", "QU", "AC", "IU5", "kitchen", ["mug_red"],
     PROPERTY, "The clean mug is not toggleable.",
     [("get_object_state", "mug_red"), ("get_object_properties", "mug_red")]),

    ("iu6_pick_holding", "pick(apple, counter)", "QS", "AS", "IU6", "kitchen_holding",
     ["apple", "counter"], HOLDING, "The robot is already holding the blue mug.", ["robot_holding"]),
    ("iu6_slice_no_knife", "slice(tomato)", "QS", "AS", "IU6", "kitchen", ["tomato"], HOLDING,
     "The robot is not holding a knife.", ["robot_holding"]),
    ("iu6_place_empty", "place(apple, table)", "QS", "AS", "IU6", "kitchen", ["apple", "table"],
     HOLDING, "The robot is not holding the apple.", ["robot_holding"]),
    ("iu6_put_utensil", "Put the utensil on the table.", "QU", "AN", "IU6", "kitchen",
     ["knife", "table"], HOLDING, "The gripper is empty, the knife must be picked first.",
     ["robot_holding"]),
    ("iu6_knife_holding", "Grab the knife on the counter.", "QU", "AR", "IU6", "kitchen_holding",
     ["knife", "counter"], HOLDING, "The robot's hand is full, it is holding the blue mug.",
     ["robot_holding"]),
    ("iu6_clean_mug_holding", "Pick up the clean mug.", "QU", "AC", "IU6", "kitchen_holding",
     ["mug_red"], HOLDING, "The robot is holding the blue mug and cannot pick another.",
     [("get_object_state", "mug_red"), "robot_holding"]),
]

LABEL = {"IA": "ambiguity", "IN": "no_issue"}

RECOVERY = {
    "ia_mug": {
        "plan": 'm = ask("Which mug should I pick, the red mug or the blue mug?")\npick(m, counter)',
        "answers": ["red mug"],
        "goal": {"holding": "mug_red", "utterance_keywords": [["which"], ["mug"]]},
    },
    "ia_cold_drink": {
        "plan": 'd = ask("Which drink do you want, the milk or the juice?")\npick(d, fridge)',
        "answers": ["juice"],
        "goal": {"holding": "juice", "utterance_keywords": [["which"], ["drink", "milk", "juice"]]},
    },
    "iu1_banana_qs": {
        "plan": "move(banana)\npick(banana, counter)",
        "goal": {"holding": "banana"},
    },
    "iu2_bin_qs": {
        "plan": "move(box, table)\nmove(trash_can)",
        "goal": {"path_free": ["trash_can"]},
    },
    "iu2_bin_name": {
        "plans": {
            "explanation": 'say("The path to the bin is blocked.")',
            "scene": "move(box, counter)\nmove(trash_can)",
            "explanation+scene": "move(box, table)\nmove(trash_can)",
        },
        "goal": {"path_free": ["trash_can"]},
    },
    "iu3_orange_qs": {
        "plan": 'say("I cannot find an orange in the kitchen.")',
        "goal": {"utterance_keywords": [["orange"]]},
    },
    "iu4_milk_closed_fridge": {
        "plan": "open(fridge)\npick(milk, fridge)",
        "goal": {"holding": "milk", "states": [{"id": "fridge", "state": "open", "value": True}]},
    },
    "iu4_fridge_open": {
        "plan": 'say("The fridge is already open.")',
        "goal": {"utterance_keywords": [["already"]]},
    },
    "iu5_open_counter": {
        "plan": 'say("The counter cannot be opened.")',
        "goal": {"utterance_keywords": [["cannot", "not openable"]]},
    },
    "iu6_pick_holding": {
        "plan": "place(mug_blue, table)\npick(apple, counter)",
        "goal": {"holding": "apple"},
    },
    "iu6_slice_no_knife": {
        "plan": 'pick(knife, counter)\nsay("I have the knife and can slice the tomato now.")',
        "goal": {"holding": "knife"},
    },
    "iu6_place_empty": {
        "plan": "pick(apple, counter)\nplace(apple, table)",
        "goal": {},
    },
}


def call(tool, *args):
    return 'call_tool{"tool": "%s", "args": [%s]}' % (tool, ", ".join(json.dumps(a) for a in args))


def final(label, explanation):
    return json.dumps({"final_response": label, "explanation": explanation})


def build_case(row):
    id, query, qtype, abstraction, issue, scene, grounding, keywords, explanation, probes = row
    label = LABEL.get(issue, "unfeasibility")
    detection = [call("object_detection")]
    touched = set()
    for p in probes:
        detection.append(call(p) if isinstance(p, str) else call(*p))
        touched.update(p[1:] if isinstance(p, tuple) else ())
    for g in grounding:
        if g not in touched:
            detection.append(call("get_object_properties", g))
    case = {
        "id": id,
        "query": query,
        "query_type": qtype,
        "abstraction": abstraction,
        "expected_issue": issue,
        "grounding": grounding,
        "explanation_keywords": keywords,
        "scene": f"scenes/{scene}.json",
        "script": ["\n".join(detection), final(label, explanation)],
        "visualobs_script": final(label, explanation),
    }
    if id in RECOVERY:
        case["recovery"] = copy.deepcopy(RECOVERY[id])
    return case


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data" / "corpus"))
    out = pathlib.Path(ap.parse_args().out)
    (out / "scenes").mkdir(parents=True, exist_ok=True)
    (out / "cases").mkdir(parents=True, exist_ok=True)
    for name, make in SCENES.items():
        (out / "scenes" / f"{name}.json").write_text(json.dumps(make(), indent=2) + "\n")
    paths = []
    for row in CASES:
        case = build_case(row)
        rel = f"cases/{case['id']}.json"
        (out / rel).write_text(json.dumps(case, indent=2) + "\n")
        paths.append(rel)
    index = {"name": "desk", "cases": paths}
    (out / "index.json").write_text(json.dumps(index, indent=2) + "\n")
    print(f"wrote {len(paths)} cases and {len(SCENES)} scenes to {out}")


if __name__ == "__main__":
    main()
