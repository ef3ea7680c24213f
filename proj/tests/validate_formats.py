"""Validate real fbench output against the JSON schemas in schema/.

usage: validate_formats.py <fbench> <schema_dir> <work_dir>
"""
import json
import pathlib
import re
import shutil
import subprocess
import sys

import jsonschema
from referencing import Registry, Resource
from websockets.sync.client import connect

FURNITURE = ["one_leg", "lamp", "square_table", "desk", "drawer", "cabinet", "round_table", "stool", "chair"]


def load_registry(schema_dir):
    resources = []
    for path in schema_dir.glob("*.schema.json"):
        doc = json.loads(path.read_text())
        jsonschema.Draft202012Validator.check_schema(doc)
        resources.append((doc["$id"], Resource.from_contents(doc)))
    return Registry().with_resources(resources)


class Checker:
    def __init__(self, registry):
        self.registry = registry
        self.checked = 0

    def __call__(self, ref, instance, what):
        validator = jsonschema.Draft202012Validator({"$ref": ref}, registry=self.registry)
        errors = sorted(validator.iter_errors(instance), key=lambda e: list(e.path))
        if errors:
            e = errors[0]
            sys.exit(f"{what}: {'/'.join(map(str, e.path))}: {e.message}")
        self.checked += 1

    def rejects(self, ref, instance, what):
        validator = jsonschema.Draft202012Validator({"$ref": ref}, registry=self.registry)
        if validator.is_valid(instance):
            sys.exit(f"{what}: schema accepted an invalid document")


def run(*cmd):
    return subprocess.run(cmd, check=True, capture_output=True, text=True).stdout


def check_episode_file(check, path):
    lines = path.read_text().splitlines()
    header = json.loads(lines[0])
    check("episode.schema.json#/$defs/header", header, f"{path.name} header")
    if header["steps"] != len(lines) - 1:
        sys.exit(f"{path.name}: header says {header['steps']} steps, file has {len(lines) - 1}")
    for i, line in enumerate(lines[1:], start=2):
        check("episode.schema.json#/$defs/step", json.loads(line), f"{path.name} line {i}")


def check_teleop(check, fbench, work):
    out = work / "teleop"
    proc = subprocess.Popen([fbench, "serve-teleop", "--port", "0", "--out", str(out)],
                            stdout=subprocess.PIPE, text=True)
    try:
        m = re.search(r"ws://\S+", proc.stdout.readline())
        if not m:
            sys.exit("serve-teleop did not print its address")
        with connect(m.group(0)) as ws:
            msg = json.loads(ws.recv(timeout=10))
            check("teleop.schema.json", msg, "first snapshot")
            check("teleop.schema.json#/$defs/snapshot", msg, "first snapshot")
            commands = [
                {"type": "command", "control": "start_record"},
                {"type": "command", "delta_position": [0.0, 0.0, -1.0], "wrist_yaw_delta": 0.1, "gripper": 0},
                {"type": "command", "delta_position": [0.5, 0.0, 0.0], "gripper": 1},
                {"type": "command"},
            ]
            for cmd in commands:
                check("teleop.schema.json#/$defs/command", cmd, "command")
                ws.send(json.dumps(cmd))
                for _ in range(3):
                    check("teleop.schema.json#/$defs/snapshot", json.loads(ws.recv(timeout=10)), "snapshot")
            bad = {"type": "command", "delta_position": [2.0, 0.0, 0.0]}
            check.rejects("teleop.schema.json#/$defs/command", bad, "out-of-range command")
            ws.send(json.dumps(bad))
            for _ in range(50):
                msg = json.loads(ws.recv(timeout=10))
                if msg["type"] == "error":
                    break
            check("teleop.schema.json#/$defs/error", msg, "error reply")
            stop = {"type": "command", "control": "stop_record"}
            check("teleop.schema.json#/$defs/command", stop, "command")
            ws.send(json.dumps(stop))
            for _ in range(50):
                msg = json.loads(ws.recv(timeout=10))
                if msg["type"] == "snapshot" and not msg["recording"]:
                    break
    finally:
        proc.terminate()
        proc.wait(timeout=10)
    recorded = sorted(out.glob("*.jsonl"))
    if len(recorded) != 1:
        sys.exit(f"expected one teleop recording, found {len(recorded)}")
    check_episode_file(check, recorded[0])
    if json.loads(recorded[0].read_text().splitlines()[0])["operator"] != "teleop":
        sys.exit("teleop recording has the wrong operator")


def main():
    fbench, schema_dir, work = sys.argv[1], pathlib.Path(sys.argv[2]), pathlib.Path(sys.argv[3])
    shutil.rmtree(work, ignore_errors=True)
    work.mkdir(parents=True)
    check = Checker(load_registry(schema_dir))

    for level in ("low", "med", "high"):
        check("run_config.schema.json", json.loads(run(fbench, "eval", "--level", level, "--dump-config")),
              f"dump-config {level}")
    config = json.loads(run(fbench, "eval", "--dump-config"))
    config["observation_channels"] = {"fused_part_poses": True, "image": True}
    config["furniture"] = "lamp"
    config["level"] = "med"
    check("run_config.schema.json", config, "edited config")
    check.rejects("run_config.schema.json", {**config, "bogus": 1}, "config with unknown key")
    check.rejects("run_config.schema.json", {"furniture": "lamp"}, "config without format_version")
    for sample in (schema_dir.parent / "samples").glob("*.json"):
        ref = "catalog.schema.json" if sample.name.endswith(".catalog.json") else "run_config.schema.json"
        check(ref, json.loads(sample.read_text()), f"samples/{sample.name}")
    cfg_path = work / "channels.json"
    cfg_path.write_text(json.dumps(config))

    for fid in FURNITURE:
        check("catalog.schema.json", json.loads(run(fbench, "catalog", fid)), f"catalog {fid}")

    episodes = work / "episodes"
    run(fbench, "collect", "--config", str(cfg_path), "--episodes", "1", "--out", str(episodes))
    files = sorted(episodes.glob("*.jsonl"))
    if not files:
        sys.exit("collect wrote no episodes")
    for path in files:
        check_episode_file(check, path)
    first = json.loads(files[0].read_text().splitlines()[1])["observation"]
    if "image" not in first or "fused_part_poses" not in first:
        sys.exit("optional observation channels missing from the episode")

    check_teleop(check, fbench, work)
    print(f"{check.checked} documents valid")


if __name__ == "__main__":
    main()
