"""Driving the command line tool from scenario files.

Run with ``python demos/06_cli.py``.  The same commands work from a shell
as ``chalkmotion <subcommand> ...``.
"""

import json
import tempfile
from pathlib import Path

from chalkmotion.cli import main

work = Path(tempfile.mkdtemp(prefix="chalkmotion-demo-"))

ellipsoid = {"center": [0, 0, 0, 0], "shape": [[0.1, 0, 0, 0], [0, 10, 0, 0], [0, 0, 0.1, 0], [0, 0, 0, 10]], "level": 1}
(work / "ell.json").write_text(json.dumps(ellipsoid))
print("$ chalkmotion capacity --ellipsoid ell.json")
code = main(["capacity", "--ellipsoid", str(work / "ell.json")])
print(f"exit code {code}\n")

scenario = {
    "kind": "chalkboard",
    "inputs": {"isotopy": {"kind": "free-particle"}, "ball": {"eps": 0.3, "z0": [0, 0]}},
    "grid": {"T": 2.0, "dt": 0.5},
    "output": {"path": "free.csv", "format": "csv"},
}
(work / "free.json").write_text(json.dumps(scenario))
print("$ chalkmotion run --scenario free.json")
code = main(["run", "--scenario", str(work / "free.json")])
print(f"exit code {code}\n")
print((work / "free.csv").read_text())

# A malformed grid is an input error (exit code 2).
bad = dict(scenario, grid={"T": 1.0, "dt": 0.0})
(work / "bad.json").write_text(json.dumps(bad))
print("$ chalkmotion run --scenario bad.json")
print(f"exit code {main(['run', '--scenario', str(work / 'bad.json')])}")
