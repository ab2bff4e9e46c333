"""Scenario files and the identity-check suite.

Round-trips a named collection of objects through JSON, then runs the full
registry of executable identities and prints the deterministic report. The
same operations are available on the command line:

    qcond validate scenario.json
    qcond check --suite all --trials 100 --dims 2..3 --seed 7 --format json
    qcond distribution --scenario scenario.json --observable basis --state mixed
    qcond measure --scenario scenario.json --model meter
"""

import tempfile
from pathlib import Path

import numpy as np

from qcond import (
    MeasurementModel,
    Observable,
    Scenario,
    State,
    load_scenario,
    random_instrument,
    random_observable,
    run_checks,
    save_scenario,
)

scn = Scenario(seed=7)
scn.states["mixed"] = State.maximally_mixed(2)
scn.observables["basis"] = Observable(("up", "down"), (np.diag([1.0, 0.0]), np.diag([0.0, 1.0])))
scn.observables["probe"] = random_observable(2, 2, seed=18)
scn.instruments["interact"] = random_instrument(2, 4, 2, seed=19)
scn.models["meter"] = MeasurementModel(2, 2, scn.instruments["interact"], scn.observables["probe"])

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "scenario.json"
    save_scenario(scn, path)
    print(f"wrote {path.stat().st_size} bytes of JSON")
    loaded = load_scenario(path)
    print("round trip preserves every object:",
          sorted(loaded.object_names()) == sorted(scn.object_names()))

# The registry executes each structural identity on seeded random instances
# and reports the worst deviation. Identical inputs give identical reports.
report = run_checks("all", trials=10, dims=[2, 3], seed=7)
print()
print(report.to_table())
again = run_checks("all", trials=10, dims=[2, 3], seed=7)
print("rerun with the same seed is byte-identical:", report.to_json() == again.to_json())
