"""
Experiments from Python and the command line
=============================================

Every experiment writes CSV data plus a verdict.json under an output root and
is also exposed as a CLI subcommand:

    qthermo fig1 --out results
    qthermo sweep --t-end 5 --dt 1e-3 --out results

The same runs from Python:
"""
import tempfile

from qthermo.experiments import ExperimentConfig, run

with tempfile.TemporaryDirectory() as out:
    for name in ("cp-check", "bounds", "witness"):
        params = {"unital_sweep": 2, "unital_states": 200} if name == "witness" else {}
        verdict = run(ExperimentConfig(name, dt=1e-2, out=out, params=params))
        print(name, "PASS" if verdict["pass"] else "FAIL", verdict["files"])
