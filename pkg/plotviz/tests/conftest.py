"""Fixtures produce real branchgrad CLI outputs once per session.

The CLI is invoked as a subprocess so this package exercises only the
file formats, never the simulator's Python API.
"""

import subprocess
import sys

import pytest

_CLI = [sys.executable, "-c", "import sys; from branchgrad.cli import main; sys.exit(main(sys.argv[1:]))"]


def _run(args, outdir):
    proc = subprocess.run(
        _CLI + args + ["--threads", "4", "--outdir", str(outdir)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    return outdir


@pytest.fixture(scope="session")
def cli_outputs(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli")
    _run(
        ["scan", "--mode", "energy-loss", "--points", "9", "--n", "80", "--seed", "11"],
        out,
    )
    _run(["gradstats", "--mode", "both", "--n", "80", "--seed", "11"], out)
    _run(
        [
            "optimize", "--mode", "energy-loss", "--methods", "stochad,score_baseline",
            "--replicas", "3", "--steps", "30", "--seed", "11",
        ],
        out,
    )
    _run(["display", "--theta", "2.5", "--grid", "120", "--seed", "3"], out)
    return {
        "scan_loss": out / "scan_loss.csv",
        "scan_grads": out / "scan_grads.csv",
        "gradstats": out / "gradstats.csv",
        "opt": sorted(out.glob("opt_*.csv")),
        "event": out / "event.json",
    }


@pytest.fixture(scope="session")
def plain_event(tmp_path_factory):
    """An event with --tangent 0: no weighted draw, so no alternative."""
    out = tmp_path_factory.mktemp("cli_plain")
    _run(["display", "--theta", "2.5", "--tangent", "0.0", "--grid", "40", "--seed", "3"], out)
    return out / "event.json"
