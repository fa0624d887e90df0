"""Synthetic replicas of the local and joint estimation spectra.

Each fixture is a directory of traces (see :data:`phaseconj.spectra.TRACE_NAMES`)
on an absolute dB scale, plus ``analysis.json`` with the sideband frequency.
Parameters are chosen so the analysis returns the measured added noise:
``1.12`` on both quadratures for the local strategy, ``0.51``/``0.52`` with
signal gains of 3.0/2.9 dB for the joint strategy.

Regenerate the bundled copies with ``python -m phaseconj.fixtures``.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import numpy as np

from .spectra import synth_trace, write_trace

SIDEBAND_HZ = 5.0e6
SPAN_HZ = 2.0e6
BINS = 401
RBW_HZ = 100e3
VBW_HZ = 30.0
SHOT_NOISE_DBM = -80.0
REFERENCE_SNU = 100.0

# name -> {quadrature: (signal gain in linear units, estimate noise in SNU)}
FIXTURES = {
    "local": {"x": (1 / 1.12, 1.0), "p": (1 / 1.12, 1.0)},
    "nonlocal": {
        "x": (10 ** 0.30, 0.51 * 10 ** 0.30),
        "p": (10 ** 0.29, 0.52 * 10 ** 0.29),
    },
}
FIXTURE_SEEDS = {"local": 2024, "nonlocal": 2025}


def make_fixture(name: str, seed: int | None = None):
    """Return ``(traces, sideband_hz)`` for a named fixture."""
    params = FIXTURES[name]
    seed = FIXTURE_SEEDS[name] if seed is None else seed
    streams = iter(np.random.SeedSequence(seed).spawn(16))

    def trace(label, peak, floor):
        rng = np.random.default_rng(next(streams))
        return synth_trace(peak, SIDEBAND_HZ, floor, SPAN_HZ, BINS, rng, rbw=RBW_HZ, vbw=VBW_HZ,
                           label=label, offset_db=SHOT_NOISE_DBM)

    traces = {"shot_noise": trace("shot_noise", 1.0, 1.0)}
    for q in ("x", "p"):
        gain, n_est = params[q]
        traces[f"ref_{q}"] = trace(f"ref_{q}", REFERENCE_SNU + 1.0, 1.0)
        traces[f"est_{q}"] = trace(f"est_{q}", gain * REFERENCE_SNU + n_est, n_est)
        traces[f"noise_{q}"] = trace(f"noise_{q}", n_est, n_est)
    return traces, SIDEBAND_HZ


def write_fixture(name: str, directory, seed: int | None = None) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    traces, sideband = make_fixture(name, seed)
    for key, tr in traces.items():
        write_trace(tr, directory / f"{key}.csv")
    (directory / "analysis.json").write_text(json.dumps({"sideband_hz": sideband}, indent=2) + "\n")
    return directory


def fixture_path(name: str) -> Path:
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; choose from {sorted(FIXTURES)}")
    return Path(str(resources.files("phaseconj") / "data" / "fixtures" / name))


if __name__ == "__main__":
    root = Path(__file__).parent / "data" / "fixtures"
    for fixture in FIXTURES:
        print(write_fixture(fixture, root / fixture))
