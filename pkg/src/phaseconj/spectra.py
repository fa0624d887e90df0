"""Spectrum-analyser trace analysis for the estimation experiment.

Traces hold power in dB on a frequency grid.  After normalisation to the
shot-noise trace, 0 dB is one shot-noise unit (SNU).  All arithmetic is done on
linear SNU values.

Added noise is expressed in SNU as well; in the quadrature units of
:mod:`phaseconj.phase_space` (vacuum variance 1/2) an added noise ``Delta``
is an extra quadrature variance of ``Delta / 2``.  With ``Delta = 1`` on both
quadratures the flat-prior fidelity is 2/3, with ``Delta = 1/2`` it is 4/5.

File format: ``<name>.csv`` with header ``freq_hz,power_db`` and a sidecar
``<name>.json`` holding ``{"label", "rbw_hz", "vbw_hz"}``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .rng import standard_normal

# Relative per-bin scatter of synthetic traces (linear power).
DEFAULT_JITTER = 0.005
PEAK_WINDOW = 3
PEAK_SIGMA = 5.0
NOISE_HALF_WIDTH = 25

TRACE_NAMES = ("shot_noise", "ref_x", "est_x", "noise_x", "ref_p", "est_p", "noise_p")


class TraceFormatError(ValueError):
    pass


class PeakNotFoundError(ValueError):
    pass


@dataclass(frozen=True)
class SpectralTrace:
    freqs: np.ndarray
    power_db: np.ndarray
    rbw: float
    vbw: float
    label: str = ""

    def __post_init__(self):
        f = np.asarray(self.freqs, dtype=float)
        p = np.asarray(self.power_db, dtype=float)
        if f.ndim != 1 or f.shape != p.shape or f.size < 2:
            raise ValueError("freqs and power_db must be equal-length 1-D arrays (>= 2 bins)")
        if not np.all(np.diff(f) > 0):
            raise ValueError("frequencies must be strictly increasing")
        if not (self.rbw > 0 and self.vbw > 0):
            raise ValueError("rbw and vbw must be positive")
        object.__setattr__(self, "freqs", f)
        object.__setattr__(self, "power_db", p)

    @property
    def linear(self) -> np.ndarray:
        return 10.0 ** (self.power_db / 10.0)


@dataclass(frozen=True)
class AddedNoise:
    delta_x: float
    delta_p: float

    def __post_init__(self):
        if self.delta_x < 0 or self.delta_p < 0:
            raise ValueError("added noise must be non-negative")


def normalize_to_shot_noise(signal: SpectralTrace, floor: SpectralTrace) -> SpectralTrace:
    if signal.freqs.shape != floor.freqs.shape or not np.allclose(signal.freqs, floor.freqs, rtol=0, atol=1e-6):
        raise ValueError(f"frequency grids of {signal.label!r} and {floor.label!r} differ")
    return SpectralTrace(signal.freqs, signal.power_db - floor.power_db, signal.rbw, signal.vbw, signal.label)


def _nearest_bin(trace, freq):
    f = trace.freqs
    if not f[0] <= freq <= f[-1]:
        raise ValueError(f"{freq:g} Hz is outside the trace ({f[0]:g}..{f[-1]:g} Hz)")
    return int(np.argmin(np.abs(f - freq)))


def signal_power(trace: SpectralTrace, sideband_freq: float) -> float:
    """Linear power of the sideband peak.

    The peak is the maximum within ``PEAK_WINDOW`` bins of ``sideband_freq``.
    It must be a local maximum (not rising past the window) and must stand
    ``PEAK_SIGMA`` robust standard deviations above the trace median, otherwise
    :class:`PeakNotFoundError` is raised.
    """
    lin = trace.linear
    i0 = _nearest_bin(trace, sideband_freq)
    lo, hi = max(0, i0 - PEAK_WINDOW), min(lin.size, i0 + PEAK_WINDOW + 1)
    ipk = lo + int(np.argmax(lin[lo:hi]))
    if (ipk > 0 and lin[ipk - 1] > lin[ipk]) or (ipk < lin.size - 1 and lin[ipk + 1] > lin[ipk]):
        raise PeakNotFoundError(f"no local maximum near {sideband_freq:g} Hz in {trace.label!r}")
    background = float(np.median(lin))
    spread = 1.4826 * float(np.median(np.abs(lin - background)))
    if lin[ipk] - background < PEAK_SIGMA * spread:
        raise PeakNotFoundError(
            f"peak near {sideband_freq:g} Hz in {trace.label!r} is indistinguishable from the noise"
        )
    return float(lin[ipk])


def background_level(trace: SpectralTrace) -> float:
    """Median linear power; the off-peak floor of a sideband trace."""
    return float(np.median(trace.linear))


def noise_level(trace: SpectralTrace, sideband_freq: float, half_width: int = NOISE_HALF_WIDTH) -> float:
    """Mean linear power over ``+-half_width`` bins around the sideband."""
    i0 = _nearest_bin(trace, sideband_freq)
    lin = trace.linear[max(0, i0 - half_width) : i0 + half_width + 1]
    return float(np.mean(lin))


def input_referred_added_noise(s_est: float, n_est: float, s_ref: float) -> float:
    """Estimate noise referred to the input: ``n_est / G`` with ``G = s_est / s_ref``."""
    if s_est <= 0 or s_ref <= 0:
        raise ValueError("signal powers must be positive")
    if n_est < 0:
        raise ValueError("noise power must be non-negative")
    return n_est * s_ref / s_est


def fidelity_from_added_noise(noise: AddedNoise) -> float:
    """Flat-prior coherent-state fidelity ``2 / sqrt((2 + dx)(2 + dp))``."""
    return 2.0 / math.sqrt((2.0 + noise.delta_x) * (2.0 + noise.delta_p))


def snr_gain_db(s_est: float, s_ref: float) -> float:
    if s_est <= 0 or s_ref <= 0:
        raise ValueError("signal powers must be positive")
    return 10.0 * math.log10(s_est / s_ref)


def synth_trace(peak_snu, sideband_freq, floor_snu, span, bins, rng, *, rbw=100e3, vbw=30.0,
                jitter=DEFAULT_JITTER, label="synthetic", offset_db=0.0) -> SpectralTrace:
    """Flat floor plus a Gaussian peak of FWHM ``rbw`` centred on the sideband.

    ``peak_snu`` is the total power at the sideband bin (floor included), so
    ``peak_snu == floor_snu`` gives a flat trace.  Every bin is multiplied by
    ``1 + jitter * N(0, 1)``.  ``offset_db`` shifts the whole trace, e.g. to an
    absolute dBm scale.  Odd ``bins`` put a bin exactly on the sideband.
    """
    if not (span > 0 and bins >= 8):
        raise ValueError("need span > 0 and at least 8 bins")
    if not peak_snu >= floor_snu > 0:
        raise ValueError("need peak_snu >= floor_snu > 0")
    freqs = np.linspace(sideband_freq - span / 2, sideband_freq + span / 2, bins)
    sigma = rbw / (2.0 * math.sqrt(2.0 * math.log(2.0)))
    shape = np.exp(-0.5 * ((freqs - sideband_freq) / sigma) ** 2)
    lin = floor_snu + (peak_snu - floor_snu) * shape
    lin = lin * (1.0 + jitter * standard_normal(rng, bins))
    return SpectralTrace(freqs, 10.0 * np.log10(lin) + offset_db, rbw, vbw, label)


# -- files -------------------------------------------------------------------


def write_trace(trace: SpectralTrace, csv_path) -> None:
    csv_path = Path(csv_path)
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["freq_hz", "power_db"])
        for f, p in zip(trace.freqs, trace.power_db):
            w.writerow([f"{f:.12g}", f"{p:.12g}"])
    meta = {"label": trace.label, "rbw_hz": trace.rbw, "vbw_hz": trace.vbw}
    csv_path.with_suffix(".json").write_text(json.dumps(meta, indent=2) + "\n")


def read_trace(csv_path) -> SpectralTrace:
    csv_path = Path(csv_path)
    with open(csv_path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise TraceFormatError(f"{csv_path}: empty file")
    header = [c.strip() for c in rows[0]]
    if header != ["freq_hz", "power_db"]:
        raise TraceFormatError(f"{csv_path}:1: expected header 'freq_hz,power_db', got {','.join(rows[0])!r}")
    freqs, power = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise TraceFormatError(f"{csv_path}:{lineno}: expected 2 columns, got {len(row)}")
        try:
            f, p = float(row[0]), float(row[1])
        except ValueError:
            raise TraceFormatError(f"{csv_path}:{lineno}: non-numeric value in {row!r}") from None
        if not (math.isfinite(f) and math.isfinite(p)):
            raise TraceFormatError(f"{csv_path}:{lineno}: non-finite value")
        if freqs and f <= freqs[-1]:
            raise TraceFormatError(f"{csv_path}:{lineno}: frequencies must be strictly increasing")
        freqs.append(f)
        power.append(p)
    if len(freqs) < 2:
        raise TraceFormatError(f"{csv_path}: need at least 2 data rows")

    meta_path = csv_path.with_suffix(".json")
    try:
        meta = json.loads(meta_path.read_text())
        rbw, vbw = float(meta["rbw_hz"]), float(meta["vbw_hz"])
    except FileNotFoundError:
        raise TraceFormatError(f"{meta_path}: missing metadata sidecar") from None
    except (ValueError, KeyError, TypeError) as exc:
        raise TraceFormatError(f"{meta_path}: bad metadata ({exc})") from None
    return SpectralTrace(np.array(freqs), np.array(power), rbw, vbw, str(meta.get("label", csv_path.stem)))


# -- analysis ------------------------------------------------------------------


def analyze_quadrature(ref: SpectralTrace, est: SpectralTrace, noise: SpectralTrace, sideband_freq: float):
    """Added noise and signal gain of one quadrature from normalised traces.

    Coherent signal powers are peak minus the trace's own background, so the
    vacuum contribution under the peak is not counted as signal.
    """
    s_ref = signal_power(ref, sideband_freq) - background_level(ref)
    s_est = signal_power(est, sideband_freq) - background_level(est)
    n_est = noise_level(noise, sideband_freq)
    return input_referred_added_noise(s_est, n_est, s_ref), snr_gain_db(s_est, s_ref)


def analyze_traces(traces: dict, sideband_freq: float) -> dict:
    """Full report from raw traces keyed by :data:`TRACE_NAMES`."""
    missing = [n for n in TRACE_NAMES if n not in traces]
    if missing:
        raise ValueError(f"missing traces: {', '.join(missing)}")
    shot = traces["shot_noise"]
    norm = {k: normalize_to_shot_noise(v, shot) for k, v in traces.items() if k != "shot_noise"}
    dx, gx = analyze_quadrature(norm["ref_x"], norm["est_x"], norm["noise_x"], sideband_freq)
    dp, gp = analyze_quadrature(norm["ref_p"], norm["est_p"], norm["noise_p"], sideband_freq)
    return {
        "delta_x": dx,
        "delta_p": dp,
        "fidelity": fidelity_from_added_noise(AddedNoise(dx, dp)),
        "snr_gain_db": {"x": gx, "p": gp},
    }


def load_trace_set(directory) -> tuple[dict, float]:
    """Read every trace in ``directory`` plus ``analysis.json`` (``sideband_hz``)."""
    directory = Path(directory)
    try:
        sideband = float(json.loads((directory / "analysis.json").read_text())["sideband_hz"])
    except FileNotFoundError:
        raise TraceFormatError(f"{directory}: missing analysis.json") from None
    except (ValueError, KeyError, TypeError) as exc:
        raise TraceFormatError(f"{directory / 'analysis.json'}: {exc}") from None
    traces = {name: read_trace(directory / f"{name}.csv") for name in TRACE_NAMES}
    return traces, sideband
