"""JSON schemas for generators and rate schedules, CSV writers for results.

Generator document::

    {
      "dim": 2,
      "name": "optional label",
      "hamiltonian_kind": "none" | "terms",
      "hamiltonian": [{"operator": M, "schedule": S}, ...],
      "jump_ops": [{"operator": M, "rate": S}, ...]
    }

``M`` is a nested ``[row][col] -> [re, im]`` array and ``S`` a schedule,
either ``{"constant": x}`` or ``{"segments": [{"t_start", "t_end",
"poly_coeffs"}, ...]}`` with ``t_end = null`` for an open last segment and
coefficients in ascending powers of ``t``.

Phase-covariant rates use the same schedule objects::

    {"kind": "phase_covariant", "gamma_plus": S, "gamma_minus": S,
     "gamma_z": S, "omega_r": S}

or ``{"kind": "phase_covariant", "preset": "counterexample"}``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .generators import GeneratorSpec
from .phase_covariant import PhaseCovariantRates, counterexample_rates
from .schedules import PiecewisePolynomial


def fmt(x) -> str:
    """Locale-free shortest round-trip float text (``nan``, ``inf`` kept)."""
    return repr(float(x))


def matrix_to_json(a: np.ndarray) -> list:
    a = np.asarray(a, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def matrix_from_json(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 3 or arr.shape[-1] != 2:
        raise ConfigError("matrix must be a nested [row][col] -> [re, im] array")
    return arr[..., 0] + 1j * arr[..., 1]


def schedule_to_json(f) -> dict:
    if not isinstance(f, PiecewisePolynomial):
        raise ConfigError("only piecewise-polynomial schedules can be serialized")
    if len(f.segments) == 1 and len(f.segments[0].coeffs) == 1 and f.segments[0].t_start == 0.0 and math.isinf(f.segments[0].t_end):
        return {"constant": f.segments[0].coeffs[0]}
    return f.to_dict()


def schedule_from_json(data) -> PiecewisePolynomial:
    if isinstance(data, (int, float)):
        return PiecewisePolynomial.constant(float(data))
    try:
        return PiecewisePolynomial.from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad schedule: {exc}") from exc


def generator_to_json(gen: GeneratorSpec) -> dict:
    return {
        "dim": gen.dim,
        "name": gen.name,
        "hamiltonian_kind": "terms" if gen.hamiltonian else "none",
        "hamiltonian": [{"operator": matrix_to_json(h), "schedule": schedule_to_json(f)} for h, f in gen.hamiltonian],
        "jump_ops": [{"operator": matrix_to_json(op), "rate": schedule_to_json(g)} for op, g in gen.channels],
    }


def generator_from_json(data: dict) -> GeneratorSpec:
    if data.get("kind") == "phase_covariant":
        from .phase_covariant import make_generator

        return make_generator(rates_from_json(data))
    try:
        dim = int(data["dim"])
        kind = data.get("hamiltonian_kind", "terms" if data.get("hamiltonian") else "none")
        if kind not in ("none", "terms"):
            raise ConfigError(f"unknown hamiltonian_kind {kind!r}")
        ham = () if kind == "none" else tuple(
            (matrix_from_json(h["operator"]), schedule_from_json(h["schedule"])) for h in data.get("hamiltonian", [])
        )
        chans = tuple((matrix_from_json(c["operator"]), schedule_from_json(c["rate"])) for c in data.get("jump_ops", []))
    except KeyError as exc:
        raise ConfigError(f"generator document is missing {exc}") from exc
    return GeneratorSpec(dim, ham, chans, name=data.get("name", ""))


def rates_to_json(rates: PhaseCovariantRates) -> dict:
    return {
        "kind": "phase_covariant",
        "gamma_plus": schedule_to_json(rates.gamma_plus),
        "gamma_minus": schedule_to_json(rates.gamma_minus),
        "gamma_z": schedule_to_json(rates.gamma_z),
        "omega_r": schedule_to_json(rates.omega_r),
    }


def rates_from_json(data: dict) -> PhaseCovariantRates:
    if data.get("preset") == "counterexample":
        return counterexample_rates()
    if "preset" in data:
        raise ConfigError(f"unknown preset {data['preset']!r}")
    try:
        return PhaseCovariantRates(
            schedule_from_json(data["gamma_plus"]),
            schedule_from_json(data["gamma_minus"]),
            schedule_from_json(data["gamma_z"]),
            schedule_from_json(data.get("omega_r", 0.0)),
        )
    except KeyError as exc:
        raise ConfigError(f"rates document is missing {exc}") from exc


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


# CSV


def _write_rows(path, header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([c if isinstance(c, str) else fmt(c) for c in row])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8", newline="")
    return text


def write_table(path, header, rows) -> str:
    """Generic numeric CSV; strings pass through, numbers go through :func:`fmt`."""
    return _write_rows(path, header, rows)


def write_epr_csv(path, samples) -> str:
    """Columns ``t, sigma, dS, flow, region`` (region empty when unset)."""
    rows = []
    for s in samples:
        region = "" if s.region is None else getattr(s.region, "value", str(s.region))
        rows.append((s.t, s.sigma, s.dS, s.flow, region))
    return _write_rows(path, ("t", "sigma", "dS", "flow", "region"), rows)


def write_flow_csv(path, samples) -> str:
    return _write_rows(path, ("t", "distance", "derivative"), [(s.t, s.distance, s.derivative) for s in samples])


def write_trajectory_csv(path, traj) -> str:
    """Columns ``t``, ``re_ij``/``im_ij`` row-major, ``vstar_z`` (qubits), ``sigma``.

    Only single (unbatched) trajectories are written.
    """
    states = traj.states
    if states.ndim != 3:
        raise ValueError("write_trajectory_csv expects a single trajectory")
    d = states.shape[-1]
    header = ["t"]
    for i in range(d):
        for j in range(d):
            header += [f"re_{i}{j}", f"im_{i}{j}"]
    if d == 2:
        header.append("vstar_z")
    header.append("sigma")
    nan = np.full(len(traj.tgrid), np.nan)
    sigma = nan if traj.sigma is None else traj.sigma
    if traj.ifps is not None:
        vz = np.real(traj.ifps[:, 0, 0] - traj.ifps[:, 1, 1]) if d == 2 else nan
    else:
        vz = nan
    rows = []
    for k, t in enumerate(traj.tgrid):
        row = [t]
        for z in states[k].reshape(-1):
            row += [z.real, z.imag]
        if d == 2:
            row.append(vz[k])
        row.append(sigma[k])
        rows.append(row)
    return _write_rows(path, header, rows)


def read_csv(path) -> tuple[list[str], np.ndarray]:
    """Header and numeric body of a CSV written here (string columns become NaN)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        body = [[_to_float(c) for c in row] for row in reader]
    return header, np.array(body, dtype=float).reshape(len(body), len(header))


def _to_float(c: str) -> float:
    try:
        return float(c)
    except ValueError:
        return math.nan
