"""JSON encoding of states, pairs, brackets, and run products.

All writers emit sorted keys and compact separators so identical inputs
produce byte-identical files; floats use Python repr (shortest exact
round-trip).  Every run product embeds the sha256 of its canonical
configuration for provenance.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any

import numpy as np

from .coords import Atom, EnergyMeasure, EulerianPair
from .flow import Relabeling
from .lagrangian import Grid, LagrangianState
from .metric import MetricBracket

__all__ = [
    "dumps_canonical",
    "config_hash",
    "pair_to_dict",
    "pair_from_dict",
    "state_to_dict",
    "state_from_dict",
    "bracket_to_dict",
    "pair_to_csv",
]


def dumps_canonical(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(config: Any) -> str:
    return hashlib.sha256(dumps_canonical(config).encode()).hexdigest()


def pair_to_dict(p: EulerianPair) -> dict:
    return {
        "x": p.x.tolist(),
        "u": p.u.tolist(),
        "density": p.mu.density.tolist(),
        "atoms": [{"x": a.x, "mass": a.mass} for a in p.mu.atoms],
    }


def pair_from_dict(d: dict) -> EulerianPair:
    atoms = tuple(Atom(float(a["x"]), float(a["mass"])) for a in d.get("atoms", []))
    return EulerianPair(
        np.asarray(d["x"], dtype=float),
        np.asarray(d["u"], dtype=float),
        EnergyMeasure(np.asarray(d["density"], dtype=float), atoms),
    )


def state_to_dict(X: LagrangianState) -> dict:
    return {
        "grid": {"xi_min": X.grid.xi_min, "xi_max": X.grid.xi_max, "n": X.grid.n},
        "zeta": X.zeta.tolist(),
        "u": X.u.tolist(),
        "h": X.hcum.tolist(),
    }


def state_from_dict(d: dict) -> LagrangianState:
    g = d["grid"]
    grid = Grid(float(g["xi_min"]), float(g["xi_max"]), int(g["n"]))
    return LagrangianState(
        grid,
        np.asarray(d["zeta"], dtype=float),
        np.asarray(d["u"], dtype=float),
        np.asarray(d["h"], dtype=float),
    )


def _relabeling_knots(f: Relabeling) -> dict:
    # knots thinned to at most 129 for readability; endpoints always kept
    n = f.grid.n
    idx = np.unique(np.linspace(0, n - 1, min(n, 129)).astype(int))
    return {"xi": f.grid.nodes[idx].tolist(), "f": f.values[idx].tolist()}


def bracket_to_dict(b: MetricBracket) -> dict:
    return {
        "lower": b.lower,
        "upper": b.upper,
        "iterations": b.iterations,
        "witness_knots": {
            "f1": _relabeling_knots(b.witness_f1),
            "f2": _relabeling_knots(b.witness_f2),
        },
    }


def pair_to_csv(p: EulerianPair) -> str:
    lines = ["x,u,density"]
    for xi, ui, di in zip(p.x.tolist(), p.u.tolist(), p.mu.density.tolist()):
        lines.append(f"{xi!r},{ui!r},{di!r}")
    return "\n".join(lines) + "\n"
