"""KYP frequency condition, coercivity and Riccati checks.

Systems are dicts in the CLI JSON schema: "kind", "A", "B", optional "N",
and "cost" with "W" and optional "V", "R". Complex entries are [re, im]
pairs. Reports come back as dicts.
"""

import json

import numpy as np

from . import _core
from ._core import KypcError

__all__ = [
    "KypcError",
    "analyze_det",
    "analyze_stoch",
    "check_coercivity",
    "cost_estimate",
    "ms_abscissa",
    "popov",
    "solve_are",
    "strict_margin",
]


def _entry(z):
    z = complex(z)
    return z.real if z.imag == 0.0 else [z.real, z.imag]


def _matrix(x):
    a = np.atleast_2d(np.asarray(x))
    return [[_entry(v) for v in row] for row in a]


def _text(system):
    if isinstance(system, str):
        return system
    out = dict(system)
    for key in ("A", "B", "N"):
        if key in out and isinstance(out[key], np.ndarray):
            out[key] = _matrix(out[key])
    if "cost" in out:
        out["cost"] = {
            k: _matrix(v) if isinstance(v, np.ndarray) else v
            for k, v in out["cost"].items()
        }
    return json.dumps(out)


def analyze_det(system, points=2048, horizon=0.0, dt=1e-2):
    return json.loads(_core.analyze_det(_text(system), points, horizon, dt))


def analyze_stoch(system):
    return json.loads(_core.analyze_stoch(_text(system)))


def solve_are(system):
    return json.loads(_core.solve_are(_text(system)))


def check_coercivity(system, horizon=0.0, dt=1e-2):
    return json.loads(_core.check_coercivity(_text(system), horizon, dt))


def strict_margin(system, points=2048):
    """Largest eps with Phi(omega) >= eps^2 G*G on the grid, or None."""
    return _core.strict_margin(_text(system), points)


def popov(system, omega):
    return _core.popov(_text(system), omega)


def cost_estimate(system, F, x0, dt=1e-3, horizon=10.0, paths=10000, seed=1,
                  antithetic=False, threads=0):
    """Monte Carlo cost of u = F x for a stochastic system."""
    F = np.atleast_2d(np.asarray(F, dtype=complex))
    x0 = np.asarray(x0, dtype=complex).ravel()
    return json.loads(_core.cost_estimate(_text(system), F, x0, dt, horizon, paths,
                                          seed, antithetic, threads))


def ms_abscissa(A, N):
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    N = np.atleast_2d(np.asarray(N, dtype=complex))
    return _core.ms_abscissa(A, N)
