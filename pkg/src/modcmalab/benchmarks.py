"""Seeded benchmark problems on the box [-5, 5]^d.

Twelve classic test functions covering separable, ill-conditioned and
multimodal landscapes.  An instance is a seeded translation (and, for the
rotated group, a seeded rotation) of the raw function: f(x) = raw(R(x -
x_opt)) + f_opt.  The linear slope is the exception: its optimum sits on a
box corner and the function flattens outside the box, so leaving the search
domain in the right orthant attains the optimum exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .boundary import Box
from .linalg import gram_schmidt_qr

_ROOT_ENTROPY = 20260809  # fixed suite-wide seed root

ELLIPSOID_CONDITIONING = 1e6


def _ellipsoid(z):
    d = z.size
    coeff = ELLIPSOID_CONDITIONING ** (np.arange(d) / (d - 1))
    return float(coeff @ (z * z))


def _rastrigin(z):
    return float(10.0 * (z.size - np.cos(2.0 * np.pi * z).sum()) + z @ z)


def _sphere(z):
    return float(z @ z)


def _attractive_sector(z):
    s = np.where(z > 0.0, 100.0, 1.0)
    return float(((s * z) ** 2).sum())


def _rosenbrock(z):
    u = z + 1.0
    return float((100.0 * (u[:-1] ** 2 - u[1:]) ** 2 + (u[:-1] - 1.0) ** 2).sum())


def _bent_cigar(z):
    return float(z[0] ** 2 + 1e6 * (z[1:] @ z[1:]))


def _sharp_ridge(z):
    return float(z[0] ** 2 + 100.0 * np.sqrt(z[1:] @ z[1:]))


def _different_powers(z):
    d = z.size
    expo = 2.0 + 4.0 * np.arange(d) / (d - 1)
    return float(np.sqrt((np.abs(z) ** expo).sum()))


def _schaffers10(z):
    s = np.sqrt(z[:-1] ** 2 + z[1:] ** 2)
    term = np.sqrt(s) * (1.0 + np.sin(50.0 * s ** 0.2) ** 2)
    return float((term.sum() / (z.size - 1)) ** 2)


#: fid -> (raw function, rotated?)
_SUITE = {
    "sphere": (_sphere, False),
    "sep_ellipsoid": (_ellipsoid, False),
    "sep_rastrigin": (_rastrigin, False),
    "linear_slope": (None, False),  # special-cased in evaluate
    "attractive_sector": (_attractive_sector, True),
    "rosenbrock": (_rosenbrock, False),
    "rot_ellipsoid": (_ellipsoid, True),
    "bent_cigar": (_bent_cigar, True),
    "sharp_ridge": (_sharp_ridge, True),
    "different_powers": (_different_powers, True),
    "rot_rastrigin": (_rastrigin, True),
    "schaffers10": (_schaffers10, True),
}

FUNCTION_IDS = tuple(_SUITE)


@dataclass
class ProblemInstance:
    """One seeded instance of a suite function; counts its own evaluations."""

    fid: str
    d: int
    iid: int
    x_opt: np.ndarray
    f_opt: float
    rotation: np.ndarray | None
    box: Box
    evals: int = field(default=0)

    def evaluate(self, x) -> float:
        x = np.asarray(x, dtype=float)
        self.evals += 1
        if self.fid == "linear_slope":
            return self._linear_slope(x)
        z = x - self.x_opt
        if self.rotation is not None:
            z = self.rotation @ z
        raw, _ = _SUITE[self.fid]
        return raw(z) + self.f_opt

    __call__ = evaluate

    def _linear_slope(self, x: np.ndarray) -> float:
        # coordinates past the optimal corner stop contributing, so the
        # optimum is attained anywhere deep inside that orthant
        s = np.sign(self.x_opt) * 10.0 ** (np.arange(self.d) / (self.d - 1))
        z = np.where(self.x_opt * x < 25.0, x, self.x_opt)
        return float((5.0 * np.abs(s) - s * z).sum() + self.f_opt)


def make_instance(fid: str, d: int, iid: int) -> ProblemInstance:
    """Deterministic instance of ``fid``: same (fid, d, iid) -> same instance."""
    if fid not in _SUITE:
        raise ValueError(f"unknown function id {fid!r}")
    if d < 2:
        raise ValueError("suite functions need d >= 2")
    fid_index = FUNCTION_IDS.index(fid)
    rng = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence([_ROOT_ENTROPY, fid_index, d, iid])))
    if fid == "linear_slope":
        signs = np.where(rng.random(d) < 0.5, -1.0, 1.0)
        x_opt = 5.0 * signs
    else:
        x_opt = rng.uniform(-4.0, 4.0, size=d)
    f_opt = float(rng.uniform(-100.0, 100.0))
    _, rotated = _SUITE[fid]
    rotation = gram_schmidt_qr(rng.standard_normal((d, d))) if rotated else None
    return ProblemInstance(fid=fid, d=d, iid=iid, x_opt=x_opt, f_opt=f_opt,
                           rotation=rotation, box=Box.cube(d))
