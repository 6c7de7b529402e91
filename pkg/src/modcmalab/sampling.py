"""Base random vectors for candidate generation.

Streams of standard-normal coordinate vectors built from a plain Gaussian
source or from low-discrepancy (Sobol/Halton) sequences pushed through the
inverse normal CDF, with optional sign mirroring and Gram-Schmidt
orthonormalization of each batch.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

SOBOL_MAX_DIM = int(qmc.Sobol.MAXDIM)

# open-interval clamp: inverse CDF is undefined at 0 and 1
_UNIT_LO = 2.0 ** -53
_UNIT_HI = 1.0 - 2.0 ** -53


@dataclass(frozen=True)
class SamplerSpec:
    """How base samples are produced for one run."""

    base: str = "gaussian"
    mirrored: str = "off"
    orthogonal: bool = False
    dimension: int = 1

    def __post_init__(self):
        if self.base not in ("gaussian", "sobol", "halton"):
            raise ValueError(f"unknown base sampler {self.base!r}")
        if self.mirrored not in ("off", "mirrored", "mirrored_pairwise"):
            raise ValueError(f"unknown mirroring mode {self.mirrored!r}")
        if not isinstance(self.dimension, int) or self.dimension < 1:
            raise ValueError("dimension must be a positive integer")
        if self.base == "sobol" and self.dimension > SOBOL_MAX_DIM:
            raise ValueError(f"sobol supports at most {SOBOL_MAX_DIM} dimensions")


@dataclass
class BaseSample:
    """One standard-normal coordinate vector, tagged when part of a mirror pair."""

    z: np.ndarray
    pair_id: int | None = None


def gauss_from_unit(u):
    """Map unit-cube coordinates through the inverse standard-normal CDF.

    Symmetrized so that map(0.5) == 0.0 exactly and map(1-u) == -map(u)
    bitwise; coordinates are clamped away from {0, 1} first.
    """
    u = np.clip(np.asarray(u, dtype=float), _UNIT_LO, _UNIT_HI)
    out = np.empty_like(u)
    lower = u <= 0.5
    out[lower] = ndtri(u[lower])
    out[~lower] = -ndtri(1.0 - u[~lower])
    return out


def _primes(n: int) -> list[int]:
    primes, cand = [], 2
    while len(primes) < n:
        if all(cand % p for p in primes):
            primes.append(cand)
        cand += 1
    return primes


def _radical_inverse(index: int, base: int) -> float:
    inv, f = 0.0, 1.0
    while index > 0:
        f /= base
        inv += f * (index % base)
        index //= base
    return inv


def halton_unit(index: int, d: int) -> np.ndarray:
    """Halton point ``index`` (index 0 is the origin) in the unit cube."""
    return np.array([_radical_inverse(index, b) for b in _primes(d)])


def sobol_unit(index: int, d: int) -> np.ndarray:
    """Sobol point ``index`` of the unscrambled sequence in the unit cube."""
    engine = qmc.Sobol(d, scramble=False)
    if index > 0:
        engine.fast_forward(index)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return engine.random(1)[0]


def next_gaussian(rng: np.random.Generator, d: int) -> np.ndarray:
    """d independent standard-normal draws from the given stream."""
    if d < 1:
        raise ValueError("d must be >= 1")
    return rng.standard_normal(d)


def next_quasirandom(seq: str, index: int, d: int) -> np.ndarray:
    """Quasi-random point ``index`` mapped to standard-normal coordinates."""
    if seq == "halton":
        u = halton_unit(index, d)
    elif seq == "sobol":
        u = sobol_unit(index, d)
    else:
        raise ValueError(f"unknown sequence {seq!r}")
    return gauss_from_unit(u)


def mirror_pair(z: np.ndarray, pair_id: int = 0) -> tuple[BaseSample, BaseSample]:
    """The sample and its exact sign mirror, sharing one pair tag."""
    z = np.asarray(z, dtype=float)
    return BaseSample(z, pair_id), BaseSample(-z, pair_id)


def orthonormalize(batch, resample=None, max_retries: int = 10):
    """Gram-Schmidt orthogonalize a batch, preserving each vector's norm.

    Only the first min(k, d) vectors can be mutually orthogonal; any beyond
    that are passed through unchanged.  A vector whose residual collapses
    (norm < 1e-12) is replaced via ``resample()`` and retried at most
    ``max_retries`` times.
    """
    vectors = [np.array(v, dtype=float) for v in batch]
    if not vectors:
        raise ValueError("batch must contain at least one vector")
    d = vectors[0].size
    n_orth = min(len(vectors), d)
    units: list[np.ndarray] = []
    out = list(vectors)
    for i in range(n_orth):
        v = vectors[i]
        for _ in range(max_retries + 1):
            u = v.copy()
            for e in units:
                u -= (e @ u) * e
            norm = np.linalg.norm(u)
            if norm >= 1e-12:
                break
            if resample is None:
                raise ValueError("degenerate vector and no resampler given")
            v = np.asarray(resample(), dtype=float)
        else:
            raise ValueError("could not orthogonalize batch (degenerate input)")
        e = u / norm
        units.append(e)
        out[i] = e * np.linalg.norm(v)
    return out


class Sampler:
    """Sequential base-sample stream for one run (single-owner, stateful).

    Quasi-random streams start at sequence index 1: index 0 is the origin of
    the unit cube, where the inverse CDF is undefined.
    """

    def __init__(self, spec: SamplerSpec, rng: np.random.Generator):
        self.spec = spec
        self.rng = rng
        self._pair_counter = 0
        self._halton_index = 0
        self._sobol = None
        if spec.base == "sobol":
            self._sobol = qmc.Sobol(spec.dimension, scramble=False)
            self._sobol.fast_forward(1)  # skip the all-zero point

    def _draw_unit(self, n: int) -> np.ndarray:
        if self.spec.base == "sobol":
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                return self._sobol.random(n)
        pts = np.empty((n, self.spec.dimension))
        for i in range(n):
            self._halton_index += 1
            pts[i] = halton_unit(self._halton_index, self.spec.dimension)
        return pts

    def _draw_base(self, n: int) -> list[np.ndarray]:
        if self.spec.base == "gaussian":
            return [self.rng.standard_normal(self.spec.dimension) for _ in range(n)]
        return list(gauss_from_unit(self._draw_unit(n)))

    def generation(self, n: int) -> list[BaseSample]:
        """Base samples for one generation of ``n`` candidates.

        With mirroring, ceil(n/2) vectors are drawn and each is emitted with
        its sign mirror (the final pair is truncated when n is odd); with
        orthogonal sampling the drawn batch is orthonormalized first, so
        mirrored halves inherit the orthogonalized directions.
        """
        if n < 1:
            raise ValueError("population size must be >= 1")
        mirrored = self.spec.mirrored != "off"
        n_base = (n + 1) // 2 if mirrored else n
        batch = self._draw_base(n_base)
        if self.spec.orthogonal:
            batch = orthonormalize(
                batch, resample=lambda: self.rng.standard_normal(self.spec.dimension))
        samples: list[BaseSample] = []
        if mirrored:
            for z in batch:
                self._pair_counter += 1
                a, b = mirror_pair(z, self._pair_counter)
                samples.extend((a, b))
            samples = samples[:n]
        else:
            samples = [BaseSample(z) for z in batch]
        return samples


def sampler_spec_for(cfg, dimension: int) -> SamplerSpec:
    """Sampler specification implied by a Configuration."""
    return SamplerSpec(base=cfg.base_sampler, mirrored=cfg.mirrored,
                       orthogonal=cfg.orthogonal, dimension=dimension)


def expected_norm(d: int) -> float:
    """Expected length of a d-dimensional standard-normal vector."""
    return math.sqrt(d) * (1.0 - 1.0 / (4.0 * d) + 1.0 / (21.0 * d * d))
