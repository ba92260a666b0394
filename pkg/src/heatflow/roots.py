"""Simultaneous root finding for scaled coefficient polynomials.

Aberth-Ehrlich iteration in two stages: a float64 stage working on the
(log-modulus, phase) representation so that coefficient ranges far beyond
the double exponent range never overflow, then full-precision sweeps until
every root carries a backward-error certificate at the working precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from mpmath import mp, mpc, mpf

from .polyheat import NEG_INF, ScaledCoeffPoly, _horner
from .precision import unit_roundoff, working_prec


class RootsError(ArithmeticError):
    """Aberth iteration hit the sweep cap before certification."""

    def __init__(self, message, unconverged=()):
        super().__init__(message)
        self.unconverged = tuple(unconverged)


@dataclass
class EmpiricalMeasure:
    """All zeros of a polynomial with uniform weight 1/degree.

    residuals holds log10 of the per-root backward error
    |p(z)| / sum_k |c_k||z|^k, certified below the accept threshold.
    """

    points: list
    weight: float
    residuals: list
    clusters: list = field(default_factory=list)

    @property
    def degree(self) -> int:
        return len(self.points)

    def as_complex(self) -> np.ndarray:
        return np.array([complex(p) for p in self.points])

    def to_json(self) -> dict:
        return {
            "weight": self.weight,
            "points": [[float(complex(p).real), float(complex(p).imag)] for p in self.points],
            "log10_backward_errors": [float(r) for r in self.residuals],
            "clusters": [
                {"center": [float(complex(c).real), float(complex(c).imag)], "size": s}
                for c, s in self.clusters
            ],
        }


def _float_logcoeffs(p: ScaledCoeffPoly):
    L = np.array([float(l) if l != NEG_INF else -np.inf for l in p.logmods])
    Ph = np.array([complex(ph) for ph in p.phases])
    return L, Ph


def _eval_ratio_float(L, Ph, zs):
    """Newton ratios p/p' and backward errors at points zs, all in float64.

    Works on log-scaled coefficients: every term is shifted by the max
    log-magnitude per point before exponentiation, so no overflow occurs for
    any coefficient range.
    """
    zs = np.where(zs == 0, 1e-12 + 0j, zs)
    ks = np.arange(L.size)
    with np.errstate(divide="ignore", invalid="ignore"):
        logz = np.log(np.abs(zs))
        argz = np.angle(zs)
        mat = L[None, :] + ks[None, :] * logz[:, None]
        shift = np.max(mat, axis=1, keepdims=True)
        mag = np.exp(mat - shift)
        phase = Ph[None, :] * np.exp(1j * ks[None, :] * argz[:, None])
        terms = mag * phase
    pv = terms.sum(axis=1)
    maj = mag.sum(axis=1)
    dpv = (terms[:, 1:] * ks[None, 1:]).sum(axis=1) / zs
    berr = np.abs(pv) / np.where(maj > 0, maj, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(dpv != 0, pv / dpv, 0.0)
    return ratio, berr


def _initial_circle(L, seed):
    """Perturbed-circle start: radius from the coefficient-ratio bound."""
    n = L.size - 1
    lead = L[-1]
    finite = [(lead - L[k]) * -1.0 / (n - k) for k in range(n) if np.isfinite(L[k])]
    logr = max(finite) if finite else 0.0
    r = max(2.0 * math.exp(min(logr, 700.0)), 0.5)
    rng = np.random.RandomState(seed)
    ang = 2 * np.pi * (np.arange(n) + 0.5) / n + 0.11 + 0.02 * rng.rand(n)
    rad = r * (1.0 + 0.05 * rng.rand(n))
    return rad * np.exp(1j * ang)


def _aberth_float(L, Ph, starts=None, seed=0, tol=1e-13, max_iter=400):
    n = L.size - 1
    zs = starts if starts is not None else _initial_circle(L, seed)
    zs = np.array(zs, dtype=complex)
    for _ in range(max_iter):
        ratio, berr = _eval_ratio_float(L, Ph, zs)
        done = berr < tol
        if done.all():
            break
        diff = zs[:, None] - zs[None, :]
        np.fill_diagonal(diff, np.inf)
        ssum = (1.0 / diff).sum(axis=1)
        denom = 1.0 - ratio * ssum
        w = np.where(np.abs(denom) > 1e-300, ratio / denom, ratio)
        w = np.where(done, 0.0, w)
        w = np.where(np.isfinite(w), w, 0.0)
        zs = zs - w
        if np.max(np.abs(w) / (1.0 + np.abs(zs))) < 1e-15:
            break
    return zs


def _aberth_mp(coeffs, starts, accept, max_sweeps=80):
    """Full-precision Aberth sweeps until every backward error < accept."""
    n = len(coeffs) - 1
    zs = [mpc(z) for z in starts]
    berr = [mpf(1)] * n
    for _ in range(max_sweeps):
        vals = []
        for i, z in enumerate(zs):
            pv, maj = _horner(coeffs, z)
            berr[i] = abs(pv) / maj if maj > 0 else mpf(0)
            vals.append(pv)
        if all(b < accept for b in berr):
            return zs, berr, []
        dcoeffs = [k * coeffs[k] for k in range(1, n + 1)]
        new = list(zs)
        for i, z in enumerate(zs):
            if berr[i] < accept:
                continue
            dpv, _ = _horner(dcoeffs, z)
            if dpv == 0:
                new[i] = z * (1 + mpf("1e-8")) + mpf("1e-8")
                continue
            ratio = vals[i] / dpv
            ssum = mpc(0)
            for j, w in enumerate(zs):
                if j != i:
                    dz = z - w
                    if dz != 0:
                        ssum += 1 / dz
            denom = 1 - ratio * ssum
            new[i] = z - (ratio / denom if denom != 0 else ratio)
        zs = new
    unconverged = [i for i, b in enumerate(berr) if not b < accept]
    return zs, berr, unconverged


def solve_poly(coeffs, bits: int | None = None, seed: int = 0,
               starts=None, max_sweeps: int = 80):
    """All roots of an ascending-degree mpc coefficient list.

    Returns (roots, backward_errors).  Raises RootsError when certification
    fails.  Intended for moderate degrees; the ScaledCoeffPoly front end
    below adds the log-scaled float stage for large dynamic ranges.
    """
    bits = bits or mp.prec
    with working_prec(bits):
        coeffs = [mpc(c) for c in coeffs]
        n = len(coeffs) - 1
        if n < 1:
            return [], []
        if n == 1:
            return [-coeffs[0] / coeffs[1]], [mpf(0)]
        if starts is None:
            p = ScaledCoeffPoly.from_coeffs(coeffs)
            L, Ph = _float_logcoeffs(p)
            starts = _aberth_float(L, Ph, seed=seed)
        accept = 10 * unit_roundoff(bits)
        zs, berr, bad = _aberth_mp(coeffs, starts, accept, max_sweeps)
        if bad:
            raise RootsError(f"{len(bad)} roots uncertified", bad)
        return zs, berr


def _clusters(points, radius):
    """Union-find grouping of points closer than radius."""
    n = len(points)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(n):
        for j in range(i + 1, n):
            if abs(points[i] - points[j]) < radius:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    out = []
    for idx in groups.values():
        center = sum(points[i] for i in idx) / len(idx)
        out.append((center, len(idx)))
    return out


def find_all_roots(p: ScaledCoeffPoly, tol: float = 1e-10,
                   bits: int | None = None, warm_start=None,
                   seed: int = 0, max_sweeps: int = 200) -> EmpiricalMeasure:
    """All zeros of p as an EmpiricalMeasure with residual certificates.

    Acceptance is the per-root backward error |p(z)| / sum|c_k||z|^k < 10u
    at the working precision; tol only sets the clustering scale for
    near-multiple roots (grouped within tol^(1/2)).
    """
    if p.degree < 1:
        raise ValueError("degree must be >= 1")
    if tol <= 0:
        raise ValueError("tol must be positive")
    bits = bits or mp.prec
    with working_prec(bits):
        if warm_start is not None:
            starts = [mpc(w) for w in warm_start]
        else:
            L, Ph = _float_logcoeffs(p)
            starts = _aberth_float(L, Ph, seed=seed)
        coeffs = p.coeffs()
        accept = 10 * unit_roundoff(bits)
        zs, berr, bad = _aberth_mp(coeffs, starts, accept, max_sweeps)
        if bad:
            raise RootsError(
                f"{len(bad)} of {p.degree} roots uncertified after "
                f"{max_sweeps} sweeps", bad)
        res = [float(mp.log(b, 10)) if b > 0 else -math.inf for b in berr]
        clusters = [c for c in _clusters(zs, math.sqrt(tol)) if c[1] > 1]
        return EmpiricalMeasure(points=zs, weight=1.0 / p.degree,
                                residuals=res, clusters=clusters)


def support_bound_check(em: EmpiricalMeasure, spec, t: float) -> dict:
    """Verify every root lies in the union of disks around the initial zeros.

    Radius 2 sqrt(t) sqrt(1 + 1/(2 n alpha)); when the disks are pairwise
    disjoint the per-disk counts must equal alpha_j * n exactly.
    """
    r = 2.0 * math.sqrt(t) * math.sqrt(1.0 + 1.0 / (2 * spec.n * spec.alpha))
    centers = [complex(l) for l in spec.lambdas]
    counts = [0] * len(centers)
    violations = []
    for z in em.points:
        zc = complex(z)
        dists = [abs(zc - c) for c in centers]
        j = int(np.argmin(dists))
        if dists[j] <= r * (1 + 1e-12):
            counts[j] += 1
        else:
            violations.append((zc, dists[j] - r))
    disjoint = all(
        abs(centers[i] - centers[j]) > 2 * r
        for i in range(len(centers)) for j in range(i + 1, len(centers))
    )
    counts_ok = True
    if disjoint:
        expected = [a * spec.n for a in spec.alphas]
        counts_ok = counts == expected
    return {
        "radius": r,
        "disjoint": disjoint,
        "counts": counts,
        "counts_ok": counts_ok,
        "violations": violations,
        "passed": not violations and counts_ok,
    }
