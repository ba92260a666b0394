"""Polynomial powers, the backward heat operator, and overflow-safe evaluation.

The input datum is a polynomial power prod_j (z - lambda_j)^(n*alpha_j) held
as a PolySpec.  The heat operator exp(-(t/(2*alpha*n)) d^2/dz^2) is applied
exactly on coefficient vectors; a contour-integral quadrature provides an
independent oracle for the same quantity.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field

from mpmath import mp, mpc, mpf

from .precision import PrecisionExhausted, default_bits, working_prec

NEG_INF = mpf("-inf")


class QuadratureError(ArithmeticError):
    """Successive quadrature refinements failed to agree."""


@dataclass(frozen=True)
class PolySpec:
    """Distinct zeros, multiplicities and the power n of prod (z-l_j)^(n*a_j).

    Entries of ``lambdas`` may be python complex or mpmath mpc; they are taken
    at face value (no rounding beyond what the caller already did).
    """

    lambdas: tuple
    alphas: tuple
    n: int

    def __post_init__(self):
        lambdas = tuple(self.lambdas)
        alphas = tuple(int(a) for a in self.alphas)
        object.__setattr__(self, "lambdas", lambdas)
        object.__setattr__(self, "alphas", alphas)
        if len(lambdas) != len(alphas) or not lambdas:
            raise ValueError("lambdas and alphas must be equal-length, non-empty")
        if any(a < 1 for a in alphas):
            raise ValueError("multiplicities must be positive integers")
        if self.n < 1:
            raise ValueError("power n must be a positive integer")
        for i in range(len(lambdas)):
            for j in range(i + 1, len(lambdas)):
                if complex(lambdas[i]) == complex(lambdas[j]):
                    raise ValueError("zeros must be pairwise distinct")

    @property
    def d(self) -> int:
        return len(self.lambdas)

    @property
    def alpha(self) -> int:
        return sum(self.alphas)

    @property
    def degree(self) -> int:
        """Total degree alpha * n."""
        return self.alpha * self.n

    @property
    def delta(self) -> float:
        """Minimal pairwise distance of the zeros (inf for a single zero)."""
        if self.d == 1:
            return math.inf
        return min(
            abs(complex(a) - complex(b))
            for i, a in enumerate(self.lambdas)
            for b in self.lambdas[i + 1:]
        )

    @property
    def lam_max(self) -> float:
        return max(abs(complex(l)) for l in self.lambdas)

    @property
    def center_of_mass(self) -> complex:
        s = sum(a * complex(l) for a, l in zip(self.alphas, self.lambdas))
        return s / self.alpha

    def bits(self) -> int:
        return default_bits(self.degree)

    def to_json(self) -> dict:
        return {
            "lambdas": [[float(complex(l).real), float(complex(l).imag)] for l in self.lambdas],
            "alphas": list(self.alphas),
            "n": self.n,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PolySpec":
        lams = tuple(complex(re, im) for re, im in obj["lambdas"])
        return cls(lams, tuple(obj["alphas"]), int(obj["n"]))

    @classmethod
    def from_file(cls, path: str) -> "PolySpec":
        with open(path) as f:
            return cls.from_json(json.load(f))


@dataclass(frozen=True)
class HeatTime:
    """A complex heat time t with its modulus and argument."""

    t: complex

    @property
    def mag(self) -> float:
        return abs(complex(self.t))

    @property
    def theta(self) -> float:
        return cmath.phase(complex(self.t))

    @classmethod
    def parse(cls, text: str) -> "HeatTime":
        """Accepts cartesian "a,b" or polar "m@deg"."""
        text = text.strip()
        if "@" in text:
            m, deg = text.split("@")
            return cls(cmath.rect(float(m), math.radians(float(deg))))
        if "," in text:
            re, im = text.split(",")
            return cls(complex(float(re), float(im)))
        return cls(complex(float(text), 0.0))


def rotated_spec(spec: PolySpec, theta: float):
    """Spec of the rotated power P~(z) = P(e^{i theta/2} z); zeros rotate by
    e^{-i theta/2}.  Rotation is carried out at the working precision."""
    if theta == 0.0:
        return spec
    w = mp.expj(mpf(-theta) / 2)
    lams = tuple(w * mpc(l) for l in spec.lambdas)
    return PolySpec(lams, spec.alphas, spec.n)


class ScaledCoeffPoly:
    """Coefficient vector stored as (log-modulus, unit phase) pairs.

    coeff_k = exp(logmods[k]) * phases[k]; logmods[k] = -inf marks an exactly
    zero coefficient.  All entries live at the precision active when the
    object was built.
    """

    __slots__ = ("logmods", "phases", "bits")

    def __init__(self, logmods, phases):
        self.logmods = list(logmods)
        self.phases = list(phases)
        self.bits = mp.prec
        if not self.logmods or self.logmods[-1] == NEG_INF:
            raise ValueError("leading coefficient must be nonzero")

    @property
    def degree(self) -> int:
        return len(self.logmods) - 1

    @classmethod
    def from_coeffs(cls, coeffs) -> "ScaledCoeffPoly":
        """Build from an ascending-degree list of mpc/complex coefficients."""
        logmods, phases = [], []
        for c in coeffs:
            c = mpc(c)
            m = abs(c)
            if m == 0:
                logmods.append(NEG_INF)
                phases.append(mpc(1))
            else:
                logmods.append(mp.log(m))
                phases.append(c / m)
        while len(logmods) > 1 and logmods[-1] == NEG_INF:
            logmods.pop()
            phases.pop()
        return cls(logmods, phases)

    def coeff(self, k: int) -> mpc:
        if k < 0 or k > self.degree or self.logmods[k] == NEG_INF:
            return mpc(0)
        return mp.exp(self.logmods[k]) * self.phases[k]

    def coeffs(self) -> list:
        return [self.coeff(k) for k in range(self.degree + 1)]

    def __len__(self) -> int:
        return len(self.logmods)


def _horner(coeffs, z):
    """Value and absolute-value majorant sum |c_k| |z|^k of a coefficient list."""
    z = mpc(z)
    acc = mpc(coeffs[-1])
    maj = abs(coeffs[-1])
    az = abs(z)
    for c in reversed(coeffs[:-1]):
        acc = acc * z + c
        maj = maj * az + abs(c)
    return acc, maj


def expand_power(spec: PolySpec, bits: int | None = None) -> ScaledCoeffPoly:
    """Coefficients of prod_j (z - lambda_j)^(n*alpha_j).

    Repeated convolution with the linear factors; exact to working precision.
    """
    bits = bits or spec.bits()
    with working_prec(bits):
        coeffs = [mpc(1)]
        for lam, a in zip(spec.lambdas, spec.alphas):
            l = mpc(lam)
            for _ in range(spec.n * a):
                nxt = [mpc(0)] * (len(coeffs) + 1)
                for k, c in enumerate(coeffs):
                    nxt[k + 1] += c
                    nxt[k] -= l * c
                coeffs = nxt
        out = ScaledCoeffPoly.from_coeffs(coeffs)
    if out.degree != spec.degree:
        raise PrecisionExhausted("leading coefficient lost during expansion")
    return out


def heat_evolve(p: ScaledCoeffPoly, t, alpha_n: int | None = None,
                bits: int | None = None) -> ScaledCoeffPoly:
    """Apply exp(-(t/(2*alpha_n)) d^2/dz^2) to p, exactly in the coefficients.

    The heat scale is tied to the degree of p by default (alpha_n = deg p).
    Uses the scaled Hermite basis: with s = t/alpha_n and
    Hs_m(z) = s^{m/2} He_m(z/sqrt(s)), the recurrence
    Hs_{m+1} = z*Hs_m - m*s*Hs_{m-1} assembles the image of z^m, and the
    output is sum_m c_m Hs_m.  No square roots of s appear, so complex t is
    handled directly.
    """
    if p.degree == 0:
        return p
    if alpha_n is None:
        alpha_n = p.degree
    bits = bits or default_bits(p.degree)
    with working_prec(bits):
        s = mpc(t) / alpha_n
        if s == 0:
            return ScaledCoeffPoly(p.logmods, p.phases)
        cs = p.coeffs()
        deg = p.degree
        out = [mpc(0)] * (deg + 1)
        h_prev = [mpc(1)]            # Hs_0
        h_cur = [mpc(0), mpc(1)]     # Hs_1
        out[0] += cs[0]
        if deg >= 1:
            out[1] += cs[1]
        for m in range(1, deg):
            # Hs_{m+1} = shift(Hs_m) - m*s*Hs_{m-1}
            h_next = [mpc(0)] * (m + 2)
            for k, c in enumerate(h_cur):
                h_next[k + 1] = c
            ms = m * s
            for k, c in enumerate(h_prev):
                h_next[k] -= ms * c
            cm = cs[m + 1]
            if cm != 0:
                for k, c in enumerate(h_next):
                    if c != 0:
                        out[k] += cm * c
            h_prev, h_cur = h_cur, h_next
        return ScaledCoeffPoly.from_coeffs(out)


def heat_evolve_series(p: ScaledCoeffPoly, t, alpha_n: int | None = None,
                       bits: int | None = None) -> ScaledCoeffPoly:
    """Second code path: the terminating power series in d^2/dz^2.

    out_j = sum_k (-s/2)^k / k! * (j+2k)!/j! * c_{j+2k}.  Kept for
    cross-checking the Hermite-recurrence path at moderate degree.
    """
    if p.degree == 0:
        return p
    if alpha_n is None:
        alpha_n = p.degree
    bits = bits or default_bits(p.degree)
    with working_prec(bits):
        s = mpc(t) / alpha_n
        cs = p.coeffs()
        deg = p.degree
        out = [mpc(0)] * (deg + 1)
        for j in range(deg + 1):
            term = mpf(1)  # (j+2k)!/j! / k! accumulates below
            w = mpc(1)     # (-s/2)^k
            acc = mpc(cs[j])
            k = 0
            while j + 2 * (k + 1) <= deg:
                k += 1
                term = term * (j + 2 * k) * (j + 2 * k - 1) / k
                w = w * (-s / 2)
                acc += w * term * cs[j + 2 * k]
            out[j] = acc
        return ScaledCoeffPoly.from_coeffs(out)


def eval_log(p: ScaledCoeffPoly, z, bits: int | None = None):
    """Evaluate p at z; returns (log_modulus, unit phase).

    log_modulus is -inf iff the computed value is exactly zero.  The
    arithmetic is exact to working precision for arbitrarily large
    coefficient ranges (mpf exponents are unbounded), which is what the
    log-scaled storage is for.
    """
    with working_prec(bits or default_bits(p.degree)):
        v, _ = _horner(p.coeffs(), z)
        m = abs(v)
        if m == 0:
            return NEG_INF, mpc(1)
        return mp.log(m), v / m


def eval_with_error(p: ScaledCoeffPoly, z, bits: int | None = None):
    """Value plus the majorant sum |c_k||z|^k used in backward-error bounds."""
    with working_prec(bits or default_bits(p.degree)):
        return _horner(p.coeffs(), z)


def contour_eval(spec: PolySpec, t: float, z, eps: float = 1e-10,
                 initial_nodes: int = 64, max_doublings: int = 12,
                 bits: int | None = None):
    """Quadrature oracle for the heat evolution at a single point.

    Evaluates -i/sqrt(2*pi*s) * integral over iR of exp((z-u)^2/(2s)) P^n(u) du
    with s = t/(alpha*n), truncated at |Im u| = C and refined by node doubling
    until the relative change drops below eps.  Returns (log_modulus, phase).
    """
    if not (isinstance(t, (int, float)) and t > 0):
        raise ValueError("contour_eval requires real t > 0")
    bits = bits or spec.bits()
    an = spec.degree
    with working_prec(bits + 32):
        s = mpf(t) / an
        zc = mpc(z)
        # truncation height: spec'd Gaussian-decay bound widened by |z|,
        # since the integrand only starts decaying once |Im u| > |z|
        C = mp.sqrt(2 * mpf(t) * an * mp.log(1 / mpf(eps))) + spec.lam_max + abs(zc)
        lams = [mpc(l) for l in spec.lambdas]
        powers = [spec.n * a for a in spec.alphas]

        def f(y):
            u = mpc(0, 1) * y
            prod = mpc(1)
            for l, k in zip(lams, powers):
                base = u - l
                if base == 0:
                    return mpc(0)
                prod *= base ** k
            return mp.exp((zc - u) ** 2 / (2 * s)) * prod

        def trapezoid(nodes):
            h = 2 * C / nodes
            total = (f(-C) + f(C)) / 2
            for i in range(1, nodes):
                total += f(-C + i * h)
            return total * h

        nodes = initial_nodes
        prev = trapezoid(nodes)
        for _ in range(max_doublings):
            nodes *= 2
            cur = trapezoid(nodes)
            scale = max(abs(cur), abs(prev))
            if scale == 0 or abs(cur - prev) <= eps * scale:
                prev = cur
                break
            prev = cur
        else:
            raise QuadratureError(
                f"contour quadrature did not converge at {nodes} nodes")

        # du = i dy along the contour; together with the -i prefactor the
        # phase factors cancel
        val = prev / mp.sqrt(2 * mp.pi * s)
        m = abs(val)
        if m == 0:
            return NEG_INF, mpc(1)
        return mp.log(m), val / m
