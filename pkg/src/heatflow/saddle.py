"""Saddle points of the phase function, the branch locus, and continuation.

For a spec with zeros lambda_j and weights alpha_j, the saddle equation
u + (t/alpha) sum_j alpha_j/(u - lambda_j) = z is cleared of denominators by
the degree-(d+1) monic polynomial

    Q_{z,t}(u) = (u - z) prod_j (u - lambda_j)
                 + (t/alpha) sum_j alpha_j prod_{k != j} (u - lambda_k),

whose coefficients are affine in z and in t.  Branch points are the zeros of
the resultant of Q and dQ/du in u, a polynomial of degree <= 2d in z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from mpmath import mp, mpc, mpf, matrix

from .polyheat import PolySpec
from .precision import unit_roundoff, working_prec
from .roots import solve_poly

SADDLE_BITS = 128


class SheetJumpError(RuntimeError):
    """Continuation step too large: nearest-root assignment is ambiguous."""


class InterpolationError(ArithmeticError):
    """Resultant interpolation failed its consistency check."""


@dataclass
class SaddleFan:
    """The d+1 saddle values over one base point with their heights."""

    z: complex
    t: complex
    saddles: list
    heights: list
    residuals: list
    degenerate: bool = False

    def __len__(self):
        return len(self.saddles)

    def sorted_indices(self):
        return sorted(range(len(self.heights)), key=lambda i: self.heights[i])


@dataclass
class BranchPoint:
    z: complex
    order: int
    coalesced_u: complex

    def to_json(self):
        zc, uc = complex(self.z), complex(self.coalesced_u)
        return {"z": [zc.real, zc.imag], "order": self.order, "u": [uc.real, uc.imag]}


@dataclass
class BranchTrack:
    """A saddle sheet followed along a polyline of base points."""

    path: list
    u_values: list

    @property
    def current_z(self):
        return self.path[-1]

    @property
    def current_u(self):
        return self.u_values[-1]


def _scale(spec: PolySpec, z, t) -> float:
    return 1.0 + spec.lam_max + abs(complex(t)) ** 0.5 + abs(complex(z))


def _poly_from_roots(roots):
    coeffs = [mpc(1)]  # ascending degree
    for r in roots:
        nxt = [mpc(0)] * (len(coeffs) + 1)
        for k, c in enumerate(coeffs):
            nxt[k + 1] += c
            nxt[k] -= r * c
        coeffs = nxt
    return coeffs


def _synthetic_division(coeffs, r):
    """Divide an ascending-degree coefficient list by (u - r), exact quotient."""
    n = len(coeffs) - 1
    out = [mpc(0)] * n
    carry = coeffs[n]
    for k in range(n - 1, -1, -1):
        out[k] = carry
        carry = coeffs[k] + carry * r
    return out


def q_coeffs(spec: PolySpec, z, t, bits: int | None = None):
    """Ascending coefficients of the monic saddle polynomial Q_{z,t}(u)."""
    bits = bits or SADDLE_BITS
    with working_prec(bits):
        lams = [mpc(l) for l in spec.lambdas]
        base = _poly_from_roots(lams)  # prod (u - lambda_j), ascending
        zc, tc = mpc(z), mpc(t)
        # (u - z) * base
        q = [mpc(0)] * (len(base) + 1)
        for k, c in enumerate(base):
            q[k + 1] += c
            q[k] -= zc * c
        # + (t/alpha) sum_j alpha_j * base/(u - lambda_j)
        w = tc / spec.alpha
        for lam, a in zip(lams, spec.alphas):
            part = _synthetic_division(base, lam)
            for k, c in enumerate(part):
                q[k] += w * a * c
        return q


def height_G(spec: PolySpec, z, t, u, bits: int | None = None):
    """G(z,u) = (1/alpha) sum_j alpha_j log|u - lambda_j| + Re((z-u)^2/(2t)).

    Valid verbatim for complex t: it equals the rotated-frame height of
    the |t| problem.  Returns -inf at the logarithmic singularities.
    """
    bits = bits or SADDLE_BITS
    with working_prec(bits):
        uc, zc, tc = mpc(u), mpc(z), mpc(t)
        acc = mpf(0)
        for lam, a in zip(spec.lambdas, spec.alphas):
            m = abs(uc - mpc(lam))
            if m == 0:
                return mpf("-inf")
            acc += a * mp.log(m)
        return acc / spec.alpha + ((zc - uc) ** 2 / (2 * tc)).real


def solve_saddles(spec: PolySpec, z, t, bits: int | None = None) -> SaddleFan:
    """All d+1 solutions of the saddle equation at (z, t), with heights.

    The fan is flagged degenerate when two saddles are closer than the
    branch-point tolerance (z is then within tolerance of the branch locus).
    """
    bits = bits or SADDLE_BITS
    with working_prec(bits):
        q = q_coeffs(spec, z, t, bits)
        roots, berr = solve_poly(q, bits=bits)
        if complex(t) == 0:
            heights = []  # G is undefined at t = 0
        else:
            heights = [height_G(spec, z, t, u, bits) for u in roots]
        scale = _scale(spec, z, t)
        bp_tol = 1e3 * float(unit_roundoff(bits)) ** 0.5 * scale
        degen = False
        for i in range(len(roots)):
            for j in range(i + 1, len(roots)):
                if abs(roots[i] - roots[j]) < bp_tol:
                    degen = True
        res = [float(mp.log(b, 10)) if b > 0 else float("-inf") for b in berr]
        return SaddleFan(z=z, t=t, saddles=roots, heights=heights,
                         residuals=res, degenerate=degen)


def log_critical_points(spec: PolySpec, bits: int | None = None):
    """Roots of sum_j alpha_j prod_{k!=j} (u - lambda_k): the critical points
    of the weighted log-derivative, which the bounded saddles approach as
    t grows."""
    if spec.d == 1:
        return []
    bits = bits or SADDLE_BITS
    with working_prec(bits):
        lams = [mpc(l) for l in spec.lambdas]
        base = _poly_from_roots(lams)
        s = [mpc(0)] * spec.d
        for lam, a in zip(lams, spec.alphas):
            part = _synthetic_division(base, lam)
            for k, c in enumerate(part):
                s[k] += a * c
        roots, _ = solve_poly(s, bits=bits)
        return roots


def _sylvester_det(q, dq):
    """Determinant of the Sylvester matrix of q (deg m) and dq (deg m-1)."""
    m = len(q) - 1
    n = len(dq) - 1
    size = m + n
    M = matrix(size, size)
    qd = list(reversed(q))    # descending
    dqd = list(reversed(dq))
    for r in range(n):  # rows of q
        for k, c in enumerate(qd):
            M[r, r + k] = c
    for r in range(m):  # rows of dq
        for k, c in enumerate(dqd):
            M[n + r, r + k] = c
    return mp.det(M)


def branch_locus(spec: PolySpec, t, bits: int | None = None,
                 consistency_tol: float = 1e-20) -> list:
    """All branch points: zeros of res_u(Q_{z,t}, dQ/du) as a polynomial in z.

    The resultant has degree <= 2d in z; it is recovered by evaluating the
    Sylvester determinant at 2d+2 nodes on a circle and inverting the DFT.
    The extra node checks that the impossible degree-(2d+1) coefficient
    vanishes.  Orders and coalesced saddle values come from clustering the
    fan at each root.
    """
    if complex(t) == 0:
        raise ValueError("branch locus requires t != 0")
    bits = bits or SADDLE_BITS
    d = spec.d
    with working_prec(bits):
        K = 2 * d + 2
        rho = 2 * (1 + spec.lam_max + abs(mpc(t)) ** 0.5)
        nodes = [rho * mp.expj(2 * mp.pi * k / K) for k in range(K)]
        dets = []
        for zk in nodes:
            q = q_coeffs(spec, zk, t, bits)
            dq = [k * q[k] for k in range(1, len(q))]
            dets.append(_sylvester_det(q, dq))
        # inverse DFT for ascending coefficients a_m / rho^m
        coeffs = []
        for m_idx in range(K):
            acc = mpc(0)
            for k, v in enumerate(dets):
                acc += v * mp.expj(-2 * mp.pi * k * m_idx / K)
            coeffs.append(acc / K / rho ** m_idx)
        top = max(abs(c) for c in coeffs)
        if top == 0:
            raise InterpolationError("resultant vanished identically")
        if abs(coeffs[-1]) > consistency_tol * top * rho ** (K - 1):
            raise InterpolationError(
                "degree-(2d+1) coefficient of the resultant is nonzero: "
                f"{abs(coeffs[-1])/top}")
        # trim the spurious top coefficient and any vanishing leading terms
        coeffs = coeffs[:-1]
        while len(coeffs) > 1 and abs(coeffs[-1]) < 1e-25 * top:
            coeffs.pop()
        if len(coeffs) <= 1:
            return []
        zroots, _ = solve_poly(coeffs, bits=bits)
        scale = _scale(spec, 0, t) + float(max(abs(r) for r in zroots))
        # double roots of the resultant split at the sqrt of the coefficient
        # error; cluster well above that
        cluster_r = 10 * float(unit_roundoff(bits)) ** 0.25 * scale
        merged = []
        for r in zroots:
            for g in merged:
                if abs(r - g[0]) < cluster_r:
                    g[1].append(r)
                    break
            else:
                merged.append([r, [r]])
        out = []
        for center, members in merged:
            zc = sum(members) / len(members)
            fan = solve_saddles(spec, zc, t, bits)
            group_r = _coalescence_radius(fan.saddles, _scale(spec, zc, t))
            used = [False] * len(fan.saddles)
            best = None
            for i, ui in enumerate(fan.saddles):
                if used[i]:
                    continue
                group = [ui]
                used[i] = True
                for j in range(i + 1, len(fan.saddles)):
                    if not used[j] and abs(fan.saddles[j] - ui) < group_r:
                        group.append(fan.saddles[j])
                        used[j] = True
                if best is None or len(group) > len(best):
                    best = group
            order = max(2, len(best))
            cu = sum(best) / len(best)
            out.append(BranchPoint(z=zc, order=order, coalesced_u=cu))
        return out


def _coalescence_radius(saddles, scale):
    """Clustering radius separating coalescing from distinct saddle values.

    An order-r root computed at a slightly perturbed base point splits by
    (z error)^(1/r), so no fixed threshold works; instead the sorted
    pairwise-distance spectrum is cut at its largest ratio gap.
    """
    dists = sorted(
        float(abs(saddles[i] - saddles[j]))
        for i in range(len(saddles)) for j in range(i + 1, len(saddles))
    )
    if not dists:
        return 0.0
    if dists[0] > 1e-3 * scale:
        # nothing truly coalescing; fall back to pairing the closest two
        return dists[0] * (1 + 1e-9)
    best_ratio, cut = 1.0, None
    for i in range(len(dists) - 1):
        if dists[i] == 0:
            continue
        ratio = dists[i + 1] / dists[i]
        if ratio > best_ratio:
            best_ratio, cut = ratio, i
    if cut is None or best_ratio < 100.0:
        return dists[-1] * (1 + 1e-9)  # all coalesce
    return math.sqrt(dists[cut] * dists[cut + 1])


def start_track(z, u) -> BranchTrack:
    return BranchTrack(path=[mpc(z)], u_values=[mpc(u)])


def continue_branch(track: BranchTrack, next_z, spec: PolySpec, t,
                    bits: int | None = None) -> BranchTrack:
    """Extend the track to next_z, keeping the same sheet by nearest match.

    Raises SheetJumpError when the nearest root is not well separated from
    the second nearest (caller subdivides the step).
    """
    bits = bits or SADDLE_BITS
    fan = solve_saddles(spec, next_z, t, bits)
    prev = track.current_u
    dists = sorted(range(len(fan.saddles)), key=lambda i: abs(fan.saddles[i] - prev))
    d0 = abs(fan.saddles[dists[0]] - prev)
    if len(dists) > 1:
        d1 = abs(fan.saddles[dists[1]] - prev)
        if d0 > 0.5 * d1:
            raise SheetJumpError(
                f"ambiguous continuation at {complex(next_z)}: "
                f"nearest {float(d0):.3g} vs second {float(d1):.3g}")
    track.path.append(mpc(next_z))
    track.u_values.append(fan.saddles[dists[0]])
    return track
