import math

import pytest
from mpmath import mp, mpc, mpf

from heatflow import PolySpec, working_prec
from heatflow.saddle import (
    BranchPoint,
    SheetJumpError,
    branch_locus,
    continue_branch,
    height_G,
    log_critical_points,
    q_coeffs,
    solve_saddles,
    start_track,
)

MONO = PolySpec((0.0,), (1,), 4)
TWO = PolySpec((1j, -1j), (1, 1), 4)


def poly_close(got, expected, tol=1e-30):
    assert len(got) == len(expected)
    for a, b in zip(got, expected):
        assert abs(a - b) < tol


class TestQCoeffs:
    def test_d1_closed_form(self):
        # Q = u^2 - (z+a) u + (a z + t) for a single zero at a
        a, z, t = 0.5 + 0.25j, 2.0 - 1j, 1.5
        q = q_coeffs(PolySpec((a,), (1,), 3), z, t)
        poly_close(q, [a * z + t, -(z + a), 1])

    def test_d2_conjugate_pair(self):
        # lambda = +-i: Q = u^3 - z u^2 + (1+t) u - z
        z, t = 1.25 - 0.5j, 2.0
        q = q_coeffs(TWO, z, t)
        poly_close(q, [-z, 1 + t, -z, 1])

    def test_t_zero_saddles(self):
        # heat off: saddles are z and the lambdas
        fan = solve_saddles(TWO, 0.7 + 0.2j, 0.0)
        got = sorted((complex(u) for u in fan.saddles), key=lambda w: (w.imag, w.real))
        assert abs(got[0] + 1j) < 1e-30
        assert abs(got[1] - (0.7 + 0.2j)) < 1e-30
        assert abs(got[2] - 1j) < 1e-30

    def test_affine_in_z_and_t(self):
        q00 = q_coeffs(TWO, 0.0, 0.0)
        q10 = q_coeffs(TWO, 1.0, 0.0)
        q01 = q_coeffs(TWO, 0.0, 1.0)
        q11 = q_coeffs(TWO, 1.0, 1.0)
        for k in range(len(q00)):
            assert abs(q11[k] - (q10[k] + q01[k] - q00[k])) < 1e-30


class TestSolveSaddles:
    def test_d1_closed_form_values(self):
        fan = solve_saddles(MONO, 3.0, 1.0)
        got = sorted(float(u.real) for u in fan.saddles)
        lo = (3 - math.sqrt(5)) / 2
        hi = (3 + math.sqrt(5)) / 2
        assert got[0] == pytest.approx(lo, abs=1e-12)
        assert got[1] == pytest.approx(hi, abs=1e-12)
        assert not fan.degenerate

    def test_degenerate_at_branch_point(self):
        fan = solve_saddles(MONO, 2.0, 1.0)
        assert fan.degenerate
        assert all(abs(u - 1) < 1e-8 for u in fan.saddles)

    def test_three_saddles_regular(self):
        fan = solve_saddles(TWO, 0.3 + 0.7j, 2.0)
        assert len(fan) == 3
        assert not fan.degenerate

    def test_vieta_against_q(self):
        z, t = 0.4 - 1.2j, 0.8 + 0.3j
        q = q_coeffs(TWO, z, t)
        fan = solve_saddles(TWO, z, t)
        total = sum(fan.saddles)
        assert abs(total + q[-2]) < 1e-28  # monic: sum = -c_d

    def test_saddles_avoid_lambdas(self):
        fan = solve_saddles(TWO, 1j + 0.01, 0.5)
        for u in fan.saddles:
            assert abs(u - 1j) > 1e-12 and abs(u + 1j) > 1e-12


class TestHeightG:
    def test_d1_spec_value(self):
        # z=i, u=i(1+sqrt5)/2, a=0, t=1: log(phi) + Re((-0.618i)^2)/2
        u = 1j * (1 + math.sqrt(5)) / 2
        g = height_G(MONO, 1j, 1.0, u)
        phi = (1 + math.sqrt(5)) / 2
        expected = math.log(phi) + ((1 - phi) ** 2) * (-1) / 2
        assert float(g) == pytest.approx(expected, abs=1e-12)
        assert float(g) == pytest.approx(0.2902, abs=5e-5)

    def test_singularity(self):
        assert height_G(TWO, 0.3, 1.0, 1j) == mpf("-inf")

    def test_grows_like_re_squared(self):
        # G ~ Re(u)^2/2t for large |Re u|
        t = 2.0
        for x in (50.0, 100.0):
            g = float(height_G(TWO, 0.0, t, x))
            assert g == pytest.approx(x ** 2 / (2 * t), rel=0.05)

    def test_complex_t_matches_rotated_frame(self):
        from heatflow.polyheat import rotated_spec
        t = 1j
        z, u = 0.7 + 0.4j, 1.1 - 0.3j
        with working_prec(128):
            theta = mp.arg(mpc(t))
            w = mp.expj(-theta / 2)
            rspec = rotated_spec(TWO, theta)
            direct = height_G(TWO, z, t, u)
            rotated = height_G(rspec, w * z, abs(mpc(t)), w * u)
            assert abs(direct - rotated) < 1e-30


class TestBranchLocus:
    def test_d1_discriminant(self):
        bps = branch_locus(MONO, 1.0)
        zs = sorted(float(b.z.real) for b in bps)
        assert len(bps) == 2
        assert zs[0] == pytest.approx(-2.0, abs=1e-20)
        assert zs[1] == pytest.approx(2.0, abs=1e-20)
        for b in bps:
            assert b.order == 2
            assert abs(abs(b.coalesced_u) - 1.0) < 1e-9

    def test_d1_shifted(self):
        a, t = 1 + 1j, 2.0
        bps = branch_locus(PolySpec((a,), (1,), 2), t)
        got = sorted((complex(b.z) for b in bps), key=lambda w: w.real)
        r = 2 * math.sqrt(t)
        assert abs(got[0] - (a - r)) < 1e-12
        assert abs(got[1] - (a + r)) < 1e-12

    def test_count_bound(self):
        for t in (0.05, 0.5, 2.0, 1j, 2 - 1j):
            bps = branch_locus(TWO, t)
            assert len(bps) <= 2 * TWO.d

    def test_two_atoms_t2_locations(self):
        # roots of 4 z^4 - (t^2+20t-8) z^2 + 4 (1+t)^3 at t=2
        bps = branch_locus(TWO, 2.0)
        assert len(bps) == 4
        for b in bps:
            z = complex(b.z)
            r = 4 * z ** 4 - 36 * z ** 2 + 4 * 27
            assert abs(r) < 1e-9
            assert b.order == 2

    def test_symmetric_triple_points(self):
        # t=8: the resultant degenerates to 4(z^2-27)^2, two order-3 points
        bps = branch_locus(TWO, 8.0)
        assert len(bps) == 2
        zs = sorted(float(b.z.real) for b in bps)
        assert zs[0] == pytest.approx(-math.sqrt(27), abs=1e-9)
        assert zs[1] == pytest.approx(math.sqrt(27), abs=1e-9)
        for b in bps:
            assert b.order == 3
            assert abs(b.z.imag) < 1e-9
            assert abs(abs(b.coalesced_u) - math.sqrt(3)) < 1e-6


class TestContinuation:
    def test_follow_upper_branch(self):
        # d=1: from u = (z+sqrt(z^2-4))/2 at z=3, follow to z=4
        track = start_track(3.0, (3 + math.sqrt(5)) / 2)
        for k in range(1, 11):
            continue_branch(track, 3.0 + 0.1 * k, MONO, 1.0)
        expected = (4 + math.sqrt(12)) / 2
        assert abs(complex(track.current_u) - expected) < 1e-10

    def test_monodromy_swap_around_branch_point(self):
        # loop around z=2 (simple bp for d=1, t=1): sheets swap
        u0 = mpc((3 + math.sqrt(5)) / 2)
        track = start_track(3.0, u0)
        steps = 48
        for k in range(1, steps + 1):
            zk = 2.0 + mp.expj(2 * mp.pi * k / steps)
            continue_branch(track, zk, MONO, 1.0)
        u_other = 3.0 - u0
        assert abs(track.current_u - u_other) < 1e-8

    def test_no_monodromy_far_loop(self):
        # loop not enclosing any branch point returns to the same sheet
        z0 = 3.5
        u0 = mpc((z0 + math.sqrt(z0 ** 2 - 4)) / 2)
        track = start_track(z0, u0)
        steps = 32
        for k in range(1, steps + 1):
            zk = 3.0 + 0.5 * mp.expj(2 * mp.pi * k / steps)
            continue_branch(track, zk, MONO, 1.0)
        assert abs(track.current_u - u0) < 1e-10

    def test_sheet_jump_guard(self):
        track = start_track(3.0, (3 + math.sqrt(5)) / 2)
        with pytest.raises(SheetJumpError):
            # jump straight past the branch point where sheets meet
            continue_branch(track, 2.0, MONO, 1.0)


def test_log_critical_points():
    # for lambda=+-i with equal weights: sum of (u -+ i) = 2u, root at 0
    pts = log_critical_points(TWO)
    assert len(pts) == 1
    assert abs(pts[0]) < 1e-30
    spec3 = PolySpec((1.0, -1.0, 1j), (1, 1, 1), 2)
    pts3 = log_critical_points(spec3)
    assert len(pts3) == 2
