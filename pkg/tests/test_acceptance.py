"""Acceptance criteria, one test each.

Every test prints a ``[PASS]`` or ``[FAIL]`` line (also repeated in the
pytest terminal summary) and enforces its runtime limit.  Run with::

    python3 -m pytest tests/test_acceptance.py -v
"""

from contextlib import contextmanager
import math
import time

import mpmath
import numpy as np
from hypothesis import given, settings, strategies as st

from conftest import ACCEPTANCE_LINES
from liyorke import diophantine as dio
from liyorke import dynamics as dyn
from liyorke import operator as op
from liyorke import plane
from liyorke import scrambled as sc
from liyorke.dynamics import SystemHandle, Verdict
from liyorke.plane import PlanePoint, Space

PROPERTY_CASES = 100


def report(number, ok, elapsed, limit, detail):
    status = "PASS" if ok else "FAIL"
    line = f"[{status}] criterion {number}: {detail} ({elapsed:.2f} s, limit {limit} s)"
    print(line)
    ACCEPTANCE_LINES.append(line)


@contextmanager
def criterion(number, limit, checks):
    """Collect named boolean ``checks``; report and assert once the block ends."""
    t0 = time.perf_counter()
    try:
        yield checks
    except Exception as exc:
        report(number, False, time.perf_counter() - t0, limit, f"raised {exc!r}")
        raise
    elapsed = time.perf_counter() - t0
    failed = [name for name, ok in checks.items() if not ok]
    if elapsed >= limit:
        failed.append("runtime")
    detail = "; ".join(checks) if not failed else "failed: " + "; ".join(failed)
    report(number, not failed, elapsed, limit, detail)
    assert not failed, detail


def test_criterion_1_conjugacy():
    with criterion(1, 1.0, {}) as checks:
        residual = plane.conjugacy_residual(100, 100, 0.99)
        rng = np.random.default_rng(2024)
        pts = [PlanePoint.from_polar(r, a, Space.DISK)
               for r, a in zip(rng.uniform(0, 0.99, 100), rng.uniform(0, 1, 100))]
        transport = plane.orbit_transport_residual(pts, 30)
        checks["grid residual <= 1e-10"] = residual <= 1e-10
        checks["orbit transport <= 1e-8"] = transport <= 1e-8


def test_criterion_2_plane_g_not_chaotic():
    rng = np.random.default_rng(7)
    g = SystemHandle.plane_g()
    g_inv = g.inverse()
    pairs = []
    while len(pairs) < 100:
        m = rng.uniform(0.1, 10.0, 2)
        if m[0] != m[1]:
            a = rng.uniform(0, 1, 2)
            pairs.append((PlanePoint.from_polar(m[0], a[0], Space.PLANE),
                          PlanePoint.from_polar(m[1], a[1], Space.PLANE)))
    with criterion(2, 1.0, {}) as checks:
        g_verdicts, inv_verdicts, shrink, exact_log = [], [], [], []
        for x, y in pairs:
            v = dyn.liyorke_verdict(g, x, y, 10_000)
            g_verdicts.append(v.verdict is Verdict.NOT_PAIR and v.reason.startswith("diverges"))
            xn, yn = dyn.iterate(g_inv, x, 50), dyn.iterate(g_inv, y, 50)
            exact_log.append(xn.radial == x.radial - 50 and yn.radial == y.radial - 50)
            shrink.append(plane.distance(xn, yn) <= 1e-15 * plane.distance(x, y))
            inv_verdicts.append(dyn.liyorke_verdict(g_inv, x, y, 100).verdict is Verdict.NOT_PAIR)
        checks["g certified NotPair (100 pairs)"] = all(g_verdicts)
        checks["g^-1 log-modulus drops by exactly n"] = all(exact_log)
        checks["g^-1 distance at n=50 <= 1e-15 * initial"] = all(shrink)
        checks["g^-1 NotPair (100 pairs)"] = all(inv_verdicts)


def test_criterion_3_disk_inverse_not_chaotic():
    fam = sc.certified_family(5)
    f_inv = SystemHandle.disk_f().inverse()
    with criterion(3, 1.0, {}) as checks:
        pts = fam.disk_points()
        moved = [dyn.iterate(f_inv, p, 40) for p in pts]
        with mpmath.workdps(40):
            oracle = []
            for r in fam.points:
                r = mpmath.mpf(r)
                oracle.append(r / (r + (1 - r) * mpmath.exp(40)))
        checks["moduli match r/(r+(1-r)e^40)"] = all(
            abs(w.modulus - float(o)) <= 1e-12 * float(o) for w, o in zip(moved, oracle))
        dists = [plane.distance(moved[j], moved[k]) for j, k in fam.pairs()]
        checks["distance at n=40 <= 1e-12 (10 pairs)"] = max(dists) <= 1e-12
        verdicts = [dyn.liyorke_verdict(f_inv, pts[j], pts[k], 100).verdict for j, k in fam.pairs()]
        checks["NotPair (10 pairs)"] = all(v is Verdict.NOT_PAIR for v in verdicts)


def test_criterion_4_disk_pairs():
    fam = sc.certified_family(5)
    with criterion(4, 10.0, {}) as checks:
        reports = [sc.pair_verdict(fam, j, k, horizon=10_000, search_bound=10**5)
                   for j, k in fam.pairs()]
        thetas = {str(r.theta.exact) for r in reports}
        checks["pairwise theta in {1,2,3,4} * sqrt2"] = len(thetas) == 4
        checks["liminf <= 0.02"] = all(r.verdict.liminf_estimate <= 0.02 for r in reports)
        checks["limsup >= 1.9"] = all(r.verdict.limsup_estimate >= 1.9 for r in reports)
        checks["Pair (10 pairs)"] = all(r.verdict.verdict is Verdict.PAIR for r in reports)


def _records(bound, target):
    with mpmath.workdps(40):
        root = mpmath.sqrt(2)
        best, out = None, []
        for n in range(1, bound + 1):
            x = mpmath.frac(n * root) - target
            d = min(abs(x), 1 - abs(x))
            if best is None or d < best:
                best = d
                out.append(n)
    return out


def test_criterion_5_diophantine():
    sqrt2 = dio.RealWithError.named("sqrt2")
    with criterion(5, 1.0, {}) as checks:
        cf = dio.continued_fraction(sqrt2, 30)
        denominators = [c.q for c in dio.convergents(cf) if c.q <= 10**4]
        checks["convergent denominators == zero records (n <= 1e4)"] = denominators == _records(10**4, 0)
        half = dio.near_half_subsequence(sqrt2, 10, 100)
        records = _records(100, mpmath.mpf(1) / 2)
        # n = 1 opens the record table; witnesses are the records that follow it
        checks["near-half witnesses == half records (n <= 100)"] = (
            records[0] == 1 and list(half.indices) == records[1:] == [6, 35])


def test_criterion_6_operator():
    sched = op.build_schedule(0.1, [2, 4, 8, 16], 4)
    rng = np.random.default_rng(6)
    crossings = (546, 2204, 8836, 35361)
    with criterion(6, 30.0, {}) as checks:
        ok = True
        with mpmath.workdps(50):
            for p, c in zip(sched.blocks, sched.C):
                base = 1 + mpmath.mpf(p.eps_i)
                target = mpmath.sqrt(2) * c
                ok &= p.eps_i == 0.1 / 4**p.i
                ok &= base**p.L_i >= target and (p.L_i == 1 or base ** (p.L_i - 1) < target)
                ok &= p.L_i * p.i < p.m_i and p.n_i == 2 * p.m_i
            ok &= sched.blocks[0].L_i == 43 and mpmath.mpf("1.025") ** 42 < 2 * mpmath.sqrt(2)
        checks["(a) schedule invariants, L_1 = 43"] = bool(ok)

        worst = 0.0
        for b in sched.block_matrices():
            v = rng.standard_normal((100, b.dim))
            back = op.block_apply(b, v, "inverse")
            closed = op.block_apply(b, v, "inverse", method="closed_form")
            worst = max(worst, float(np.max(np.linalg.norm(back - closed, axis=1)
                                            / np.linalg.norm(back, axis=1))))
        checks["(b) closed-form inverse == back-substitution to 1e-12"] = worst <= 1e-12

        ok = True
        with mpmath.workdps(50):
            for b, n in zip(sched.block_matrices(), crossings):
                e1 = np.zeros(b.dim)
                e1[0] = 1.0
                ln = op.block_power_apply(b, e1, -n).log_norm()
                exact = -n * mpmath.log(1 - mpmath.mpf(b.eps_i))
                ok &= abs(ln - float(exact)) <= 1e-14 * float(exact)
                ok &= ln >= math.log(1e6) and (1 - mpmath.mpf(b.eps_i)) ** (-(n - 1)) < 10**6
        checks["(c) log ||T_i^-n e_1|| = -n log(1-eps_i), crossing 546/..."] = bool(ok)

        norms = [op.truncated_apply(sched, 4, op.TruncatedVector.random(sched, rng), -2000).log_norm()
                 for _ in range(20)]
        checks["(d) ||T^-2000 x|| > 1e3 (20 vectors)"] = min(norms) > math.log(1e3)

        ok = True
        for b in sched.block_matrices():
            n = op.forward_decay_horizon(b)
            ok &= op.power_log_norm_bound(b, n) <= math.log(1e-8)
            v = rng.standard_normal(b.dim)
            ok &= op.block_power_apply(b, v, n).norm() <= 1e-8 * np.linalg.norm(v)
        checks["(e) forward powers decay below 1e-8"] = bool(ok)


def _property(prop, strategies):
    """Run ``prop`` over ``PROPERTY_CASES`` generated cases; return (ok, count)."""
    calls = []

    @settings(max_examples=PROPERTY_CASES, deadline=None, database=None)
    @given(st.tuples(*strategies))
    def run(args):
        calls.append(1)
        prop(*args)

    try:
        run()
    except Exception as exc:
        print(f"  property failure: {exc!r}")
        return False, len(calls)
    return len(calls) >= PROPERTY_CASES, len(calls)


def test_criterion_7_properties():
    sched = op.build_schedule(0.1, [2, 4])
    disk = SystemHandle.disk_f()
    angles = st.floats(0, 1, exclude_max=True)

    def group_law(t, a, m, n, seed):
        for s in (disk, disk.inverse(), SystemHandle.plane_g(), SystemHandle.plane_g().inverse()):
            x = PlanePoint(s.space, t, a)
            lhs, rhs = dyn.iterate(s, x, m + n), dyn.iterate(s, dyn.iterate(s, x, n), m)
            assert plane.distance(lhs, rhs) <= 1e-9 * max(1.0, lhs.modulus)
        s = SystemHandle.operator(sched, 2, inverse=seed % 2 == 1)
        x = op.TruncatedVector.random(sched, np.random.default_rng(seed), 2)
        lhs, rhs = dyn.iterate(s, x, m + n), dyn.iterate(s, dyn.iterate(s, x, n), m)
        assert dyn.state_distance(s, lhs, rhs) <= 1e-9 * lhs.norm()

    def inversion(t, a, n, seed):
        for s in (disk, SystemHandle.plane_g()):
            x = PlanePoint(s.space, t, a)
            assert plane.distance(dyn.iterate(s, dyn.iterate(s, x, n), -n), x) <= 1e-9
        s = SystemHandle.operator(sched, 2)
        x = op.TruncatedVector.random(sched, np.random.default_rng(seed), 2)
        back = dyn.iterate(s, dyn.iterate(s, x, n), -n)
        assert dyn.state_distance(s, back, x) <= 1e-9 * x.norm()

    def rotation(t, a, m, n):
        x = PlanePoint(Space.DISK, t, a)
        with mpmath.workdps(40):
            expected = float(mpmath.frac(mpmath.mpf(a) + (m + n) * mpmath.mpf(t)))
        got = plane.f_power(plane.f_power(x, n), m).angle_turns
        gap = abs(got - expected)
        assert min(gap, 1 - gap) <= 1e-12

    def distribution(values, grid):
        s = dyn.DistanceSeries(np.arange(len(values)), values, len(values))
        d = dyn.distribution_function(s, grid)
        assert np.all((0 <= d.lower_values) & (d.lower_values <= d.upper_values) & (d.upper_values <= 1))
        assert np.all(np.diff(d.lower_values) >= 0) and np.all(np.diff(d.upper_values) >= 0)

    def determinant(theta, depth):
        convs = dio.convergents(dio.continued_fraction(theta, depth), max_denominator=10**80)
        for a, b in zip(convs, convs[1:]):
            assert b.p * a.q - a.p * b.q == (-1) ** (b.k - 1)

    def schedule(eps, C):
        s = op.build_schedule(eps, C)
        with mpmath.workdps(50):
            for p, c in zip(s.blocks, s.C):
                base = 1 + mpmath.mpf(p.eps_i)
                target = mpmath.sqrt(2) * mpmath.mpf(c)
                assert p.eps_i == eps / 4**p.i
                assert base**p.L_i >= target and (p.L_i == 1 or base ** (p.L_i - 1) < target)
                assert p.L_i * p.i < p.m_i and p.n_i == 2 * p.m_i

    ints = st.integers(-50, 50)
    seeds = st.integers(0, 2**32)
    thetas = st.one_of(
        st.fractions(-50, 50, max_denominator=10**9).map(dio.RealWithError.from_fraction),
        st.integers(1, 30).map(dio.RealWithError.named("sqrt2").scaled),
        st.integers(1, 30).map(dio.RealWithError.named("golden").scaled),
    )
    suites = {
        "group law": (group_law, (st.floats(-4, 4), angles, ints, ints, seeds)),
        "inversion": (inversion, (st.floats(-4, 4), angles, ints, seeds)),
        "rotation additivity": (rotation, (st.floats(-20, 20), angles, ints, ints)),
        "distribution bounds/monotonicity": (distribution, (
            st.lists(st.floats(0, 5), min_size=1, max_size=200),
            st.lists(st.floats(0.001, 6), min_size=1, max_size=10, unique=True).map(sorted))),
        "CF determinant identity": (determinant, (thetas, st.integers(0, 25))),
        "schedule invariants": (schedule, (
            st.floats(0.01, 0.5),
            st.lists(st.floats(0.5, 50), min_size=1, max_size=6, unique=True).map(sorted))),
    }
    with criterion(7, math.inf, {}) as checks:
        for name, (prop, strategies) in suites.items():
            ok, count = _property(prop, strategies)
            checks[f"{name} ({count} cases)"] = ok


if __name__ == "__main__":
    import sys

    import pytest

    sys.exit(pytest.main([__file__, "-v", "-s"]))
