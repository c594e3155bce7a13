"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (the lines are printed even
when output capture is on) or ``python tests/test_acceptance.py``.
"""

import random
import statistics
import time
from fractions import Fraction as F

import pytest

from monomaj.kernels import (
    PCKernel,
    apply,
    calderon_factorize,
    certify,
    dmitriev_factorize,
    is_monotone_kernel,
    kernel_norms,
    majorant_S,
    monotone_lemma_check,
    random_step_function,
)
from monomaj.stepfn import (
    L1,
    LINF,
    Lambda,
    StepFunction,
    Tilde,
    indicator,
    k_profile,
    k_via_inf,
    majorant,
    norm,
    p_convexify,
    profile_dominance_witness,
    submajorizes_fn,
)
from monomaj.stochastic import (
    hlp_construct,
    hlp_monotone_substoch,
    is_doubly_stochastic,
    is_monotone_matrix,
    is_substochastic,
    matvec,
    pushing_mass_trace,
)

from helpers import (
    GAUGES,
    oracle_integral,
    oracle_majorant,
    profile_ratio_min,
    rand_fraction,
    rand_monotone_ds,
    rand_monotone_kernel,
    rand_monotone_substoch,
    rand_nonincreasing,
    rand_nonincreasing_step,
    rand_step,
)


@pytest.fixture
def report(capsys):
    def _report(number, title, ok, detail=""):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number} ({title}): {detail}")
        assert ok, detail

    return _report


def fr(*xs):
    return tuple(F(x) for x in xs)


TRACE1_F, TRACE1_G = fr(1, 1, 1, 1), fr(2, 1, 1, 0)


def test_criterion_01_pushing_mass_trace_1(report):
    expected = [fr(F(3, 2), F(3, 2), 1, 0), fr(F(4, 3), F(4, 3), F(4, 3), 0), fr(1, 1, 1, 1)]
    timings = []
    for _ in range(25):
        start = time.perf_counter()
        steps = pushing_mass_trace(TRACE1_F, TRACE1_G)
        timings.append(time.perf_counter() - start)
    ms = statistics.median(timings) * 1e3
    ok = steps == expected and ms < 1
    report(1, "pushing-mass trace 1", ok, f"{len(steps)} steps, median {ms:.3f} ms")


def test_criterion_02_pushing_mass_trace_2(report):
    f = fr(F(12, 10), F(11, 10), 1, F(7, 10))
    steps = pushing_mass_trace(f, TRACE1_G)
    expected = [
        fr(F(3, 2), F(3, 2), 1, 0),
        fr(F(4, 3), F(4, 3), F(4, 3), 0),
        fr(F(12, 10), F(12, 10), F(12, 10), F(4, 10)),
        fr(F(12, 10), F(11, 10), F(11, 10), F(6, 10)),
    ]
    ok = steps[:4] == expected and len(steps) == 5 and steps[-1] == f
    report(2, "pushing-mass trace 2", ok, f"{len(steps)} steps, first four match: {steps[:4] == expected}")


def _hlp_pairs(seed, count, substoch):
    rng = random.Random(seed)
    pairs = []
    for _ in range(count):
        n = rng.randint(1, 12)
        a = rand_nonincreasing(rng, n)
        m = rand_monotone_substoch(rng, n) if substoch else rand_monotone_ds(rng, n)
        pairs.append((a, matvec(m, a)))
    return pairs


def test_criterion_03_hlp_construction(report):
    ds_pairs = _hlp_pairs(3001, 1000, substoch=False)
    start = time.perf_counter()
    ds_ok, depth_ok = True, True
    for a, b in ds_pairs:
        built = hlp_construct(a, b)
        m = built.matrix
        ds_ok &= matvec(m, a) == b and is_doubly_stochastic(m) and is_monotone_matrix(m)
        depth_ok &= built.head_reductions <= len(a)
    ds_time = time.perf_counter() - start

    sub_pairs = _hlp_pairs(3002, 1000, substoch=True)
    start = time.perf_counter()
    sub_ok = True
    for a, b in sub_pairs:
        m = hlp_monotone_substoch(a, b)
        sub_ok &= matvec(m, a) == b and is_substochastic(m) and is_monotone_matrix(m)
    sub_time = time.perf_counter() - start

    ok = ds_ok and sub_ok and ds_time < 10 and sub_time < 10
    report(
        3,
        "HLP construction",
        ok,
        f"doubly stochastic {ds_ok} in {ds_time:.2f} s; substochastic {sub_ok} in {sub_time:.2f} s",
    )


def test_criterion_04_head_reductions_vs_pushing_mass(report):
    built = hlp_construct(TRACE1_G, TRACE1_F)
    quarter = tuple(tuple(F(1, 4) for _ in range(4)) for _ in range(4))
    pushes = len(pushing_mass_trace(TRACE1_F, TRACE1_G))
    depths_ok = all(
        hlp_construct(a, b).head_reductions <= len(a) for a, b in _hlp_pairs(4001, 500, substoch=False)
    )
    ok = built.head_reductions == 1 and built.matrix == quarter and pushes == 3 and depths_ok
    report(
        4,
        "head reductions vs pushing mass",
        ok,
        f"{built.head_reductions} head reduction vs {pushes} pushing steps; depth <= n on 500 instances: {depths_ok}",
    )


def test_criterion_05_k_functional_equality(report):
    rng = random.Random(5001)
    checked = 0
    ok = True
    for _ in range(500):
        f = rand_step(rng)
        profile = k_profile(f, Tilde(L1))
        ft = oracle_majorant(f)
        for _ in range(20):
            t = rand_fraction(rng, 0, 6, 8) + F(1, 16)
            direct = oracle_integral(ft, t)
            ok &= k_via_inf(f, t, L1) == profile(t) == direct
            checked += 1
    report(5, "K-functional via infimum equals tilde profile", ok, f"{checked} (f, t) pairs exact")


def test_criterion_06_majorant_operator(report):
    rng = random.Random(6001)
    worst, worst_qeff, checks = F(0), F(0), 0
    ok = True
    for _ in range(300):
        f = rand_step(rng, tail=F(0))
        while f.is_zero():
            f = rand_step(rng, tail=F(0))
        for q in (F(3, 2), F(2), F(3)):
            chain, q_eff = majorant_S(f, q)
            _, kernel_op, mult = chain.primitives
            ok &= apply(chain, f) == majorant(f)
            ok &= norm(mult.symbol, LINF) <= q
            ok &= kernel_norms(kernel_op.kernel)[1] == 1
            ok &= q_eff <= 1 + (q - 1) / 2
            worst_qeff = max(worst_qeff, q_eff)
            anchors = [x for x in kernel_op.kernel.ybreaks] + list(f.breaks)
            extent = f.last_break + 1
            for _ in range(200):
                h = random_step_function(rng, extent, anchors=anchors)
                hn = norm(h, Tilde(L1))
                sh = kernel_op.apply(h)
                ok &= norm(sh, Tilde(L1)) <= q_eff * hn
                ok &= norm(sh, LINF) <= norm(h, LINF)
                if hn:
                    worst = max(worst, norm(sh, Tilde(L1)) / hn)
                checks += 1
    report(
        6,
        "majorant operator",
        ok,
        f"{checks} samples; max q_eff {worst_qeff}; worst observed L̃¹ ratio {worst}",
    )


def _dominated_pair(rng):
    f = rand_step(rng)
    n = rng.randint(1, 16)
    d = F(1, 4)
    k = rand_monotone_kernel(rng, d, n)
    cells = [F(rng.choice((-1, 0, 1))) for _ in range(n)]
    w = StepFunction([i * d for i in range(n + 1)], cells)
    return f, w * apply(k, majorant(f))


def test_criterion_07_calderon_factorization(report):
    rng = random.Random(7001)
    ok = True
    for _ in range(300):
        f, g = _dominated_pair(rng)
        chain, cert = calderon_factorize(f, g, samples=2, seed=7)
        if f.is_zero():
            ok &= apply(chain, f) == g
            continue
        t_factor = chain.primitives[3].kernel
        w_factor = chain.primitives[4].symbol
        t_cert = certify(t_factor, samples=0)
        ok &= apply(chain, f) == g
        ok &= t_cert.substochastic and t_cert.monotone
        ok &= norm(w_factor, LINF) <= 1
    report(7, "Calderón factorization end to end", ok, "300 dominated pairs reproduced exactly")


def _lorentz_pair(rng, phi):
    while True:
        f = rand_nonincreasing_step(rng)
        g = rand_nonincreasing_step(rng)
        if f.is_zero() or g.is_zero():
            continue
        ratio = profile_ratio_min(k_profile(f, Lambda(phi)), k_profile(g, L1))
        scale = min(F(1), ratio) * F(rng.randint(1, 4), 4)
        return f, g * scale


def test_criterion_08_lorentz_factorization(report):
    rng = random.Random(8001)
    ok, pairs, samples = True, 0, 0
    for phi in GAUGES:
        for _ in range(200):
            f, g = _lorentz_pair(rng, phi)
            assert profile_dominance_witness(k_profile(f, Lambda(phi)), k_profile(g, L1)) is None
            chain = dmitriev_factorize(f, g, phi)
            d = chain.primitives[0].kernel
            ok &= apply(chain, f) == g
            ok &= submajorizes_fn(apply(d, f), g)
            for _ in range(5):
                h = rand_step(rng, extent=6)
                dh = apply(d, h)
                ok &= norm(dh, L1) <= norm(h, Lambda(phi)) and norm(dh, LINF) <= norm(h, LINF)
                samples += 1
            pairs += 1
    report(8, "Lorentz-to-L¹ factorization", ok, f"{pairs} pairs over {len(GAUGES)} gauges, {samples} D samples")


def test_criterion_09_p_convexification(report):
    rng = random.Random(9001)
    ok = True
    for _ in range(500):
        f = rand_step(rng)
        for p in (1, 2, 3):
            ok &= majorant(p_convexify(f, p)) == p_convexify(majorant(f), p)
    report(9, "majorant commutes with |·|^p", ok, "500 functions × p in {1, 2, 3}")


def test_criterion_10_monotone_operators(report):
    rng = random.Random(10001)
    ok = True
    for _ in range(500):
        d = F(1, rng.randint(1, 4))
        k = rand_monotone_kernel(rng, d, rng.randint(1, 10), substochastic=rng.random() < 0.5)
        ok &= is_monotone_kernel(k)
        ok &= monotone_lemma_check(k, rand_step(rng))
    bad = PCKernel((0, 1, 2), (0, 1), ((F(0),), (F(1),)))
    f = indicator(0, 1)
    lhs, rhs = majorant(apply(bad, f)), apply(bad, majorant(f))
    counter = lhs == indicator(0, 2) and rhs == indicator(1, 2)
    counter &= not monotone_lemma_check(bad, f, require_monotone=False)
    report(10, "monotone operators commute with majorants", ok and counter, f"500 samples {ok}; counterexample fails as expected: {counter}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
