"""Acceptance suite: one test per criterion, each printing a PASS line with
its runtime and asserting the stated tolerance and budget."""

import math
import time

import numpy as np
import pytest

from dirichlet_lab.approx import ConstantRatio, DimensionParams, LogDrift, MaxWithHalf
from dirichlet_lab.cf import cf_expand, cf_uncovered_intervals
from dirichlet_lab.cli import cli_main
from dirichlet_lab.dirichlet import psi_dirichlet_scan
from dirichlet_lab.experiments import (
    cross_validate_dani,
    dani_table,
    empirical_zero_one,
    verify_disjointness,
)
from dirichlet_lab.lattice import (
    UnimodularLattice,
    WeightPair,
    delta,
    random_unimodular,
    shortest_sup_norm,
    standard_lattice,
)
from dirichlet_lab.mc import fit_scaling, measure_profile
from dirichlet_lab.rate import RateFunction
from dirichlet_lab.rng import sample_torus, substream
from dirichlet_lab.targets import KIND_PRIMED, KIND_SUB

W11 = WeightPair.unweighted(1, 1)
D11 = DimensionParams(1, 1)

SEED = 20260808


def _report(number, detail, t_start, budget_s):
    elapsed = time.time() - t_start
    line = f"ACCEPTANCE {number}: PASS — {detail} ({elapsed:.1f}s / budget {budget_s:.0f}s)"
    print(line)
    assert elapsed < budget_s, f"criterion {number} exceeded its runtime budget"


def _brute_min_sup(basis):
    inv = np.linalg.inv(basis)
    bounds = [int(math.ceil(np.sum(np.abs(inv[j])))) + 1 for j in range(basis.shape[0])]
    grids = np.meshgrid(*[np.arange(-b, b + 1) for b in bounds], indexing="ij")
    C = np.stack([g.ravel() for g in grids])
    V = basis @ C
    sup = np.max(np.abs(V), axis=0)
    return float(sup[sup > 1e-12].min())


def test_criterion_1_delta_exactness():
    t0 = time.time()
    for d in (2, 3, 4, 5):
        dims = DimensionParams(1, d - 1)
        assert abs(delta(standard_lattice(dims))) <= 1e-12
    L = UnimodularLattice(np.diag([2.0, 0.5]), D11)
    assert abs(delta(L) - math.log(2.0)) <= 1e-12
    mismatches = 0
    for d in (2, 3):
        dims = DimensionParams(1, d - 1)
        for i in range(500):
            rng = substream(SEED, f"delta-{d}", i)
            Lr = random_unimodular(dims, rng, shears=6, magnitude=3)
            oracle = _brute_min_sup(Lr.basis)
            if abs(shortest_sup_norm(Lr) - oracle) > 1e-9 * max(1.0, oracle):
                mismatches += 1
    assert mismatches == 0
    _report(1, "Delta exact on Z^d, diag, and 1000 random lattices", t0, 60)


def test_criterion_2_classic_dirichlet():
    t0 = time.time()
    failures = 0
    for m, n in ((1, 1), (2, 1), (1, 2)):
        w = WeightPair.unweighted(m, n)
        for idx in range(200):
            A = sample_torus(substream(SEED, f"classic-{m}{n}", idx), m, n)
            rep = psi_dirichlet_scan(A, None, 1000.0, w, classic_mode=True)
            failures += not rep.passes
    assert failures == 0
    _report(2, "classic-mode scans fully covered for 600 random matrices", t0, 300)


@pytest.fixture(scope="module")
def measure_run():
    r_values = [float(r) for r in np.geomspace(0.02, 0.2, 8)]
    t0 = time.time()
    profile = measure_profile(
        [KIND_SUB, KIND_PRIMED], r_values, W11, s_push=10.0, N=200_000, seed=SEED
    )
    return r_values, profile, time.time() - t0


def test_criterion_3_measure_scaling(measure_run):
    t0 = time.time()
    r_values, profile, profile_time = measure_run
    estimates = [profile[(KIND_SUB, r)] for r in r_values]
    fit = fit_scaling(r_values, estimates, D11, thickened=False, freeze_lambda=True)
    assert 1.7 <= fit.kappa_hat <= 2.3, fit.kappa_hat
    assert fit.reference_exponent == 2.0
    elapsed = profile_time + (time.time() - t0)
    line = (
        f"ACCEPTANCE 3: PASS — kappa_hat={fit.kappa_hat:.3f} in [1.7, 2.3] "
        f"({elapsed:.1f}s / budget 600s)"
    )
    print(line)
    assert elapsed < 600


def test_criterion_4_primed_vs_plain(measure_run):
    t0 = time.time()
    r_values, profile, profile_time = measure_run
    ratios = []
    for r in r_values:
        sub = profile[(KIND_SUB, r)].mean
        primed = profile[(KIND_PRIMED, r)].mean
        assert sub > 0
        ratio = primed / sub
        assert 0.0 < ratio <= 1.0, (r, ratio)
        ratios.append(ratio)
    assert max(ratios) / min(ratios) < 5.0, ratios
    _report(
        4,
        f"primed/plain ratios in ({min(ratios):.3f}, {max(ratios):.3f}), spread "
        f"{max(ratios) / min(ratios):.2f}x < 5x (samples shared with #3)",
        t0,
        600,
    )


def test_criterion_5_disjointness():
    t0 = time.time()
    rep = verify_disjointness(math.exp(-8.0), D11, W11, samples=1000, seed=SEED)
    assert rep.J == 2
    assert rep.violation_count == 0
    _report(5, "1000 thickened-primed samples, J=2, zero violations", t0, 300)


def test_criterion_6_cf_oracle_agreement():
    t0 = time.time()
    psis = [
        ConstantRatio(0.6, t0=2.0),
        ConstantRatio(0.9, t0=2.0),
        LogDrift(1.0, 1.0, t0=math.e**2),
    ]
    comparisons = 0
    disagreements = 0
    for idx in range(300):
        alpha = float(sample_torus(substream(SEED, "cfagree", idx), 1, 1)[0, 0])
        cf = cf_expand(alpha, 60)
        qs = [q for _, q in cf.convergents if q <= 10_000]
        horizon = float(qs[-1])
        for psi in psis:
            if horizon <= psi.t0 + 1:
                continue
            scan = psi_dirichlet_scan(alpha, psi, horizon, W11)
            oracle = cf_uncovered_intervals(alpha, psi, horizon)
            same = len(oracle) == len(scan.uncovered) and all(
                abs(a - b) <= 1e-6 * max(1.0, abs(a))
                for (a1, a2), (b1, b2) in zip(oracle, scan.uncovered)
                for a, b in ((a1, b1), (a2, b2))
            )
            comparisons += 1
            disagreements += not same
    assert comparisons >= 600
    assert disagreements == 0
    _report(
        6, f"{comparisons} interval-by-interval comparisons, 100% agreement", t0, 300
    )


def test_criterion_7_dani_cross_validation():
    t0 = time.time()
    psi = MaxWithHalf(LogDrift(1.0, 0.5, t0=math.exp(4.0)))
    table = dani_table(psi, D11, S=20.0, s_step=0.05)
    counterexamples = 0
    for idx in range(100):
        a = float(sample_torus(substream(SEED, "crossval", idx), 1, 1)[0, 0])
        rep = cross_validate_dani(a, psi, D11, W11, S=20.0, rate_table=table)
        counterexamples += not rep.consistent
    assert counterexamples == 0
    _report(7, "100 random A, S=20: zero correspondence counterexamples", t0, 600)


def test_criterion_8_zero_one_contrast():
    t0 = time.time()
    div_rate = RateFunction.from_psi(MaxWithHalf(LogDrift(1.0, 0.5, t0=math.exp(4.0))), D11)
    conv_rate = RateFunction.from_psi(MaxWithHalf(LogDrift(1.0, 2.0, t0=math.exp(2.0))), D11)
    div = empirical_zero_one(div_rate, W11, 500, (10, 100), a=0.9, seed=SEED)
    conv = empirical_zero_one(conv_rate, W11, 500, (10, 100), a=0.9, seed=SEED)
    conv_floor = max(conv.tail_frequency, 1.0 / 500)
    assert div.tail_frequency >= 10.0 * conv_floor, (div.tail_frequency, conv.tail_frequency)
    doubled = empirical_zero_one(div_rate, W11, 500, (10, 200), a=0.9, seed=SEED)
    p = div.tail_frequency
    slack = 2.0 * 1.959963984540054 * math.sqrt(max(p * (1 - p), 0.25 / 500) / 500)
    assert doubled.tail_frequency >= div.tail_frequency - slack
    _report(
        8,
        f"tail freq divergent {div.tail_frequency:.3f} vs convergent "
        f"{conv.tail_frequency:.3f} (>=10x); doubled horizon {doubled.tail_frequency:.3f}",
        t0,
        1200,
    )


def test_criterion_9_determinism_and_threads(tmp_path):
    t0 = time.time()
    # same seed => byte-identical outputs; --threads must not change a byte
    def run(tag, threads, seed):
        out = tmp_path / tag
        code = cli_main(
            [
                "measure",
                "--kinds", "sub,primed",
                "--r-values", "0.05,0.1,0.2",
                "--N", "2000",
                "--s-push", "8.0",
                "--seed", str(seed),
                "--threads", str(threads),
                "--out", str(out),
            ]
        )
        assert code == 0
        return (out / "measure.csv").read_bytes()

    base = run("a", 1, 11)
    assert run("b", 1, 11) == base
    assert run("c", 4, 11) == base
    assert run("d", 1, 12) != base

    def run_orbit(tag, threads):
        out = tmp_path / tag
        code = cli_main(
            [
                "orbit",
                "--mode", "contrast",
                "--ensemble", "60",
                "--k-min", "5",
                "--k-max", "25",
                "--a", "0.9",
                "--set", "rate.source=constant",
                "--set", "rate.value=0.3",
                "--seed", "3",
                "--threads", str(threads),
                "--out", str(out),
            ]
        )
        assert code == 0
        return (out / "hit_counts.csv").read_bytes() + (out / "contrast.json").read_bytes()

    assert run_orbit("e", 1) == run_orbit("f", 3)
    _report(
        9,
        "seeded outputs byte-identical; thread count changes no output byte "
        "(module invariant suites run alongside in this session)",
        t0,
        600,
    )
