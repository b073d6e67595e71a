"""Invariants that tie modules together (set inclusions, oracle agreement)."""

import itertools
import math

import numpy as np
import pytest

from dirichlet_lab.approx import ConstantRatio, DimensionParams
from dirichlet_lab.dirichlet import dirichlet_solvable
from dirichlet_lab.errors import DomainError
from dirichlet_lab.experiments import VARIANT_NDI, orbit_hit_series
from dirichlet_lab.lattice import WeightPair, apply_flow, standard_lattice
from dirichlet_lab.mc import (
    CoordinateRegion,
    lower_bound_region_volume,
    measure_profile,
)
from dirichlet_lab.rate import RateFunction
from dirichlet_lab.rng import sample_torus, substream
from dirichlet_lab.targets import KIND_PRIMED

W11 = WeightPair.unweighted(1, 1)


def brute_force_solvable(A, psi, t, w):
    """Exhaustive (p, q) scan: q over the beta-box, p within 1 of round(Aq)."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    m, n = A.shape
    bounds = [int(math.floor(t ** w.beta[j])) + 1 for j in range(n)]
    bound_psi = float(psi.psi(t))
    for q in itertools.product(*[range(-b, b + 1) for b in bounds]):
        qv = np.array(q, dtype=float)
        if not qv.any():
            continue
        qnorm = max(abs(qv[j]) ** (1.0 / w.beta[j]) for j in range(n))
        if not qnorm < t - 1e-12 * max(1.0, t):
            continue
        base = A @ qv
        center = np.rint(base)
        for dp in itertools.product((-1, 0, 1), repeat=m):
            p = center + np.array(dp)
            err = max(
                abs(base[i] - p[i]) ** (1.0 / w.alpha[i]) for i in range(m)
            )
            if err < bound_psi - 1e-12 * max(1.0, bound_psi):
                return True
    return False


def test_solvable_matches_exhaustive_oracle_scalar():
    psi = ConstantRatio(0.6, t0=2.0)
    rng = substream(90, "brute", 0)
    for _ in range(40):
        a = float(rng.random())
        t = float(rng.uniform(3.0, 50.0))
        got = dirichlet_solvable(a, psi, t, W11)
        want = brute_force_solvable(a, psi, t, W11)
        assert got == want, (a, t)


def test_solvable_matches_exhaustive_oracle_2x1():
    psi = ConstantRatio(0.6, t0=2.0)
    w = WeightPair(alpha=(0.5, 0.5), beta=(1.0,))
    rng = substream(91, "brute", 1)
    for _ in range(15):
        A = rng.random((2, 1))
        t = float(rng.uniform(3.0, 50.0))
        assert dirichlet_solvable(A, psi, t, w) == brute_force_solvable(A, psi, t, w)


def test_region_volume_below_primed_measure():
    # the projected region at parameter 1 - e^-r sits inside the primed set
    # at radius r, so its invariant volume is a lower bound
    r = 2e-3
    region = CoordinateRegion(r=1.0 - math.exp(-r), d=2)
    vol = lower_bound_region_volume(region, 50_000, seed=93)
    prof = measure_profile([KIND_PRIMED], [r], W11, s_push=10.0, N=50_000, seed=93)
    primed = prof[(KIND_PRIMED, r)]
    assert vol.ci_low <= primed.ci_high + 1e-12


def test_flow_overflow_guard():
    with pytest.raises(DomainError):
        apply_flow(standard_lattice(DimensionParams(1, 1)), 600.0, W11)


def test_orbit_series_weighted_float_path():
    # general (m, n) orbits run on the float basis at small k
    w = WeightPair(alpha=(0.6, 0.4), beta=(1.0,))
    rate = RateFunction.constant(0.3, DimensionParams(2, 1), s0=1.0)
    A = sample_torus(substream(94, "worbit", 0), 2, 1)
    series = orbit_hit_series(A, rate, VARIANT_NDI, (1, 8), w, a=0.8)
    assert series.hits.shape == (8,)


def test_orbit_series_weighted_guard_beyond_float_horizon():
    from dirichlet_lab.errors import BudgetExceeded

    w = WeightPair(alpha=(0.6, 0.4), beta=(1.0,))
    rate = RateFunction.constant(0.3, DimensionParams(2, 1), s0=1.0)
    A = sample_torus(substream(94, "worbit", 1), 2, 1)
    with pytest.raises(BudgetExceeded):
        orbit_hit_series(A, rate, VARIANT_NDI, (1, 40), w, a=0.8)
