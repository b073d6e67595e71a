"""Target sets on the space of lattices and exact membership tests.

Four families at radius r:

    sub          no nonzero point in the open cube (-e^-r, e^-r)^d
    primed       sub, and additionally a point in the slab near e_1
    thick        some s in [0,1)   has g_s L in sub(r)
    thick_primed some s in [0,1/2) has g_s L in primed(r)

Thickened membership is decided without any s-grid: every candidate vector
contributes one s-interval per condition (each flowed coordinate is
monotone in s, so endpoints solve in closed form), and the interval sets
are combined exactly (complement-of-union for cube avoidance, union for
slab hitting).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .lattice import (
    Box,
    UnimodularLattice,
    WeightPair,
    apply_flow,
    enumerate_in_box,
    has_nonzero_point,
    r_box,
)

KIND_SUB = "sub"
KIND_PRIMED = "primed"
KIND_THICK = "thick"
KIND_THICK_PRIMED = "thick_primed"
_KINDS = (KIND_SUB, KIND_PRIMED, KIND_THICK, KIND_THICK_PRIMED)

_WINDOWS = {KIND_THICK: 1.0, KIND_THICK_PRIMED: 0.5}

# intervals shorter than this are treated as empty (boundary tolerance)
_MIN_LEN = 1e-12


@dataclass(frozen=True)
class TargetSpec:
    kind: str
    r: float
    weights: WeightPair | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValidationError(f"unknown target kind {self.kind!r}")
        if not 0.0 < self.r < 1.0:
            raise ValidationError("target radius must lie in (0,1)")
        if self.thick and self.weights is None:
            raise ValidationError(f"{self.kind} targets need a WeightPair")

    @property
    def thick(self) -> bool:
        return self.kind in _WINDOWS

    @property
    def window(self) -> float:
        return _WINDOWS[self.kind]

    @property
    def base_kind(self) -> str:
        return KIND_PRIMED if self.kind == KIND_THICK_PRIMED else KIND_SUB


def merge_intervals(intervals):
    """Union of open intervals as a sorted disjoint list."""
    ivs = sorted((lo, hi) for lo, hi in intervals if hi - lo > _MIN_LEN)
    out = []
    for lo, hi in ivs:
        if out and lo <= out[-1][1] + _MIN_LEN:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return out


def complement_within(intervals, lo: float, hi: float):
    """[lo, hi] minus a merged interval list."""
    out = []
    cursor = lo
    for a, b in intervals:
        if b <= cursor:
            continue
        if a > hi:
            break
        if a - cursor > _MIN_LEN:
            out.append((cursor, min(a, hi)))
        cursor = max(cursor, b)
        if cursor >= hi:
            break
    if hi - cursor > _MIN_LEN:
        out.append((cursor, hi))
    return out


def intersect_intervals(xs, ys):
    out = []
    i = j = 0
    while i < len(xs) and j < len(ys):
        lo = max(xs[i][0], ys[j][0])
        hi = min(xs[i][1], ys[j][1])
        if hi - lo > _MIN_LEN:
            out.append((lo, hi))
        if xs[i][1] < ys[j][1]:
            i += 1
        else:
            j += 1
    return out


def total_length(intervals) -> float:
    return sum(hi - lo for lo, hi in intervals)


def _cube_entry_interval(v, r: float, w: WeightPair):
    """s-interval on which g_s v lies in the open cube (-e^-r, e^-r)^d."""
    m = w.m
    lo, hi = -math.inf, math.inf
    for i, a in enumerate(w.alpha):
        x = abs(v[i])
        if x > 0.0:
            hi = min(hi, (-r - math.log(x)) / a)
    for j, b in enumerate(w.beta):
        x = abs(v[m + j])
        if x > 0.0:
            lo = max(lo, (r + math.log(x)) / b)
    return (lo, hi) if hi - lo > _MIN_LEN else None


def _slab_entry_interval(v, r: float, w: WeightPair):
    """s-interval on which g_s v lies in the slab r_box(r, d)."""
    m, d = w.m, w.m + w.n
    if v[0] <= 0.0:
        return None
    eps = r / (2 * d)
    half_log_r = 0.5 * math.log(r)
    lo = math.log1p(-eps) - math.log(v[0])
    hi = math.log1p(eps) - math.log(v[0])
    lo /= w.alpha[0]
    hi /= w.alpha[0]
    for i in range(1, m):
        x = abs(v[i])
        if x > 0.0:
            hi = min(hi, (half_log_r - math.log(x)) / w.alpha[i])
    for j, b in enumerate(w.beta):
        x = abs(v[m + j])
        if x > 0.0:
            lo = max(lo, (math.log(x) - half_log_r) / b)
    return (lo, hi) if hi - lo > _MIN_LEN else None


def thickened_witness_intervals(
    L: UnimodularLattice, spec: TargetSpec, cap: int = 500_000
):
    """s-subsets of [0, window) on which g_s L lies in the base target.

    Candidate vectors live in the closed cube of half-width e^window: the
    flow over the window moves any coordinate by a factor at most e^window
    and every base-target bound is below 1 + r/2d.
    """
    w = spec.weights
    window = spec.window
    candidates = enumerate_in_box(
        L, Box.closed_cube(math.exp(window) * (1.0 + 1e-9), L.d), cap=cap
    )
    cube_hits = []
    slab_hits = []
    for v in candidates:
        iv = _cube_entry_interval(v, spec.r, w)
        if iv is not None:
            cube_hits.append(iv)
        if spec.base_kind == KIND_PRIMED:
            iv = _slab_entry_interval(v, spec.r, w)
            if iv is not None:
                slab_hits.append(iv)
    avoid = complement_within(merge_intervals(cube_hits), 0.0, window)
    if spec.base_kind == KIND_SUB:
        return avoid
    return intersect_intervals(avoid, merge_intervals(slab_hits))


def in_target(L: UnimodularLattice, spec: TargetSpec, cap: int = 500_000) -> bool:
    """Exact membership of L in the target set."""
    if spec.thick:
        if (spec.weights.m, spec.weights.n) != (L.dims.m, L.dims.n):
            raise ValidationError("target weights do not match lattice dims")
        return bool(thickened_witness_intervals(L, spec, cap=cap))
    cube = Box.open_cube(math.exp(-spec.r), L.d)
    if has_nonzero_point(L, cube, cap=cap):
        return False
    if spec.kind == KIND_SUB:
        return True
    return has_nonzero_point(L, r_box(spec.r, L.d), cap=cap)


def in_target_grid_oracle(
    L: UnimodularLattice,
    spec: TargetSpec,
    step: float = 1e-4,
    cap: int = 500_000,
) -> bool:
    """Dense s-grid re-derivation of thickened membership (test oracle).

    Checks the base target directly at each grid point via flowed
    coordinates of the same candidate list; no interval arithmetic.
    """
    if not spec.thick:
        return in_target(L, spec, cap=cap)
    w = spec.weights
    window = spec.window
    candidates = enumerate_in_box(
        L, Box.closed_cube(math.exp(window) * (1.0 + 1e-9), L.d), cap=cap
    )
    grid = np.arange(0.0, window, step)
    if candidates.shape[0] == 0:
        return spec.base_kind == KIND_SUB
    exps = np.array(list(w.alpha) + [-b for b in w.beta])
    # flowed[i, k, :] = coordinates of g_{s_k} v_i
    flowed = candidates[:, None, :] * np.exp(exps[None, None, :] * grid[None, :, None])
    cube_bound = math.exp(-spec.r)
    in_cube = np.all(np.abs(flowed) < cube_bound, axis=2)
    ok = ~np.any(in_cube, axis=0)
    if spec.base_kind == KIND_PRIMED:
        d = L.d
        eps = spec.r / (2 * d)
        root = math.sqrt(spec.r)
        in_slab = (np.abs(flowed[:, :, 0] - 1.0) < eps) & np.all(
            np.abs(flowed[:, :, 1:]) < root, axis=2
        )
        ok &= np.any(in_slab, axis=0)
    return bool(np.any(ok))


def flow_then_check(L, s, spec, w: WeightPair, cap=500_000):
    """Membership of g_s L; convenience for orbit code and tests."""
    return in_target(apply_flow(L, s, w), spec, cap=cap)
