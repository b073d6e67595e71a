"""Exact psi-Dirichlet solvability checks and horizon scans.

A pair (p, q) solves the system at time t when

    ||A q - p||_alpha < psi(t)   and   ||q||_beta < t,

so for the componentwise-nearest p the pair covers the open t-interval
( ||q||_beta , psi^{-1}(err) ).  The scan computes the union of these
intervals over every admissible q exactly (no t-grid) and reports the
uncovered complement of (t_start, T].

Only "record" pairs matter: a q whose error is not a strict running
minimum in order of increasing ||q||_beta is subsumed by an earlier one.
Three record-finding backends share the sweep:

  * dense      -- m = n = 1, power-of-two denominator, T moderate: exact
                  integer distances vectorized over all q (uint64 wraparound
                  is exact modulo 2^64, so q*num mod 2^e is branch-free);
  * walk       -- m = n = 1, any horizon: divide-and-conquer over the
                  integer lattice; a reduced-basis box test per probe skips
                  record-free blocks, so the cost is ~records * log T;
  * general    -- any (m, n): enumerate the q-box, vectorized errors.

classic_mode reproduces the original Dirichlet inequality system
(non-strict first inequality, psi(t) = 1/t, unweighted quasi-norms).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .approx import PsiFunction
from .errors import BudgetExceeded, ValidationError
from .exact2d import Exact2D
from .lattice import WeightPair

_DENSE_LIMIT = 2_000_000
_CHUNK = 1 << 22
_MERGE_REL_TOL = 1e-11


@dataclass
class ScanReport:
    t_start: float
    T: float
    uncovered: list = field(default_factory=list)  # maximal uncovered intervals
    records: list = field(default_factory=list)  # (q_norm, err) strict records
    boundary_points: list = field(default_factory=list)  # merge decisions within tol
    classic_mode: bool = False
    n_considered: int = 0

    @property
    def passes(self) -> bool:
        return not self.uncovered


def psi_inverse(psi: PsiFunction, err: float, t_lo: float, t_cap: float) -> float:
    """sup{t in [t_lo, t_cap]: psi(t) > err}; +inf when err < psi(t_cap), t_lo when err >= psi(t_lo)."""
    if err <= 0.0:
        return math.inf
    # domain-bounded families (tabulated) clamp the bisection cap
    t_cap = min(t_cap, getattr(psi, "t_end", math.inf))
    p_lo = float(psi.psi(t_lo))
    if err >= p_lo:
        return t_lo
    if err < float(psi.psi(t_cap)):
        return math.inf
    lo, hi = t_lo, t_cap
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if float(psi.psi(mid)) > err:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * max(1.0, lo):
            break
    return 0.5 * (lo + hi)


def _sweep(intervals, t_start: float, T: float):
    """Uncovered subset of (t_start, T] under a union of open-left intervals."""
    uncovered = []
    boundary = []
    reach = t_start
    for l, r in sorted(intervals):
        if r <= l or l >= T:
            continue
        tol = _MERGE_REL_TOL * max(1.0, abs(reach))
        if l > reach + tol:
            uncovered.append((reach, min(l, T)))
            reach = l
        elif l > reach - tol:
            boundary.append(reach)
        if r > reach:
            reach = r
        if reach >= T:
            break
    if reach < T - _MERGE_REL_TOL * max(1.0, T):
        uncovered.append((reach, T))
    return uncovered, boundary


def _records_dense(num: int, den_exp: int, T: int):
    """Strict error records for m = n = 1, denominator 2^den_exp <= 2^64."""
    den_i = 1 << den_exp
    num %= den_i
    if num == 0:
        return [(1, 0)]
    mask = np.uint64(den_i - 1) if den_exp < 64 else np.uint64(0xFFFFFFFFFFFFFFFF)
    num_u = np.uint64(num)
    den_u = den_i
    records = []
    carry = den_i  # anything beats this
    q = np.arange(1, 1 + _CHUNK, dtype=np.uint64)
    work = np.empty(_CHUNK, dtype=np.uint64)
    q0 = 1
    while q0 <= T:
        n = min(_CHUNK, T - q0 + 1)
        qv = q[:n]
        wv = work[:n]
        np.multiply(qv, num_u, out=wv)
        np.bitwise_and(wv, mask, out=wv)
        lo = int(wv.min())
        hi = int(wv.max())
        if min(lo, den_u - hi) < carry:
            dist = np.minimum(wv, np.uint64(den_u) - wv)
            np.minimum(dist, np.uint64(carry), out=dist)
            cm = np.minimum.accumulate(dist)
            prev = np.concatenate(([np.uint64(carry)], cm[:-1]))
            for i in np.flatnonzero(cm < prev):
                records.append((q0 + int(i), int(cm[i])))
            carry = int(cm[-1])
            if carry == 0:
                break
        np.add(qv, np.uint64(n), out=qv)
        q0 += n
    return records


def _records_walk(ex: Exact2D, T: int):
    """Strict error records via lattice block-skipping; exact for any horizon."""
    records = []
    q0 = 1
    carry = None
    while q0 <= T:
        if carry is None:
            nv = ex.fold(q0)
            records.append((q0, nv))
            carry = nv
            q0 += 1
            if carry == 0:
                break
            continue
        hi = q0
        found = None
        while True:
            if ex.any_point_in_box(carry, hi):
                found = hi
                break
            if hi >= T:
                break
            hi = min(T, hi * 2)
        if found is None:
            break
        lo = q0
        while lo < found:
            mid = (lo + found) // 2
            if ex.any_point_in_box(carry, mid):
                found = mid
            else:
                lo = mid + 1
        nv = ex.fold(found)
        records.append((found, nv))
        carry = nv
        q0 = found + 1
        if carry == 0:
            break
    return records


def _scalar_records(A: float | tuple, T: int):
    """(q, err) strict records for scalar A given as float or (num, den)."""
    if isinstance(A, tuple):
        num, den = int(A[0]), int(A[1])
    else:
        num, den = float(A).as_integer_ratio()
        if num < 0:
            num %= den
    den_exp = den.bit_length() - 1
    pow2 = den == (1 << den_exp)
    if pow2 and den_exp <= 64 and T <= _DENSE_LIMIT:
        int_records = _records_dense(num, den_exp, T)
    else:
        int_records = _records_walk(Exact2D(num, den), T)
    return [(float(q), _ratio(nv, den)) for q, nv in int_records]


def _ratio(n: int, den: int) -> float:
    if n == 0:
        return 0.0
    if n < 2**53 and den < 2**53:
        return n / den
    from .exact2d import log_int

    return math.exp(log_int(n) - log_int(den))


def _int_strictly_below(t: float) -> int:
    """Largest integer q with q < t under the boundary tolerance policy."""
    tol = 1e-12 * max(1.0, abs(t))
    return int(math.ceil(t - tol)) - 1


def _q_box_records(A: np.ndarray, T: float, w: WeightPair, budget: int):
    """Pareto records ((q_norm, err)) over the q-box for general (m, n)."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    m, n = A.shape
    bounds = [max(_int_strictly_below(T ** w.beta[j]), 0) for j in range(n)]
    count = 1
    for b in bounds:
        count *= 2 * b + 1
    if count > budget:
        raise BudgetExceeded(f"q-box has {count} points, budget {budget}")
    grids = np.meshgrid(*[np.arange(-b, b + 1) for b in bounds], indexing="ij")
    Q = np.stack([g.ravel() for g in grids], axis=0).astype(float)  # (n, K)
    # canonical sign: first nonzero coordinate positive; drop q = 0
    nz = np.any(Q != 0, axis=0)
    Q = Q[:, nz]
    lead = np.zeros(Q.shape[1], dtype=bool)
    undecided = np.ones(Q.shape[1], dtype=bool)
    for j in range(n):
        pos = undecided & (Q[j] > 0)
        neg = undecided & (Q[j] < 0)
        lead |= pos
        undecided &= ~(pos | neg)
    Q = Q[:, lead]
    beta = np.array(w.beta)
    qnorm = np.max(np.abs(Q) ** (1.0 / beta[:, None]), axis=0)
    keep = qnorm < T - 1e-12 * max(1.0, T)
    Q = Q[:, keep]
    qnorm = qnorm[keep]
    X = A @ Q
    X -= np.rint(X)
    alpha = np.array(w.alpha)
    err = np.max(np.abs(X) ** (1.0 / alpha[:, None]), axis=0)
    order = np.argsort(qnorm, kind="stable")
    records = []
    best = math.inf
    for idx in order:
        e = float(err[idx])
        if e < best:
            best = e
            records.append((float(qnorm[idx]), e))
    return records, int(Q.shape[1])


def psi_dirichlet_scan(
    A,
    psi: PsiFunction | None,
    T: float,
    w: WeightPair,
    t_start: float | None = None,
    classic_mode: bool = False,
    budget: int = 5_000_000,
) -> ScanReport:
    """Exact interval-cover decision on (t_start, T].

    Every admissible q contributes the open interval
    (||q||_beta, psi^{-1}(||Aq - p||_alpha)); the report lists the maximal
    intervals of (t_start, T] left uncovered (empty list <=> A passes up
    to T).  Exact up to bisection tolerance; no t-grid is involved.
    """
    if classic_mode:
        w = WeightPair.unweighted(w.m, w.n)
        t_start = 1.0 if t_start is None else float(t_start)
    else:
        if psi is None:
            raise ValidationError("psi required unless classic_mode")
        t_start = float(psi.t0) if t_start is None else max(float(t_start), psi.t0)
    if T <= t_start:
        raise ValidationError("T must exceed t_start")

    scalar = w.m == 1 and w.n == 1
    if scalar:
        a_val = A if isinstance(A, tuple) else float(np.asarray(A).reshape(()))
        q_hi = _int_strictly_below(T)
        records = _scalar_records(a_val, q_hi)
        considered = q_hi
    else:
        records, considered = _q_box_records(A, T, w, budget)

    t_cap = 10.0 * T
    intervals = []
    for qn, err in records:
        if classic_mode:
            right = math.inf if err == 0.0 else 1.0 / err
            # non-strict first inequality: t = right itself is solvable
            right = right * (1 + 1e-15) if math.isfinite(right) else right
        else:
            right = psi_inverse(psi, err, t_start, t_cap)
        if right > qn:
            intervals.append((qn, min(right, t_cap)))
    uncovered, boundary = _sweep(intervals, t_start, T)
    return ScanReport(
        t_start=t_start,
        T=float(T),
        uncovered=uncovered,
        records=records,
        boundary_points=boundary,
        classic_mode=classic_mode,
        n_considered=considered,
    )


def dirichlet_solvable(
    A,
    psi: PsiFunction | None,
    t: float,
    w: WeightPair,
    classic_mode: bool = False,
    budget: int = 5_000_000,
) -> bool:
    """Is the system solvable at the single time t?

    For each candidate q the optimal p is the componentwise nearest integer
    to Aq (ties to even); strict inequalities follow the boundary tolerance
    policy.  classic_mode uses psi(t) = 1/t and a non-strict first
    inequality, reproducing the original Dirichlet statement.
    """
    if classic_mode:
        w = WeightPair.unweighted(w.m, w.n)
        bound = 1.0 / t
    else:
        if psi is None:
            raise ValidationError("psi required unless classic_mode")
        if t < psi.t0:
            raise ValidationError(f"t below psi domain start {psi.t0}")
        bound = float(psi.psi(t))
    if t <= 1.0:
        raise ValidationError("t must exceed 1")

    if w.m == 1 and w.n == 1:
        a_val = A if isinstance(A, tuple) else float(np.asarray(A).reshape(()))
        records = _scalar_records(a_val, max(_int_strictly_below(t), 1))
        err = min(e for _, e in records)
        if classic_mode:
            return err <= bound * (1 + 1e-12)
        return err < bound - 1e-12 * max(1.0, bound)

    records, _ = _q_box_records(A, t, w, budget)
    if not records:
        return False
    err = min(e for _, e in records)
    if classic_mode:
        return err <= bound * (1 + 1e-12)
    return err < bound - 1e-12 * max(1.0, bound)
