"""Exact, exhaustive checks of the combinatorial statements about Bell-type sums.

Everything here is integer or rational arithmetic; nothing is estimated.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np

from .core import SIDES, EventLog

INDEPENDENT_CAP = 8
COUNTERFACTUAL_CAP = {False: 6, True: 4}


class CapExceeded(ValueError):
    """An exhaustive enumeration was requested beyond its size cap."""


@dataclass(frozen=True)
class BoundReport:
    max_value: int
    min_value: int
    attaining_assignments: tuple[tuple[int, ...], ...]
    minimizing_assignments: tuple[tuple[int, ...], ...]
    variables: tuple[str, ...]
    evaluated: int


def _bound(variables, fn) -> BoundReport:
    values = {x: fn(*x) for x in itertools.product((-1, 1), repeat=len(variables))}
    hi, lo = max(values.values()), min(values.values())
    return BoundReport(
        max_value=hi,
        min_value=lo,
        attaining_assignments=tuple(x for x, v in values.items() if v == hi),
        minimizing_assignments=tuple(x for x, v in values.items() if v == lo),
        variables=tuple(variables),
        evaluated=len(values),
    )


def bell_combination(a: int, b: int, c: int) -> int:
    return a * b + a * c - b * c


def eq3_combination(a_n: int, b_n: int, a_k: int, c_k: int, b_m: int, c_m: int) -> int:
    return a_n * b_n + a_k * c_k - b_m * c_m


def enumerate_bell_bound() -> BoundReport:
    """Extrema of A_a A_b + A_a A_c - A_b A_c over {-1,+1}^3."""
    return _bound(("A_a", "A_b", "A_c"), bell_combination)


def enumerate_eq3_bound() -> BoundReport:
    """Extrema of the same combination when every factor is its own variable."""
    names = ("A_a(t_n)", "A_b(t'_n)", "A_a(t_k)", "A_c(t'_k)", "A_b(t_m)", "A_c(t'_m)")
    return _bound(names, eq3_combination)


@dataclass(frozen=True)
class CountReport:
    exact_count: int
    formula_value: int | None
    model: str
    reachable: frozenset | None = None
    independent_count: int | None = None
    strict_subset: bool | None = None
    bounds_satisfied: bool | None = None


def _sums_from_masks(masks: np.ndarray, segments: list[tuple[int, int]]) -> np.ndarray:
    """Column j: sum of +-1 values encoded by bits [lo, lo+n) of each mask (bit set = -1)."""
    cols = []
    for lo, n in segments:
        seg = (masks >> np.uint64(lo)) & np.uint64((1 << n) - 1)
        cols.append(n - 2 * np.bitwise_count(seg).astype(np.int64))
    return np.stack(cols, axis=1) if cols else np.zeros((len(masks), 0), dtype=np.int64)


def _distinct_rows(rows: np.ndarray) -> frozenset:
    return frozenset(map(tuple, np.unique(rows, axis=0).tolist()))


def count_reachable_independent(N_ab: int, N_ac: int, N_bc: int, exhaustive: bool = True) -> CountReport:
    """Distinct (S_ab, S_ac, S_bc) when every trial's pair product is a free +-1.

    With ``exhaustive`` all 2^(N_ab+N_ac+N_bc) product assignments are
    enumerated (each N capped at 8); otherwise only the product formula
    is returned.
    """
    counts = (N_ab, N_ac, N_bc)
    if any(int(n) != n or n < 0 for n in counts):
        raise ValueError(f"pair counts must be non-negative integers, got {counts}")
    formula = (N_ab + 1) * (N_ac + 1) * (N_bc + 1)
    if not exhaustive:
        return CountReport(formula, formula, "independent_pairs")
    if max(counts) > INDEPENDENT_CAP:
        raise CapExceeded(f"exhaustive count needs every pair count <= {INDEPENDENT_CAP}, got {counts}")
    total = sum(counts)
    masks = np.arange(1 << total, dtype=np.uint64)
    segments, lo = [], 0
    for n in counts:
        segments.append((lo, n))
        lo += n
    reachable = _distinct_rows(_sums_from_masks(masks, segments))
    return CountReport(len(reachable), formula, "independent_pairs", reachable=reachable)


# pairs as (left variable, right variable) indices into the per-trial assignment
_CF_PAIRS = {
    False: ((0, 1), (0, 2), (1, 2)),          # (a,b), (a,c), (b,c)
    True: ((0, 1), (0, 3), (2, 1), (2, 3)),   # (a,b), (a,d), (c,b), (c,d)
}


def cyclic_sign_patterns(k: int) -> list[tuple[int, ...]]:
    """Sign vectors of length k with an odd number of minus signs."""
    return [s for s in itertools.product((1, -1), repeat=k) if s.count(-1) % 2 == 1]


def sum_bounds_hold(sums: tuple[int, ...], M: int) -> bool:
    """Sum-level Bell/CHSH bounds for per-trial counterfactual assignments.

    Three settings: s . S <= M for every sign vector with an odd number of
    minus signs (S_ab + S_ac - S_bc <= M among them).  Four settings:
    |s . S| <= 2M for the same sign vectors.
    """
    k = len(sums)
    for s in cyclic_sign_patterns(k):
        v = sum(si * x for si, x in zip(s, sums))
        if k == 3 and v > M:
            return False
        if k == 4 and abs(v) > 2 * M:
            return False
    return True


def count_reachable_counterfactual(M: int, four_setting: bool = False) -> CountReport:
    """Distinct pair-sum vectors when each trial fixes ONE value for every setting variable.

    All pair products of a trial contribute to their sums, so each sum runs
    over all M trials.  The reachable set is compared with the independent
    model at matched pair counts (every sum over M free products).
    """
    if int(M) != M or M < 0:
        raise ValueError(f"M must be a non-negative integer, got {M}")
    cap = COUNTERFACTUAL_CAP[four_setting]
    if M > cap:
        kind = "four" if four_setting else "three"
        raise CapExceeded(f"{kind}-setting counterfactual enumeration needs M <= {cap}, got {M}")
    k = 4 if four_setting else 3
    pairs = _CF_PAIRS[four_setting]
    masks = np.arange(1 << (k * M), dtype=np.uint64)
    sums = np.zeros((len(masks), len(pairs)), dtype=np.int64)
    for n in range(M):
        values = [1 - 2 * ((masks >> np.uint64(n * k + v)) & np.uint64(1)).astype(np.int64) for v in range(k)]
        for j, (x, y) in enumerate(pairs):
            sums[:, j] += values[x] * values[y]
    reachable = _distinct_rows(sums)
    independent = (M + 1) ** len(pairs)
    inside = all(all(abs(s) <= M and (s - M) % 2 == 0 for s in row) for row in reachable)
    return CountReport(
        exact_count=len(reachable),
        formula_value=None,
        model="counterfactual_" + ("quadruples" if four_setting else "triples"),
        reachable=reachable,
        independent_count=independent,
        strict_subset=inside and len(reachable) < independent,
        bounds_satisfied=all(sum_bounds_hold(row, M) for row in reachable),
    )


# -- joint feasibility --------------------------------------------------------

ATOMS = tuple(itertools.product((-1, 1), repeat=3))  # (x_a, x_b, x_c)


def exact(x) -> Fraction:
    if isinstance(x, Rational):
        return Fraction(x)
    # decimal reading: 0.1 means 1/10, not the nearest binary double
    return Fraction(repr(float(x)))


def boole_conditions(E_ab, E_ac, E_bc) -> tuple[Fraction, ...]:
    """1 + s_ab E_ab + s_ac E_ac + s_bc E_bc for the four even-minus sign vectors."""
    ab, ac, bc = exact(E_ab), exact(E_ac), exact(E_bc)
    return (1 + ab + ac + bc, 1 + ab - ac - bc, 1 - ab + ac - bc, 1 - ab - ac + bc)


def closed_form_feasible(E_ab, E_ac, E_bc) -> bool:
    return all(v >= 0 for v in boole_conditions(E_ab, E_ac, E_bc))


def _det(M: list[list[int]]) -> int:
    """Integer determinant by fraction-free (Bareiss) elimination."""
    M = [row[:] for row in M]
    n, sign, prev = len(M), 1, 1
    for k in range(n - 1):
        if M[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if M[r][k] != 0), None)
            if swap is None:
                return 0
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def _solve(A: list[list[int]], b: list[Fraction]) -> list[Fraction] | None:
    """Exact solve of a square integer system by Cramer's rule; None when singular."""
    d = _det(A)
    if d == 0:
        return None
    scale = math.lcm(*(v.denominator for v in b))
    rhs = [int(v * scale) for v in b]
    out = []
    for i in range(len(A)):
        Ai = [row[:i] + [r] + row[i + 1:] for row, r in zip(A, rhs)]
        out.append(Fraction(_det(Ai), d * scale))
    return out


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    witness: dict[tuple[int, int, int], Fraction] | None
    closed_form: bool
    conditions: tuple[Fraction, ...]


def witness_matches(witness, E_ab, E_ac, E_bc) -> bool:
    """Exact check that ``witness`` is a distribution with the given pair expectations."""
    target = (exact(E_ab), exact(E_ac), exact(E_bc))
    if any(w < 0 for w in witness.values()) or sum(witness.values()) != 1:
        return False
    got = (
        sum(w * x[0] * x[1] for x, w in witness.items()),
        sum(w * x[0] * x[2] for x, w in witness.items()),
        sum(w * x[1] * x[2] for x, w in witness.items()),
    )
    return got == target


def boole_feasibility(E_ab, E_ac, E_bc) -> FeasibilityResult:
    """Is there a distribution on {-1,+1}^3 with these pairwise product expectations?

    Searches the basic solutions of the linear system over the 8 atom
    weights in exact rational arithmetic; a nonnegative one is returned as
    the witness.  The closed-form conditions are reported alongside for
    cross-checking.
    """
    e = [exact(v) for v in (E_ab, E_ac, E_bc)]
    if any(not -1 <= v <= 1 for v in e):
        raise ValueError(f"correlations must lie in [-1, 1], got {(E_ab, E_ac, E_bc)}")
    conditions = boole_conditions(*e)
    rhs = [Fraction(1)] + e
    columns: dict[tuple, list] = {}
    for atom in ATOMS:
        xa, xb, xc = atom
        columns.setdefault((1, xa * xb, xa * xc, xb * xc), []).append(atom)
    distinct = list(columns)
    witness = None
    for basis in itertools.combinations(distinct, len(rhs)):
        A = [[col[i] for col in basis] for i in range(len(rhs))]
        sol = _solve(A, rhs)
        if sol is not None and all(v >= 0 for v in sol):
            witness = {atom: Fraction(0) for atom in ATOMS}
            for col, w in zip(basis, sol):
                witness[columns[col][0]] = w
            break
    return FeasibilityResult(
        feasible=witness is not None,
        witness=witness,
        closed_form=all(c >= 0 for c in conditions),
        conditions=conditions,
    )


# -- product probability space -------------------------------------------------

def product_space_impossible_mass(log: EventLog) -> dict[str, Fraction]:
    """Per station: product-measure mass P(j) P(t) on (setting, tick) pairs never realized.

    Settings and ticks get their empirical marginals; the product measure
    of the two is compared with the realized (setting, tick) combinations.
    """
    if log.M < 1:
        raise ValueError("need at least one trial")
    M = log.M
    out = {}
    for side in SIDES:
        settings = getattr(log, f"setting_{side}").tolist()
        ticks = getattr(log, f"t_{side}").tolist()
        p_setting = {j: Fraction(c, M) for j, c in Counter(settings).items()}
        p_tick = {t: Fraction(c, M) for t, c in Counter(ticks).items()}
        realized = set(zip(settings, ticks))
        mass = sum((p_setting[j] * p_tick[t] for j, t in realized), Fraction(0))
        out[side] = 1 - mass
    return out
