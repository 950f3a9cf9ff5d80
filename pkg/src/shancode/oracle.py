"""Ground-truth average redundancy of the Shannon code at finite block length.

The average redundancy at block length n is

    R_n = E{ceil(-log2 mu(X^n)) + log2 mu(X^n)} = E{rho(-log2 mu(X^n))}

with rho(u) = ceil(u) - u and mu the path probability.  Because -log2 mu
depends on a path only through its first state and its transition counts,
the expectation can be evaluated either by enumerating all paths or by a
dynamic program over transition-count classes; both are implemented here,
together with a seeded Monte Carlo estimator and Shannon code-length
utilities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ResourceLimit, ZeroPathProbability
from .exact import ZERO, Log2Value
from .sources import MarkovSource, log2_prob

INTEGER_SNAP_TOL = 1e-9


@dataclass(frozen=True)
class Limits:
    """Resource guard for the exact strategies; thresholds live in config."""

    enumeration_max_paths: int = 2**24
    count_dp_max_n: dict = field(default_factory=lambda: {2: 200, 3: 40})


DEFAULT_LIMITS = Limits()


@dataclass(frozen=True)
class RedundancyValue:
    n: int
    value: float
    method: str
    stderr: float | None = None
    flags: frozenset = frozenset()


@dataclass(frozen=True)
class TransitionCounts:
    """One equivalence class of paths sharing first/last state and edge counts."""

    first_state: int
    last_state: int
    counts: tuple
    multiplicity: int


def ceil_defect_float(u: float, snap_tol: float | None = None) -> tuple[float, bool]:
    """rho(u) = ceil(u) - u, optionally snapping near-integer u to 0.

    Float noise must not flip the ceiling at a value that is an integer in
    exact arithmetic, so float pipelines snap within snap_tol and report it.
    """
    if snap_tol is not None:
        nearest = round(u)
        if abs(u - nearest) <= snap_tol:
            return 0.0, abs(u - nearest) > 0.0
    return math.ceil(u) - u, False


def _ceil_defect_exact(neg_log: Log2Value) -> tuple[float, bool]:
    """rho of an exactly represented -log2 mu; exact zero at integers."""
    if neg_log.is_rational:
        q = neg_log.frac_exact()
        return float((1 - q) % 1), False
    return ceil_defect_float(neg_log.to_float(), None)


def neg_log_mu(source: MarkovSource, x) -> float:
    """-log2 of the path probability mu(x) = p_{x_1} prod p(x_t | x_{t-1})."""
    x = list(x)
    if not x:
        raise ValueError("path must be nonempty")
    if source.initial[x[0]] is ZERO:
        raise ZeroPathProbability(0, f"initial state {x[0]} has zero probability")
    total = log2_prob(source, source.initial[x[0]])
    for t in range(1, len(x)):
        step = source.transitions[x[t - 1]][x[t]]
        if step is ZERO:
            raise ZeroPathProbability(t, f"transition {x[t-1]}->{x[t]} at step {t} has zero probability")
        total = total + log2_prob(source, step)
    return -(total.to_float() if isinstance(total, Log2Value) else total)


# -- path enumeration ----------------------------------------------------


def _check_enumeration(source: MarkovSource, n: int, limits: Limits) -> None:
    if source.r**n > limits.enumeration_max_paths:
        raise ResourceLimit(
            f"enumeration needs {source.r}^{n} paths, cap is {limits.enumeration_max_paths}"
        )


def _iter_support(source: MarkovSource, n: int):
    """Yield (path, neg_log) over all positive-probability paths of length n.

    neg_log is a Log2Value for exact sources and a float otherwise.
    """
    adj = source.support()

    def extend(path, acc):
        if len(path) == n:
            yield tuple(path), -acc
            return
        for j in adj[path[-1]]:
            step = log2_prob(source, source.transitions[path[-1]][j])
            path.append(j)
            yield from extend(path, acc + step)
            path.pop()

    for s0 in range(source.r):
        if source.initial[s0] is ZERO:
            continue
        start = log2_prob(source, source.initial[s0])
        if n == 1:
            yield (s0,), -start
        else:
            yield from extend([s0], start)


def _redundancy_by_enumeration(source: MarkovSource, n: int, limits: Limits, snap_tol: float):
    _check_enumeration(source, n, limits)
    terms = []
    snapped = False
    for _, neg_log in _iter_support(source, n):
        if source.exact:
            rho, snap = _ceil_defect_exact(neg_log)
            weight = 2.0 ** (-neg_log.to_float())
        else:
            rho, snap = ceil_defect_float(neg_log, snap_tol)
            weight = 2.0**-neg_log
        snapped |= snap
        terms.append(weight * rho)
    return math.fsum(terms), snapped


# -- transition-count dynamic program -------------------------------------


def _count_classes_packed(source: MarkovSource, n: int, first: int):
    """DP over packed (current state, count matrix) keys for one first state.

    Count matrices are encoded in base n as a single integer alongside the
    current state, so each transition is one integer add; the packing is
    exact because every count is at most n - 1.
    """
    r = source.r
    adj = source.support()
    base = max(n, 2)
    powers = [base**i for i in range(r * r)]
    # key = packed_counts * r + current; delta moves cur -> j and bumps the count
    deltas = [[powers[k * r + j] * r + j - k for j in range(r)] for k in range(r)]
    states = {first: 1}
    for _ in range(n - 1):
        nxt: dict[int, int] = {}
        get = nxt.get
        for key, mult in states.items():
            cur = key % r
            for j in adj[cur]:
                nkey = key + deltas[cur][j]
                nxt[nkey] = get(nkey, 0) + mult
        states = nxt
    for key, mult in states.items():
        packed, last = divmod(key, r)
        counts = []
        for _ in range(r * r):
            packed, digit = divmod(packed, base)
            counts.append(digit)
        yield last, tuple(counts), mult


def transition_count_classes(source: MarkovSource, n: int) -> list[TransitionCounts]:
    """Group the length-n positive-probability paths by (first, last, counts)."""
    out = []
    for first in range(source.r):
        if source.initial[first] is ZERO:
            continue
        for last, counts, mult in _count_classes_packed(source, n, first):
            out.append(TransitionCounts(first, last, counts, mult))
    out.sort(key=lambda c: (c.first_state, c.last_state, c.counts))
    return out


def _class_neg_log(source: MarkovSource, cls: TransitionCounts):
    r = source.r
    if source.exact:
        total = log2_prob(source, source.initial[cls.first_state])
        for k in range(r):
            for j in range(r):
                c = cls.counts[k * r + j]
                if c:
                    total = total + log2_prob(source, source.transitions[k][j]).scaled(c)
        return -total
    total = math.log2(source.prob_float(source.initial[cls.first_state]))
    for k in range(r):
        for j in range(r):
            c = cls.counts[k * r + j]
            if c:
                total += c * math.log2(source.prob_float(source.transitions[k][j]))
    return -total


def _redundancy_by_count_dp(source: MarkovSource, n: int, snap_tol: float):
    r = source.r
    terms = []
    snapped = False
    if source.exact:
        # per-edge exact log pieces: rational exponents on one common
        # denominator (so the per-class sum is integer arithmetic) plus the
        # odd mantissas, tracked only where they are nontrivial
        logs = {}
        for k in range(r):
            for j in range(r):
                v = source.transitions[k][j]
                if v is not ZERO:
                    logs[k * r + j] = v.log2()
        for first in range(r):
            if source.initial[first] is ZERO:
                continue
            init_log = log2_prob(source, source.initial[first])
            denom = init_log.rational.denominator
            for lv in logs.values():
                denom = denom * lv.rational.denominator // math.gcd(denom, lv.rational.denominator)
            init_scaled = init_log.rational.numerator * (denom // init_log.rational.denominator)
            rat_scaled = {idx: lv.rational.numerator * (denom // lv.rational.denominator) for idx, lv in logs.items()}
            mant = {idx: lv.mantissa for idx, lv in logs.items() if lv.mantissa != 1}
            init_num = init_log.mantissa.numerator
            init_den = init_log.mantissa.denominator
            for _, counts, mult in _count_classes_packed(source, n, first):
                scaled = init_scaled + sum(rat_scaled[idx] * c for idx, c in enumerate(counts) if c)
                num, den = init_num, init_den
                for idx, m in mant.items():
                    c = counts[idx]
                    if c:
                        num *= m.numerator**c
                        den *= m.denominator**c
                if num == den:
                    # purely rational -log2 mu = -scaled / denom; exact rho
                    fr = (-scaled) % denom
                    rho = 0.0 if fr == 0 else 1.0 - fr / denom
                    neg_float = -scaled / denom
                else:
                    neg_float = -scaled / denom - (math.log2(num) - math.log2(den))
                    rho, snap = ceil_defect_float(neg_float, None)
                if rho:
                    log_weight = math.log2(mult) - neg_float
                    if log_weight > -1074:
                        terms.append(2.0**log_weight * rho)
    else:
        table = [
            -math.log2(source.prob_float(source.transitions[k][j])) if source.transitions[k][j] is not ZERO else 0.0
            for k in range(r)
            for j in range(r)
        ]
        for first in range(r):
            if source.initial[first] is ZERO:
                continue
            init_neg = -math.log2(source.prob_float(source.initial[first]))
            for _, counts, mult in _count_classes_packed(source, n, first):
                neg_log = init_neg + math.fsum(c * table[idx] for idx, c in enumerate(counts) if c)
                rho, snap = ceil_defect_float(neg_log, snap_tol)
                snapped |= snap
                if rho:
                    log_weight = math.log2(mult) - neg_log
                    if log_weight > -1074:
                        terms.append(2.0**log_weight * rho)
    return math.fsum(terms), snapped


def _pick_strategy(source: MarkovSource, n: int, strategy: str, limits: Limits) -> str:
    if strategy in ("enumeration", "count_dp"):
        if strategy == "count_dp" and n > limits.count_dp_max_n.get(source.r, 0):
            raise ResourceLimit(f"count_dp capped at n={limits.count_dp_max_n.get(source.r, 0)} for r={source.r}")
        if strategy == "enumeration":
            _check_enumeration(source, n, limits)
        return strategy
    if strategy != "auto":
        raise ValueError(f"unknown strategy {strategy!r}")
    if n <= limits.count_dp_max_n.get(source.r, 0):
        return "count_dp"
    if source.r**n <= limits.enumeration_max_paths:
        return "enumeration"
    raise ResourceLimit(f"no exact strategy within limits for r={source.r}, n={n}")


def exact_redundancy(
    source: MarkovSource,
    n: int,
    strategy: str = "auto",
    limits: Limits = DEFAULT_LIMITS,
    snap_tol: float = INTEGER_SNAP_TOL,
) -> RedundancyValue:
    """Exact R_n = sum over positive-probability paths of mu * rho(-log2 mu).

    The count_dp strategy sums over transition-count classes weighted by
    their path multiplicities and must agree with plain enumeration to
    1e-12 wherever both run.
    """
    if n < 1:
        raise ValueError("block length must be >= 1")
    chosen = _pick_strategy(source, n, strategy, limits)
    if chosen == "count_dp":
        value, snapped = _redundancy_by_count_dp(source, n, snap_tol)
    else:
        value, snapped = _redundancy_by_enumeration(source, n, limits, snap_tol)
    if -1e-12 < value < 0.0:
        value = 0.0
    flags = frozenset({"snap"}) if snapped else frozenset()
    return RedundancyValue(n=n, value=value, method=chosen, stderr=None, flags=flags)


# -- Monte Carlo ----------------------------------------------------------


def monte_carlo_redundancy(
    source: MarkovSource,
    n: int,
    samples: int,
    seed: int,
    snap_tol: float = INTEGER_SNAP_TOL,
) -> RedundancyValue:
    """Sample mean of rho(-log2 mu) over independently sampled paths.

    Uses a counter-based Philox stream keyed by the seed; sample i consumes
    the i-th row of the uniform draw matrix, so results are bit-for-bit
    reproducible and independent of any internal partitioning.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if n < 1:
        raise ValueError("block length must be >= 1")
    rng = np.random.Generator(np.random.Philox(key=seed))
    u = rng.random((samples, n))

    init = source.initial_array()
    trans = source.transition_array()
    neg_log_init = np.array(
        [-math.inf if p == 0 else 0.0 for p in init]
    )
    for s0 in range(source.r):
        if init[s0] > 0:
            neg_log_init[s0] = -(log2_prob(source, source.initial[s0]).to_float()
                                 if source.exact else math.log2(init[s0]))
    step_table = source.neg_log2_table()

    init_cum = np.cumsum(init)
    init_cum[-1] = 1.0
    row_cum = np.cumsum(trans, axis=1)
    row_cum[:, -1] = 1.0

    state = np.searchsorted(init_cum, u[:, 0], side="right")
    neg_log = neg_log_init[state].copy()
    for t in range(1, n):
        nxt = np.empty_like(state)
        for k in range(source.r):
            mask = state == k
            if mask.any():
                nxt[mask] = np.searchsorted(row_cum[k], u[mask, t], side="right")
        neg_log += step_table[state, nxt]
        state = nxt

    values = np.ceil(neg_log) - neg_log
    near = np.abs(neg_log - np.round(neg_log)) <= snap_tol
    snapped = bool(np.any(near & (values != 0.0)))
    values[near] = 0.0

    mean = float(values.mean())
    stderr = float(values.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    flags = frozenset({"snap"}) if snapped else frozenset()
    return RedundancyValue(n=n, value=mean, method="monte_carlo", stderr=stderr, flags=flags)


# -- Shannon code lengths --------------------------------------------------


def shannon_lengths(source: MarkovSource, n: int, limits: Limits = DEFAULT_LIMITS):
    """Code lengths ceil(-log2 mu(x)) over the positive-probability support.

    Returns a list of (path, length); the Kraft sum over these lengths never
    exceeds 1.
    """
    _check_enumeration(source, n, limits)
    out = []
    for path, neg_log in _iter_support(source, n):
        if source.exact and neg_log.is_rational:
            q = neg_log.rational
            length = -(-q.numerator // q.denominator)  # exact ceiling
        else:
            v = neg_log.to_float() if source.exact else neg_log
            nearest = round(v)
            length = nearest if abs(v - nearest) <= INTEGER_SNAP_TOL else math.ceil(v)
        out.append((path, int(length)))
    return out


def kraft_sum(lengths) -> Fraction:
    """Exact Kraft sum of a list of (path, length) entries."""
    return sum((Fraction(1, 2**length) for _, length in lengths), Fraction(0))
