"""Run gamblers over sequence prefixes and measure what they earn.

A run advances the leading head one symbol per step.  The bet placed at
step ``m`` is the bet distribution of the betting state reached *before*
symbol ``m`` is revealed, so a bet can never depend on the symbol it is
placed on; trailing heads sit at or behind the leading head and their
reads feed the *next* state, not the current bet.  Capital follows the
fair rule ``capital *= k * bet(realized symbol)``.

Besides the simulator this module provides the scale-``s`` reweighting
of capital, sliding-window growth-exponent estimates (finite-horizon
proxies for limsup/liminf behaviour), an exact brute-force check of the
fair-betting identity over all short strings, and exact positional-cycle
analysis (head speeds and the position-deviation bound).

A single run is inherently serial; distinct runs over shared immutable
sources may execute concurrently, and a trace belongs to its producing
run until complete.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence, TextIO

import numpy as np

from .core import (
    BANKRUPT_LOG2,
    Capital,
    GamblerSpec,
    ProbVector,
    log2_fraction,
)
from .sequences import SequenceSource

__all__ = [
    "TraceStep",
    "RunTrace",
    "SpeedProfile",
    "ExponentEstimate",
    "positions",
    "run_martingale",
    "run_log2_capitals",
    "window_exponents",
    "success_exponent",
    "sgale_value",
    "sgale_log2",
    "check_martingale_property",
    "measure_speeds",
    "check_speed_bounds",
    "write_trajectory_csv",
    "TRACE_CAP",
]

# full per-step traces up to this many steps; beyond it, capital is
# recorded on a subsampled grid (memory guard)
TRACE_CAP = 1_000_000


class TraceStep(NamedTuple):
    n: int
    leading_pos: int
    trailing_positions: tuple[int, ...]
    betting_state: str
    bet: ProbVector
    realized_symbol: int
    capital: Capital


@dataclass
class RunTrace:
    """Per-step record of a run.

    ``steps[i].capital`` is the capital *after* the bet at that step, so
    the final entry is the martingale value of the whole prefix.  When
    the run is longer than ``TRACE_CAP`` only every ``recorded_every``-th
    step (plus the last) is kept.
    """

    gambler: str
    source: str
    k: int
    mode: str
    n: int
    steps: list[TraceStep]
    final_capital: Capital
    recorded_every: int = 1

    def log2_capitals(self) -> np.ndarray:
        return np.array([s.capital.log2() for s in self.steps], dtype=np.float64)

    def prefix_lengths(self) -> np.ndarray:
        return np.array([s.n + 1 for s in self.steps], dtype=np.float64)

    def all_in_win_count(self) -> int:
        """Number of steps whose full-capital bet was on the realized symbol."""
        return sum(1 for s in self.steps if s.bet[s.realized_symbol] == 1)


@dataclass(frozen=True)
class SpeedProfile:
    """Exact trailing-head speeds from the positional cycle.

    ``speeds[i] * cycle_length`` is the integer number of advances head
    ``i`` makes per cycle; positions stay within the number of positional
    states of ``speed * n``.
    """

    speeds: tuple[Fraction, ...]
    cycle_length: int
    preperiod_length: int


class ExponentEstimate(NamedTuple):
    limsup_est: float
    liminf_est: float


# ---------------------------------------------------------------------------
# compilation helpers
# ---------------------------------------------------------------------------

def _positional_orbit(spec: GamblerSpec):
    """Movement bits along the positional orbit from the initial state."""
    order: list[str] = []
    seen: dict[str, int] = {}
    t = spec.initial_t
    while t not in seen:
        seen[t] = len(order)
        order.append(t)
        t = spec.positional[t].next_id
    start = seen[t]
    mu = [spec.positional[s].move_bits for s in order]
    return mu[:start], mu[start:]


def _compile_betting(spec: GamblerSpec):
    k = spec.k
    q_ids = list(spec.betting)
    q_index = {qid: i for i, qid in enumerate(q_ids)}
    trans = [[q_index[t] for t in spec.betting[qid].transitions] for qid in q_ids]
    bet_rows = [spec.betting[qid].bets for qid in q_ids]
    log_rows = []
    for row in bet_rows:
        log_rows.append([
            BANKRUPT_LOG2 if w == 0 else log2_fraction(Fraction(k) * w)
            for w in row.weights
        ])
    return q_ids, q_index, trans, bet_rows, log_rows


def _mu_at(mu_pre, mu_cyc, m: int):
    if m < len(mu_pre):
        return mu_pre[m]
    return mu_cyc[(m - len(mu_pre)) % len(mu_cyc)]


# ---------------------------------------------------------------------------
# positions and runs
# ---------------------------------------------------------------------------

def positions(spec: GamblerSpec, n: int) -> tuple[int, ...]:
    """Trailing-head position vector after ``n`` steps.

    Computed from the recursion: start at the origin and add the movement
    bits of the positional state visited at each step.  Uses the orbit
    decomposition, so large ``n`` costs only the preperiod plus one cycle.
    """
    h = spec.head_count
    if h == 1:
        return ()
    mu_pre, mu_cyc = _positional_orbit(spec)
    pos = [0] * (h - 1)
    pre = min(n, len(mu_pre))
    for m in range(pre):
        for i, b in enumerate(mu_pre[m]):
            pos[i] += b
    rest = n - pre
    if rest > 0:
        full, partial = divmod(rest, len(mu_cyc))
        for i in range(h - 1):
            pos[i] += full * sum(bits[i] for bits in mu_cyc)
        for m in range(partial):
            for i, b in enumerate(mu_cyc[m]):
                pos[i] += b
    return tuple(pos)


def run_martingale(
    spec: GamblerSpec,
    source: SequenceSource,
    n: int,
    mode: str = Capital.LOG2,
) -> RunTrace:
    """Simulate ``n`` steps and return the full trace.

    The final capital is the martingale value of the scanned prefix.  In
    exact mode every capital is an exact rational (bit counts grow with
    ``n``; intended for horizons up to about 10^4).  Log2 mode stores
    base-2 logs and is the default for long runs; bankruptcy is the
    absorbing ``-inf``.
    """
    if mode not in (Capital.EXACT, Capital.LOG2):
        raise ValueError(f"unknown capital mode {mode!r}")
    k = spec.k
    if source.alphabet_size != k:
        raise ValueError(
            f"source alphabet size {source.alphabet_size} != gambler's {k}")
    h = spec.head_count
    buf = source.prefix_array(n)
    mu_pre, mu_cyc = _positional_orbit(spec)
    q_ids, q_index, trans, bet_rows, log_rows = _compile_betting(spec)

    record_every = 1 if n <= TRACE_CAP else -(-n // TRACE_CAP)
    steps: list[TraceStep] = []
    pos = [0] * (h - 1)
    q = q_index[spec.initial_q]
    exact = mode == Capital.EXACT
    cap_f = spec.initial_capital
    cap_l = log2_fraction(spec.initial_capital)

    for m in range(n):
        sym = int(buf[m])
        row = bet_rows[q]
        if exact:
            cap_f = cap_f * k * row.weights[sym]
        else:
            cap_l = cap_l + log_rows[q][sym]
        if m % record_every == 0 or m == n - 1:
            cap = Capital(Capital.EXACT, cap_f) if exact \
                else Capital(Capital.LOG2, cap_l)
            steps.append(TraceStep(m, m, tuple(pos), q_ids[q], row, sym, cap))
        code = 0
        for i in range(h - 1):
            code = code * k + int(buf[pos[i]])
        code = code * k + sym
        q = trans[q][code]
        bits = _mu_at(mu_pre, mu_cyc, m)
        for i in range(h - 1):
            pos[i] += bits[i]

    final = Capital(Capital.EXACT, cap_f) if exact else Capital(Capital.LOG2, cap_l)
    if n == 0:
        steps = []
    return RunTrace(
        gambler=spec.label(),
        source=source.describe(),
        k=k,
        mode=mode,
        n=n,
        steps=steps,
        final_capital=final,
        recorded_every=record_every,
    )


def run_log2_capitals(spec: GamblerSpec, source: SequenceSource, n: int) -> np.ndarray:
    """Per-step log2 capitals without building a trace (batch runs).

    Agrees step for step with ``run_martingale(..., mode="log2")``; once
    bankrupt the remainder is filled with ``-inf`` and the loop exits.
    """
    k = spec.k
    if source.alphabet_size != k:
        raise ValueError(
            f"source alphabet size {source.alphabet_size} != gambler's {k}")
    h = spec.head_count
    buf = source.prefix_array(n)
    mu_pre, mu_cyc = _positional_orbit(spec)
    _, q_index, trans, _, log_rows = _compile_betting(spec)

    out = np.empty(n, dtype=np.float64)
    q = q_index[spec.initial_q]
    cap = log2_fraction(spec.initial_capital)
    pre_len, cyc_len = len(mu_pre), len(mu_cyc)

    if h == 1:
        for m in range(n):
            sym = buf[m]
            cap += log_rows[q][sym]
            out[m] = cap
            if cap == BANKRUPT_LOG2:
                out[m:] = BANKRUPT_LOG2
                break
            q = trans[q][sym]
        return out

    pos = [0] * (h - 1)
    for m in range(n):
        sym = int(buf[m])
        cap += log_rows[q][sym]
        out[m] = cap
        if cap == BANKRUPT_LOG2:
            out[m:] = BANKRUPT_LOG2
            break
        code = 0
        for i in range(h - 1):
            code = code * k + int(buf[pos[i]])
        q = trans[q][code * k + sym]
        bits = mu_pre[m] if m < pre_len else mu_cyc[(m - pre_len) % cyc_len]
        for i in range(h - 1):
            pos[i] += bits[i]
    return out


# ---------------------------------------------------------------------------
# exponents and gales
# ---------------------------------------------------------------------------

def window_exponents(
    log2_caps: np.ndarray,
    k: int,
    prefix_lengths: np.ndarray | None = None,
    window_frac: float = 0.1,
) -> ExponentEstimate:
    """Max/min of ``log_k(capital)/n`` over the trailing window.

    The window is the final ``window_frac`` of the trace, which discards
    start-up transients; the max estimates the limsup and the min the
    liminf of the growth exponent.  A window that is entirely bankrupt
    yields the ``-inf`` sentinel in both slots.
    """
    m = log2_caps.shape[0]
    if m == 0:
        raise ValueError("empty trace")
    if prefix_lengths is None:
        prefix_lengths = np.arange(1, m + 1, dtype=np.float64)
    start = m - max(1, int(m * window_frac))
    denom = prefix_lengths[start:] * math.log2(k)
    with np.errstate(invalid="ignore"):
        ratios = log2_caps[start:] / denom
    return ExponentEstimate(float(np.max(ratios)), float(np.min(ratios)))


def success_exponent(trace: RunTrace, k: int) -> ExponentEstimate:
    """Sliding-window growth-exponent estimates for a trace.

    ``1 - limsup_est`` is the empirical upper bound on the dimension-like
    quantity this trace supports.  Requires at least 100 recorded steps;
    bankrupt capital shows up as the ``-inf`` sentinel.
    """
    if len(trace.steps) < 100:
        raise ValueError("trace too short for exponent estimation (need >= 100)")
    return window_exponents(trace.log2_capitals(), k, trace.prefix_lengths())


def sgale_value(c: Capital, s: Fraction, n: int, k: int) -> Capital:
    """Reweight a capital by ``k**((s-1)*n)``.

    ``s = 1`` is the identity (plain martingale).  Exact mode is possible
    only when ``(s-1)*n`` is an integer; otherwise use log2 mode, where
    the reweighting is a float addition.
    """
    s = Fraction(s)
    if s < 0:
        raise ValueError("s must be non-negative")
    exponent = (s - 1) * n
    if c.mode == Capital.EXACT:
        if exponent.denominator != 1:
            raise ValueError(
                f"k**({exponent}) is not rational; run in log2 mode instead")
        return Capital(Capital.EXACT, c.value * Fraction(k) ** int(exponent))
    if c.value == BANKRUPT_LOG2:
        return Capital(Capital.LOG2, BANKRUPT_LOG2)
    return Capital(Capital.LOG2, c.value + float(exponent) * math.log2(k))


def sgale_log2(log2_cap: float, s: Fraction, n: int, k: int) -> float:
    if log2_cap == BANKRUPT_LOG2:
        return BANKRUPT_LOG2
    return log2_cap + float((Fraction(s) - 1) * n) * math.log2(k)


# ---------------------------------------------------------------------------
# structural checks
# ---------------------------------------------------------------------------

def check_martingale_property(spec: GamblerSpec, depth: int) -> bool:
    """Brute-force the fair-betting identity over all strings below ``depth``.

    For every string ``w`` with ``|w| < depth`` the children values must
    satisfy ``sum_b d(wb) = k * d(w)`` in exact arithmetic, with trailing
    reads drawn consistently from the enumerated string itself.  Node
    count is ``k**depth``; keep ``depth`` small.
    """
    if depth > 20:
        raise ValueError("depth > 20 would enumerate too many nodes")
    k = spec.k
    h = spec.head_count
    mu_pre, mu_cyc = _positional_orbit(spec)
    q_ids, q_index, trans, bet_rows, _ = _compile_betting(spec)
    path: list[int] = []

    def node(m: int, q: int, cap: Fraction, pos: tuple[int, ...]) -> bool:
        if m >= depth:
            return True
        row = bet_rows[q].weights
        children = [cap * k * row[b] for b in range(k)]
        if sum(children) != k * cap:
            return False
        bits = _mu_at(mu_pre, mu_cyc, m)
        nxt = tuple(p + b for p, b in zip(pos, bits))
        for b in range(k):
            code = 0
            for i in range(h - 1):
                code = code * k + (path[pos[i]] if pos[i] < m else b)
            code = code * k + b
            path.append(b)
            ok = node(m + 1, trans[q][code], children[b], nxt)
            path.pop()
            if not ok:
                return False
        return True

    return node(0, q_index[spec.initial_q], spec.initial_capital,
                tuple([0] * (h - 1)))


def measure_speeds(spec: GamblerSpec) -> SpeedProfile:
    """Detect the positional cycle and return exact head speeds.

    Iterating the positional successor from the initial state must enter
    a cycle; the speed of head ``i`` is its advances per cycle divided by
    the cycle length.
    """
    mu_pre, mu_cyc = _positional_orbit(spec)
    h = spec.head_count
    cyc = len(mu_cyc)
    speeds = tuple(
        Fraction(sum(bits[i] for bits in mu_cyc), cyc) for i in range(h - 1)
    )
    return SpeedProfile(speeds, cyc, len(mu_pre))


def check_speed_bounds(spec: GamblerSpec, n_max: int) -> bool:
    """Exact check that every head stays within ``|T|`` of its speed line.

    Verifies ``|pi_i(n) - speed_i * n| <= |T|`` for all ``n <= n_max``
    using integer arithmetic only.
    """
    h = spec.head_count
    if h == 1:
        return True
    profile = measure_speeds(spec)
    mu_pre, mu_cyc = _positional_orbit(spec)
    t_count = len(spec.positional)
    nums = [sp.numerator for sp in profile.speeds]
    dens = [sp.denominator for sp in profile.speeds]
    bounds = [t_count * d for d in dens]
    pos = [0] * (h - 1)
    pre_len, cyc_len = len(mu_pre), len(mu_cyc)
    for n in range(n_max + 1):
        for i in range(h - 1):
            if abs(pos[i] * dens[i] - nums[i] * n) > bounds[i]:
                return False
        if n < n_max:
            bits = mu_pre[n] if n < pre_len else mu_cyc[(n - pre_len) % cyc_len]
            for i in range(h - 1):
                pos[i] += bits[i]
    return True


# ---------------------------------------------------------------------------
# trajectory CSV
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return "-inf" if x == BANKRUPT_LOG2 else repr(float(x))


def write_trajectory_csv(
    trace: RunTrace,
    out: TextIO,
    s_values: Sequence[tuple[str, Fraction]] = (),
    config: dict | None = None,
) -> None:
    """Write ``n,log2_capital`` plus one scale-``s`` column per request.

    Bankrupt capital is the literal string ``-inf``.  The producing
    config, when given, is embedded as a leading comment line so the file
    records how to reproduce it.
    """
    if config is not None:
        out.write("# " + json.dumps(config, sort_keys=True) + "\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["n", "log2_capital"] + [f"sgale_{label}" for label, _ in s_values])
    for step in trace.steps:
        n = step.n + 1
        lc = step.capital.log2()
        row = [str(n), _fmt(lc)]
        for _, s in s_values:
            row.append(_fmt(sgale_log2(lc, s, n, trace.k)))
        writer.writerow(row)
