"""Empirical dimension bounds, adversarial sweeps, and instability runs.

Everything here is finite-horizon, statistical evidence: "the capital
grows without bound" is not decidable from a prefix, so the working
proxy is the sliding-window growth exponent of a run (see
:func:`galelab.engine.window_exponents`), with a positive trend above
a small threshold counting as success.  Reports echo their full
configuration and seeds, and identical configurations reproduce reports
byte for byte.

Sweep runs are independent of one another and could execute in
parallel; the implementation runs them serially and merges records in
sample order so the report is deterministic.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .core import (
    Alphabet,
    BANKRUPT_LOG2,
    BettingState,
    GamblerSpec,
    PositionalState,
    ProbVector,
)
from .constructions import average_gamblers, build_variant_gambler
from .engine import window_exponents, run_log2_capitals
from .sequences import SequenceSource, f_family, prng_source

__all__ = [
    "SUCCESS_TREND_THRESHOLD",
    "RunRecord",
    "DimensionEntry",
    "DimensionReport",
    "estimate_predim_upper",
    "SweepBudget",
    "SweepReport",
    "adversarial_sweep",
    "InstabilityReport",
    "instability_experiment",
    "encode_float",
    "write_jsonl",
]

# a window growth trend above this counts as empirical success; an order
# of magnitude below the structured winners' signal at desk horizons
SUCCESS_TREND_THRESHOLD = 0.01


def encode_float(x: float) -> float | str:
    """JSON-safe float: the bankrupt sentinel becomes the string "-inf"."""
    if x == BANKRUPT_LOG2:
        return "-inf"
    if x == float("inf"):
        return "inf"
    return float(x)


@dataclass(frozen=True)
class RunRecord:
    """One (gambler, sequence) run summarized for reports."""

    gambler_id: str
    seq_id: str
    n: int
    exponent: float
    liminf: float
    log2_capital_final: float

    def to_obj(self) -> dict:
        return {
            "type": "run",
            "gambler_id": self.gambler_id,
            "seq_id": self.seq_id,
            "n": self.n,
            "exponent": encode_float(self.exponent),
            "liminf": encode_float(self.liminf),
            "log2_capital_final": encode_float(self.log2_capital_final),
        }


def _run_record(spec: GamblerSpec, source: SequenceSource, n: int,
                gambler_id: str | None = None) -> RunRecord:
    caps = run_log2_capitals(spec, source, n)
    est = window_exponents(caps, spec.k)
    return RunRecord(
        gambler_id=gambler_id or spec.label(),
        seq_id=source.describe(),
        n=n,
        exponent=est.limsup_est,
        liminf=est.liminf_est,
        log2_capital_final=float(caps[-1]),
    )


# ---------------------------------------------------------------------------
# dimension upper bounds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DimensionEntry:
    gambler_id: str
    head_count: int
    exponent: float
    liminf: float
    upper_bound: float
    best_s: float | None
    bankrupt: bool

    def succeeds_at(self, s: float) -> bool:
        """Finite-horizon success proxy for the scale-``s`` reweighting."""
        if self.exponent == BANKRUPT_LOG2:
            return False
        return (s - 1) + self.exponent > SUCCESS_TREND_THRESHOLD


@dataclass
class DimensionReport:
    """Per-gambler growth evidence and the aggregate upper bound.

    Each witness gambler caps the dimension-like quantity at
    ``1 - exponent``; a bankrupt witness certifies nothing beyond the
    trivial bound 1.  The aggregate is the minimum over witnesses and can
    only decrease as witnesses are added.
    """

    seq_id: str
    n: int
    entries: list[DimensionEntry]

    @property
    def aggregate(self) -> float:
        return min((e.upper_bound for e in self.entries), default=1.0)

    def to_objs(self) -> list[dict]:
        out = [{"type": "config", "seq_id": self.seq_id, "n": self.n}]
        for e in self.entries:
            out.append({
                "type": "run",
                "gambler_id": e.gambler_id,
                "seq_id": self.seq_id,
                "n": self.n,
                "exponent": encode_float(e.exponent),
                "upper_bound": encode_float(e.upper_bound),
                "bankrupt": e.bankrupt,
            })
        out.append({"type": "summary", "aggregate_upper_bound":
                    encode_float(self.aggregate)})
        return out


def estimate_predim_upper(
    source: SequenceSource,
    gamblers: Sequence[GamblerSpec],
    n: int,
) -> DimensionReport:
    """Upper-bound the dimension-like quantity of a prefix from witnesses.

    Runs every gambler over the first ``n`` symbols and converts each
    window growth exponent ``e`` into the bound ``1 - e``.  Only upper
    bounds are possible by running concrete gamblers; the infimum over
    all gamblers is not computable.
    """
    entries = []
    for spec in gamblers:
        caps = run_log2_capitals(spec, source, n)
        est = window_exponents(caps, spec.k)
        bankrupt = est.limsup_est == BANKRUPT_LOG2
        upper = 1.0 if bankrupt else 1.0 - est.limsup_est
        entries.append(DimensionEntry(
            gambler_id=spec.label(),
            head_count=spec.head_count,
            exponent=est.limsup_est,
            liminf=est.liminf_est,
            upper_bound=upper,
            best_s=None if bankrupt else 1.0 - est.limsup_est,
            bankrupt=bankrupt,
        ))
    return DimensionReport(seq_id=source.describe(), n=n, entries=entries)


# ---------------------------------------------------------------------------
# adversarial sweeps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepBudget:
    """Sampling budget for an adversarial sweep."""

    max_t: int = 4
    max_q: int = 6
    bet_denominator_max: int = 8
    samples: int = 500
    seed: int = 0

    def to_obj(self) -> dict:
        return {
            "max_t": self.max_t,
            "max_q": self.max_q,
            "bet_denominator_max": self.bet_denominator_max,
            "samples": self.samples,
            "seed": self.seed,
        }


def _random_bets(rng: random.Random, k: int, max_den: int) -> ProbVector:
    den = rng.randint(1, max_den)
    cuts = sorted(rng.randint(0, den) for _ in range(k - 1))
    parts = []
    prev = 0
    for c in cuts:
        parts.append(c - prev)
        prev = c
    parts.append(den - prev)
    return ProbVector(tuple(Fraction(p, den) for p in parts))


def _sample_gambler(rng: random.Random, h: int, k: int,
                    budget: SweepBudget, tag: str) -> GamblerSpec:
    n_t = rng.randint(1, budget.max_t) if h > 1 else 1
    n_q = rng.randint(1, budget.max_q)
    positional = {
        f"t{i}": PositionalState(
            next_id=f"t{rng.randrange(n_t)}",
            move_bits=tuple(rng.randint(0, 1) for _ in range(h - 1)),
        )
        for i in range(n_t)
    }
    n_codes = k ** h
    betting = {
        f"q{i}": BettingState(
            _random_bets(rng, k, budget.bet_denominator_max),
            tuple(f"q{rng.randrange(n_q)}" for _ in range(n_codes)),
        )
        for i in range(n_q)
    }
    return GamblerSpec(
        alphabet=Alphabet.from_size(k),
        head_count=h,
        positional=positional,
        betting=betting,
        initial_t="t0",
        initial_q="q0",
        name=tag,
    )


@dataclass
class SweepReport:
    """Outcome of sampling many gamblers against one sequence.

    ``max_sampled_exponent``/``best_sampled_id`` summarize the random
    population; ``included`` holds reference gamblers run alongside for
    comparison, and ``best_overall_id`` names the top performer across
    both groups.
    """

    h: int
    seq_id: str
    n: int
    budget: SweepBudget
    records: list[RunRecord]
    included: list[RunRecord]

    @property
    def max_sampled_exponent(self) -> float:
        return max((r.exponent for r in self.records), default=BANKRUPT_LOG2)

    @property
    def best_sampled_id(self) -> str | None:
        best = None
        for r in self.records:
            if best is None or r.exponent > best.exponent:
                best = r
        return best.gambler_id if best else None

    @property
    def best_overall_id(self) -> str | None:
        best = None
        for r in list(self.records) + list(self.included):
            if best is None or r.exponent > best.exponent:
                best = r
        return best.gambler_id if best else None

    def to_objs(self) -> list[dict]:
        out = [{
            "type": "config",
            "h": self.h,
            "seq_id": self.seq_id,
            "n": self.n,
            "budget": self.budget.to_obj(),
        }]
        out.extend(r.to_obj() for r in self.records)
        out.extend(r.to_obj() for r in self.included)
        out.append({
            "type": "summary",
            "max_sampled_exponent": encode_float(self.max_sampled_exponent),
            "best_sampled_id": self.best_sampled_id,
            "best_overall_id": self.best_overall_id,
        })
        return out


def adversarial_sweep(
    h: int,
    source: SequenceSource,
    n: int,
    budget: SweepBudget,
    include: Sequence[GamblerSpec] = (),
) -> SweepReport:
    """Sample random ``h``-head gamblers against a sequence prefix.

    Transition maps and movement bits are drawn uniformly within the
    budget and bet rows from the bounded-denominator grid (zero weights
    included, so sampled gamblers can and do go bankrupt).  The same
    budget, sampler seed, and source reproduce the report byte for byte.
    The sweep is the artifact's own adversary design: random machines
    plus whatever references are passed in; it certifies nothing, it
    measures.
    """
    rng = random.Random(budget.seed)
    k = source.alphabet_size
    records = []
    for i in range(budget.samples):
        spec = _sample_gambler(rng, h, k, budget, f"sample_{i:04d}")
        records.append(_run_record(spec, source, n))
    included = [_run_record(spec, source, n) for spec in include]
    return SweepReport(
        h=h,
        seq_id=source.describe(),
        n=n,
        budget=budget,
        records=records,
        included=included,
    )


# ---------------------------------------------------------------------------
# instability experiment
# ---------------------------------------------------------------------------

@dataclass
class InstabilityReport:
    """The 2x2 exponent matrix of variant winners versus variant sequences.

    ``matrix[gambler][sequence]`` holds the window growth exponent; the
    matched pairs sit on the diagonal.  ``averaged`` holds the combined
    gambler's exponents on both sequences.  A losing all-in run is
    bankrupt, so off-diagonal entries are the ``-inf`` sentinel rather
    than small noise.
    """

    h: int
    seed: int
    n: int
    eps: Fraction
    matrix: dict[str, dict[str, float]]
    averaged: dict[str, float]
    records: list[RunRecord]

    def diagonal(self) -> list[float]:
        return [self.matrix["fprime"]["X"], self.matrix["fdoubleprime"]["Z"]]

    def off_diagonal(self) -> list[float]:
        return [self.matrix["fprime"]["Z"], self.matrix["fdoubleprime"]["X"]]

    def to_objs(self) -> list[dict]:
        out = [{
            "type": "config",
            "h": self.h,
            "seed": self.seed,
            "n": self.n,
            "eps": str(self.eps),
        }]
        out.extend(r.to_obj() for r in self.records)
        out.append({
            "type": "summary",
            "matrix": {g: {s: encode_float(v) for s, v in row.items()}
                       for g, row in self.matrix.items()},
            "averaged": {s: encode_float(v) for s, v in self.averaged.items()},
        })
        return out


def instability_experiment(h: int, seed: int, n: int,
                           eps: Fraction) -> InstabilityReport:
    """Cross-run the two variant winners and their average.

    Builds both variant sequences from one seeded inner stream, runs each
    variant winner on each sequence (the 2x2 matrix), then runs the
    averaged gambler (with ``2h - 1`` heads) on both sequences.  The
    expected picture: matched runs grow at one doubling per block,
    mismatched all-in runs die, and the averaged gambler grows near the
    diagonal rate on both.
    """
    if h < 2:
        raise ValueError("instability needs h >= 2 (two distinct variants)")
    eps = Fraction(eps)
    seq_x = f_family(h, "Fprime", prng_source(seed))
    seq_z = f_family(h, "Fdoubleprime", prng_source(seed))
    g_x = build_variant_gambler(h, "Fprime")
    g_z = build_variant_gambler(h, "Fdoubleprime")
    combined = average_gamblers(g_x, g_z, eps)

    records = []
    matrix: dict[str, dict[str, float]] = {"fprime": {}, "fdoubleprime": {}}
    for tag, spec in (("fprime", g_x), ("fdoubleprime", g_z)):
        for seq_tag, src in (("X", seq_x), ("Z", seq_z)):
            rec = _run_record(spec, src, n, gambler_id=tag)
            records.append(rec)
            matrix[tag][seq_tag] = rec.exponent
    averaged = {}
    for seq_tag, src in (("X", seq_x), ("Z", seq_z)):
        rec = _run_record(combined, src, n, gambler_id="averaged")
        records.append(rec)
        averaged[seq_tag] = rec.exponent

    return InstabilityReport(
        h=h, seed=seed, n=n, eps=eps,
        matrix=matrix, averaged=averaged, records=records,
    )


def write_jsonl(path, objs: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for obj in objs:
            fh.write(json.dumps(obj, sort_keys=True) + "\n")
