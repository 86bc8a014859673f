"""De-obfuscation attacks against combining-statement programs.

The attacker sees the obfuscated statement stream but no key. Combining
statements and their option lists are public structure, so the program
class is enumerable: choose one option per live combining statement and
fold. Dead combining statements (fake chains that never reach the
output) are excluded, since an attacker discards them the same way.

Three attacks are modeled:

  * known-plaintext filtering: evaluate every candidate on observed
    input/output pairs and keep the ones that agree. The confidential
    program always survives; the attack refuses classes larger than an
    enumeration cap rather than silently truncating.
  * likelihood ranking: score candidates by how typical their
    statements look against a mined pattern table (smoothed relative
    operator frequencies), and rank the class by that score.
  * the selection guessing game, exact and simulated, for the
    two-statement combining setting with one conspicuous statement.

Class quality summarizes resilience: Q = 1 - 1/r where r is the best
rank the attacker assigns to any confidential program, counting ties
pessimistically. Q = 0 means the attacker's first pick is right.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import ConfigError, EnumerationCapError
from .field import Op
from .ir import (
    Program,
    canonical_key,
    dead_code_eliminate,
    eval_plain,
    fold_combines,
    live_statement_indices,
)
from .obfuscate import ObfProgram
from .rng import DEFAULT_SEED, derive_seed

DEFAULT_CAP = 10**6


@dataclass
class ClassDescriptor:
    """Public structure of an obfuscated program's class."""

    obf: ObfProgram
    combine_indices: list[int]
    options: list[tuple[tuple[str, str], ...]]
    class_size: int

    def option_counts(self) -> list[int]:
        return [len(opts) for opts in self.options]


@dataclass
class Candidate:
    selection: tuple[int, ...]
    program: Program


@dataclass
class RankedCandidate(Candidate):
    log_score: float = 0.0
    prob: float = 0.0


@dataclass
class AttackReport:
    class_size: int
    enumerated: int
    ranked: list[RankedCandidate]
    survivors: int | None = None
    min_rank: int | None = None
    quality: float | None = None
    elapsed: float = 0.0


def extract_class(obf: ObfProgram) -> ClassDescriptor:
    """Read the program class from combining-statement structure alone.

    The class size is the product of the option counts of all live
    combining statements; it is exact and may be astronomically large.
    """
    live = set(live_statement_indices(obf.program))
    combine_indices: list[int] = []
    options: list[tuple[tuple[str, str], ...]] = []
    for idx, st in obf.combines():
        if idx in live:
            combine_indices.append(idx)
            options.append(st.options)
    size = 1
    for opts in options:
        size *= len(opts)
    return ClassDescriptor(
        obf=obf, combine_indices=combine_indices, options=options, class_size=size
    )


def realize_candidate(cd: ClassDescriptor, selection: tuple[int, ...]) -> Program:
    """Fold the obfuscated program to one member of its class."""
    choice = dict(zip(cd.combine_indices, selection))
    return dead_code_eliminate(fold_combines(cd.obf.program, choice))


def enumerate_candidates(cd: ClassDescriptor) -> Iterator[Candidate]:
    for selection in itertools.product(*(range(n) for n in cd.option_counts())):
        yield Candidate(selection=selection, program=realize_candidate(cd, selection))


def kpa_filter(
    cd: ClassDescriptor,
    pairs: list[tuple[dict[str, int], int]],
    cap: int = DEFAULT_CAP,
) -> list[Candidate]:
    """Keep the candidates consistent with known input/output pairs.

    Each pair binds every input variable of the obfuscated program
    (candidates may read any of them) and gives the observed output.
    Raises EnumerationCapError instead of enumerating a class larger
    than cap.
    """
    if cd.class_size > cap:
        raise EnumerationCapError(cd.class_size, cap)
    survivors = []
    for cand in enumerate_candidates(cd):
        if all(
            eval_plain(cand.program, inputs) == output % cand.program.prime
            for inputs, output in pairs
        ):
            survivors.append(cand)
    return survivors


def _statement_log_scores(table) -> tuple[dict[str, float], float]:
    """Smoothed per-operation log likelihoods from a pattern table.

    Counts are normalized to relative frequencies first and add-one
    smoothed over the operation universe, so any positive rescaling of
    the table yields identical scores.
    """
    counts = dict(table.ir_operator_counts()) if table is not None else {}
    universe = sorted({op.value for op in Op} | set(counts))
    total = sum(counts.values())
    denom = math.log(1.0 + len(universe))
    scores = {}
    for name in universe:
        rel = counts.get(name, 0) / total if total else 0.0
        scores[name] = math.log1p(rel) - denom
    return scores, denom


def rank_candidates(
    cd: ClassDescriptor,
    table=None,
    cap: int = DEFAULT_CAP,
    candidates: list[Candidate] | None = None,
) -> list[RankedCandidate]:
    """Order the class by statement-pattern likelihood, best first.

    p(candidate) is proportional to the product of smoothed relative
    frequencies of its statement operations; probabilities are
    normalized over the enumerated candidates. Ties are broken by
    canonical serialization so the order is reproducible.
    """
    if candidates is None:
        if cd.class_size > cap:
            raise EnumerationCapError(cd.class_size, cap)
        candidates = list(enumerate_candidates(cd))
    scores, default = _statement_log_scores(table)
    ranked: list[RankedCandidate] = []
    for cand in candidates:
        logs = sorted(
            scores.get(st.expr.op.value, -default) for st in cand.program.statements
        )
        ranked.append(
            RankedCandidate(
                selection=cand.selection,
                program=cand.program,
                log_score=math.fsum(logs),
            )
        )
    ranked.sort(key=lambda rc: (-rc.log_score, canonical_key(rc.program, False)))
    if ranked:
        peak = max(rc.log_score for rc in ranked)
        weights = [math.exp(rc.log_score - peak) for rc in ranked]
        total = math.fsum(weights)
        for rc, w in zip(ranked, weights):
            rc.prob = w / total
    return ranked


def _ranks_of(ranked: list[RankedCandidate], keys: set[str]) -> list[int]:
    ranks = []
    for rc in ranked:
        if canonical_key(rc.program, False) in keys:
            r = sum(1 for other in ranked if other.log_score >= rc.log_score)
            ranks.append(r)
    return ranks


def class_quality(ranked: list[RankedCandidate], confidential: list[Program]) -> float:
    """Q = 1 - 1/r for the best-ranked confidential program.

    r counts every candidate scoring at least as high, ties included,
    so equal scores never flatter the obfuscation. Q = 0 when some
    confidential program is the attacker's unique top pick.
    """
    keys = {canonical_key(p, False) for p in confidential}
    ranks = _ranks_of(ranked, keys)
    if not ranks:
        raise ConfigError("no confidential program appears in the ranked class")
    return 1.0 - 1.0 / min(ranks)


def run_attack(
    obf: ObfProgram,
    pairs: list[tuple[dict[str, int], int]] | None = None,
    table=None,
    truth: list[Program] | None = None,
    cap: int = DEFAULT_CAP,
) -> AttackReport:
    """Full pipeline: extract, optionally filter, rank, and grade."""
    start = time.perf_counter()
    cd = extract_class(obf)
    survivors = None
    candidates = None
    if pairs is not None:
        candidates = kpa_filter(cd, pairs, cap=cap)
        survivors = len(candidates)
    ranked = rank_candidates(cd, table=table, cap=cap, candidates=candidates)
    min_rank = None
    quality = None
    if truth:
        keys = {canonical_key(p, False) for p in truth}
        ranks = _ranks_of(ranked, keys)
        if ranks:
            min_rank = min(ranks)
            quality = 1.0 - 1.0 / min_rank
    return AttackReport(
        class_size=cd.class_size,
        enumerated=len(ranked),
        ranked=ranked,
        survivors=survivors,
        min_rank=min_rank,
        quality=quality,
        elapsed=time.perf_counter() - start,
    )


def render_attack_report(report: AttackReport, top: int = 10) -> str:
    lines = [f"class_size | {report.class_size}", f"enumerated | {report.enumerated}"]
    if report.survivors is not None:
        lines.append(f"survivors | {report.survivors}")
    if report.min_rank is not None:
        lines.append(f"min_rank | {report.min_rank}")
    if report.quality is not None:
        lines.append(f"quality | {report.quality:.6g}")
    for i, rc in enumerate(report.ranked[:top], start=1):
        lines.append(f"top | {i} | {rc.prob:.6g} | {canonical_key(rc.program, False)}")
    return "\n".join(lines) + "\n"


def surviving_option_counts(cd: ClassDescriptor, survivors: list[Candidate]) -> list[int]:
    """How many options of each combining statement some survivor uses."""
    counts = []
    for slot in range(len(cd.options)):
        counts.append(len({cand.selection[slot] for cand in survivors}))
    return counts


# ------------------------------------------------------- guessing game

@dataclass(frozen=True)
class GameAccuracy:
    exact: float
    paper_form: float


OBF_STRATEGIES = ("uniform", "f-as-misleading")
ATT_STRATEGIES = ("f-first", "random")


def game_exact(p_l: float, n: int) -> GameAccuracy:
    """Closed-form attacker accuracy for the two-option guessing game.

    One conspicuous statement F occurs with likelihood p_l; the other
    n - 1 statements share the rest uniformly. The obfuscator draws the
    misleading statement uniformly from the n - 1 non-confidential
    statements, and the attacker picks F whenever it appears, guessing
    otherwise. The derived accuracy is

        p_l + (1 - p_l) * (1 - 1/(n-1)) * 1/2

    paper_form is the commonly printed variant with a 1 - 1/n factor,
    which counts the confidential statement itself among the misleading
    draws; both are reported.
    """
    if not 0.0 < p_l < 1.0:
        raise ConfigError("frequent-statement likelihood must be strictly between 0 and 1")
    if n < 2:
        raise ConfigError("the game needs at least two statements")
    exact = p_l + (1.0 - p_l) * (1.0 - 1.0 / (n - 1)) * 0.5
    paper = p_l + (1.0 - p_l) * (1.0 - 1.0 / n) * 0.5
    return GameAccuracy(exact=exact, paper_form=paper)


def game_simulate(
    p_l: float,
    n: int,
    trials: int = 10**6,
    seed: int = DEFAULT_SEED,
    obf_strategy: str = "uniform",
    att_strategy: str = "f-first",
) -> float:
    """Monte-Carlo attacker accuracy under selectable strategies.

    The f-as-misleading obfuscator plants F as the misleading statement
    whenever the confidential one differs, which empties the attacker's
    F-first signal down to plain p_l accuracy.
    """
    game_exact(p_l, n)  # validate p_l and n
    if trials < 1:
        raise ConfigError("trial count must be positive")
    if obf_strategy not in OBF_STRATEGIES:
        raise ConfigError(f"unknown obfuscator strategy {obf_strategy!r}")
    if att_strategy not in ATT_STRATEGIES:
        raise ConfigError(f"unknown attacker strategy {att_strategy!r}")
    rng = np.random.default_rng(derive_seed(seed, "guessing-game"))
    is_f = rng.random(trials) < p_l
    confidential = np.where(is_f, 0, rng.integers(1, n, size=trials))
    if obf_strategy == "uniform":
        draw = rng.integers(0, n - 1, size=trials)
        misleading = draw + (draw >= confidential)
    else:
        misleading = np.where(confidential != 0, 0, rng.integers(1, n, size=trials))
    coin = rng.random(trials) < 0.5
    if att_strategy == "f-first":
        f_present = (confidential == 0) | (misleading == 0)
        correct = np.where(f_present, confidential == 0, coin)
    else:
        correct = coin
    return float(np.mean(correct))
