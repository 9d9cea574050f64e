"""Scoring rules and whole-electorate elections.

Two routes produce district results. The per-ballot functions
(:func:`plurality`, :func:`weighted_plurality`, :func:`net_plurality`,
:func:`plurality_with_transfer`) take explicit ballot objects and are meant for
small hand-built profiles. :func:`run_district_election` never builds ballot
objects: it derives district score tables straight from the ranking and
valuation arrays, which is what the Monte Carlo loop uses.

Ties are broken towards the lower party index when electing and towards the
higher party index when eliminating.
"""
from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .ballots import Approval, KApproval, NegativeVote, TransferableVote, WeightedKApproval, approval_matrix
from .errors import EmptyDistrictError, InvalidParameterError
from .population import Electorate
from .preferences import ValuationMatrix, rank_from_valuations

log = logging.getLogger(__name__)

POLICIES = (
    "1-approval",
    "2-approval",
    "weighted-2-approval",
    "approval",
    "negative-vote",
    "transferable-vote",
)
DEFAULT_WEIGHTS = (1.0, 0.5)


@dataclass(frozen=True)
class TopOne:
    pass


@dataclass(frozen=True)
class TopM:
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise InvalidParameterError("TopM needs m >= 1")


@dataclass(frozen=True)
class MinVotes:
    threshold: float

    def __post_init__(self):
        if self.threshold < 0:
            raise InvalidParameterError("MinVotes threshold must be non-negative")


SelectionPolicy = TopOne | TopM | MinVotes


def selection_from_dict(d) -> SelectionPolicy:
    kind = d.get("kind", "top_one")
    if kind == "top_one":
        return TopOne()
    if kind == "top_m":
        return TopM(int(d["m"]))
    if kind == "min_votes":
        return MinVotes(float(d["threshold"]))
    raise InvalidParameterError(f"unknown selection kind {kind!r}")


@dataclass(frozen=True)
class DistrictTally:
    scores: np.ndarray
    elected: tuple
    eliminated: tuple = ()


@dataclass(frozen=True)
class ElectionOutcome:
    """Winners per district (``w(s)``) and seats per party (``V(k)``)."""

    winners: tuple
    seats: np.ndarray
    policy: str = ""
    scores: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def n_parties(self) -> int:
        return self.seats.size

    @property
    def n_districts(self) -> int:
        return len(self.winners)

    def elected_mask(self) -> np.ndarray:
        mask = np.zeros((self.n_districts, self.n_parties), dtype=bool)
        for s, w in enumerate(self.winners):
            mask[s, list(w)] = True
        return mask

    def to_dict(self) -> dict:
        return {"seats": self.seats.tolist(), "winners": [list(w) for w in self.winners]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _order(scores) -> list:
    scores = np.asarray(scores)
    return sorted(range(scores.size), key=lambda k: (-scores[k], k))


def select(scores, policy: SelectionPolicy = TopOne()) -> tuple:
    """Elected party indices for one district score vector."""
    scores = np.asarray(scores)
    if isinstance(policy, TopOne):
        return (int(np.argmax(scores)),)
    order = _order(scores)
    if isinstance(policy, TopM):
        return tuple(order[: policy.m])
    if isinstance(policy, MinVotes):
        return tuple(k for k in order if scores[k] >= policy.threshold)
    raise InvalidParameterError(f"unknown selection policy {policy!r}")


def _n_parties(ballots, n_parties):
    if n_parties is not None:
        return int(n_parties)
    top = max((max(b.parties) for b in ballots if b.parties), default=-1)
    return top + 1


def _require(ballots, kinds, name):
    ballots = list(ballots)
    if not ballots:
        raise EmptyDistrictError(f"{name}: district has no ballots")
    families = {type(b) for b in ballots}
    if not families <= set(kinds) or len(families) != 1:
        raise InvalidParameterError(f"{name}: expected one ballot family among {[k.__name__ for k in kinds]}")
    return ballots


def plurality(ballots, policy: SelectionPolicy = TopOne(), n_parties: int | None = None) -> DistrictTally:
    ballots = _require(ballots, (KApproval, Approval), "plurality")
    scores = np.zeros(_n_parties(ballots, n_parties))
    for b in ballots:
        for p in b.parties:
            scores[p] += 1
    return DistrictTally(scores, select(scores, policy))


def weighted_plurality(ballots, policy: SelectionPolicy = TopOne(), n_parties: int | None = None) -> DistrictTally:
    ballots = _require(ballots, (WeightedKApproval,), "weighted_plurality")
    scores = np.zeros(_n_parties(ballots, n_parties))
    for b in ballots:
        for p, w in b.pairs:
            scores[p] += w
    return DistrictTally(scores, select(scores, policy))


def net_plurality(ballots, policy: SelectionPolicy = TopOne(), n_parties: int | None = None) -> DistrictTally:
    ballots = _require(ballots, (NegativeVote, Approval), "net_plurality")
    scores = np.zeros(_n_parties(ballots, n_parties))
    for b in ballots:
        if isinstance(b, NegativeVote):
            scores[b.positive] += 1
            scores[b.negative] -= 1
        else:
            for p in b.parties:
                scores[p] += 1
    return DistrictTally(scores, select(scores, policy))


def _transfer_done(scores, standing, live, policy):
    if isinstance(policy, TopOne):
        if len(standing) == 1:
            return (standing[0],)
        for k in standing:
            if 2 * scores[k] > live:
                return (k,)
        return None
    if isinstance(policy, TopM):
        if len(standing) <= policy.m:
            return tuple(sorted(standing, key=lambda k: (-scores[k], k)))
        return None
    if isinstance(policy, MinVotes):
        if all(scores[k] >= policy.threshold for k in standing):
            return tuple(sorted(standing, key=lambda k: (-scores[k], k)))
        return None
    raise InvalidParameterError(f"unknown selection policy {policy!r}")


def _lowest(scores, standing):
    # fewest votes; among equals the highest index goes first
    return min(standing, key=lambda k: (scores[k], -k))


def plurality_with_transfer(ballots, policy: SelectionPolicy = TopOne(), n_parties: int | None = None) -> DistrictTally:
    """Instant runoff over two-preference ballots.

    Ballots whose active choice is eliminated move to their second choice when
    it is still standing and are exhausted otherwise.
    """
    ballots = _require(ballots, (TransferableVote,), "plurality_with_transfer")
    k_all = _n_parties(ballots, n_parties)
    standing = list(range(k_all))
    current = [b.first for b in ballots]
    on_first = [True] * len(ballots)
    eliminated = []
    while True:
        scores = np.zeros(k_all)
        live = 0
        for c in current:
            if c >= 0:
                scores[c] += 1
                live += 1
        elected = _transfer_done(scores, standing, live, policy)
        if elected is not None:
            return DistrictTally(scores, elected, tuple(eliminated))
        if not standing:
            return DistrictTally(scores, (), tuple(eliminated))
        out = _lowest(scores, standing)
        standing.remove(out)
        eliminated.append(out)
        for i, b in enumerate(ballots):
            if current[i] != out:
                continue
            if on_first[i] and b.second in standing:
                current[i] = b.second
            else:
                current[i] = -1
            on_first[i] = False


def transfer_from_pair_counts(pairs: np.ndarray, policy: SelectionPolicy = TopOne()) -> DistrictTally:
    """Instant runoff on aggregated ballots: ``pairs[f, s]`` counts ballots ranking f first and s second."""
    pairs = np.asarray(pairs, dtype=np.int64)
    k_all = pairs.shape[0]
    on_first = pairs.copy()
    on_second = np.zeros(k_all, dtype=np.int64)
    alive = np.ones(k_all, dtype=bool)
    standing = list(range(k_all))
    eliminated = []
    while True:
        scores = np.where(alive, on_first.sum(axis=1) + on_second, 0)
        live = int(scores.sum())
        elected = _transfer_done(scores, standing, live, policy)
        if elected is not None:
            return DistrictTally(scores.astype(float), elected, tuple(eliminated))
        if not standing:
            return DistrictTally(scores.astype(float), (), tuple(eliminated))
        out = _lowest(scores, standing)
        standing.remove(out)
        eliminated.append(out)
        alive[out] = False
        on_second += np.where(alive, on_first[out], 0)
        on_first[out] = 0
        on_second[out] = 0


def district_score_table(
    policy_id: str,
    rankings: np.ndarray,
    values: np.ndarray,
    district_of: np.ndarray,
    n_districts: int,
    weights=DEFAULT_WEIGHTS,
    cutoff: float = 0.0,
    empty_approval: str = "abstain",
) -> np.ndarray:
    """``(S, K)`` district scores for every policy except transferable vote."""
    k = rankings.shape[1]
    s = n_districts
    base = district_of * k

    def count(col, w=None):
        return np.bincount(base + col, weights=w, minlength=s * k).reshape(s, k)

    if policy_id == "1-approval":
        return count(rankings[:, 0]).astype(float)
    if policy_id == "2-approval":
        if k < 2:
            raise InvalidParameterError("2-approval needs at least two parties")
        return (count(rankings[:, 0]) + count(rankings[:, 1])).astype(float)
    if policy_id == "weighted-2-approval":
        weights = tuple(weights)
        if len(weights) > k:
            raise InvalidParameterError("more approval weights than parties")
        out = np.zeros((s, k))
        for j, w in enumerate(weights):
            out += w * count(rankings[:, j])
        return out
    if policy_id == "approval":
        approve = approval_matrix(values, cutoff, empty_approval, rankings)
        out = np.zeros((s, k))
        for j in range(k):
            out[:, j] = np.bincount(district_of, weights=approve[:, j], minlength=s)
        return out
    if policy_id == "negative-vote":
        if k < 2:
            raise InvalidParameterError("negative vote needs at least two parties")
        return (count(rankings[:, 0]) - count(rankings[:, -1])).astype(float)
    raise InvalidParameterError(f"no score table for policy {policy_id!r}")


def run_district_election(
    electorate: Electorate,
    values,
    policy_id: str,
    selection: SelectionPolicy = TopOne(),
    *,
    rankings: np.ndarray | None = None,
    weights=DEFAULT_WEIGHTS,
    cutoff: float = 0.0,
    empty_approval: str = "abstain",
) -> ElectionOutcome:
    if policy_id not in POLICIES:
        raise InvalidParameterError(f"unknown policy {policy_id!r}; choose from {', '.join(POLICIES)}")
    lam = values.values if isinstance(values, ValuationMatrix) else np.asarray(values, dtype=float)
    if lam.shape[0] != electorate.n_electors:
        raise InvalidParameterError("valuations and electorate disagree on N")
    if rankings is None:
        rankings = rank_from_valuations(lam)
    s, k = electorate.n_districts, lam.shape[1]

    if policy_id == "transferable-vote":
        if k < 2:
            raise InvalidParameterError("transferable vote needs at least two parties")
        flat = (electorate.district_of * k + rankings[:, 0]) * k + rankings[:, 1]
        pairs = np.bincount(flat, minlength=s * k * k).reshape(s, k, k)
        tallies = [transfer_from_pair_counts(pairs[d], selection) for d in range(s)]
        scores = np.stack([t.scores for t in tallies])
        winners = tuple(t.elected for t in tallies)
    else:
        scores = district_score_table(
            policy_id, rankings, lam, electorate.district_of, s, weights, cutoff, empty_approval
        )
        if isinstance(selection, TopOne):
            winners = tuple((int(w),) for w in np.argmax(scores, axis=1))
        else:
            winners = tuple(select(row, selection) for row in scores)

    seats = np.zeros(k, dtype=np.int64)
    empty = 0
    for w in winners:
        if not w:
            empty += 1
        seats[list(w)] += 1
    if empty:
        log.warning("%s: %d district(s) elected nobody and hold no seat", policy_id, empty)
    seats.setflags(write=False)
    return ElectionOutcome(winners, seats, policy_id, scores)


def write_score_table(outcome: ElectionOutcome, path) -> None:
    """CSV ``district,party,score,elected`` for one outcome."""
    path = Path(path)
    mask = outcome.elected_mask()
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["district", "party", "score", "elected"])
        for s in range(outcome.n_districts):
            for k in range(outcome.n_parties):
                w.writerow([s, k, repr(float(outcome.scores[s, k])), int(mask[s, k])])
