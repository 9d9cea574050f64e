"""Ballots under the five voting rules, cast from an elector's ranking or valuations."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidParameterError

__all__ = [
    "KApproval",
    "WeightedKApproval",
    "Approval",
    "NegativeVote",
    "TransferableVote",
    "cast_k_approval",
    "cast_weighted_k_approval",
    "cast_approval",
    "cast_negative_vote",
    "cast_transferable_vote",
    "approval_matrix",
    "write_ballot_dump",
]


def _check_distinct(parties):
    if len(set(parties)) != len(parties):
        raise InvalidParameterError(f"duplicate party in ballot {parties!r}")
    if any(p < 0 for p in parties):
        raise InvalidParameterError("party index must be non-negative")


@dataclass(frozen=True)
class KApproval:
    parties: tuple
    rule = "k-approval"

    def __post_init__(self):
        object.__setattr__(self, "parties", tuple(int(p) for p in self.parties))
        _check_distinct(self.parties)

    def choices(self) -> str:
        return " ".join(map(str, self.parties))


@dataclass(frozen=True)
class WeightedKApproval:
    pairs: tuple
    rule = "weighted-k-approval"

    def __post_init__(self):
        pairs = tuple((int(p), float(w)) for p, w in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        _check_distinct(self.parties)

    @property
    def parties(self) -> tuple:
        return tuple(p for p, _ in self.pairs)

    @property
    def weights(self) -> tuple:
        return tuple(w for _, w in self.pairs)

    def choices(self) -> str:
        return " ".join(f"{p}:{w!r}" for p, w in self.pairs)


@dataclass(frozen=True)
class Approval:
    parties: tuple
    rule = "approval"

    def __post_init__(self):
        object.__setattr__(self, "parties", tuple(int(p) for p in self.parties))
        _check_distinct(self.parties)

    def choices(self) -> str:
        return " ".join(map(str, self.parties))


@dataclass(frozen=True)
class NegativeVote:
    positive: int
    negative: int
    rule = "negative-vote"

    def __post_init__(self):
        if self.positive == self.negative:
            raise InvalidParameterError("negative vote must target a different party than the positive vote")
        _check_distinct((self.positive, self.negative))

    @property
    def parties(self) -> tuple:
        return (self.positive, self.negative)

    def choices(self) -> str:
        return f"+{self.positive} -{self.negative}"


@dataclass(frozen=True)
class TransferableVote:
    first: int
    second: int
    rule = "transferable-vote"

    def __post_init__(self):
        if self.first == self.second:
            raise InvalidParameterError("second choice must differ from the first")
        _check_distinct((self.first, self.second))

    @property
    def parties(self) -> tuple:
        return (self.first, self.second)

    def choices(self) -> str:
        return f"{self.first}>{self.second}"


def cast_k_approval(ranking, k: int) -> KApproval:
    ranking = list(ranking)
    if not 1 <= k <= len(ranking):
        raise InvalidParameterError(f"k={k} must lie between 1 and the number of parties ({len(ranking)})")
    return KApproval(tuple(ranking[:k]))


def cast_weighted_k_approval(ranking, weights) -> WeightedKApproval:
    ranking, weights = list(ranking), list(weights)
    if not weights:
        raise InvalidParameterError("weights must be non-empty")
    if len(weights) > len(ranking):
        raise InvalidParameterError("more weights than parties")
    return WeightedKApproval(tuple(zip(ranking, weights)))


def cast_approval(valuation_row, cutoff: float = 0.0, empty: str = "abstain") -> Approval:
    """Approve every party valued strictly above ``cutoff``.

    ``empty="top1"`` makes an elector with nothing above the cutoff approve
    their favourite instead of abstaining.
    """
    row = np.asarray(valuation_row, dtype=float)
    approved = tuple(int(k) for k in np.flatnonzero(row > cutoff))
    if not approved and empty == "top1":
        approved = (int(np.argsort(-row, kind="stable")[0]),)
    elif empty not in ("abstain", "top1"):
        raise InvalidParameterError(f"unknown empty-approval mode {empty!r}")
    return Approval(approved)


def cast_negative_vote(ranking) -> NegativeVote:
    ranking = list(ranking)
    if len(ranking) < 2:
        raise InvalidParameterError("negative vote needs at least two parties")
    return NegativeVote(int(ranking[0]), int(ranking[-1]))


def cast_transferable_vote(ranking) -> TransferableVote:
    ranking = list(ranking)
    if len(ranking) < 2:
        raise InvalidParameterError("transferable vote needs at least two parties")
    return TransferableVote(int(ranking[0]), int(ranking[1]))


def approval_matrix(values: np.ndarray, cutoff: float = 0.0, empty: str = "abstain", rankings=None) -> np.ndarray:
    """Boolean N x K approvals for a whole electorate."""
    approve = values > cutoff
    if empty == "top1":
        blank = ~approve.any(axis=1)
        if blank.any():
            top = rankings[:, 0] if rankings is not None else np.argsort(-values, axis=1, kind="stable")[:, 0]
            approve[np.flatnonzero(blank), top[blank]] = True
    elif empty != "abstain":
        raise InvalidParameterError(f"unknown empty-approval mode {empty!r}")
    return approve


def write_ballot_dump(directory, district_of, ballots) -> list[Path]:
    """One ``district_<s>.csv`` per district with columns ``elector_id,rule,choices``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    district_of = np.asarray(district_of)
    paths = []
    for s in np.unique(district_of).tolist():
        path = directory / f"district_{s}.csv"
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["elector_id", "rule", "choices"])
            for i in np.flatnonzero(district_of == s).tolist():
                b = ballots[i]
                w.writerow([i, b.rule, b.choices()])
        paths.append(path)
    return paths
