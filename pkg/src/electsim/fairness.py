"""Elector satisfaction measures for an election outcome.

Each elector is represented (their favourite party won their district),
indirectly represented (it won only elsewhere) or unrepresented (it won
nowhere). Party-level groupings use the elector's top-ranked party.

Parity scores are population variances across parties of: represented and
indirectly represented electors as a percentage of the whole electorate, and
the mean Borda score of each party's supporters.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError
from .population import Electorate
from .tally import ElectionOutcome

log = logging.getLogger(__name__)

REPRESENTED, INDIRECT, UNREPRESENTED = 0, 1, 2

# metric name -> which direction is better
POLARITY = {
    "NR_pct": "max",
    "NUR_pct": "min",
    "NBC_mean": "max",
    "PIRP": "min",
    "PRP": "min",
    "PBS": "min",
}

DISSATISFACTION_MODES = ("unrepresented", "local")


def nd_key(depth: int) -> str:
    return f"ND{depth}_pct"


def polarity(metric: str) -> str:
    if metric.startswith("ND") and metric.endswith("_pct"):
        return "min"
    try:
        return POLARITY[metric]
    except KeyError:
        raise InvalidParameterError(f"unknown metric {metric!r}") from None


@dataclass(frozen=True)
class ElectorClasses:
    """Per-elector status codes plus the d-dissatisfied flag for one depth."""

    status: np.ndarray
    dissatisfied: np.ndarray
    depth: int

    @property
    def represented(self):
        return self.status == REPRESENTED

    @property
    def indirect(self):
        return self.status == INDIRECT

    @property
    def unrepresented(self):
        return self.status == UNREPRESENTED


def _positions(rankings: np.ndarray) -> np.ndarray:
    """``pos[i, k]``: 0-based place of party k in elector i's ranking."""
    n, k = rankings.shape
    pos = np.empty_like(rankings)
    pos[np.arange(n)[:, None], rankings] = np.arange(k)
    return pos


def _check(outcome: ElectionOutcome, rankings: np.ndarray, electorate: Electorate):
    rankings = np.asarray(rankings)
    if rankings.ndim != 2 or rankings.shape[0] != electorate.n_electors:
        raise InvalidParameterError("rankings must be N x K for the electorate")
    if rankings.shape[1] != outcome.n_parties:
        raise InvalidParameterError("rankings and outcome disagree on the number of parties")
    if outcome.n_districts != electorate.n_districts:
        raise InvalidParameterError("outcome and electorate disagree on the number of districts")
    return rankings


def _dissatisfied(elected_here, pos, status, depth, mode):
    near = (elected_here & (pos < depth)).any(axis=1)
    if mode == "unrepresented":
        return (status == UNREPRESENTED) & ~near
    if mode == "local":
        return ~near
    raise InvalidParameterError(f"unknown dissatisfaction mode {mode!r}")


def classify_electors(
    outcome: ElectionOutcome,
    rankings,
    electorate: Electorate,
    depth: int = 2,
    mode: str = "unrepresented",
) -> ElectorClasses:
    """Represented / indirect / unrepresented status and d-dissatisfaction.

    ``mode="unrepresented"`` flags an elector as d-dissatisfied only when
    unrepresented and no winner of their district is in their top ``depth``;
    ``mode="local"`` drops the unrepresented requirement.
    """
    if depth < 1:
        raise InvalidParameterError("dissatisfaction depth must be at least 1")
    rankings = _check(outcome, rankings, electorate)
    mask = outcome.elected_mask()
    top = rankings[:, 0]
    here = mask[electorate.district_of]
    represented = here[np.arange(top.size), top]
    won_anywhere = mask.any(axis=0)[top]
    status = np.full(top.size, UNREPRESENTED, dtype=np.int8)
    status[won_anywhere] = INDIRECT
    status[represented] = REPRESENTED
    dissatisfied = _dissatisfied(here, _positions(rankings), status, depth, mode)
    return ElectorClasses(status, dissatisfied, depth)


def borda_scores(outcome: ElectionOutcome, rankings, electorate: Electorate):
    """Per-elector Borda score of their district's winner(s).

    Returns ``(scores, total, mean)``. Score is ``K - 1 - position`` averaged
    over the district's elected; electors of districts with no winner get NaN
    and are left out of the total and mean.
    """
    rankings = _check(outcome, rankings, electorate)
    k = rankings.shape[1]
    here = outcome.elected_mask()[electorate.district_of]
    n_elected = here.sum(axis=1)
    gain = np.where(here, (k - 1) - _positions(rankings), 0).sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        scores = np.where(n_elected > 0, gain / np.maximum(n_elected, 1), np.nan)
    missing = int((n_elected == 0).sum())
    if missing:
        log.warning("%d elector(s) in districts without winners excluded from Borda totals", missing)
    valid = ~np.isnan(scores)
    total = float(scores[valid].sum())
    mean = total / valid.sum() if valid.any() else float("nan")
    return scores, total, float(mean)


def partywise_parity(per_party_values) -> float:
    """Population variance across parties."""
    v = np.asarray(per_party_values, dtype=float)
    if v.size < 1:
        raise InvalidParameterError("need at least one party")
    if np.all(v == v[0]):
        # the mean of equal floats can round away from them
        return 0.0
    return float(np.mean((v - v.mean()) ** 2))


@dataclass(frozen=True)
class FairnessReport:
    n_electors: int
    nr: int
    nur: int
    n_indirect: int
    nd: dict
    nbc_total: float
    nbc_mean: float
    r_by_party: np.ndarray = field(repr=False)
    ir_by_party: np.ndarray = field(repr=False)
    bc_by_party: np.ndarray = field(repr=False)
    supporters_by_party: np.ndarray = field(repr=False)
    prp: float
    pirp: float
    pbs: float

    def pct(self, count) -> float:
        return 100.0 * count / self.n_electors

    @property
    def nr_pct(self) -> float:
        return self.pct(self.nr)

    @property
    def nur_pct(self) -> float:
        return self.pct(self.nur)

    def nd_pct(self, depth: int) -> float:
        return self.pct(self.nd[depth])

    def metrics(self) -> dict:
        """Flat metric dict keyed by the CSV column names."""
        out = {"NR_pct": self.nr_pct, "NUR_pct": self.nur_pct}
        for d in sorted(self.nd):
            out[nd_key(d)] = self.nd_pct(d)
        out.update(NBC_mean=self.nbc_mean, PIRP=self.pirp, PRP=self.prp, PBS=self.pbs)
        return out

    def to_dict(self) -> dict:
        return {
            "n_electors": self.n_electors,
            "NR": self.nr,
            "NUR": self.nur,
            "indirect": self.n_indirect,
            "ND": {str(d): c for d, c in sorted(self.nd.items())},
            "NBC_total": self.nbc_total,
            **self.metrics(),
            "R_by_party_pct": self.r_by_party.tolist(),
            "IR_by_party_pct": self.ir_by_party.tolist(),
            "BC_by_party": self.bc_by_party.tolist(),
            "supporters_by_party": self.supporters_by_party.tolist(),
        }


def fairness_report(
    outcome: ElectionOutcome,
    rankings,
    electorate: Electorate,
    depths=(2,),
    mode: str = "unrepresented",
) -> FairnessReport:
    depths = sorted({int(d) for d in depths})
    if not depths:
        raise InvalidParameterError("need at least one dissatisfaction depth")
    rankings = _check(outcome, rankings, electorate)
    n, k = rankings.shape
    top = rankings[:, 0]

    base = classify_electors(outcome, rankings, electorate, depths[0], mode)
    nd = {depths[0]: int(base.dissatisfied.sum())}
    for d in depths[1:]:
        nd[d] = int(classify_electors(outcome, rankings, electorate, d, mode).dissatisfied.sum())

    scores, total, mean = borda_scores(outcome, rankings, electorate)
    supporters = np.bincount(top, minlength=k)
    r_by = 100.0 * np.bincount(top[base.represented], minlength=k) / n
    ir_by = 100.0 * np.bincount(top[base.indirect], minlength=k) / n
    valid = ~np.isnan(scores)
    bc_sum = np.bincount(top[valid], weights=scores[valid], minlength=k)
    bc_cnt = np.bincount(top[valid], minlength=k)
    with np.errstate(invalid="ignore", divide="ignore"):
        bc_by = np.where(bc_cnt > 0, bc_sum / np.maximum(bc_cnt, 1), np.nan)
    # parties nobody ranks first have no supporter mean and sit out of PBS
    has = bc_cnt > 0
    pbs = partywise_parity(bc_by[has]) if has.any() else 0.0

    return FairnessReport(
        n_electors=n,
        nr=int(base.represented.sum()),
        nur=int(base.unrepresented.sum()),
        n_indirect=int(base.indirect.sum()),
        nd=nd,
        nbc_total=total,
        nbc_mean=mean,
        r_by_party=r_by,
        ir_by_party=ir_by,
        bc_by_party=bc_by,
        supporters_by_party=supporters,
        prp=partywise_parity(r_by),
        pirp=partywise_parity(ir_by),
        pbs=pbs,
    )
