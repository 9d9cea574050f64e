"""Monte Carlo policy comparison over simulated electorates.

Community shares and affinities are drawn once per *setting*. Party spreads,
the electorate, valuations and the influence weight are drawn per *run*.
Every policy in a run is evaluated on the identical scenario.

Random streams come from ``numpy.random.SeedSequence(seed, spawn_key=...)``
with key ``(setting,)`` for setting-level draws and ``(setting, run)`` for
run-level draws, so any run can be replayed on its own.
"""
from __future__ import annotations

import hashlib
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .config import SweepConfig
from .errors import InvalidParameterError, MalformedRecordsError
from .fairness import FairnessReport, fairness_report, nd_key, polarity
from .population import CommunityShares, Electorate, assign_communities, assign_districts, sample_community_shares
from .preferences import (
    AffinityMatrix,
    ValuationMatrix,
    apply_local_influence,
    rank_from_valuations,
    sample_affinity_matrix,
    sample_kappa,
    sample_party_variances,
    sample_valuations,
)
from .tally import ElectionOutcome, run_district_election

log = logging.getLogger(__name__)


def setting_rng(seed: int, setting: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(setting,)))


def run_rng(seed: int, setting: int, run: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(setting, run)))


def scenario_id(setting: int, run: int) -> str:
    return f"{setting}-{run}"


def parse_scenario_id(sid: str) -> tuple[int, int]:
    setting, run = sid.split("-")
    return int(setting), int(run)


def metric_names(config: SweepConfig) -> list[str]:
    return ["NR_pct", "NUR_pct", nd_key(config.depth), "NBC_mean", "PIRP", "PRP", "PBS"]


def csv_columns(config: SweepConfig) -> list[str]:
    return ["scenario_id", "policy", "seed", *metric_names(config), *(f"seats_{k}" for k in range(config.n_parties))]


def _digest(*arrays) -> str:
    h = hashlib.sha256()
    for a in arrays:
        h.update(np.ascontiguousarray(a).tobytes())
    return h.hexdigest()


@dataclass(frozen=True)
class Scenario:
    setting: int
    run: int
    shares: CommunityShares
    phi: AffinityMatrix
    sigma: np.ndarray
    electorate: Electorate
    raw: ValuationMatrix
    values: ValuationMatrix
    kappa: float | np.ndarray | None
    rankings: np.ndarray = field(repr=False)

    def digest(self) -> str:
        """Hash of everything a policy sees: districts, communities, valuations."""
        return _digest(self.electorate.district_of, self.electorate.community_of, self.values.values)

    def manifest(self) -> dict:
        kappa = self.kappa
        if isinstance(kappa, np.ndarray):
            kappa = {"mode": "elector", "mean": float(kappa.mean())}
        return {
            "scenario_id": scenario_id(self.setting, self.run),
            "setting": self.setting,
            "run": self.run,
            "theta": self.shares.shares.tolist(),
            "phi": self.phi.phi.tolist(),
            "sigma": self.sigma.tolist(),
            "kappa": kappa,
            "digest": self.digest(),
        }


def draw_setting(config: SweepConfig, setting: int) -> tuple[CommunityShares, AffinityMatrix]:
    rng = setting_rng(config.seed, setting)
    if config.theta is not None:
        shares = CommunityShares(config.theta)
    else:
        shares = sample_community_shares(config.n_communities, config.c_sbp, rng)
    if config.phi is not None:
        phi = AffinityMatrix(config.phi)
        if not phi.satisfies_mass_limit(shares):
            log.warning("fixed phi gives some party good relations with more than half the electorate")
    else:
        phi = sample_affinity_matrix(config.n_communities, config.n_parties, shares, rng)
    return shares, phi


def draw_run(config: SweepConfig, shares: CommunityShares, phi: AffinityMatrix, setting: int, run: int) -> Scenario:
    rng = run_rng(config.seed, setting, run)
    sigma = sample_party_variances(config.n_parties, config.gamma_shape, config.gamma_scale, rng, fixed=config.sigma)
    community = assign_communities(shares, config.n_electors, rng)
    district = assign_districts(
        community, config.n_districts, config.alpha, rng, n_communities=config.n_communities, weighting=config.crp_weighting
    )
    electorate = Electorate(config.n_districts, community, district, config.n_communities)
    raw = sample_valuations(electorate, phi, sigma, rng)
    kappa = None
    values = raw
    if config.influence_mode == "local":
        if config.kappa is not None:
            kappa = float(config.kappa)
        elif config.kappa_mode == "scenario":
            kappa = sample_kappa(config.beta_a, config.beta_b, rng)
        else:
            kappa = sample_kappa(config.beta_a, config.beta_b, rng, size=config.n_electors)
        values = apply_local_influence(raw, electorate, kappa)
    rankings = rank_from_valuations(values)
    rankings.setflags(write=False)
    return Scenario(setting, run, shares, phi, sigma, electorate, raw, values, kappa, rankings)


def simulate_scenario(config: SweepConfig, setting: int, run: int) -> Scenario:
    shares, phi = draw_setting(config, setting)
    return draw_run(config, shares, phi, setting, run)


@dataclass
class RunResult:
    scenario: Scenario
    outcomes: dict
    reports: dict

    def manifest(self) -> dict:
        return self.scenario.manifest()

    def records(self, config: SweepConfig) -> list[dict]:
        return [make_record(config, self.scenario.setting, self.scenario.run, p, self.outcomes[p], self.reports[p]) for p in config.policies]


def make_record(config: SweepConfig, setting: int, run: int, policy: str, outcome: ElectionOutcome, report: FairnessReport) -> dict:
    rec = {"scenario_id": scenario_id(setting, run), "policy": policy, "seed": config.seed}
    metrics = report.metrics()
    for m in metric_names(config):
        rec[m] = metrics[m]
    for k, v in enumerate(outcome.seats.tolist()):
        rec[f"seats_{k}"] = v
    return rec


def evaluate_policies(config: SweepConfig, scenario: Scenario) -> RunResult:
    outcomes, reports = {}, {}
    for policy in config.policies:
        outcome = run_district_election(
            scenario.electorate,
            scenario.values,
            policy,
            config.selection_policy,
            rankings=scenario.rankings,
            weights=config.weights,
            cutoff=config.approval_cutoff,
            empty_approval=config.empty_approval,
        )
        outcomes[policy] = outcome
        reports[policy] = fairness_report(
            outcome, scenario.rankings, scenario.electorate, depths=(config.depth,), mode=config.dissatisfaction
        )
    return RunResult(scenario, outcomes, reports)


def run_setting(config: SweepConfig, setting: int, run: int) -> RunResult:
    """Simulate one (setting, run) scenario and score every configured policy on it."""
    if not (0 <= setting and 0 <= run):
        raise InvalidParameterError("setting and run indices must be non-negative")
    return evaluate_policies(config, simulate_scenario(config, setting, run))


def _run_records(args):
    config, setting, run = args
    try:
        res = run_setting(config, setting, run)
    except Exception as exc:
        raise RuntimeError(f"run failed for seed={config.seed} setting={setting} run={run}: {exc}") from exc
    return res.manifest(), res.records(config)


@dataclass
class SweepResult:
    records: list
    summary: dict
    scenarios: list


def run_sweep(config: SweepConfig, workers: int = 1, progress=None) -> SweepResult:
    jobs = [(config, s, r) for s in range(config.n_settings) for r in range(config.runs_per_setting)]
    records, scenarios = [], []
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = pool.map(_run_records, jobs, chunksize=1)
            for man, recs in results:
                scenarios.append(man)
                records.extend(recs)
                if progress:
                    progress(man["scenario_id"])
    else:
        for job in jobs:
            man, recs = _run_records(job)
            scenarios.append(man)
            records.extend(recs)
            if progress:
                progress(man["scenario_id"])
    return SweepResult(records, summarize(records, config), scenarios)


def five_number(values) -> dict:
    v = np.asarray(values, dtype=float)
    q = np.percentile(v, [0, 25, 50, 75, 100])
    return dict(zip(("min", "q1", "median", "q3", "max"), map(float, q)))


def best_policy_counts(records, metric: str, polarity_: str | None = None, policies=None) -> dict:
    """Runs in which each policy is strictly best on ``metric``; exact ties award nobody."""
    pol = polarity_ or polarity(metric)
    if pol not in ("min", "max"):
        raise InvalidParameterError("polarity must be 'min' or 'max'")
    by_run: dict = {}
    for rec in records:
        by_run.setdefault(rec["scenario_id"], {})[rec["policy"]] = rec[metric]
    if policies is None:
        policies = sorted({rec["policy"] for rec in records})
    counts = {p: 0 for p in policies}
    for sid, vals in by_run.items():
        missing = set(policies) - set(vals)
        if missing:
            raise MalformedRecordsError(f"run {sid} lacks rows for {sorted(missing)}")
        sign = -1.0 if pol == "max" else 1.0
        keyed = sorted((sign * vals[p], p) for p in policies)
        if len(keyed) == 1 or keyed[0][0] < keyed[1][0]:
            counts[keyed[0][1]] += 1
    return counts


def summarize(records, config: SweepConfig) -> dict:
    metrics = metric_names(config)
    policies = list(config.policies)
    out = {"n_runs": len({r["scenario_id"] for r in records}), "policies": {}}
    best = {m: best_policy_counts(records, m, policies=policies) for m in metrics} if records else {}
    for p in policies:
        rows = [r for r in records if r["policy"] == p]
        entry = {}
        for m in metrics:
            vals = np.array([r[m] for r in rows], dtype=float)
            if vals.size == 0:
                continue
            entry[m] = {
                "mean": float(vals.sum() / vals.size),
                "std": float(vals.std()),
                **five_number(vals),
                "best_count": best[m][p],
            }
        if rows:
            seats = np.array([[r[f"seats_{k}"] for k in range(config.n_parties)] for r in rows], dtype=float)
            entry["seats_mean"] = (seats.sum(axis=0) / len(rows)).tolist()
        out["policies"][p] = entry
    return out


# -- closest-scenario retrieval ------------------------------------------------


@dataclass(frozen=True)
class ObservedResult:
    vote_shares: tuple
    seat_counts: tuple
    total_seats: int

    def __post_init__(self):
        v = np.asarray(self.vote_shares, dtype=float)
        s = np.asarray(self.seat_counts)
        if v.ndim != 1 or v.shape != s.shape:
            raise InvalidParameterError("vote_shares and seat_counts must be vectors of equal length")
        if np.any(v < 0) or np.any(v > 1) or v.sum() > 1 + 1e-9:
            raise InvalidParameterError("vote shares must lie in [0, 1] and sum to at most 1")
        if self.total_seats < 1 or np.any(s < 0) or s.sum() > self.total_seats:
            raise InvalidParameterError("seat counts must be non-negative and not exceed total_seats")

    @classmethod
    def from_dict(cls, d: dict) -> "ObservedResult":
        extra = set(d) - {"vote_shares", "seat_counts", "total_seats"}
        if extra:
            raise InvalidParameterError(f"{sorted(extra)[0]}: unknown key in observed result")
        try:
            return cls(tuple(d["vote_shares"]), tuple(int(x) for x in d["seat_counts"]), int(d["total_seats"]))
        except KeyError as exc:
            raise InvalidParameterError(f"{exc.args[0]}: missing from observed result") from None

    @property
    def n_parties(self) -> int:
        return len(self.vote_shares)


def _canonical(votes, seat_shares):
    """Reorder parties by placement: most seats first, popular vote breaks ties."""
    order = sorted(range(len(votes)), key=lambda k: (-seat_shares[k], -votes[k], k))
    return np.asarray(votes, dtype=float)[order], np.asarray(seat_shares, dtype=float)[order]


def match_distance(sim_votes, sim_seat_shares, obs_votes, obs_seat_shares, vote_weight: float = 0.5) -> float:
    sv, ss = _canonical(sim_votes, sim_seat_shares)
    ov, os_ = _canonical(obs_votes, obs_seat_shares)
    return float(vote_weight * np.abs(sv - ov).sum() + (1.0 - vote_weight) * np.abs(ss - os_).sum())


@dataclass(frozen=True)
class MatchResult:
    setting: int
    run: int
    seed: int
    distance: float
    vote_shares: list
    seat_counts: list
    manifest: dict


def simulate_popular_result(config: SweepConfig, setting: int, run: int = 0):
    """First-choice vote shares and 1-approval seats for one scenario."""
    scenario = simulate_scenario(config, setting, run)
    outcome = run_district_election(scenario.electorate, scenario.values, "1-approval", rankings=scenario.rankings)
    votes = np.bincount(scenario.rankings[:, 0], minlength=config.n_parties) / config.n_electors
    return scenario, votes, outcome.seats


def find_closest_scenario(observed: ObservedResult, config: SweepConfig, pool_size: int | None = None) -> MatchResult:
    """Simulate ``pool_size`` scenarios (setting ``i``, run 0) and return the one nearest ``observed``.

    Distance is ``w * L1(vote shares) + (1 - w) * L1(seat shares)`` with
    ``w = config.match_vote_weight``, after ordering parties by placement.
    The first member wins exact ties.
    """
    pool_size = config.pool_size if pool_size is None else pool_size
    if pool_size < 1:
        raise InvalidParameterError("pool_size must be at least 1")
    if observed.n_parties != config.n_parties:
        raise InvalidParameterError("observed result and configuration disagree on the number of parties")
    obs_votes = np.asarray(observed.vote_shares, dtype=float)
    obs_seats = np.asarray(observed.seat_counts, dtype=float) / observed.total_seats
    best = None
    for i in range(pool_size):
        scenario, votes, seats = simulate_popular_result(config, i, 0)
        d = match_distance(votes, seats / config.n_districts, obs_votes, obs_seats, config.match_vote_weight)
        if best is None or d < best[0]:
            best = (d, i, votes, seats, scenario.manifest())
    d, i, votes, seats, man = best
    return MatchResult(i, 0, config.seed, d, votes.tolist(), seats.tolist(), man)


def run_manifest(config_dict: dict, scenarios=None) -> dict:
    from . import _backend

    return {
        "schema": 1,
        "code_version": __version__,
        "kernel_backend": _backend.BACKEND,
        "config": config_dict,
        "seed_derivation": "numpy SeedSequence(seed, spawn_key=(setting,)) / (setting, run)",
        "scenarios": scenarios or [],
    }
