"""Run configuration: JSON schema, defaults and validation.

Configuration files are flat JSON objects. ``schema`` must be 1. Unknown keys
are rejected. Fixed overrides (``theta``, ``phi``, ``sigma``, ``kappa``) are
kept exactly as written so that they round-trip into the manifest unchanged.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .fairness import DISSATISFACTION_MODES
from .tally import POLICIES, selection_from_dict

SCHEMA_VERSION = 1

REQUIRED = ("n_electors", "n_districts", "n_communities", "n_parties")


@dataclass(frozen=True)
class SweepConfig:
    n_electors: int
    n_districts: int
    n_communities: int
    n_parties: int
    seed: int = 0
    n_settings: int = 1
    runs_per_setting: int = 1
    policies: tuple = POLICIES
    influence_mode: str = "individual"
    kappa_mode: str = "scenario"
    depth: int = 2
    dissatisfaction: str = "local"
    c_sbp: float = 4.0
    alpha: float = 0.9
    crp_weighting: str = "count"
    gamma_shape: float = 2.0
    gamma_scale: float = 1.0
    beta_a: float = 2.0
    beta_b: float = 2.0
    approval_cutoff: float = 0.0
    empty_approval: str = "abstain"
    weights: tuple = (1.0, 0.5)
    selection: dict = field(default_factory=lambda: {"kind": "top_one"})
    theta: list | None = None
    phi: list | None = None
    sigma: list | None = None
    kappa: float | None = None
    pool_size: int = 100
    match_vote_weight: float = 0.5

    def __post_init__(self):
        validate(self)

    @property
    def selection_policy(self):
        return selection_from_dict(self.selection)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["policies"] = list(self.policies)
        d["weights"] = list(self.weights)
        return {"schema": SCHEMA_VERSION, **d}

    def with_overrides(self, **kw) -> "SweepConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


@dataclass(frozen=True)
class RunConfiguration:
    sweep: SweepConfig
    out_dir: str = "out"
    workers: int = 1
    formats: tuple = ("csv",)

    def to_dict(self) -> dict:
        return {**self.sweep.to_dict(), "out_dir": self.out_dir, "workers": self.workers, "formats": list(self.formats)}


SWEEP_KEYS = {f.name for f in fields(SweepConfig)}
RUN_KEYS = {"out_dir", "workers", "formats"}
ALL_KEYS = SWEEP_KEYS | RUN_KEYS | {"schema"}


def _is_int(v):
    return isinstance(v, (int, np.integer)) and not isinstance(v, bool)


def _is_num(v):
    return (isinstance(v, (int, float, np.integer, np.floating))) and not isinstance(v, bool)


def _fail(key, msg):
    raise ConfigError(f"{key}: {msg}")


def validate(c: SweepConfig) -> None:
    for key in ("n_electors", "n_districts", "n_communities", "n_parties", "n_settings", "runs_per_setting", "depth", "pool_size"):
        v = getattr(c, key)
        if not _is_int(v) or v < 1:
            _fail(key, f"must be a positive integer, got {v!r}")
    if not _is_int(c.seed) or c.seed < 0:
        _fail("seed", f"must be a non-negative integer, got {c.seed!r}")
    if c.n_electors % c.n_districts:
        raise ConfigError("n_districts must divide n_electors")
    for key in ("c_sbp", "gamma_shape", "gamma_scale", "beta_a", "beta_b"):
        v = getattr(c, key)
        if not _is_num(v) or not v > 0:
            _fail(key, f"must be a positive number, got {v!r}")
    if not _is_num(c.alpha) or not 0 <= c.alpha <= 1:
        _fail("alpha", "must lie in [0, 1]")
    if not _is_num(c.match_vote_weight) or not 0 <= c.match_vote_weight <= 1:
        _fail("match_vote_weight", "must lie in [0, 1]")
    if not _is_num(c.approval_cutoff):
        _fail("approval_cutoff", "must be a number")
    if c.crp_weighting not in ("count", "share"):
        _fail("crp_weighting", "must be 'count' or 'share'")
    if c.influence_mode not in ("individual", "local"):
        _fail("influence_mode", "must be 'individual' or 'local'")
    if c.kappa_mode not in ("scenario", "elector"):
        _fail("kappa_mode", "must be 'scenario' or 'elector'")
    if c.dissatisfaction not in DISSATISFACTION_MODES:
        _fail("dissatisfaction", f"must be one of {DISSATISFACTION_MODES}")
    if c.empty_approval not in ("abstain", "top1"):
        _fail("empty_approval", "must be 'abstain' or 'top1'")

    policies = tuple(c.policies)
    if not policies:
        _fail("policies", "must list at least one policy")
    for p in policies:
        if p not in POLICIES:
            _fail("policies", f"unknown policy {p!r}; choose from {', '.join(POLICIES)}")
    if len(set(policies)) != len(policies):
        _fail("policies", "duplicate policy")
    k = c.n_parties
    if k < 2 and set(policies) & {"2-approval", "weighted-2-approval", "negative-vote", "transferable-vote"}:
        _fail("policies", "2-approval, weighted-2-approval, negative-vote and transferable-vote need n_parties >= 2")
    weights = tuple(c.weights)
    if not weights or not all(_is_num(w) for w in weights):
        _fail("weights", "must be a non-empty list of numbers")
    if len(weights) > k:
        _fail("weights", f"k={len(weights)} approval weights exceed n_parties={k}")
    if c.depth > k:
        _fail("depth", f"depth {c.depth} exceeds n_parties={k}")
    try:
        selection_from_dict(c.selection)
    except (KeyError, TypeError, ValueError) as exc:
        _fail("selection", str(exc))

    if c.theta is not None:
        theta = np.asarray(c.theta, dtype=float)
        if theta.shape != (c.n_communities,):
            _fail("theta", f"must have n_communities={c.n_communities} entries")
        if np.any(theta < 0) or abs(theta.sum() - 1) > 1e-9:
            _fail("theta", "must be non-negative and sum to 1")
    if c.phi is not None:
        try:
            phi = np.asarray(c.phi, dtype=float)
        except ValueError:
            _fail("phi", "must be a rectangular matrix")
        if phi.shape != (c.n_communities, k):
            _fail("phi", f"must be n_communities x n_parties = {c.n_communities} x {k} (rows are communities)")
        if not np.isin(phi, (-1, 0, 1)).all():
            _fail("phi", "entries must be -1, 0 or 1")
    if c.sigma is not None:
        sigma = np.asarray(c.sigma, dtype=float)
        if sigma.shape != (k,) or np.any(sigma <= 0):
            _fail("sigma", f"must be {k} positive numbers")
    if c.kappa is not None and (not _is_num(c.kappa) or not 0 <= c.kappa <= 1):
        _fail("kappa", "must lie in [0, 1]")


def config_from_dict(data: dict) -> RunConfiguration:
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    # a manifest carries the resolved configuration under "config"
    if "config" in data and "code_version" in data:
        data = data["config"]
    unknown = sorted(set(data) - ALL_KEYS)
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown configuration key")
    schema = data.get("schema", SCHEMA_VERSION)
    if schema != SCHEMA_VERSION:
        raise ConfigError(f"schema: unsupported version {schema!r}, expected {SCHEMA_VERSION}")
    for key in REQUIRED:
        if key not in data:
            raise ConfigError(f"{key}: required key missing")
    sweep_kw = {k: v for k, v in data.items() if k in SWEEP_KEYS}
    for key in ("policies", "weights"):
        if key in sweep_kw:
            if not isinstance(sweep_kw[key], list):
                raise ConfigError(f"{key}: must be a list")
            sweep_kw[key] = tuple(sweep_kw[key])
    if "selection" in sweep_kw and not isinstance(sweep_kw["selection"], dict):
        raise ConfigError("selection: must be an object")
    sweep = SweepConfig(**sweep_kw)

    out_dir = data.get("out_dir", "out")
    workers = data.get("workers", 1)
    formats = data.get("formats", ["csv"])
    if not isinstance(out_dir, str) or not out_dir:
        raise ConfigError("out_dir: must be a non-empty string")
    if not _is_int(workers) or workers < 1:
        raise ConfigError("workers: must be a positive integer")
    if not isinstance(formats, list) or not formats or not set(formats) <= {"csv", "jsonl"}:
        raise ConfigError("formats: must be a non-empty list drawn from 'csv' and 'jsonl'")
    return RunConfiguration(sweep, out_dir, workers, tuple(formats))


def load_config(path) -> RunConfiguration:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    return config_from_dict(data)
