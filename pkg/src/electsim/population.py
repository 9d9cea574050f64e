"""Synthetic electorates: community shares, community labels and districts.

Districts are filled by a Chinese Restaurant Process in which an elector is
drawn towards districts already holding members of their own community, with
every district capped at exactly ``N / S`` residents.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _backend
from .errors import InvalidParameterError

__all__ = [
    "CommunityShares",
    "Electorate",
    "sample_community_shares",
    "assign_communities",
    "assign_districts",
    "segregation_index",
    "write_electorate_csv",
]


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class CommunityShares:
    shares: np.ndarray

    def __post_init__(self):
        shares = _frozen(self.shares, np.float64)
        if shares.ndim != 1 or shares.size < 1:
            raise InvalidParameterError("community shares must be a non-empty vector")
        if np.any(shares < 0) or not np.all(np.isfinite(shares)):
            raise InvalidParameterError("community shares must be finite and non-negative")
        if abs(shares.sum() - 1.0) > 1e-9:
            raise InvalidParameterError(f"community shares sum to {shares.sum()!r}, not 1")
        object.__setattr__(self, "shares", shares)

    def __len__(self):
        return self.shares.size


@dataclass(frozen=True)
class Electorate:
    """Community and district label of every elector.

    ``community_of`` and ``district_of`` are read-only int64 arrays of length
    ``n_electors``; every district holds exactly ``n_electors // n_districts``
    electors.
    """

    n_districts: int
    community_of: np.ndarray
    district_of: np.ndarray
    n_communities: int | None = None

    def __post_init__(self):
        community = _frozen(self.community_of, np.int64)
        district = _frozen(self.district_of, np.int64)
        if community.shape != district.shape or community.ndim != 1:
            raise InvalidParameterError("community_of and district_of must be equal-length vectors")
        n, s = community.size, int(self.n_districts)
        if s < 1 or n < 1 or n % s:
            raise InvalidParameterError("n_districts must divide n_electors")
        if district.min() < 0 or district.max() >= s:
            raise InvalidParameterError("district label out of range")
        if np.any(np.bincount(district, minlength=s) != n // s):
            raise InvalidParameterError("every district must hold exactly n_electors / n_districts electors")
        n_comm = int(community.max()) + 1 if self.n_communities is None else int(self.n_communities)
        if community.min() < 0 or community.max() >= n_comm:
            raise InvalidParameterError("community label out of range")
        object.__setattr__(self, "community_of", community)
        object.__setattr__(self, "district_of", district)
        object.__setattr__(self, "n_districts", s)
        object.__setattr__(self, "n_communities", n_comm)

    @property
    def n_electors(self) -> int:
        return self.community_of.size

    @property
    def capacity(self) -> int:
        return self.n_electors // self.n_districts

    def composition(self) -> np.ndarray:
        """District-by-community head counts, shape ``(S, C)``."""
        flat = self.district_of * self.n_communities + self.community_of
        return np.bincount(flat, minlength=self.n_districts * self.n_communities).reshape(
            self.n_districts, self.n_communities
        )


def sample_community_shares(n_communities: int, concentration: float, rng: np.random.Generator) -> CommunityShares:
    """Truncated stick-breaking: ``C - 1`` Beta(1, c) sticks, residual mass to the last community."""
    if n_communities < 1:
        raise InvalidParameterError("n_communities must be at least 1")
    if not concentration > 0:
        raise InvalidParameterError("stick-breaking concentration must be positive")
    sticks = rng.beta(1.0, concentration, size=n_communities - 1)
    shares = np.empty(n_communities)
    remaining = 1.0
    for j, v in enumerate(sticks):
        shares[j] = v * remaining
        remaining *= 1.0 - v
    shares[-1] = 1.0 - shares[:-1].sum()
    return CommunityShares(np.clip(shares, 0.0, None))


def assign_communities(shares: CommunityShares, n_electors: int, rng: np.random.Generator) -> np.ndarray:
    if n_electors < 1:
        raise InvalidParameterError("n_electors must be at least 1")
    p = shares.shares
    # searchsorted on the CDF avoids Generator.choice's re-normalisation check
    cdf = np.cumsum(p)
    cdf[-1] = 1.0
    u = rng.random(n_electors)
    labels = np.searchsorted(cdf, u, side="right").astype(np.int64)
    return np.minimum(labels, p.size - 1)


def assign_districts(
    community_of: np.ndarray,
    n_districts: int,
    clustering: float,
    rng: np.random.Generator,
    n_communities: int | None = None,
    backend: str | None = None,
    weighting: str = "count",
) -> np.ndarray:
    """Seat electors into equal-population districts, in ascending elector order.

    With ``weighting="count"`` elector ``i`` of community ``c`` joins open
    district ``s`` with probability proportional to
    ``alpha * n_s(c) + (1 - alpha) / n_open``, where ``n_s(c)`` counts
    community-``c`` residents already in ``s``. With ``weighting="share"`` the
    attraction term is normalised first, giving the fixed mixture
    ``alpha * n_s(c) / sum_open n(c) + (1 - alpha) / n_open``. Full districts
    close. When no open district holds anyone from ``c`` the choice is uniform.
    """
    community_of = np.ascontiguousarray(community_of, dtype=np.int64)
    n = community_of.size
    if n_districts < 1 or n % n_districts:
        raise InvalidParameterError("n_districts must divide n_electors")
    if not 0.0 <= clustering <= 1.0:
        raise InvalidParameterError("clustering alpha must lie in [0, 1]")
    if weighting not in ("count", "share"):
        raise InvalidParameterError(f"unknown CRP weighting {weighting!r}")
    if n and community_of.min() < 0:
        raise InvalidParameterError("community labels must be non-negative")
    n_comm = int(community_of.max()) + 1 if n_communities is None else int(n_communities)
    u_branch = rng.random(n)
    u_pick = rng.random(n)
    if backend is None:
        kernel = _backend.crp_assign
    elif backend == "python":
        kernel = _backend.crp_assign_python
    elif backend == "cython":
        if _backend.crp_assign_compiled is None:
            raise InvalidParameterError("compiled kernel is not built")
        kernel = _backend.crp_assign_compiled
    else:
        raise InvalidParameterError(f"unknown backend {backend!r}")
    return kernel(community_of, int(n_districts), n_comm, float(clustering), u_branch, u_pick, weighting == "share")


def segregation_index(electorate: Electorate) -> float:
    """Mean share of the locally largest community, averaged over districts."""
    comp = electorate.composition()
    return float((comp.max(axis=1) / electorate.capacity).mean())


def write_electorate_csv(electorate: Electorate, path) -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["elector_id", "community", "district"])
        for i, (c, s) in enumerate(zip(electorate.community_of.tolist(), electorate.district_of.tolist())):
            w.writerow([i, c, s])
