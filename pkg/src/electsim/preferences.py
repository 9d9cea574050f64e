"""Community-party affinities, party spreads and elector valuations."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidParameterError
from .population import CommunityShares, Electorate

__all__ = [
    "AffinityMatrix",
    "ValuationMatrix",
    "MAX_AFFINITY_REJECTIONS",
    "good_mass",
    "sample_affinity_matrix",
    "sample_party_variances",
    "sample_valuations",
    "apply_local_influence",
    "sample_kappa",
    "rank_from_valuations",
    "write_valuations_csv",
]

MAX_AFFINITY_REJECTIONS = 10_000
GOOD_MASS_LIMIT = 0.5
_MASS_TOL = 1e-12


def good_mass(column, shares) -> float:
    """Population share of the communities on good terms (+1) with one party."""
    column = np.asarray(column)
    shares = shares.shares if isinstance(shares, CommunityShares) else np.asarray(shares, dtype=float)
    return float(shares[column == 1].sum())


@dataclass(frozen=True)
class AffinityMatrix:
    """``phi[c, k]`` in {-1, 0, +1}: community ``c``'s relation to party ``k``."""

    phi: np.ndarray

    def __post_init__(self):
        phi = np.array(self.phi, dtype=np.int64)
        if phi.ndim != 2 or phi.size == 0:
            raise InvalidParameterError("affinity matrix must be a non-empty C x K matrix")
        if not np.isin(phi, (-1, 0, 1)).all():
            raise InvalidParameterError("affinity entries must be -1, 0 or 1")
        phi.setflags(write=False)
        object.__setattr__(self, "phi", phi)

    @property
    def n_communities(self) -> int:
        return self.phi.shape[0]

    @property
    def n_parties(self) -> int:
        return self.phi.shape[1]

    def satisfies_mass_limit(self, shares) -> bool:
        return all(good_mass(self.phi[:, k], shares) <= GOOD_MASS_LIMIT + _MASS_TOL for k in range(self.n_parties))


@dataclass(frozen=True)
class ValuationMatrix:
    values: np.ndarray
    kind: str = "raw"

    def __post_init__(self):
        if self.kind not in ("raw", "influenced"):
            raise InvalidParameterError(f"unknown valuation kind {self.kind!r}")
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise InvalidParameterError("valuations must be an N x K matrix")
        if not np.all(np.isfinite(values)):
            raise InvalidParameterError("valuations must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def shape(self):
        return self.values.shape


def sample_affinity_matrix(n_communities: int, n_parties: int, shares: CommunityShares, rng: np.random.Generator) -> AffinityMatrix:
    """Uniform {-1, 0, 1} entries, each party column redrawn until its good-relation mass is at most one half."""
    if n_communities < 1 or n_parties < 1:
        raise InvalidParameterError("n_communities and n_parties must be at least 1")
    if len(shares) != n_communities:
        raise InvalidParameterError("shares length does not match n_communities")
    phi = np.empty((n_communities, n_parties), dtype=np.int64)
    for k in range(n_parties):
        for _ in range(MAX_AFFINITY_REJECTIONS):
            col = rng.integers(-1, 2, size=n_communities)
            if good_mass(col, shares) <= GOOD_MASS_LIMIT + _MASS_TOL:
                phi[:, k] = col
                break
        else:
            raise RuntimeError(f"affinity rejection sampler exceeded {MAX_AFFINITY_REJECTIONS} draws for party {k}")
    return AffinityMatrix(phi)


def sample_party_variances(
    n_parties: int,
    shape: float,
    scale: float,
    rng: np.random.Generator,
    fixed=None,
) -> np.ndarray:
    """Gamma(shape, scale) spread per party; ``fixed`` bypasses sampling entirely."""
    if fixed is not None:
        sigma = np.array(fixed, dtype=np.float64)
        if sigma.shape != (n_parties,):
            raise InvalidParameterError(f"fixed sigma must have {n_parties} entries")
    else:
        if not (shape > 0 and scale > 0):
            raise InvalidParameterError("gamma shape and scale must be positive")
        sigma = rng.gamma(shape, scale, size=n_parties)
    if not np.all(sigma > 0):
        raise InvalidParameterError("party spreads must be positive")
    sigma.setflags(write=False)
    return sigma


def sample_valuations(electorate: Electorate, phi: AffinityMatrix, sigma, rng: np.random.Generator) -> ValuationMatrix:
    """Gaussian valuation per (elector, party), mean ``phi[C(i), k]``; ``sigma`` is the standard deviation."""
    sigma = np.asarray(sigma, dtype=np.float64)
    if phi.n_parties != sigma.size:
        raise InvalidParameterError("sigma length does not match the number of parties")
    if electorate.community_of.max() >= phi.n_communities:
        raise InvalidParameterError("electorate has more communities than the affinity matrix")
    mean = phi.phi[electorate.community_of].astype(np.float64)
    noise = rng.standard_normal(mean.shape)
    noise *= sigma
    noise += mean
    return ValuationMatrix(noise, "raw")


def district_means(values: np.ndarray, electorate: Electorate) -> np.ndarray:
    """Per-district mean valuation, shape ``(S, K)``."""
    s, k = electorate.n_districts, values.shape[1]
    sums = np.zeros((s, k))
    for j in range(k):
        sums[:, j] = np.bincount(electorate.district_of, weights=values[:, j], minlength=s)
    return sums / electorate.capacity


def apply_local_influence(values: ValuationMatrix, electorate: Electorate, kappa) -> ValuationMatrix:
    """Blend each valuation with its district mean (the elector included).

    ``kappa`` is a scalar, or a length-N vector for per-elector mixing.
    """
    kappa = np.asarray(kappa, dtype=np.float64)
    if np.any(kappa < 0) or np.any(kappa > 1):
        raise InvalidParameterError("kappa must lie in [0, 1]")
    lam = values.values
    if lam.shape[0] != electorate.n_electors:
        raise InvalidParameterError("valuations and electorate disagree on N")
    if kappa.ndim == 0:
        k = float(kappa)
        if k == 1.0:
            return ValuationMatrix(lam, "influenced")
        mixed = k * lam + (1.0 - k) * district_means(lam, electorate)[electorate.district_of]
    else:
        if kappa.shape != (lam.shape[0],):
            raise InvalidParameterError("per-elector kappa must have one entry per elector")
        kc = kappa[:, None]
        mixed = kc * lam + (1.0 - kc) * district_means(lam, electorate)[electorate.district_of]
    return ValuationMatrix(mixed, "influenced")


def sample_kappa(a: float, b: float, rng: np.random.Generator, size=None):
    if not (a > 0 and b > 0):
        raise InvalidParameterError("beta parameters must be positive")
    draw = rng.beta(a, b, size=size)
    return float(draw) if size is None else draw


def rank_from_valuations(values) -> np.ndarray:
    """Party indices per elector, highest valuation first; exact ties go to the lower index."""
    lam = values.values if isinstance(values, ValuationMatrix) else np.asarray(values, dtype=np.float64)
    return np.argsort(-lam, axis=-1, kind="stable")


def write_valuations_csv(values: ValuationMatrix, path) -> None:
    path = Path(path)
    k = values.shape[1]
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["elector_id", *(f"party_{j}" for j in range(k))])
        for i, row in enumerate(values.values.tolist()):
            w.writerow([i, *(repr(x) for x in row)])
