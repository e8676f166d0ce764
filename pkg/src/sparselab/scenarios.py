"""Simulation designs: covariance families, beta patterns and noise calibration."""
from __future__ import annotations

import zlib
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import ConfigError
from .linalg import Dataset, cholesky

SCENARIOS = ("S1", "S2", "S3a", "S3b")
DEFAULT_P = 100
RNG_ALGORITHM = "philox4x64-10"


@dataclass(frozen=True)
class CovarianceSpec:
    family: str
    p: int = DEFAULT_P
    rho: float = 0.0
    block_period: int = 10

    def __post_init__(self):
        if self.family not in ("identity", "block", "toeplitz"):
            raise ConfigError(f"unknown covariance family {self.family!r}")
        if self.p < 1:
            raise ConfigError("p must be positive")
        if self.family != "identity" and not 0 <= self.rho < 1:
            raise ConfigError(f"rho must lie in [0, 1), got {self.rho}")
        if self.block_period < 1:
            raise ConfigError("block_period must be positive")


def build_covariance(spec: CovarianceSpec) -> np.ndarray:
    p = spec.p
    idx = np.arange(p)
    if spec.family == "identity":
        sigma = np.eye(p)
    elif spec.family == "block":
        same = (idx[:, None] % spec.block_period) == (idx[None, :] % spec.block_period)
        sigma = np.where(same, spec.rho, 0.0)
        np.fill_diagonal(sigma, 1.0)
    else:
        sigma = spec.rho ** np.abs(idx[:, None] - idx[None, :]).astype(float)
    cholesky(sigma)
    return sigma


@dataclass(frozen=True)
class ScenarioSpec:
    """Generative description of one simulation cell.

    `beta_positions` are 0-based column indices; reports add one.
    """

    name: str
    n: int
    s: int
    beta_value: float
    beta_positions: tuple
    covariance: CovarianceSpec
    p: int = DEFAULT_P
    target_deviance: float = 0.9
    sigma2: float = field(default=float("nan"), compare=False)

    def __post_init__(self):
        if not 0 < self.target_deviance < 1:
            raise ConfigError("target deviance must lie in (0, 1)")
        if len(self.beta_positions) != self.s:
            raise ConfigError("beta_positions must list exactly s indices")
        if self.n < 2:
            raise ConfigError("n must be at least 2")
        object.__setattr__(self, "beta_positions", tuple(int(j) for j in self.beta_positions))
        if np.isnan(self.sigma2):
            object.__setattr__(self, "sigma2", calibrate_sigma2(self))

    @property
    def beta(self) -> np.ndarray:
        b = np.zeros(self.p)
        b[list(self.beta_positions)] = self.beta_value
        return b

    @property
    def rho(self) -> float:
        return self.covariance.rho

    def sigma_matrix(self) -> np.ndarray:
        return build_covariance(self.covariance)

    def with_n(self, n: int) -> "ScenarioSpec":
        return replace(self, n=n)


def make_scenario(name: str, n: int, s: Optional[int] = None, rho: Optional[float] = None,
                  p: int = DEFAULT_P, target_deviance: float = 0.9) -> ScenarioSpec:
    """Build one of the named designs S1, S2, S3a, S3b."""
    if name == "S1":
        if s is None:
            raise ConfigError("S1 needs s")
        if rho not in (None, 0, 0.0):
            raise ConfigError("S1 has identity covariance; rho does not apply")
        cov = CovarianceSpec("identity", p)
        return ScenarioSpec("S1", n, s, 1.25, tuple(range(s)), cov, p, target_deviance)
    if name == "S2":
        if s is None or rho is None:
            raise ConfigError("S2 needs s and rho")
        cov = CovarianceSpec("block", p, rho)
        return ScenarioSpec("S2", n, s, 1.0, tuple(range(s)), cov, p, target_deviance)
    if name == "S3a":
        if s not in (None, 15):
            raise ConfigError("S3a fixes s = 15")
        if rho is None:
            raise ConfigError("S3a needs rho")
        cov = CovarianceSpec("toeplitz", p, rho)
        return ScenarioSpec("S3a", n, 15, 0.5, tuple(range(15)), cov, p, target_deviance)
    if name == "S3b":
        if s not in (None, 10):
            raise ConfigError("S3b fixes s = 10")
        if rho is None:
            raise ConfigError("S3b needs rho")
        if p < 91:
            raise ConfigError("S3b needs p >= 91")
        cov = CovarianceSpec("toeplitz", p, rho)
        return ScenarioSpec("S3b", n, 10, 0.5, tuple(range(0, 100, 10)), cov, p,
                            target_deviance)
    raise ConfigError(f"unknown scenario {name!r}; expected one of {', '.join(SCENARIOS)}")


def signal_variance(spec: ScenarioSpec) -> float:
    """beta^T Sigma beta."""
    idx = list(spec.beta_positions)
    sub = build_covariance(spec.covariance)[np.ix_(idx, idx)]
    b = np.full(len(idx), spec.beta_value)
    return float(b @ sub @ b)


def calibrate_sigma2(spec: ScenarioSpec) -> float:
    """Noise variance giving population explained deviance `target_deviance`."""
    d = spec.target_deviance
    return signal_variance(spec) * (1 - d) / d


@dataclass(frozen=True)
class RngStream:
    """Labelled, reproducible random stream (Philox4x64, 256-bit counter)."""

    master_seed: int
    purpose: str = "data"
    index: int = 0

    @property
    def algorithm(self) -> str:
        return RNG_ALGORITHM

    def _seed_sequence(self) -> np.random.SeedSequence:
        tag = zlib.crc32(self.purpose.encode("utf-8"))
        return np.random.SeedSequence(entropy=int(self.master_seed),
                                      spawn_key=(tag, int(self.index)))

    def generator(self) -> np.random.Generator:
        """A fresh generator; identical labels always replay the same draws."""
        return np.random.Generator(np.random.Philox(self._seed_sequence()))

    def child(self, purpose: str, index: int = 0) -> "RngStream":
        label = f"{self.purpose}/{self.index}/{purpose}"
        return RngStream(self.master_seed, label, index)

    def seed_int(self) -> int:
        return int(self._seed_sequence().generate_state(1, np.uint64)[0])


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    return RngStream(int(rng), "adhoc").generator()


def sample_gaussian(sigma: np.ndarray, n: int, rng) -> np.ndarray:
    """n rows drawn i.i.d. from N(0, sigma) as z L^T."""
    low = cholesky(sigma).lower
    z = as_generator(rng).standard_normal((n, sigma.shape[0]))
    return z @ low.T


def generate_replication(spec: ScenarioSpec, rng):
    """Raw dataset y = X beta + eps plus the ground truth (beta, sigma2)."""
    gen = as_generator(rng)
    sigma = build_covariance(spec.covariance)
    low = cholesky(sigma).lower
    x = gen.standard_normal((spec.n, spec.p)) @ low.T
    beta = spec.beta
    eps = gen.standard_normal(spec.n) * np.sqrt(spec.sigma2)
    y = x @ beta + eps
    names = tuple(f"x{j + 1}" for j in range(spec.p))
    return Dataset(x, y, names=names), beta, spec.sigma2
