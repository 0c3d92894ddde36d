"""Primitives of the signaling model and integration settings."""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import ConfigError


@dataclass(frozen=True)
class ModelParams:
    """Market primitives.

    mu0 and tau2 are the mean and variance of latent worker productivity,
    sigma2 the variance of the per-application letter shock, p the share of
    workers with access to the writing tool, A the additive quality shift the
    tool produces, and N the number of applicants an employer compares.
    """

    mu0: float = 0.0
    tau2: float = 1.0
    sigma2: float = 1.0
    p: float = 0.5
    A: float = 1.0
    N: int = 3

    def __post_init__(self):
        if not self.tau2 > 0:
            raise ConfigError(f"tau2 must be > 0, got {self.tau2}")
        if not self.sigma2 > 0:
            raise ConfigError(f"sigma2 must be > 0, got {self.sigma2}")
        if not 0.0 < self.p < 1.0:
            raise ConfigError(f"p must lie in (0, 1), got {self.p}")
        if self.A < 0:
            raise ConfigError(f"A must be >= 0, got {self.A}")
        if int(self.N) < 1 or self.N != int(self.N):
            raise ConfigError(f"N must be an integer >= 1, got {self.N}")

    @property
    def total_var(self) -> float:
        """Variance of an observed letter: tau2 + sigma2."""
        return self.tau2 + self.sigma2

    @property
    def shrinkage(self) -> float:
        """Signal-extraction weight tau2 / (tau2 + sigma2)."""
        return self.tau2 / (self.tau2 + self.sigma2)

    def with_shift(self, A: float) -> "ModelParams":
        """Copy of these params with a different tool shift A."""
        return replace(self, A=float(A))


#: Parameterization used for all reference curve tables.
FIGURE_PARAMS = ModelParams(mu0=0.0, sigma2=1.0, tau2=1.0, p=0.5, N=3, A=1.0)


@dataclass(frozen=True)
class IntegrationConfig:
    """How rival-letter and shock integrals are evaluated.

    monte_carlo draws everything jointly from one substream; gauss_hermite
    uses tensor-product quadrature over the rival dimensions and is meant
    as an independent cross-check for small N.
    """

    method: str = "monte_carlo"
    draws: int = 200_000
    nodes: int = 64
    seed: int = 0

    def __post_init__(self):
        if self.method not in ("monte_carlo", "gauss_hermite"):
            raise ConfigError(f"unknown integration method {self.method!r}")
        if self.method == "monte_carlo" and self.draws < 1000:
            raise ConfigError(f"draws must be >= 1000 for monte_carlo, got {self.draws}")
        if self.method == "gauss_hermite" and self.nodes < 16:
            raise ConfigError(f"nodes must be >= 16 for gauss_hermite, got {self.nodes}")
        if self.draws < 1:
            raise ConfigError("draws must be positive")
        if self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
