"""Run configuration for the evolutionary algorithms."""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace

from ..decoder import DEFAULT_PENALTY_RATE

ALGORITHMS = ("NSGA2", "NRGA", "SPEA2", "PESA2")
DEFAULT_FE_BUDGET = 300_000


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class AlgorithmConfig:
    algorithm: str
    population_size: int
    crossover_fraction: float
    mutation_fraction: float
    mutation_rate: float
    archive_size: int | None = None
    selection_pressure: int = 2
    deletion_pressure: int = 1
    grid_divisions: int = 10
    fe_budget: int = DEFAULT_FE_BUDGET
    seed: int = 0
    n_max: int | None = None
    penalty_rate: float = DEFAULT_PENALTY_RATE

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.population_size < 2:
            raise ConfigError("population_size must be >= 2")
        for name in ("crossover_fraction", "mutation_fraction", "mutation_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {v}")
        if self.fe_budget < self.population_size:
            raise ConfigError("fe_budget must be >= population_size")
        if self.algorithm in ("SPEA2", "PESA2") and (self.archive_size is None or self.archive_size < 1):
            raise ConfigError(f"{self.algorithm} needs archive_size >= 1")
        if self.selection_pressure < 1 or self.deletion_pressure < 1:
            raise ConfigError("tournament pressures must be >= 1")
        if self.grid_divisions < 1:
            raise ConfigError("grid_divisions must be >= 1")
        if self.n_max is not None and self.n_max < 1:
            raise ConfigError("n_max must be >= 1")
        if self.penalty_rate <= 0:
            raise ConfigError("penalty_rate must be > 0")

    @property
    def offspring_counts(self) -> tuple[int, int]:
        """(crossover children, mutants) per generation; crossover children come in pairs."""
        n = self.population_size
        n_cross = 2 * int(self.crossover_fraction * n / 2 + 0.5)
        n_mut = int(self.mutation_fraction * n + 0.5)
        return n_cross, n_mut

    def with_(self, **changes) -> AlgorithmConfig:
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)


_TUNED = {
    "NSGA2": dict(population_size=100, crossover_fraction=0.7, mutation_fraction=0.3, mutation_rate=0.03),
    "NRGA": dict(population_size=150, crossover_fraction=0.7, mutation_fraction=0.2, mutation_rate=0.05),
    "SPEA2": dict(population_size=100, archive_size=300, crossover_fraction=0.9, mutation_fraction=0.2,
                  mutation_rate=0.03),
    "PESA2": dict(population_size=100, archive_size=100, crossover_fraction=0.7, mutation_fraction=0.2,
                  mutation_rate=0.05, selection_pressure=3, deletion_pressure=3),
}


def default_config(algorithm: str, **overrides) -> AlgorithmConfig:
    """Tuned defaults for ``algorithm`` with optional field overrides."""
    key = algorithm.upper().replace("-", "").replace("II", "2")
    if key not in _TUNED:
        raise ConfigError(f"unknown algorithm {algorithm!r}")
    return AlgorithmConfig(algorithm=key, **{**_TUNED[key], **overrides})
