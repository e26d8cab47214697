"""Base experiment interface and the experiment registry."""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

from linalg.errors import ConfigError

if TYPE_CHECKING:
    from config.experiment import ExperimentConfig

logger = logging.getLogger(__name__)

__version__ = "0.3.0"

# ---------------------------------------------------------------------------
# Experiment result container
# ---------------------------------------------------------------------------


@dataclass
class ExperimentResult:
    success: bool
    data: Any = None
    error: str | None = None
    generated_files: list[dict] | None = None  # [{"type": "csv"|"json", "path": "...", "label": "..."}]
    config_error: bool = False

    def __str__(self):
        if self.success:
            return str(self.data)
        return f"[ERROR] {self.error}"


# ---------------------------------------------------------------------------
# Abstract base for every experiment
# ---------------------------------------------------------------------------


class BaseExperiment(ABC):
    """Every experiment exposes a name, a description, its output columns and a run() method."""

    @property
    @abstractmethod
    def name(self) -> str: ...

    @property
    @abstractmethod
    def description(self) -> str: ...

    @property
    @abstractmethod
    def columns(self) -> list[str]:
        """Fixed output schema, in column order."""
        ...

    @abstractmethod
    def run(self, cfg: "ExperimentConfig") -> ExperimentResult: ...


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------


@dataclass
class ExperimentRegistry:
    _experiments: dict[str, BaseExperiment] = field(default_factory=dict)

    def register(self, experiment: BaseExperiment):
        self._experiments[experiment.name] = experiment

    def get(self, name: str) -> BaseExperiment | None:
        return self._experiments.get(name)

    def all_experiments(self) -> list[BaseExperiment]:
        return list(self._experiments.values())

    def names(self) -> list[str]:
        return list(self._experiments.keys())

    def call(self, name: str, cfg: "ExperimentConfig") -> ExperimentResult:
        experiment = self.get(name)
        if experiment is None:
            return ExperimentResult(success=False, error=f"Unknown experiment: {name}")
        try:
            return experiment.run(cfg)
        except ConfigError as exc:
            logger.error("Experiment %s rejected its config: %s", name, exc)
            return ExperimentResult(success=False, error=str(exc), config_error=True)
        except Exception as exc:
            logger.error("Experiment %s raised: %s", name, exc, exc_info=True)
            return ExperimentResult(success=False, error=str(exc))


def default_registry() -> ExperimentRegistry:
    from experiments.descent import DescentCurveExperiment
    from experiments.sweeps import Ar1SweepExperiment, ClusterSweepExperiment, OffdiagStudyExperiment
    from experiments.verify import VerifyExperiment

    registry = ExperimentRegistry()
    registry.register(Ar1SweepExperiment())
    registry.register(ClusterSweepExperiment())
    registry.register(OffdiagStudyExperiment())
    registry.register(DescentCurveExperiment())
    registry.register(VerifyExperiment())
    return registry
