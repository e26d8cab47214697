"""Validated view of one experiment's section of the merged config."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from linalg.errors import ConfigError, InvalidParameter
from risk.montecarlo import McConfig

logger = logging.getLogger(__name__)

EXPERIMENTS = ("ar1_sweep", "cluster_sweep", "offdiag_study", "descent_curve", "verify")

_REQUIRED = {
    "ar1_sweep": ("n", "p", "features", "sigma2", "rho2"),
    "cluster_sweep": ("n", "p", "features", "sizes", "rho", "sigma2_1", "sigma2_2"),
    "offdiag_study": ("n", "p", "features", "sizes", "rho", "rho_max", "sigma2_1", "sigma2_2"),
    "descent_curve": ("n", "features", "gammas", "kappa2", "r2"),
    "verify": (),
}

_GRIDS = {
    "ar1_sweep": ("sigma2", "rho2"),
    "cluster_sweep": ("sigma2_1", "sigma2_2"),
    "offdiag_study": ("sigma2_1", "sigma2_2"),
    "descent_curve": ("gammas", "kappa2"),
    "verify": (),
}

MAX_GAMMA = 100.0


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    seed: int
    mc: McConfig
    output_path: Path
    params: dict[str, Any]
    raw: dict = field(repr=False, default_factory=dict)
    timestamp: str | None = None

    @property
    def n(self) -> int | None:
        return self.params.get("n")

    @property
    def p(self) -> int | None:
        return self.params.get("p")

    def grid(self, key: str) -> list[float]:
        return [float(v) for v in self.params[key]]

    @classmethod
    def from_dict(cls, cfg: dict, experiment: str) -> "ExperimentConfig":
        if experiment not in EXPERIMENTS:
            raise ConfigError("experiment", f"expected one of {EXPERIMENTS}, got {experiment!r}")
        run = cfg.get("run") or {}
        section = cfg.get(experiment)
        if not isinstance(section, dict):
            raise ConfigError(experiment, "missing section")
        section = dict(section)

        for key in _REQUIRED[experiment]:
            if key not in section:
                raise ConfigError(f"{experiment}.{key}", "missing")
        for key in _GRIDS[experiment]:
            val = section[key]
            if not isinstance(val, list) or not val:
                raise ConfigError(f"{experiment}.{key}", "grid must be a non-empty list")
            try:
                section[key] = [float(v) for v in val]
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{experiment}.{key}", f"non-numeric grid value ({exc})") from exc
        for key in ("n", "p"):
            if key in section:
                section[key] = _positive_int(section[key], f"{experiment}.{key}")

        _VALIDATORS.get(experiment, lambda s: None)(section)

        try:
            seed = int(run.get("seed", 0))
        except (TypeError, ValueError) as exc:
            raise ConfigError("run.seed", str(exc)) from exc
        mc_cfg = dict(cfg.get("mc") or {})
        mc_cfg.update(seed=seed, threads=int(run.get("threads", 1)),
                      rank_tol=float(run.get("rank_tol", 1e-12)))
        try:
            mc = McConfig.from_dict(mc_cfg)
        except (InvalidParameter, TypeError) as exc:
            raise ConfigError("mc", str(exc)) from exc

        suffix = ".json" if experiment == "verify" else ".csv"
        out = section.get("output") or Path(run.get("output_dir", ".")) / f"{experiment}{suffix}"
        ts = run.get("timestamp")
        logger.debug("Validated %s config (seed=%d, output=%s)", experiment, seed, out)
        return cls(experiment=experiment, seed=seed, mc=mc, output_path=Path(out), params=section,
                   raw=cfg, timestamp=None if ts is None else str(ts))


# --------------------------------------------------------------------------- #
# Per-experiment checks
# --------------------------------------------------------------------------- #

def _positive_int(val: Any, name: str) -> int:
    try:
        out = int(val)
    except (TypeError, ValueError) as exc:
        raise ConfigError(name, f"expected an integer, got {val!r}") from exc
    if out < 1 or out != val:
        raise ConfigError(name, f"expected a positive integer, got {val!r}")
    return out


def _check_overparameterized(s: dict, name: str):
    if s["p"] <= s["n"]:
        raise ConfigError(f"{name}.p", f"need p > n, got n={s['n']}, p={s['p']}")


def _check_ar1(s: dict):
    _check_overparameterized(s, "ar1_sweep")
    bad = [v for v in s["sigma2"] if not v > 0]
    if bad:
        raise ConfigError("ar1_sweep.sigma2", f"values must be > 0, got {bad}")
    bad = [v for v in s["rho2"] if not 0 <= v < 1]
    if bad:
        raise ConfigError("ar1_sweep.rho2", f"values must lie in [0, 1), got {bad}")


def cluster_violations(sizes: list[int], rho: list[float], s1: list[float], s2: list[float]) -> list[str]:
    """Grid points (sigma_1^2, sigma_2^2) whose clustered Omega is not positive definite."""
    out = []
    for a in s1:
        for b in s2:
            for g, (size, var, r) in enumerate(zip(sizes, (a, b), rho)):
                if not var > 0 or (size > 1 and not -var / (size - 1) < r < var):
                    out.append(f"(sigma2_1={a!r}, sigma2_2={b!r}) group {g}")
                    break
    return out


def _check_groups(s: dict, name: str):
    _check_overparameterized(s, name)
    sizes = s["sizes"]
    if not isinstance(sizes, list) or len(sizes) != 2:
        raise ConfigError(f"{name}.sizes", "expected two group sizes")
    s["sizes"] = [_positive_int(v, f"{name}.sizes") for v in sizes]
    if sum(s["sizes"]) != s["n"]:
        raise ConfigError(f"{name}.sizes", f"group sizes sum to {sum(s['sizes'])}, expected n={s['n']}")
    rho = s["rho"]
    if not isinstance(rho, list) or len(rho) != 2:
        raise ConfigError(f"{name}.rho", "expected one rho per group")
    s["rho"] = [float(v) for v in rho]


def _check_cluster(s: dict):
    _check_groups(s, "cluster_sweep")
    bad = cluster_violations(s["sizes"], s["rho"], s["sigma2_1"], s["sigma2_2"])
    if bad:
        raise ConfigError("cluster_sweep", "clustered covariance not positive definite at " + "; ".join(bad))


def _check_offdiag(s: dict):
    _check_groups(s, "offdiag_study")
    rho_max = float(s["rho_max"])
    if rho_max < 0:
        raise ConfigError("offdiag_study.rho_max", f"must be >= 0, got {rho_max}")
    s["rho_max"] = rho_max
    # the random draws are bounded by rho_max, so checking the corner covers every draw
    bad = cluster_violations(s["sizes"], s["rho"], s["sigma2_1"], s["sigma2_2"])
    bad += cluster_violations(s["sizes"], [rho_max, rho_max], s["sigma2_1"], s["sigma2_2"])
    if bad:
        raise ConfigError("offdiag_study", "clustered covariance not positive definite at " + "; ".join(bad))


def _check_descent(s: dict):
    n = s["n"]
    for g in s["gammas"]:
        if not 1 < g <= MAX_GAMMA:
            raise ConfigError("descent_curve.gammas", f"gamma={g!r} outside (1, {MAX_GAMMA:g}]")
        if round(n * g) <= n:
            raise ConfigError("descent_curve.gammas", f"gamma={g!r} gives p={round(n * g)} <= n={n}")
    bad = [v for v in s["kappa2"] if not v > 0]
    if bad:
        raise ConfigError("descent_curve.kappa2", f"levels must be > 0, got {bad}")
    s["r2"] = float(s["r2"])
    if s["r2"] < 0:
        raise ConfigError("descent_curve.r2", f"must be >= 0, got {s['r2']}")


_VALIDATORS = {
    "ar1_sweep": _check_ar1,
    "cluster_sweep": _check_cluster,
    "offdiag_study": _check_offdiag,
    "descent_curve": _check_descent,
}
