"""Tagged-record (de)serialization of covariance specs: {kind, parameters}."""

from __future__ import annotations

from typing import Any

import numpy as np

from linalg.errors import ConfigError, RiskLabError
from models.features import (
    FEATURE_KINDS,
    FeatureModel,
    build_explicit_features,
    build_isotropic_features,
    build_sigma_haar_spectrum,
)
from models.noise import (
    NOISE_KINDS,
    ClusterGroup,
    NoiseCovariance,
    build_ar1,
    build_ar1_rho2,
    build_clustered,
    build_explicit_noise,
    build_isotropic,
)
from sampler.streams import RandomStream


def noise_from_record(record: dict, n: int | None = None, field: str = "noise") -> NoiseCovariance:
    kind = record.get("kind")
    params = dict(record.get("parameters") or {})
    if kind not in NOISE_KINDS:
        raise ConfigError(f"{field}.kind", f"expected one of {NOISE_KINDS}, got {kind!r}")
    try:
        if kind == "isotropic":
            return build_isotropic(int(params.get("n", n)), float(params["sigma2"]))
        if kind == "ar1":
            size = int(params.get("n", n))
            if "rho2" in params:
                return build_ar1_rho2(size, float(params["sigma2"]), float(params["rho2"]),
                                      negative=bool(params.get("negative", False)))
            return build_ar1(size, float(params["sigma2"]), float(params["rho"]))
        if kind == "clustered":
            return build_clustered([tuple(g) for g in params["groups"]])
        return build_explicit_noise(np.asarray(params["matrix"], dtype=float))
    except KeyError as exc:
        raise ConfigError(f"{field}.parameters.{exc.args[0]}", "missing") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, RiskLabError):
            raise
        raise ConfigError(f"{field}.parameters", str(exc)) from exc


def noise_to_record(noise: NoiseCovariance) -> dict:
    if noise.kind == "isotropic":
        params: dict[str, Any] = {"n": noise.n, "sigma2": noise.params["sigma2"]}
    elif noise.kind == "ar1":
        params = {"n": noise.n, "sigma2": noise.params["sigma2"]}
        # echo the parametrisation the caller chose
        if noise.params.get("by_rho2"):
            params["rho2"] = noise.params["rho2"]
            if noise.params["rho"] < 0:
                params["negative"] = True
        else:
            params["rho"] = noise.params["rho"]
    elif noise.kind == "clustered":
        params = {"groups": [[g.size, g.sigma2, g.rho] for g in noise.params["groups"]]}
    else:
        params = {"matrix": noise.omega.tolist()}
    return {"kind": noise.kind, "parameters": params}


def features_from_record(record: dict, p: int | None = None, seed: int = 0,
                         field: str = "features") -> FeatureModel:
    kind = record.get("kind")
    params = dict(record.get("parameters") or {})
    if kind not in FEATURE_KINDS:
        raise ConfigError(f"{field}.kind", f"expected one of {FEATURE_KINDS}, got {kind!r}")
    try:
        size = params.get("p", p)
        scale = float(params.get("scale", 1.0))
        # unit_mean: eigenvalues average to one instead of summing to one
        if params.get("unit_mean") and kind == "haar_spectrum":
            scale = float(size)
        if kind == "isotropic":
            return build_isotropic_features(int(size), scale)
        if kind == "haar_spectrum":
            rng = RandomStream(int(params.get("seed", seed)), int(params.get("stream_id", 0)))
            return build_sigma_haar_spectrum(int(size), rng, scale)
        return build_explicit_features(np.asarray(params["matrix"], dtype=float))
    except KeyError as exc:
        raise ConfigError(f"{field}.parameters.{exc.args[0]}", "missing") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, RiskLabError):
            raise
        raise ConfigError(f"{field}.parameters", str(exc)) from exc


def features_to_record(features: FeatureModel) -> dict:
    if features.kind == "isotropic":
        params: dict[str, Any] = {"p": features.p, "scale": features.scale}
    elif features.kind == "haar_spectrum":
        params = {"p": features.p, "scale": features.scale, **features.params}
    else:
        params = {"matrix": features.sigma.tolist()}
    return {"kind": features.kind, "parameters": params}


__all__ = [
    "ClusterGroup",
    "features_from_record",
    "features_to_record",
    "noise_from_record",
    "noise_to_record",
]
