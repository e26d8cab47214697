"""Self-contained verification suite: algebraic identities, Haar averages,
trace-only dependence, bias formulas and the s* solver, end to end.

Each check returns a CheckResult; the report is written as JSON and the
command fails if any check fails.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np
import scipy.linalg

from asymptotics.stieltjes import SpectrumMeasure, s_star_bounds, solve_s_star, stieltjes_rhs
from config.experiment import ExperimentConfig
from estimator.alignment import alignment_matrix
from estimator.conditional import var_pred_conditional
from experiments import BaseExperiment, ExperimentResult
from experiments.output import write_json
from linalg.dense import min_norm_solve, pseudo_inverse, svd_thin
from models.features import build_isotropic_features, build_sigma_haar_spectrum
from models.noise import build_ar1_rho2, build_clustered, build_explicit_noise, build_isotropic
from risk.montecarlo import McConfig, McEstimate, Target, agree_within, mc_expected_bias2, run_design_pass
from risk.theory import theory_bias2, theory_bias2_exact_pred
from sampler.draws import gaussian_design, haar_orthogonal
from sampler.streams import RandomStream

logger = logging.getLogger(__name__)

STREAM_VERIFY = 31
PENROSE_TOL = 1e-8
STOCHASTIC_TOL = 1e-8
RECONSTRUCTION_TOL = 1e-6
S_STAR_TOL = 1e-10

DEFAULT_SETTINGS = {
    "penrose_matrices": 1000,
    "min_norm_instances": 10,
    "min_norm_perturbations": 1000,
    "alignment_instances": 100,
    "haar_draws": 10000,
    "haar_rotations": 2000,
    "stieltjes_cases": 200,
    "bias_n_beta": 10000,
    "inject_fault": False,
}


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    observed: float
    expected: float
    tolerance: float
    detail: str = ""

    def to_record(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


def _result(name: str, observed: float, expected: float, tolerance: float, detail: str = "") -> CheckResult:
    passed = bool(abs(observed - expected) <= tolerance)
    return CheckResult(name, passed, float(observed), float(expected), float(tolerance), detail)


# --------------------------------------------------------------------------- #
# linalg
# --------------------------------------------------------------------------- #

def penrose_residual(a: np.ndarray, a_pinv: np.ndarray) -> float:
    """Largest relative violation of the four Penrose conditions."""
    def rel(lhs, rhs):
        return float(np.abs(lhs - rhs).max() / max(1.0, float(np.abs(rhs).max())))

    ap = a @ a_pinv
    pa = a_pinv @ a
    return max(rel(ap @ a, a), rel(a_pinv @ ap, a_pinv), rel(ap.T, ap), rel(pa.T, pa))


def random_low_rank(gen: np.random.Generator, max_dim: int = 8) -> np.ndarray:
    m, k = (int(v) for v in gen.integers(1, max_dim + 1, size=2))
    r = int(gen.integers(0, min(m, k) + 1))
    if r == 0:
        return np.zeros((m, k))
    return gen.standard_normal((m, r)) @ gen.standard_normal((r, k))


def check_penrose(rng: RandomStream, settings: dict, mc: McConfig) -> CheckResult:
    gen = rng.gen
    worst = 0.0
    count = int(settings["penrose_matrices"])
    for _ in range(count):
        a = random_low_rank(gen)
        worst = max(worst, penrose_residual(a, pseudo_inverse(a, mc.rank_tol)))
    return _result("penrose_conditions", worst, 0.0, PENROSE_TOL, f"{count} random matrices")


def check_min_norm(rng: RandomStream, settings: dict, mc: McConfig) -> CheckResult:
    gen = rng.gen
    instances = int(settings["min_norm_instances"])
    draws = int(settings["min_norm_perturbations"])
    violations = 0
    interp = 0.0
    for _ in range(instances):
        x = gen.standard_normal((3, 6))
        y = gen.standard_normal(3)
        beta = min_norm_solve(x, y, mc.rank_tol)
        interp = max(interp, float(np.abs(x @ beta - y).max()))
        null = scipy.linalg.null_space(x)
        others = beta[None, :] + gen.standard_normal((draws, null.shape[1])) @ null.T
        norms = np.linalg.norm(others, axis=1)
        violations += int(np.count_nonzero(norms < np.linalg.norm(beta) * (1.0 - 1e-12)))
    passed = violations == 0 and interp <= PENROSE_TOL
    return CheckResult("min_norm_optimality", passed, float(violations), 0.0, 0.0,
                       f"max interpolation error {interp:.3e} over {instances} instances")


# --------------------------------------------------------------------------- #
# Alignment matrix
# --------------------------------------------------------------------------- #

def _alignment_instances(rng: RandomStream, count: int, n: int = 5, p: int = 10):
    for i in range(count):
        features = build_sigma_haar_spectrum(p, rng.substream(i, 0), scale=float(p))
        a = rng.substream(i, 1).gen.standard_normal((n, n))
        noise = build_explicit_noise(a @ a.T + 0.5 * np.eye(n))
        x = gaussian_design(n, features, rng.substream(i, 2))
        yield x, features, noise


def check_doubly_stochastic(rng: RandomStream, settings: dict, mc: McConfig) -> CheckResult:
    count = int(settings["alignment_instances"])
    worst = 0.0
    for x, features, noise in _alignment_instances(rng, count):
        worst = max(worst, alignment_matrix(x, features, noise, mc.rank_tol).stochastic_deviation())
    return _result("alignment_doubly_stochastic", worst, 0.0, STOCHASTIC_TOL, f"{count} instances")


def check_reconstruction(rng: RandomStream, settings: dict, mc: McConfig) -> CheckResult:
    count = int(settings["alignment_instances"])
    worst = 0.0
    for x, features, noise in _alignment_instances(rng, count):
        direct = var_pred_conditional(x, noise, features, mc.rank_tol)
        via_gamma = alignment_matrix(x, features, noise, mc.rank_tol).reconstruct()
        worst = max(worst, abs(via_gamma - direct) / direct)
    return _result("alignment_reconstruction", worst, 0.0, RECONSTRUCTION_TOL,
                   "lambda((X^T X)^+ Sigma)^T Gamma lambda(Omega) vs ||S X^+ T||_F^2")


# --------------------------------------------------------------------------- #
# Haar sampling
# --------------------------------------------------------------------------- #

def check_haar_first_column(rng: RandomStream, settings: dict, mc: McConfig) -> CheckResult:
    draws = int(settings["haar_draws"])
    sign_fix = not settings["inject_fault"]
    cols = np.array([haar_orthogonal(3, rng, sign_fix)[:, 0] for _ in range(draws)])
    worst = float(np.abs(cols.mean(axis=0)).max())
    return _result("haar_first_column_mean", worst, 0.0, 3.0 / math.sqrt(draws),
                   f"n=3, {draws} draws, sign_fix={sign_fix}")


def check_haar_alignment(rng: RandomStream, settings: dict, mc: McConfig) -> CheckResult:
    """Haar average of Gamma(OX) is J/n, and the rotated left singular basis O U averages to zero.

    Gamma squares its entries, so a sampler with biased column signs still
    averages to J/n; the basis mean is the sign-sensitive half of the check.
    """
    rotations = int(settings["haar_rotations"])
    sign_fix = not settings["inject_fault"]
    n, p = 4, 8
    features = build_isotropic_features(p)
    noise = build_explicit_noise(np.diag(np.arange(1.0, n + 1.0)))
    x = gaussian_design(n, features, rng.substream(0))
    u = svd_thin(x, mc.rank_tol).u
    gen_rng = rng.substream(1)
    gamma_total = np.zeros((n, n))
    basis_total = np.zeros((n, n))
    for _ in range(rotations):
        o = haar_orthogonal(n, gen_rng, sign_fix)
        gamma_total += alignment_matrix(o @ x, features, noise, mc.rank_tol).gamma
        basis_total += o @ u
    gamma_dev = float(np.abs(gamma_total / rotations - 1.0 / n).max())
    basis_dev = float(np.linalg.norm(basis_total / rotations))
    gamma_tol = 5.0 / math.sqrt(rotations)
    # entries of O U have variance 1/n, so the Frobenius norm of their mean is about 2/sqrt(rotations)
    basis_tol = 3.5 / math.sqrt(rotations)
    passed = gamma_dev <= gamma_tol and basis_dev <= basis_tol
    return CheckResult("haar_average_alignment", passed, gamma_dev, 0.0, gamma_tol,
                       f"n={n}, {rotations} rotations, sign_fix={sign_fix}, "
                       f"basis mean {basis_dev:.3e} (tolerance {basis_tol:.3e})")


# --------------------------------------------------------------------------- #
# Risk
# --------------------------------------------------------------------------- #

def check_trace_only(rng: RandomStream, settings: dict, mc: McConfig) -> CheckResult:
    """Four covariances with Tr(Omega)/n = 1: identical theory, MC within 3 SE."""
    n, p = 10, 20
    features = build_sigma_haar_spectrum(p, rng.substream(0), scale=float(p))
    noises = [
        build_isotropic(n, 1.0),
        build_ar1_rho2(n, 1.0, 0.0),
        build_ar1_rho2(n, 0.75, 0.25),
        build_clustered([(5, 1.5, 0.1), (5, 0.5, 0.05)]),
    ]
    dp = run_design_pass(features, noises, n, mc)
    spread = 0.0
    disagreements = 0
    for target in Target:
        factor = dp.trace_factor(target)
        theory = [nz.trace / nz.n * factor.estimate for nz in noises]
        spread = max(spread, max(theory) - min(theory))
        for k, nz in enumerate(noises):
            th = McEstimate(nz.trace / nz.n * factor.estimate, nz.trace / nz.n * factor.std_error)
            if not agree_within(dp.variance(k, target), th):
                disagreements += 1
    passed = spread == 0.0 and disagreements == 0
    return CheckResult("trace_only_dependence", passed, spread, 0.0, 0.0,
                       f"{disagreements} MC estimates outside 3 SE")


def check_bias(rng: RandomStream, settings: dict, mc: McConfig) -> CheckResult:
    n, p, r2 = 20, 40, 1.0
    cfg = dataclasses.replace(mc, n_beta=int(settings["bias_n_beta"]))
    closed = theory_bias2(r2, n, p)
    iso = build_isotropic_features(p)
    aniso = build_sigma_haar_spectrum(p, rng.substream(0), scale=float(p))
    est = mc_expected_bias2(iso, n, p, r2, cfg, Target.ESTIMATION)
    pred_iso = mc_expected_bias2(iso, n, p, r2, cfg, Target.PREDICTION)
    pred_aniso = mc_expected_bias2(aniso, n, p, r2, cfg, Target.PREDICTION)
    exact = theory_bias2_exact_pred(aniso, n, r2, cfg)
    ok = {
        "estimation": agree_within(est, closed),
        "prediction_isotropic": agree_within(pred_iso, closed),
        "prediction_exact": agree_within(pred_aniso, exact),
        "exact_above_closed_form": exact.estimate >= closed * (1.0 - 1e-12),
    }
    failed = [k for k, v in ok.items() if not v]
    return CheckResult("bias_formula", not failed, est.estimate, closed, 3.0 * est.std_error,
                       "failed: " + ", ".join(failed) if failed else f"n={n}, p={p}, N_beta={cfg.n_beta}")


# --------------------------------------------------------------------------- #
# Asymptotics
# --------------------------------------------------------------------------- #

def check_stieltjes(rng: RandomStream, settings: dict, mc: McConfig) -> CheckResult:
    point = solve_s_star(SpectrumMeasure.point_mass(1.0), 2.0)
    two_atom = solve_s_star(SpectrumMeasure.from_atoms([0.5, 1.5], [0.5, 0.5]), 2.0)
    err = max(abs(point - 1.0), abs(two_atom - 2.0 / math.sqrt(3.0)))

    gen = rng.gen
    cases = int(settings["stieltjes_cases"])
    order_violations = 0
    residual = 0.0
    for _ in range(cases):
        k = int(gen.integers(1, 7))
        h = SpectrumMeasure.from_atoms(gen.uniform(0.05, 5.0, size=k), gen.dirichlet(np.ones(k)))
        gamma = float(gen.uniform(1.05, 20.0))
        s = solve_s_star(h, gamma)
        b = s_star_bounds(h, gamma)
        slack = 1e-9 * b.upper
        if not (b.lower <= b.tight_lower + slack and b.tight_lower <= s + slack and s <= b.upper + slack):
            order_violations += 1
        residual = max(residual, abs(stieltjes_rhs(h, s) - (1.0 - 1.0 / gamma)))
    passed = err <= S_STAR_TOL and order_violations == 0 and residual <= S_STAR_TOL
    return CheckResult("stieltjes_solver", passed, err, 0.0, S_STAR_TOL,
                       f"{order_violations} bound violations, max residual {residual:.3e} over {cases} cases")


CHECKS: list[Callable[[RandomStream, dict, McConfig], CheckResult]] = [
    check_penrose,
    check_min_norm,
    check_doubly_stochastic,
    check_reconstruction,
    check_haar_first_column,
    check_haar_alignment,
    check_trace_only,
    check_bias,
    check_stieltjes,
]


def run_checks(seed: int, settings: dict, mc: McConfig) -> list[CheckResult]:
    root = RandomStream(seed, STREAM_VERIFY)
    results = []
    for i, check in enumerate(CHECKS):
        res = check(root.substream(i), settings, mc)
        logger.info("Check %s: %s", res.name, "PASS" if res.passed else "FAIL")
        if not res.passed:
            logger.warning("Check %s failed: observed %.6g, expected %.6g, tolerance %.3g (%s)",
                           res.name, res.observed, res.expected, res.tolerance, res.detail)
        results.append(res)
    return results


class VerifyExperiment(BaseExperiment):
    @property
    def name(self) -> str:
        return "verify"

    @property
    def description(self) -> str:
        return "Run the invariant checks end to end; fails if any check fails."

    @property
    def columns(self) -> list[str]:
        return ["name", "passed", "observed", "expected", "tolerance", "detail"]

    def run(self, cfg: ExperimentConfig) -> ExperimentResult:
        settings = {**DEFAULT_SETTINGS, **{k: v for k, v in cfg.params.items() if k in DEFAULT_SETTINGS}}
        if settings["inject_fault"]:
            logger.warning("Fault injection enabled: Haar sampler runs without the sign correction")
        results = run_checks(cfg.seed, settings, cfg.mc)
        failed = [r for r in results if not r.passed]
        path = write_json(cfg.output_path, cfg, {
            "all_passed": not failed,
            "inject_fault": bool(settings["inject_fault"]),
            "checks": [r.to_record() for r in results],
        })
        error = None
        if failed:
            error = "; ".join(
                f"{r.name}: observed {r.observed:.6g}, expected {r.expected:.6g} +/- {r.tolerance:.3g}"
                for r in failed
            )
        return ExperimentResult(
            success=not failed,
            data={"checks": results, "passed": len(results) - len(failed), "failed": len(failed)},
            error=error,
            generated_files=[{"type": "json", "path": str(path), "label": self.name}],
        )
