"""Seeded Monte Carlo harness for the streaming estimators.

Replicates are independent work units: replicate i draws its observations
from ``default_rng(SeedSequence(master_seed, spawn_key=(i,)))``, so its
stream depends only on (master_seed, i). Replicates are processed in fixed
blocks of ``BLOCK_LANES`` lanes that advance in lockstep through the
recursion; worker threads pick up whole blocks and the final reduction walks
the replicate axis in index order. Together this makes every report a pure
function of the plan, bit for bit, whatever the thread count.

Reported quantities per evaluation point x and sample size n:

  * bias:      mean of (avg_n(x) - r(x)) and its ratio to h_n^2, against the
               oracle (1-q)/(1-q-2a) * m2(x)
  * variance:  n h_n * Var[avg_n(x)], against the oracle
               (1-q)^2/(1+a-2q) * Var[Y|X=x] * intK2 / f(x)
  * tail:      -log(exceedance frequency)/(n h_n) per threshold, paired with
               the large-deviation rate at that threshold
  * mdp:       sample variance of n^v (avg_n(x) - r(x)) rescaled to the
               implied Gaussian variance, against the same variance oracle
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .estimators import EstimatorState
from .kernels import Kernel
from .models import Model
from .ratefn import (
    CumulantContext,
    EstimatorKind,
    large_deviation_rate,
    moderate_factor,
)
from .schedules import ScheduleConfig, ValidationError

__all__ = [
    "ExperimentPlan",
    "ExperimentReport",
    "averaged_sigma2",
    "run_bias_experiment",
    "run_variance_experiment",
    "run_tail_experiment",
    "run_mdp_experiment",
    "EXPERIMENT_KINDS",
]

BLOCK_LANES = 256
SAMPLE_CHUNK = 4096
X_INTERIOR = (0.2, 0.8)
EXPERIMENT_KINDS = ("bias", "variance", "tail", "mdp")


def averaged_sigma2(a: float, q: float, cond_var: float, f_x: float,
                    kernel: Kernel) -> float:
    """Limit of n h_n Var[avg_n(x)] for the averaged estimator."""
    factor = moderate_factor(EstimatorKind.AVERAGED, a, q)
    return cond_var * kernel.squared_integral / (f_x * factor)


@dataclass(frozen=True)
class ExperimentPlan:
    model: Model
    schedule: ScheduleConfig
    kernel: Kernel
    x_points: tuple[float, ...]
    n_list: tuple[int, ...]
    replicates: int
    master_seed: int
    r0: float = 0.0
    v_exponent: float | None = None
    tail_thresholds: tuple[float, ...] = ()
    two_sided: bool = False
    track_baselines: bool = False

    def validate(self, experiment: str = "bias") -> None:
        problems = [v.message for v in self.schedule.validate()]
        if self.replicates < 2:
            problems.append("replicates must be at least 2")
        if not self.x_points:
            problems.append("need at least one evaluation point")
        lo, hi = X_INTERIOR
        for x in self.x_points:
            if not lo < x < hi:
                problems.append(
                    f"evaluation point {x!r} outside the interior window ({lo}, {hi})"
                )
        if not self.n_list or any(
            b <= a for a, b in zip(self.n_list, self.n_list[1:])
        ):
            problems.append("n_list must be nonempty and strictly increasing")
        if any(n < 1 for n in self.n_list):
            problems.append("sample sizes must be positive")
        if experiment == "mdp":
            a = self.schedule.a
            v = self.v_exponent
            if v is None:
                problems.append("mdp experiment needs v_exponent")
            else:
                if not v > 0:
                    problems.append(f"v_exponent {v!r} must be positive")
                if not 2 * v < 1 - a:
                    problems.append(
                        f"v_n^2/(n h_n) does not vanish: 2*v = {2 * v:g} "
                        f">= 1 - a = {1 - a:g}"
                    )
                if not v < 2 * a:
                    problems.append(
                        f"v_n h_n^2 does not vanish: v = {v:g} >= 2*a = {2 * a:g}"
                    )
        if experiment == "tail" and not self.tail_thresholds:
            problems.append("tail experiment needs tail_thresholds")
        if problems:
            raise ValidationError("; ".join(problems))

    def describe(self) -> dict:
        meta = {
            **self.model.describe(),
            "kernel": self.kernel.name,
            "alpha": self.schedule.alpha,
            "a": self.schedule.a,
            "q": self.schedule.q,
            "c": self.schedule.c,
            "c_prime": self.schedule.c_prime,
            "gamma0": self.schedule.gamma0,
            "r0": self.r0,
            "replicates": self.replicates,
            "master_seed": self.master_seed,
            "x_points": list(self.x_points),
            "n_list": list(self.n_list),
        }
        if self.v_exponent is not None:
            meta["v_exponent"] = self.v_exponent
        if self.tail_thresholds:
            meta["tail_thresholds"] = list(self.tail_thresholds)
            meta["two_sided"] = self.two_sided
        return meta


@dataclass
class ExperimentReport:
    kind: str
    meta: dict
    columns: list[str]
    rows: list[dict] = field(default_factory=list)


def _replicate_rng(master_seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(index,)))


def _run_block(plan: ExperimentPlan, rep_lo: int, rep_hi: int) -> dict:
    lanes = rep_hi - rep_lo
    grid = np.asarray(plan.x_points, dtype=float)
    gens = [_replicate_rng(plan.master_seed, i) for i in range(rep_lo, rep_hi)]
    state = EstimatorState(grid, plan.schedule, plan.kernel, r0=plan.r0, lanes=lanes)
    n_max = plan.n_list[-1]
    snapshots = {}
    if plan.track_baselines:
        h_by_n = {n: plan.schedule.bandwidth(n) for n in plan.n_list}
        nw_num = {n: np.zeros((grid.size, lanes)) for n in plan.n_list}
        nw_den = {n: np.zeros((grid.size, lanes)) for n in plan.n_list}
    pending = list(plan.n_list)
    done = 0
    x_chunk = np.empty((SAMPLE_CHUNK, lanes))
    y_chunk = np.empty((SAMPLE_CHUNK, lanes))
    while done < n_max:
        m = min(SAMPLE_CHUNK, n_max - done)
        for j, gen in enumerate(gens):
            xj, yj = plan.model.sample_batch(gen, m)
            x_chunk[:m, j] = xj
            y_chunk[:m, j] = yj
        for i in range(m):
            x_obs = x_chunk[i]
            y_obs = y_chunk[i]
            state.update(x_obs, y_obs)
            if plan.track_baselines:
                for n_s in pending:
                    k = plan.kernel.fn((grid[:, None] - x_obs[None, :]) / h_by_n[n_s])
                    nw_num[n_s] += k * y_obs
                    nw_den[n_s] += k
            if pending and state.n == pending[0]:
                snap = {
                    "avg": state.averaged(),
                    "rec": state.current(),
                    "semirec": state.semi_recursive(),
                }
                if plan.track_baselines:
                    den = nw_den[state.n]
                    safe = np.where(den == 0.0, 1.0, den)
                    snap["nw"] = np.where(den == 0.0, 0.0, nw_num[state.n] / safe)
                snapshots[state.n] = snap
                pending.pop(0)
        done += m
    return snapshots


def _simulate(plan: ExperimentPlan, threads: int = 1) -> dict:
    """Per sample size, per estimator: an (x_points, replicates) matrix."""
    blocks = [
        (lo, min(lo + BLOCK_LANES, plan.replicates))
        for lo in range(0, plan.replicates, BLOCK_LANES)
    ]
    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda b: _run_block(plan, *b), blocks))
    else:
        results = [_run_block(plan, *b) for b in blocks]
    merged = {}
    for n in plan.n_list:
        merged[n] = {
            key: np.concatenate([res[n][key] for res in results], axis=1)
            for key in results[0][n]
        }
    return merged


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    mean = float(np.mean(values))
    se = float(np.std(values, ddof=1) / math.sqrt(values.size))
    return mean, se


def run_bias_experiment(plan: ExperimentPlan, threads: int = 1) -> ExperimentReport:
    plan.validate("bias")
    sched = plan.schedule
    sims = _simulate(plan, threads)
    columns = ["x", "n", "h_n", "mean_error", "se_mean", "bias_ratio",
               "bias_ratio_se", "oracle_ratio"]
    report = ExperimentReport("bias", plan.describe(), columns)
    denom = 1.0 - sched.q - 2.0 * sched.a  # positive on the admissible region
    for ix, x in enumerate(plan.x_points):
        r_true = plan.model.regression(x)
        m2 = plan.model.curvature(x, plan.kernel)
        oracle = (1.0 - sched.q) / denom * m2
        for n in plan.n_list:
            h = sched.bandwidth(n)
            err = sims[n]["avg"][ix] - r_true
            mean, se = _mean_se(err)
            report.rows.append({
                "x": x, "n": n, "h_n": h,
                "mean_error": mean, "se_mean": se,
                "bias_ratio": mean / h**2, "bias_ratio_se": se / h**2,
                "oracle_ratio": oracle,
            })
    return report


def run_variance_experiment(plan: ExperimentPlan, threads: int = 1) -> ExperimentReport:
    plan.validate("variance")
    sched = plan.schedule
    sims = _simulate(plan, threads)
    columns = ["x", "n", "h_n", "sample_var", "variance_scaled",
               "variance_scaled_se", "oracle"]
    report = ExperimentReport("variance", plan.describe(), columns)
    for ix, x in enumerate(plan.x_points):
        f_x = plan.model.density(x)
        oracle = averaged_sigma2(sched.a, sched.q, plan.model.cond_var(x), f_x,
                                 plan.kernel)
        for n in plan.n_list:
            h = sched.bandwidth(n)
            vals = sims[n]["avg"][ix]
            var = float(np.var(vals, ddof=1))
            scaled = n * h * var
            # normal-theory standard error of a sample variance
            se = scaled * math.sqrt(2.0 / (vals.size - 1))
            report.rows.append({
                "x": x, "n": n, "h_n": h, "sample_var": var,
                "variance_scaled": scaled, "variance_scaled_se": se,
                "oracle": oracle,
            })
    return report


def _expected_exceedances(plan: ExperimentPlan, x: float, n: int, t: float) -> float:
    sched = plan.schedule
    sigma2 = averaged_sigma2(sched.a, sched.q, plan.model.cond_var(x),
                             plan.model.density(x), plan.kernel)
    if sigma2 <= 0:
        return 0.0
    z = t * math.sqrt(n * sched.bandwidth(n) / sigma2)
    p = 0.5 * math.erfc(z / math.sqrt(2.0))
    if plan.two_sided:
        p *= 2.0
    return plan.replicates * p


def run_tail_experiment(plan: ExperimentPlan, threads: int = 1,
                        rate_oracle=None) -> ExperimentReport:
    """Empirical tail exponents -log(freq)/(n h_n) per threshold.

    ``rate_oracle``: optional callable t -> rate value, defaulting to the
    numeric large-deviation rate for the plan's model and exponents. Cells
    with zero exceedances report log(replicates)/(n h_n), a lower bound on
    the exponent, and are flagged.
    """
    plan.validate("tail")
    sched = plan.schedule
    smallest = plan.n_list[0]
    for x in plan.x_points:
        for t in plan.tail_thresholds:
            expected = _expected_exceedances(plan, x, smallest, t)
            if expected < 10:
                warnings.warn(
                    f"threshold {t} at n={smallest} expects ~{expected:.1f} "
                    "exceedances; the tail cell will be noisy",
                    stacklevel=2,
                )
    if rate_oracle is None:
        contexts = {
            x: CumulantContext(plan.model, plan.kernel, sched.a, sched.q, x)
            for x in plan.x_points
        }
        rate_values = {
            (x, t): large_deviation_rate(contexts[x], t)
            for x in plan.x_points for t in plan.tail_thresholds
        }
    else:
        rate_values = {
            (x, t): rate_oracle(t)
            for x in plan.x_points for t in plan.tail_thresholds
        }
    sims = _simulate(plan, threads)
    columns = ["x", "n", "threshold", "count", "freq", "tail_logprob",
               "tail_logprob_se", "oracle_rate", "zero_exceedances"]
    report = ExperimentReport("tail", plan.describe(), columns)
    for ix, x in enumerate(plan.x_points):
        r_true = plan.model.regression(x)
        for n in plan.n_list:
            nh = n * sched.bandwidth(n)
            err = sims[n]["avg"][ix] - r_true
            for t in plan.tail_thresholds:
                if plan.two_sided:
                    count = int(np.count_nonzero(np.abs(err) >= t))
                else:
                    count = int(np.count_nonzero(err >= t))
                zero = count == 0
                if zero:
                    logprob = math.log(plan.replicates) / nh  # lower bound
                    se = math.nan
                else:
                    freq = count / plan.replicates
                    logprob = -math.log(freq) / nh
                    se = math.sqrt((1.0 - freq) / count) / nh
                report.rows.append({
                    "x": x, "n": n, "threshold": t, "count": count,
                    "freq": count / plan.replicates,
                    "tail_logprob": logprob, "tail_logprob_se": se,
                    "oracle_rate": rate_values[(x, t)],
                    "zero_exceedances": zero,
                })
    return report


def run_mdp_experiment(plan: ExperimentPlan, threads: int = 1) -> ExperimentReport:
    plan.validate("mdp")
    sched = plan.schedule
    sims = _simulate(plan, threads)
    columns = ["x", "n", "v_n", "sample_var_scaled", "implied_sigma2",
               "oracle_sigma2", "skewness", "excess_kurtosis",
               "implied_rate_t1", "oracle_rate_t1"]
    report = ExperimentReport("mdp", plan.describe(), columns)
    for ix, x in enumerate(plan.x_points):
        r_true = plan.model.regression(x)
        oracle_sigma2 = averaged_sigma2(sched.a, sched.q, plan.model.cond_var(x),
                                        plan.model.density(x), plan.kernel)
        for n in plan.n_list:
            v_n = float(n) ** plan.v_exponent
            nh = n * sched.bandwidth(n)
            scaled = v_n * (sims[n]["avg"][ix] - r_true)
            s2 = float(np.var(scaled, ddof=1))
            centered = scaled - np.mean(scaled)
            sd = math.sqrt(s2) if s2 > 0 else math.nan
            skew = float(np.mean(centered**3)) / sd**3 if s2 > 0 else math.nan
            kurt = float(np.mean(centered**4)) / sd**4 - 3.0 if s2 > 0 else math.nan
            implied_sigma2 = s2 * nh / v_n**2
            implied_rate = 0.5 / implied_sigma2 if implied_sigma2 > 0 else math.inf
            oracle_rate = 0.5 / oracle_sigma2 if oracle_sigma2 > 0 else math.inf
            report.rows.append({
                "x": x, "n": n, "v_n": v_n,
                "sample_var_scaled": s2,
                "implied_sigma2": implied_sigma2,
                "oracle_sigma2": oracle_sigma2,
                "skewness": skew, "excess_kurtosis": kurt,
                "implied_rate_t1": implied_rate, "oracle_rate_t1": oracle_rate,
            })
    return report
