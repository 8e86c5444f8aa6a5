"""Mallows-model preference sampling and expected-rank experiments.

The Mallows distribution over rankings of the bundle space weights a ranking
V by phi**kendall_tau(V, W) for a reference ranking W and dispersion
0 < phi <= 1 (phi = 1 is uniform). Sampling uses repeated insertion: walking
W from best to worst, the k-th element is inserted r positions above the
bottom of the partial ranking with probability proportional to phi**r, which
adds exactly r discordant pairs.

``run_experiment`` estimates expected utilitarian and egalitarian realized
ranks for sequential mechanisms under profiles drawn from a shared Mallows
population (one uniform reference per replicate, one draw per agent, the same
profile fed to every mechanism configuration).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .domain import DomainShape, Preference, Profile, ValidationError, decode_bundle
from .engine import OPTIMISTIC, PESSIMISTIC, run_csam
from .orders import balanced_order, serial_dictatorship_order

CSV_HEADER = (
    "mechanism,behavior,n,p,phi,samples,seed,"
    "mean_utilitarian,ci_utilitarian,mean_egalitarian,ci_egalitarian"
)


def kendall_tau(first: Preference, second: Preference) -> int:
    """Number of bundle pairs the two rankings order oppositely."""
    if first.shape != second.shape:
        raise ValidationError("rankings live on different shapes")
    pos = {bundle: i for i, bundle in enumerate(second.order)}
    seq = [pos[b] for b in first.order]
    return _count_inversions(seq)


def _count_inversions(seq: list[int]) -> int:
    if len(seq) < 2:
        return 0
    mid = len(seq) // 2
    left, right = seq[:mid], seq[mid:]
    count = _count_inversions(left) + _count_inversions(right)
    merged = []
    i = j = 0
    while i < len(left) and j < len(right):
        if left[i] <= right[j]:
            merged.append(left[i])
            i += 1
        else:
            merged.append(right[j])
            j += 1
            count += len(left) - i
    seq[:] = merged + left[i:] + right[j:]
    return count


@dataclass(frozen=True)
class MallowsParams:
    reference: Preference
    phi: float

    def __post_init__(self) -> None:
        if not (0 < self.phi <= 1):
            raise ValidationError(f"dispersion phi must lie in (0, 1], got {self.phi}")


_weight_cache: dict[tuple[float, int], np.ndarray] = {}


def _cumulative_weights(phi: float, k: int) -> np.ndarray:
    key = (phi, k)
    cw = _weight_cache.get(key)
    if cw is None:
        cw = np.cumsum(phi ** np.arange(k))
        _weight_cache[key] = cw
    return cw


def sample_mallows(params: MallowsParams, rng: np.random.Generator) -> Preference:
    ref = params.reference.order
    m = len(ref)
    u = rng.random(m)
    out: list = []
    for k in range(1, m + 1):
        cw = _cumulative_weights(params.phi, k)
        r = int(np.searchsorted(cw, u[k - 1] * cw[-1], side="right"))
        out.insert(k - 1 - r, ref[k - 1])
    return Preference(params.reference.shape, out)


def mallows_pmf(params: MallowsParams, ranking: Preference) -> float:
    """Exact probability of one ranking; the normalizer has the closed form
    prod_k (1 + phi + ... + phi**(k-1))."""
    m = params.reference.shape.bundle_count
    z = math.prod(sum(params.phi**r for r in range(k)) for k in range(1, m + 1))
    return params.phi ** kendall_tau(ranking, params.reference) / z


def uniform_preference(shape: DomainShape, rng: np.random.Generator) -> Preference:
    perm = rng.permutation(shape.bundle_count)
    return Preference(shape, [decode_bundle(shape, int(i)) for i in perm])


@dataclass(frozen=True)
class MechanismConfig:
    order_family: str  # "sd" | "balanced"
    behavior: str  # "opt" | "pess"

    def __post_init__(self) -> None:
        if self.order_family not in ("sd", "balanced"):
            raise ValidationError(f"unknown order family {self.order_family!r}")
        if self.behavior not in ("opt", "pess"):
            raise ValidationError(f"unknown behavior {self.behavior!r}")


DEFAULT_GRID = (
    MechanismConfig("sd", "opt"),
    MechanismConfig("sd", "pess"),
    MechanismConfig("balanced", "opt"),
    MechanismConfig("balanced", "pess"),
)


@dataclass(frozen=True)
class ExperimentConfig:
    p: int
    n_values: tuple[int, ...]
    phis: tuple[float, ...]
    samples: int
    seed: int
    mechanisms: tuple[MechanismConfig, ...] = DEFAULT_GRID
    check_bounds: bool = False

    def __post_init__(self) -> None:
        if self.samples < 1:
            raise ValidationError("need at least one sample per cell")
        if not self.n_values or not self.phis:
            raise ValidationError("experiment grid is empty")
        for phi in self.phis:
            if not (0 < phi <= 1):
                raise ValidationError(f"dispersion phi must lie in (0, 1], got {phi}")


@dataclass(frozen=True)
class ExperimentResult:
    mechanism: str
    behavior: str
    n: int
    p: int
    phi: float
    samples: int
    seed: int
    mean_utilitarian: float
    ci_utilitarian: float
    mean_egalitarian: float
    ci_egalitarian: float


def _order_for(family: str, n: int, p: int):
    agents = list(range(1, n + 1))
    if family == "sd":
        return serial_dictatorship_order(agents, p)
    return balanced_order(agents, p)


def _mean_ci(values: list[int]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    mean = float(arr.mean())
    if arr.size < 2:
        return mean, 0.0
    ci = 1.96 * float(arr.std(ddof=1)) / math.sqrt(arr.size)
    return mean, ci


def run_experiment(config: ExperimentConfig) -> list[ExperimentResult]:
    """Monte Carlo estimate of expected realized ranks per grid cell.

    Replicate streams are np.random.default_rng([seed, index]) with a global
    replicate index enumerating the (n, phi, replicate) grid, so any cell can
    be reproduced in isolation.
    """
    results: list[ExperimentResult] = []
    per_cell: dict[tuple[int, int, int], tuple[list[int], list[int]]] = {}

    global_index = 0
    for n in config.n_values:
        shape = DomainShape(n, config.p)
        orders = {}
        behaviors = {}
        reports = {}
        for c_idx, cfg in enumerate(config.mechanisms):
            order = _order_for(cfg.order_family, n, config.p)
            orders[c_idx] = order
            behaviors[c_idx] = tuple(
                OPTIMISTIC if cfg.behavior == "opt" else PESSIMISTIC for _ in range(n)
            )
            if config.check_bounds:
                from .bounds import worst_case_report

                reports[c_idx] = worst_case_report(order, behaviors[c_idx])
        for phi_idx, phi in enumerate(config.phis):
            for c_idx in range(len(config.mechanisms)):
                per_cell[(c_idx, n, phi_idx)] = ([], [])
            for _ in range(config.samples):
                rng = np.random.default_rng([config.seed, global_index])
                global_index += 1
                reference = uniform_preference(shape, rng)
                params = MallowsParams(reference, phi)
                profile = Profile(
                    shape, [sample_mallows(params, rng) for _ in range(n)]
                )
                for c_idx in range(len(config.mechanisms)):
                    allocation, _ = run_csam(orders[c_idx], profile, behaviors[c_idx])
                    ranks = [
                        profile.pref(j).rank_of(allocation[j]) for j in shape.agents()
                    ]
                    if config.check_bounds:
                        report = reports[c_idx]
                        for j, rank in enumerate(ranks, 1):
                            if rank > report.bound(j):
                                raise AssertionError(
                                    f"realized rank {rank} exceeds the bound "
                                    f"{report.bound(j)} for agent {j}"
                                )
                    ut, eg = sum(ranks), max(ranks)
                    cell = per_cell[(c_idx, n, phi_idx)]
                    cell[0].append(ut)
                    cell[1].append(eg)

    for c_idx, cfg in enumerate(config.mechanisms):
        for n in config.n_values:
            for phi_idx, phi in enumerate(config.phis):
                ut, eg = per_cell[(c_idx, n, phi_idx)]
                mean_ut, ci_ut = _mean_ci(ut)
                mean_eg, ci_eg = _mean_ci(eg)
                results.append(
                    ExperimentResult(
                        cfg.order_family,
                        cfg.behavior,
                        n,
                        config.p,
                        phi,
                        config.samples,
                        config.seed,
                        mean_ut,
                        ci_ut,
                        mean_eg,
                        ci_eg,
                    )
                )
    return results


def results_to_csv(results: Sequence[ExperimentResult]) -> str:
    lines = [CSV_HEADER]
    for r in results:
        lines.append(
            f"{r.mechanism},{r.behavior},{r.n},{r.p},{r.phi},{r.samples},{r.seed},"
            f"{r.mean_utilitarian},{r.ci_utilitarian},{r.mean_egalitarian},{r.ci_egalitarian}"
        )
    return "\n".join(lines) + "\n"
