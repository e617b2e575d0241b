"""Seeded batch drivers shared by the command line and the acceptance suite.

Sample ``i`` of a sweep in dimension ``d`` with base seed ``seed`` always
uses ``child_seed(seed, d, i)``; results are returned in index order, so
output does not depend on the number of workers.
"""
from __future__ import annotations

import statistics
from concurrent.futures import ProcessPoolExecutor
from functools import partial

import numpy as np

from .bounds import (
    DEFAULT_T_NODES,
    HOLDS,
    VACUOUS,
    VIOLATED,
    corollary_bound,
    proof_chain_check,
    proposition_check,
    theorem_bound,
    trace_cap_check,
)
from .extremal import (
    child_seed,
    commuting_orbit_max,
    random_density,
    random_perturbation,
    sample_pair,
    sample_triple,
    unitary_ascent,
    EnsembleSpec,
)
from .frechet import QuadratureRule
from .spectral import min_eigenvalue

# chain replays need a well-conditioned path for the t rule to be resolved
CHAIN_FLOOR = 0.1
CHAIN_T_FRACTION = 0.5
PROP_FLOOR = 1e-3
PROP_T_FRACTION = 0.95


def _run(fn, seeds, workers):
    if workers and workers > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, seeds, chunksize=max(1, len(seeds) // (4 * workers))))
    return [fn(s) for s in seeds]


def sample_seeds(seed: int, d: int, n: int):
    return [child_seed(seed, d, i) for i in range(n)]


def _verify_one(sample_seed, d, floor):
    rho, sigma = sample_pair(d, sample_seed, floor)
    z = max(0.0, min(min_eigenvalue(rho), min_eigenvalue(sigma)))
    return [
        theorem_bound(rho, sigma, seed=sample_seed),
        corollary_bound(rho, sigma, seed=sample_seed),
        trace_cap_check(rho, sigma, z, seed=sample_seed),
    ]


def verify_sweep(d: int, n: int, seed: int, floor: float = 1e-3, workers: int = 0):
    """Theorem, corollary and trace-cap reports for ``n`` random pairs."""
    out = _run(partial(_verify_one, d=d, floor=floor), sample_seeds(seed, d, n), workers)
    return [r for reports in out for r in reports]


def _prop_one(sample_seed, d, floor, t_fraction, n_nodes):
    sigma, delta, t = sample_triple(d, sample_seed, floor, t_fraction)
    return proposition_check(sigma, delta, t, QuadratureRule(n_nodes), seed=sample_seed)


def prop_sweep(
    d: int,
    n: int,
    seed: int,
    floor: float = PROP_FLOOR,
    t_fraction: float = PROP_T_FRACTION,
    n_nodes: int = 200,
    workers: int = 0,
):
    fn = partial(_prop_one, d=d, floor=floor, t_fraction=t_fraction, n_nodes=n_nodes)
    return _run(fn, sample_seeds(seed, d, n), workers)


def _chain_one(sample_seed, d, floor, t_fraction, t_nodes, n_nodes):
    sigma, delta, T = sample_triple(d, sample_seed, floor, t_fraction)
    return proof_chain_check(
        sigma, delta, T, QuadratureRule(n_nodes), t_nodes=t_nodes, seed=sample_seed
    )


def chain_sweep(
    d: int,
    n: int,
    seed: int,
    floor: float = CHAIN_FLOOR,
    t_fraction: float = CHAIN_T_FRACTION,
    t_nodes: int = DEFAULT_T_NODES,
    n_nodes: int = 200,
    workers: int = 0,
):
    fn = partial(
        _chain_one, d=d, floor=floor, t_fraction=t_fraction, t_nodes=t_nodes, n_nodes=n_nodes
    )
    return _run(fn, sample_seeds(seed, d, n), workers)


def _ascent_one(sample_seed, d, floor, n_nodes, max_iter):
    kind = "min_eig_conditioned" if floor > 0 else "hilbert_schmidt"
    rho = random_density(EnsembleSpec(kind, d, child_seed(sample_seed, 0), floor))
    delta = random_perturbation(d, child_seed(sample_seed, 1))
    rule = QuadratureRule(n_nodes)
    state = unitary_ascent(rho, delta, rule, max_iter=max_iter, seed=sample_seed)
    best = commuting_orbit_max(rho, delta.delta.spectrum.eigenvalues)
    return ascent_record(rho, state, best, sample_seed)


def ascent_record(rho, state, best, seed=None) -> dict:
    """Flat summary of an ascent run against the exhaustive commuting maximum."""
    V = rho.spectrum.eigenvectors
    diag = np.diag(V.conj().T @ state.delta @ V).real
    return {
        "check": "ascent",
        "d": rho.dim,
        "seed": seed,
        "iterations": state.iteration,
        "converged": state.converged,
        "kicks": state.kicks,
        "initial_objective": state.initial_objective,
        "objective": state.objective,
        "orbit_max": best.value,
        "gap": best.value - state.objective,
        "gradient_norm": state.gradient_norm,
        "commutator_defect": state.commutator_defect(rho),
        "anti_ordered": bool(np.all(np.diff(np.round(diag, 8)) <= 0)),
    }


def ascent_sweep(
    d: int, n: int, seed: int, floor: float = 0.0, n_nodes: int = 200, max_iter: int = 5000,
    workers: int = 0,
):
    fn = partial(_ascent_one, d=d, floor=floor, n_nodes=n_nodes, max_iter=max_iter)
    return _run(fn, sample_seeds(seed, d, n), workers)


def summarize(reports) -> dict:
    """Counts by verdict plus min / median slack over non-vacuous reports."""
    slacks = [r.slack for r in reports if r.verdict != VACUOUS]
    return {
        "n": len(reports),
        "holds": sum(r.verdict == HOLDS for r in reports),
        "vacuous": sum(r.verdict == VACUOUS for r in reports),
        "violated": sum(r.verdict == VIOLATED for r in reports),
        "min_slack": min(slacks) if slacks else None,
        "median_slack": statistics.median(slacks) if slacks else None,
    }
