"""Spectral solver for the epsilon-perturbed scalar V-soliton equation on flat tori."""

from ._vsoliton import (
    Grid,
    Problem,
    SolveReport,
    VsolitonError,
    check_div_ricci,
    check_hamiltonian,
    check_vjv_identity,
    continuation,
    lemma41_min_eig,
    reduced_metric_check,
    run_cli,
    solve,
)

__all__ = [
    "Grid",
    "Problem",
    "SolveReport",
    "VsolitonError",
    "check_div_ricci",
    "check_hamiltonian",
    "check_vjv_identity",
    "continuation",
    "lemma41_min_eig",
    "reduced_metric_check",
    "run_cli",
    "solve",
]
