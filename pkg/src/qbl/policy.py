"""Centralized numerical tolerances.

Every operator/entropy routine takes a NumericPolicy (defaulting to
DEFAULT_POLICY) so that all support thresholds and slacks can be scaled
from one place, e.g. for larger dimensions or looser experiments.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class NumericPolicy:
    # relative tolerance for the Hermiticity check, scaled by max|entry|
    herm_rtol: float = 1e-12
    # eigenvalue support threshold factor: eps_supp = supp_rtol * max(1, lambda_max)
    supp_rtol: float = 1e-10
    # eigendecomposition reconstruction tolerance factor
    recon_rtol: float = 1e-10
    # absolute tolerance for the triple-matrix quadrature
    quad_tol: float = 1e-9
    # eigenvalue slack when certifying positive semi-definiteness
    psd_slack: float = 1e-9
    # operator-norm threshold for support containment (omega << tau)
    support_leak_tol: float = 1e-8

    def eps_supp(self, lambda_max: float) -> float:
        """Support threshold for a PSD spectrum with largest eigenvalue lambda_max."""
        return self.supp_rtol * max(1.0, lambda_max)


DEFAULT_POLICY = NumericPolicy()
