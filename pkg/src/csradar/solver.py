"""Basis pursuit denoising: ``min ||s||_1  s.t.  ||A s - y||_2 <= eps``.

The constrained program is solved through its penalised twin
``min 0.5 ||A s - y||^2 + lam ||s||_1``.  The LASSO residual grows
monotonically with ``lam``, so an outer Newton iteration walks ``lam`` down
from ``||A^H y||_inf`` (where ``s = 0``) until the residual meets ``eps``.
Each inner problem is solved by warm-started coordinate descent.

Iterates that would undershoot ``eps`` are rejected and the step is
bisected, which keeps the accepted residual trace non-increasing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ._cd import lasso_cd
from .errors import DimensionError, InvalidInputError
from .signal import MeasurementOperator

FEASIBILITY_SLACK = 1e-3
# Residual floor, relative to ||y||, under which eps = 0 counts as met.
ABSOLUTE_FLOOR = 1e-9
_CD_TOL = 1e-10
_CD_MAX_SWEEPS = 20000
_MIN_STEP_RATIO = 0.1


class TraceEntry(NamedTuple):
    penalty: float
    residual_norm: float
    l1_norm: float


@dataclass(frozen=True, eq=False)
class BpdnProblem:
    operator: MeasurementOperator | np.ndarray
    observation: np.ndarray
    epsilon: float

    def __post_init__(self) -> None:
        y = np.asarray(self.observation, dtype=np.complex128).reshape(-1)
        if not np.all(np.isfinite(y)):
            raise InvalidInputError("observation contains NaN or Inf")
        if not (math.isfinite(self.epsilon) and self.epsilon >= 0):
            raise InvalidInputError(f"epsilon must be finite and >= 0, got {self.epsilon}")
        if y.shape[0] != _shape(self.operator)[0]:
            raise DimensionError(
                f"observation length {y.shape[0]} does not match operator rows {_shape(self.operator)[0]}"
            )
        y.setflags(write=False)
        object.__setattr__(self, "observation", y)
        object.__setattr__(self, "epsilon", float(self.epsilon))


@dataclass(frozen=True, eq=False)
class BpdnSolution:
    coefficients: np.ndarray
    residual_norm: float
    iterations: int
    converged: bool
    penalty: float = 0.0
    trace: tuple[TraceEntry, ...] = field(default=(), repr=False)

    @property
    def l1_norm(self) -> float:
        return float(np.abs(self.coefficients).sum())


def _shape(operator) -> tuple[int, int]:
    if isinstance(operator, MeasurementOperator):
        return operator.shape
    return np.shape(operator)


def _dense(operator) -> np.ndarray:
    if isinstance(operator, MeasurementOperator):
        return operator.matrix
    a = np.asarray(operator, dtype=np.complex128)
    if a.ndim != 2:
        raise DimensionError("operator must be a 2-D matrix or a MeasurementOperator")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("operator contains NaN or Inf")
    return a


def epsilon_from_noise(sigma_sq: float, m: int) -> float:
    """High-probability bound on the norm of ``m`` complex Gaussian samples.

    ``eps = sqrt(sigma^2 (m + 2 sqrt(m log m)))``.
    """
    if not sigma_sq >= 0:
        raise InvalidInputError(f"noise variance must be >= 0, got {sigma_sq}")
    if m < 1:
        raise InvalidInputError(f"m must be >= 1, got {m}")
    return math.sqrt(sigma_sq * (m + 2.0 * math.sqrt(m * math.log(m))))


def _newton_derivative(a: np.ndarray, s: np.ndarray, r: np.ndarray, rn: float) -> float:
    # d||r||/dlam with the support and phases frozen.
    support = np.flatnonzero(s)
    if support.size == 0 or rn == 0:
        return 0.0
    a_s = a[:, support]
    phases = s[support] / np.abs(s[support])
    gram = a_s.conj().T @ a_s
    w = np.linalg.lstsq(gram, phases, rcond=None)[0]
    q = a_s @ w
    return float(np.real(np.vdot(r, q))) / rn


def _polish(a: np.ndarray, y: np.ndarray, s: np.ndarray) -> np.ndarray | None:
    support = np.flatnonzero(s)
    if support.size == 0 or support.size > a.shape[0]:
        return None
    coef = np.linalg.lstsq(a[:, support], y, rcond=None)[0]
    out = np.zeros_like(s)
    out[support] = coef
    return out


def solve_bpdn(
    problem: BpdnProblem,
    max_iterations: int = 200,
    tolerance: float = 1e-4,
) -> BpdnSolution:
    """Solve one BPDN program.

    Parameters
    ----------
    problem : BpdnProblem
    max_iterations : int
        Cap on outer (penalty-update) iterations.
    tolerance : float
        Relative band around ``eps`` within which the residual is accepted.

    Returns
    -------
    BpdnSolution
        ``converged`` is False when the cap is hit; the coefficients are then
        the last accepted iterate, whose residual still exceeds ``eps``.
    """
    if max_iterations < 1:
        raise InvalidInputError("max_iterations must be positive")
    a = _dense(problem.operator)
    y = problem.observation
    eps = problem.epsilon
    n_cols = a.shape[1]
    y_norm = float(np.linalg.norm(y))

    s = np.zeros(n_cols, dtype=np.complex128)
    if y_norm <= eps or y_norm == 0.0:
        return BpdnSolution(s, y_norm, 0, True, 0.0, (TraceEntry(0.0, y_norm, 0.0),))

    at = np.ascontiguousarray(a.T)
    col_sq = np.real(np.einsum("ij,ij->j", a.conj(), a)).copy()
    floor = ABSOLUTE_FLOOR * y_norm
    goal_hi = max(eps * (1.0 + tolerance), floor)
    goal_lo = eps * (1.0 - tolerance)
    cd_tol = _CD_TOL * y_norm

    lam_acc = float(np.max(np.abs(a.conj().T @ y)))
    lam_lo = 0.0
    r = y.copy()
    trace = [TraceEntry(lam_acc, y_norm, 0.0)]
    lam = 0.5 * lam_acc
    converged = False
    rn = y_norm

    it = 0
    while it < max_iterations:
        it += 1
        s_try = s.copy()
        r_try = r.copy()
        lasso_cd(at, col_sq, lam, s_try, r_try, cd_tol, _CD_MAX_SWEEPS)
        rn_try = float(np.linalg.norm(r_try))
        if rn_try < goal_lo:
            lam_lo = lam
            lam = 0.5 * (lam_lo + lam_acc)
            continue
        s, r, rn, lam_acc = s_try, r_try, rn_try, lam
        trace.append(TraceEntry(lam, rn, float(np.abs(s).sum())))
        if rn <= goal_hi:
            converged = True
            break
        if eps == 0.0 and rn <= 1e-6 * y_norm:
            polished = _polish(a, y, s)
            if polished is not None:
                r_pol = y - a @ polished
                rn_pol = float(np.linalg.norm(r_pol))
                if rn_pol <= goal_hi:
                    s, r, rn = polished, r_pol, rn_pol
                    trace.append(TraceEntry(0.0, rn, float(np.abs(s).sum())))
                    converged = True
                    break
        der = _newton_derivative(a, s, r, rn)
        lam_new = lam - (rn - eps) / der if der > 0 else 0.5 * lam
        lam_new = max(lam_new, _MIN_STEP_RATIO * lam)
        if lam_new <= lam_lo:
            lam_new = 0.5 * (lam_lo + lam)
        lam = lam_new

    return BpdnSolution(s, rn, it, converged, lam_acc, tuple(trace))


def is_feasible(solution: BpdnSolution, epsilon: float, y_norm: float = 0.0) -> bool:
    """Residual within ``eps * (1 + FEASIBILITY_SLACK)`` (plus the zero-eps floor)."""
    return solution.residual_norm <= epsilon * (1.0 + FEASIBILITY_SLACK) + ABSOLUTE_FLOOR * y_norm
