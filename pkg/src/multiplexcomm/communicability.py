"""Total and Perron communicability of a supra-adjacency matrix.

Every quantity is also carried as a natural logarithm so that reports
stay meaningful when ``exp(rho)`` overflows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg

from .core import SparsityPattern, SupraAdjacency, pattern_of
from .errors import ConvergenceError
from .spectral import (
    PerronTriple,
    condition_number,
    perron,
    structured_condition_number,
    wilkinson,
)

DENSE_LIMIT = 1000
KRYLOV_DIM = 50
# largest tau * ||A||_1 per substep; keeps exp(tau H) finite
MAX_STEP_NORM = 500.0


def log_exp0(x: float) -> float:
    """``log(exp(x) - 1)`` for ``x > 0`` without overflow."""
    if x <= 0:
        return -math.inf
    if x > 30:
        return x + math.log1p(-math.exp(-x))
    return math.log(math.expm1(x))


def _exp_or_inf(v: float) -> float:
    return math.exp(v) if v < 709.0 else math.inf


def _matrix(b):
    return b.matrix if isinstance(b, SupraAdjacency) else b


def _dense_tc(a: np.ndarray) -> float:
    # exp(A) - I = A phi_1(A); the augmented exponential gives phi_1(A) 1
    # without cancelling against the identity.
    n = a.shape[0]
    aug = np.zeros((n + 1, n + 1))
    aug[:n, :n] = a
    aug[:n, n] = 1.0
    phi1 = scipy.linalg.expm(aug)[:n, n]
    return float((a @ phi1).sum())


def _arnoldi(a, v: np.ndarray, m: int, anorm: float):
    n = v.size
    V = np.zeros((m + 1, n))
    H = np.zeros((m + 1, m))
    V[0] = v
    for j in range(m):
        w = a @ V[j]
        for i in range(j + 1):
            H[i, j] = V[i] @ w
            w = w - H[i, j] * V[i]
        for i in range(j + 1):  # second Gram-Schmidt pass
            c = V[i] @ w
            H[i, j] += c
            w = w - c * V[i]
        h = np.linalg.norm(w)
        H[j + 1, j] = h
        if h <= 1e-13 * anorm:
            return V[: j + 1], H[: j + 2, : j + 1], j + 1, True
        V[j + 1] = w / h
    return V[:m], H, m, False


def expm_action_log(a, v: np.ndarray, tol: float = 1e-8, m: int = KRYLOV_DIM, max_steps: int = 10_000):
    """Krylov approximation of ``exp(a) v`` as ``(log_scale, w)``.

    The result is ``exp(log_scale) * w``.  Time is split into adaptive
    substeps; each accepts when the a posteriori estimate
    ``tau * h_{m+1,m} |e_m^T phi_1(tau H) e_1|`` is below ``tol * tau``.

    Raises
    ------
    ConvergenceError
        If the step size collapses or ``max_steps`` is exceeded; the best
        error estimate is attached.
    """
    n = v.size
    m = max(1, min(m, n))
    anorm = float(abs(a).sum(axis=0).max()) if sp.issparse(a) else float(np.abs(a).sum(axis=0).max())
    anorm = max(anorm, 1e-300)
    beta = np.linalg.norm(v)
    if beta == 0:
        return 0.0, np.zeros(n)
    w = v / beta
    log_scale = math.log(beta)
    t = 0.0
    tau = min(1.0, m / (2.0 * anorm))
    worst = 0.0
    steps = 0
    while t < 1.0:
        steps += 1
        if steps > max_steps:
            raise ConvergenceError("Krylov exponential exceeded the step limit", worst)
        V, H, k, happy = _arnoldi(a, w, m, anorm)
        tau = min(tau, 1.0 - t)
        Hk = H[:k, :k]
        while True:
            if happy:
                err = 0.0
                tau = 1.0 - t
                # invariant subspace: shift out the growth to avoid overflow
                shift = tau * float(np.linalg.eigvals(Hk).real.max())
                F = scipy.linalg.expm(tau * Hk - shift * np.eye(k))
                log_scale += shift
                break
            tau = min(tau, MAX_STEP_NORM / anorm)
            aug = np.zeros((k + 1, k + 1))
            aug[:k, :k] = tau * Hk
            aug[0, k] = 1.0
            E = scipy.linalg.expm(aug)
            err = tau * H[k, k - 1] * abs(E[k - 1, k])
            if err <= tol * tau:
                F = E[:k, :k]
                break
            worst = max(worst, err / tau)
            shrink = max(0.2, 0.9 * (tol * tau / err) ** (1.0 / k))
            tau *= shrink
            if tau < 1e-14:
                raise ConvergenceError("Krylov exponential step size collapsed", err / tau)
        w = V.T @ F[:, 0]
        t += tau
        nw = np.linalg.norm(w)
        w /= nw
        log_scale += math.log(nw)
        if not happy:
            grow = 0.9 * (tol * tau / err) ** (1.0 / k) if err > 0 else 5.0
            tau *= min(5.0, max(1.0, grow))
    return log_scale, w


def total_communicability_log(b, tol: float | None = None, method: str = "auto") -> float:
    """``log(tc)`` where ``tc = 1^T exp(B) 1 - NL``."""
    a = _matrix(b)
    n = a.shape[0]
    if method == "auto":
        method = "dense" if n <= DENSE_LIMIT else "krylov"
    if method == "dense":
        dense = a.toarray() if sp.issparse(a) else np.asarray(a, dtype=np.float64)
        with np.errstate(over="ignore", invalid="ignore"):
            tc = _dense_tc(dense)
        if math.isfinite(tc) and tc < 1e300:
            return math.log(tc) if tc > 0 else -math.inf
        # overflow: exp(A) = e^s exp(A - sI) with s the rightmost eigenvalue
        shift = float(np.linalg.eigvals(dense).real.max())
        log_total = shift + math.log(scipy.linalg.expm(dense - shift * np.eye(n)).sum())
        return _minus_n(log_total, n)
    if method != "krylov":
        raise ValueError(f"unknown method {method!r}")
    op = sp.csr_matrix(a) if sp.issparse(a) else np.asarray(a, dtype=np.float64)
    log_scale, w = expm_action_log(op, np.ones(n), 1e-8 if tol is None else tol)
    return _minus_n(log_scale + math.log(w.sum()), n)


def _minus_n(log_total: float, n: int) -> float:
    # 1^T exp(B) 1 >= n for nonnegative B; subtract n in log space
    ratio = n * math.exp(-log_total) if log_total > math.log(n) - 700 else 0.0
    if ratio >= 1.0:
        return -math.inf
    return log_total + math.log1p(-ratio)


def total_communicability(b, tol: float | None = None, method: str = "auto") -> float:
    """Total communicability ``1^T exp_0(B) 1``.

    Dense scaling-and-squaring for size up to 1000, Krylov otherwise
    (``method`` forces one or the other).  Returns ``inf`` on overflow;
    use :func:`total_communicability_log` in that regime.
    """
    lg = total_communicability_log(b, tol, method)
    return 0.0 if lg == -math.inf else _exp_or_inf(lg)


def perron_communicability(t: PerronTriple) -> float:
    """``exp_0(rho) ||x||_1 ||y||_1``."""
    return _exp_or_inf(perron_communicability_log(t))


def perron_communicability_log(t: PerronTriple) -> float:
    return log_exp0(t.rho) + math.log(wilkinson(t).total())


def structured_perron_communicability(t: PerronTriple, s: SparsityPattern) -> float:
    """``exp_0(rho)`` times the sum of ``y_i x_j`` over the positions of ``s``."""
    return _exp_or_inf(structured_perron_communicability_log(t, s))


def structured_perron_communicability_log(t: PerronTriple, s: SparsityPattern) -> float:
    total = wilkinson(t).projected_total(s)
    return log_exp0(t.rho) + (math.log(total) if total > 0 else -math.inf)


def spectral_gap_ratio(a, rho: float) -> float:
    """``rho / |lambda_2|``: how strongly the Perron root dominates.

    ``inf`` when every other eigenvalue is zero.  Small matrices use a
    dense eigendecomposition, larger ones the two largest-magnitude
    ARPACK eigenvalues.
    """
    n = a.shape[0]
    if n < 2:
        return math.inf
    if n <= 200:
        dense = a.toarray() if sp.issparse(a) else np.asarray(a, dtype=np.float64)
        mods = np.sort(np.abs(np.linalg.eigvals(dense)))
    else:
        op = sp.csr_matrix(a) if sp.issparse(a) else np.asarray(a, dtype=np.float64)
        v0 = np.ones(n) / math.sqrt(n)
        try:
            vals = scipy.sparse.linalg.eigs(op, k=2, which="LM", v0=v0, return_eigenvectors=False)
        except scipy.sparse.linalg.ArpackNoConvergence:
            return math.nan
        mods = np.sort(np.abs(vals))
    second = float(mods[-2])
    return rho / second if second > 1e-14 * max(rho, 1.0) else math.inf


@dataclass
class CommunicabilityReport:
    """All communicability quantities of one supra-adjacency matrix."""

    size: int
    tc: float
    pc: float
    pc_struct: float
    rho: float
    kappa: float
    kappa_struct: float
    bound_lo: float
    bound_hi: float
    bound_hi_struct: float
    approx_ratio: float
    gap_ratio: float
    log_tc: float
    log_pc: float
    log_pc_struct: float
    log_exp0_rho: float
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def communicability_report(
    b: SupraAdjacency,
    s: SparsityPattern | None = None,
    tol: float | None = None,
    triple: PerronTriple | None = None,
    rel_slack: float = 1e-10,
) -> CommunicabilityReport:
    """Evaluate tc, Pc, the structured Pc and the bounds relating them.

    ``s`` defaults to the pattern of the intra-layer part of ``b``.
    Bound violations (beyond ``rel_slack``) are listed in ``violations``.
    """
    a = _matrix(b)
    n = a.shape[0]
    if s is None:
        s = pattern_of(b.intra) if isinstance(b, SupraAdjacency) else pattern_of(a)
    t = triple if triple is not None else perron(a)
    kappa = condition_number(t)
    kappa_s = structured_condition_number(t, s)

    log_tc = total_communicability_log(b, tol)
    log_pc = perron_communicability_log(t)
    log_pcs = structured_perron_communicability_log(t, s)
    log_e0 = log_exp0(t.rho)
    log_lo = log_e0
    log_hi = log_e0 + math.log(n)
    log_hi_s = log_hi + math.log(kappa_s / kappa) if kappa_s > 0 else -math.inf
    log_ratio = log_tc - math.log(kappa) - log_pc

    slack = math.log1p(rel_slack)
    violations = []
    if log_pc < log_lo - slack:
        violations.append("exp0(rho) <= Pc")
    if log_pc > log_hi + slack:
        violations.append("Pc <= NL exp0(rho)")
    if log_pcs > log_pc + slack:
        violations.append("Pc_struct <= Pc")
    if log_pcs > log_hi_s + slack:
        violations.append("Pc_struct <= NL exp0(rho) kappa_struct/kappa")
    if kappa_s > kappa * (1 + rel_slack):
        violations.append("kappa_struct <= kappa")

    return CommunicabilityReport(
        size=n,
        tc=_exp_or_inf(log_tc) if log_tc > -math.inf else 0.0,
        pc=_exp_or_inf(log_pc),
        pc_struct=_exp_or_inf(log_pcs) if log_pcs > -math.inf else 0.0,
        rho=t.rho,
        kappa=kappa,
        kappa_struct=kappa_s,
        bound_lo=_exp_or_inf(log_lo) if log_lo > -math.inf else 0.0,
        bound_hi=_exp_or_inf(log_hi) if log_hi > -math.inf else 0.0,
        bound_hi_struct=_exp_or_inf(log_hi_s) if log_hi_s > -math.inf else 0.0,
        approx_ratio=_exp_or_inf(log_ratio) if math.isfinite(log_ratio) else math.nan,
        gap_ratio=spectral_gap_ratio(a, t.rho),
        log_tc=log_tc,
        log_pc=log_pc,
        log_pc_struct=log_pcs,
        log_exp0_rho=log_e0,
        violations=violations,
    )
