"""Channel estimators for the RIS-assisted uplink.

Three approaches over the same training frame:

* two_stage_estimate — LS on the RIS-OFF stage for the direct path, then
  alternating LS on the direct-path-removed tensor for the RIS-path factors.
* e_als_estimate — joint alternating LS that refits the direct path and the
  RIS->AP factor together every sweep, using the all-blocks frame.
* ls_baseline — one stacked linear LS solve for the vectorized direct and
  cascaded parameters, with no factor decoupling.

All alternating updates are exact conditional LS steps, so the frame-fit
residual recorded in residual_trace is non-increasing sweep over sweep.
"""

import dataclasses
from dataclasses import dataclass

import numpy as np

from .tensor_ops import (
    SingularMatrixError,
    crandn,
    khatri_rao,
    pinv_left,
    pinv_right,
    unfold_mode1,
    unfold_mode2,
)


@dataclass
class EstimatorConfig:
    max_iters: int = 20
    conv_threshold: float = 1e-8   # on squared relative change per factor
    pinv_tol: float = 1e-12
    init_seed: int = 0             # used when no generator is passed in

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.conv_threshold <= 0:
            raise ValueError("conv_threshold must be positive")


@dataclass
class ChannelEstimate:
    """Result of one estimator call; op_count tallies complex multiply-accumulates."""

    h_ua: np.ndarray = None
    h_ur: np.ndarray = None
    h_ra: np.ndarray = None
    theta: np.ndarray = None        # stacked parameter vector (ls_baseline only)
    iterations: int = 0
    converged: bool = False
    op_count: int = 0
    residual_trace: tuple = ()      # squared frame-fit residual after each sweep
    failed: bool = False
    failure_iteration: int = None
    failure_reason: str = ""
    scaling_fallback_cols: tuple = ()   # columns resolve_scaling left unscaled

    @property
    def cascade(self):
        return self.h_ra @ self.h_ur


def _sqnorm(a):
    return float(np.real(np.vdot(a, a)))


def _small_change(delta, current, threshold):
    # squared relative change against the current iterate; a vanishing
    # denominator counts as converged
    den = _sqnorm(current)
    return den < 1e-300 or _sqnorm(delta) <= threshold * den


def _pinv_cost(short, long):
    # Gram-convention multiply-accumulate count for a pseudoinverse whose
    # short side is `short`: forming the Gram matrix plus inverting it
    return short * short * long + short**3


def _failure(err, iteration, ops, trace):
    return ChannelEstimate(
        iterations=iteration,
        converged=False,
        op_count=ops,
        residual_trace=tuple(trace),
        failed=True,
        failure_iteration=iteration,
        failure_reason=str(err),
    )


def ls_direct_path(v, x_bar, tol=1e-12):
    """LS estimate of the direct channel from the RIS-OFF stage: V @ pinv_right(X_bar)."""
    v = np.asarray(v)
    x_bar = np.asarray(x_bar)
    if v.shape[1] != x_bar.shape[1]:
        raise ValueError(f"OFF-stage length mismatch: {v.shape} vs pilots {x_bar.shape}")
    return v @ pinv_right(x_bar, tol)


def als_ris(q, sched, cfg, rng=None):
    """Alternating LS fit of the RIS-path factors on a direct-path-removed tensor.

    Per sweep: refit the RIS->AP factor from the mode-1 unfolding, then the
    effective pilot-domain factor Z from the mode-2 unfolding.  Stops when the
    squared relative change of both factors drops to conv_threshold, or after
    max_iters sweeps (converged=False, not an error).  The user->RIS channel
    is recovered from Z on exit.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.init_seed)
    q = np.asarray(q)
    m, l, b = q.shape
    psi = sched.ris_phases
    n = psi.shape[1]
    x = sched.pilots
    k = x.shape[0]

    q1 = unfold_mode1(q)
    q2 = unfold_mode2(q)

    h_ra = crandn(rng, (m, n))
    z = crandn(rng, (n, k)) @ x

    ops = 0
    trace = []
    converged = False
    it = 0
    try:
        for it in range(1, cfg.max_iters + 1):
            h_ra_prev, z_prev = h_ra, z

            f1 = khatri_rao(psi, z.T)                       # (B*L, N)
            h_ra = q1 @ pinv_right(f1.T, cfg.pinv_tol)
            ops += n * b * l + _pinv_cost(n, b * l) + m * b * l * n

            f2 = khatri_rao(psi, h_ra)                      # (B*M, N)
            z = pinv_left(f2, cfg.pinv_tol) @ q2.T
            ops += n * b * m + _pinv_cost(n, b * m) + n * b * m * l

            trace.append(_sqnorm(q2 - z.T @ f2.T))
            if _small_change(h_ra - h_ra_prev, h_ra, cfg.conv_threshold) and _small_change(
                z - z_prev, z, cfg.conv_threshold
            ):
                converged = True
                break
        h_ur = z @ pinv_right(x, cfg.pinv_tol)
        ops += _pinv_cost(k, l) + n * l * k
    except SingularMatrixError as err:
        return _failure(err, it, ops, trace)

    return ChannelEstimate(
        h_ur=h_ur,
        h_ra=h_ra,
        iterations=it,
        converged=converged,
        op_count=ops,
        residual_trace=tuple(trace),
    )


def two_stage_estimate(recv, sched, cfg, rng=None):
    """RIS OFF-ON estimator: direct path from the OFF stage, RIS path by als_ris.

    The estimated direct contribution is subtracted from every block before
    the alternating fit, so its estimation error lands in the stage-2 noise.
    """
    if recv.off_stage is None:
        raise ValueError("two_stage_estimate needs the RIS-OFF stage matrix")
    m, l, _ = recv.tensor.shape
    k, l_off = sched.off_pilots.shape
    try:
        h_ua = ls_direct_path(recv.off_stage, sched.off_pilots, cfg.pinv_tol)
    except SingularMatrixError as err:
        return _failure(err, 0, 0, [])
    ops = _pinv_cost(k, l_off) + m * l_off * k

    q = recv.tensor - (h_ua @ sched.pilots)[:, :, None]
    ops += m * k * l

    result = als_ris(q, sched, cfg, rng)
    return dataclasses.replace(result, h_ua=h_ua, op_count=result.op_count + ops)


def e_als_estimate(recv, sched, cfg, rng=None):
    """Joint alternating estimator over the full frame.

    Per sweep: one right-pinv solve refits the direct and RIS->AP channels
    together against the stacked regressor [pilot block | RIS block], then Z
    is refit from the mode-2 unfolding with the direct contribution removed.
    Terminates when the squared relative changes of all three factors drop to
    conv_threshold.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.init_seed)
    y = np.asarray(recv.tensor)
    m, l, b = y.shape
    psi = sched.ris_phases
    n = psi.shape[1]
    x = sched.pilots
    k = x.shape[0]
    if b * l < n + k:
        raise ValueError(f"joint fit needs B*L >= N+K, got {b * l} < {n + k}")

    y1 = unfold_mode1(y)
    y2 = unfold_mode2(y)
    w1 = khatri_rao(np.ones((b, k)), x.T)       # direct-path regressor block, (B*L, K)

    h_ua = crandn(rng, (m, k))
    h_ra = crandn(rng, (m, n))
    z = crandn(rng, (n, k)) @ x
    f = khatri_rao(psi, z.T)

    ops = n * b * l
    trace = []
    converged = False
    it = 0
    try:
        for it in range(1, cfg.max_iters + 1):
            h_ua_prev, h_ra_prev, z_prev = h_ua, h_ra, z

            joint = y1 @ pinv_right(np.hstack([w1, f]).T, cfg.pinv_tol)
            h_ua, h_ra = joint[:, :k], joint[:, k:]
            ops += _pinv_cost(n + k, b * l) + m * b * l * (n + k)

            direct = np.tile(h_ua, (b, 1)) @ x      # (1 (x) H_ua) X, (B*M, L)
            f2 = khatri_rao(psi, h_ra)
            z = pinv_left(f2, cfg.pinv_tol) @ (y2.T - direct)
            ops += b * m * k * l + n * b * m + _pinv_cost(n, b * m) + n * b * m * l

            f = khatri_rao(psi, z.T)
            ops += n * b * l
            trace.append(_sqnorm(y1 - h_ua @ w1.T - h_ra @ f.T))
            if (
                _small_change(h_ua - h_ua_prev, h_ua, cfg.conv_threshold)
                and _small_change(h_ra - h_ra_prev, h_ra, cfg.conv_threshold)
                and _small_change(z - z_prev, z, cfg.conv_threshold)
            ):
                converged = True
                break
        h_ur = z @ pinv_right(x, cfg.pinv_tol)
        ops += _pinv_cost(k, l) + n * l * k
    except SingularMatrixError as err:
        return _failure(err, it, ops, trace)

    return ChannelEstimate(
        h_ua=h_ua,
        h_ur=h_ur,
        h_ra=h_ra,
        iterations=it,
        converged=converged,
        op_count=ops,
        residual_trace=tuple(trace),
    )


class StackedLsSolver:
    """Cached factorization of the stacked training regressor for ls_baseline.

    The regressor rows are assembled one (block, pilot column) pair at a time
    — an M-row block [x_l^T (x) I_M | psi_b^T (x) x_l^T (x) I_M] — and the
    SVD-based pseudoinverse is computed once, so repeated trials under the
    same schedule only pay the apply cost.
    """

    def __init__(self, sched, m, tol=1e-12):
        x = sched.pilots
        psi = sched.ris_phases
        k, l = x.shape
        b, n = psi.shape
        rows = m * l * b
        cols = m * k * (n + 1)
        if rows < cols:
            raise ValueError(f"stacked LS needs M*L*B >= M*K*(N+1), got {rows} < {cols}")
        a = np.empty((rows, cols), dtype=complex)
        eye = np.eye(m)
        r = 0
        for blk in range(b):
            for col in range(l):
                p0 = np.kron(x[:, col][None, :], eye)
                a[r : r + m, : m * k] = p0
                a[r : r + m, m * k :] = np.kron(psi[blk][None, :], p0)
                r += m
        self.rows = rows
        self.cols = cols
        self.pinv = pinv_left(a, tol)

    def solve(self, recv):
        # vec of the frame in time order: antenna fastest, then pilot, then block
        y_vec = np.asarray(recv.tensor).reshape(-1, order="F")
        return self.pinv @ y_vec


def ls_baseline(recv, sched, cfg, solver=None):
    """Stacked LS over theta = [vec(direct); vec(cascaded parameters)].

    Returns the parameter vector only: the cascaded block is the Khatri-Rao
    stacking of per-user cascaded matrices and is not decoupled into separate
    RIS-path factors.
    """
    try:
        if solver is None:
            solver = StackedLsSolver(sched, recv.tensor.shape[0], cfg.pinv_tol)
        theta = solver.solve(recv)
    except SingularMatrixError as err:
        return _failure(err, 0, 0, [])
    return ChannelEstimate(
        theta=theta,
        iterations=0,
        converged=True,
        op_count=solver.cols * solver.rows,
    )


def resolve_scaling(est, truth):
    """Undo the per-column diagonal ambiguity of the RIS-path factor pair.

    Each column of the RIS->AP estimate is rescaled by its least-squares fit
    against the true column, lambda_n = <truth_n, est_n> / ||truth_n||^2, and
    the inverse scale is applied to the user->RIS rows, so the cascade is
    unchanged. A single-entry reference would do the same job in principle,
    but turns into noise whenever the true reference entry happens to be
    small; the column fit has no such weak spot. Columns with no usable
    scale (zero truth column, or an estimate orthogonal to it) are left
    alone and recorded.
    """
    if est.h_ra is None or est.h_ur is None:
        raise ValueError("resolve_scaling needs decoupled RIS-path estimates")
    h_ra_true = truth.h_ra
    n = h_ra_true.shape[1]
    lam = np.ones(n, dtype=complex)
    skipped = []
    for col in range(n):
        den = float(np.real(np.vdot(h_ra_true[:, col], h_ra_true[:, col])))
        num = np.vdot(h_ra_true[:, col], est.h_ra[:, col])
        if den == 0.0 or num == 0:
            skipped.append(col)
            continue
        lam[col] = num / den
    return dataclasses.replace(
        est,
        h_ra=est.h_ra / lam[None, :],
        h_ur=est.h_ur * lam[:, None],
        scaling_fallback_cols=tuple(skipped),
    )
