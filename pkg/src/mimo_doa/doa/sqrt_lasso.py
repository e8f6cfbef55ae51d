"""Complex square-root LASSO solver.

Minimises ``f(x) = xi * ||x||_1 + ||A x - y||_2`` over complex ``x``.

Two regimes are possible. If the optimum fits ``y`` exactly it is the
basis-pursuit solution (minimum ``||x||_1`` subject to ``A x = y``), taken
from the central path of a log-barrier method on the basis-pursuit dual and
accepted once that dual certifies it.

Otherwise the residual at the optimum is nonzero and ``f`` is the partial
minimum over ``sigma > 0`` of the jointly convex

    L(x, sigma) = ||y - A x||^2 / (2 sigma) + sigma / 2 + xi ||x||_1,

so the solver alternates ``sigma <- ||y - A x||`` with an ordinary LASSO
solve at ``lambda = xi * sigma`` (the scaled-LASSO iteration); no
alternation can increase ``f``. Each outer step is finished by exact
coordinate minimisations on the support, which zero out columns that
should leave, and damped Newton steps on the support, where ``f`` is
smooth. A step is accepted only if it lowers ``f``.

The LASSO subproblems are also solved through their duals, which live in
the small measurement space (``2m`` real unknowns), and the primal is read
off by non-negative least squares over the columns the dual marks active.
Grid dictionaries of small arrays are extremely coherent, and first-order
proximal schemes stall on them far above a useful KKT accuracy; these
second-order solves do not.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls

from ..errors import SolverDiverged

MONOTONE_SLACK = 1e-12
EXACT_FIT = 1e-10


@dataclass
class SqrtLassoResult:
    """Solution and convergence record.

    ``history[k]`` is the objective after outer iteration ``k``;
    ``history[0]`` is the objective at the starting point ``x = 0``.
    """

    x: np.ndarray
    history: list = field(repr=False)
    kkt_residual: float
    iterations: int
    converged: bool

    @property
    def objective(self):
        return self.history[-1]


def soft_threshold(v, tau):
    """Complex soft-thresholding: shrink magnitudes by ``tau``, keep phases."""
    mag = np.abs(v)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(mag > tau, 1.0 - tau / mag, 0.0)
    return v * scale


def objective(A, y, x, xi):
    return xi * np.abs(x).sum() + np.linalg.norm(A @ x - y)


def zero_solution_bound(A, y):
    """Smallest ``xi`` for which ``x = 0`` is optimal: ``||A^H y||_inf / ||y||``."""
    ny = np.linalg.norm(y)
    return 0.0 if ny == 0 else float(np.abs(A.conj().T @ y).max() / ny)


def _is_exact_fit(r, y):
    return np.linalg.norm(r) <= EXACT_FIT * np.linalg.norm(y)


def _natural_residual(A, y, x, xi, u):
    r = y - A @ x
    p = r + u
    npn = np.linalg.norm(p)
    # prox of the 2-norm at r + u must return r
    e_fit = np.linalg.norm(r - p * max(0.0, 1.0 - 1.0 / npn)) if npn > 0 else np.linalg.norm(r)
    # prox of xi ||.||_1 at x + A^H u must return x
    e_l1 = np.abs(x - soft_threshold(x + A.conj().T @ u, xi)).max()
    return float(max(e_fit, e_l1))


def kkt_residual(A, y, x, xi, certificate=None):
    """Natural-map KKT residual, relative to ``1 + ||y||``.

    ``x`` is optimal iff some dual ``u`` satisfies ``u`` in the
    subdifferential of ``||.||_2`` at ``y - A x`` and ``A^H u`` in that of
    ``xi ||.||_1`` at ``x``. Both inclusions are measured through proximal
    maps, ``||r - prox(r + u)||`` and ``||x - soft(x + A^H u, xi)||_inf``,
    which vanish exactly at optimality and, unlike sign tests, stay
    continuous in ``x``. The dual tried is ``r / ||r||``; ``certificate``
    (a dual from the solver) is tried too, and the smaller value is
    reported.
    """
    x = np.asarray(x, complex)
    r = y - A @ x
    nr = np.linalg.norm(r)
    trials = [r / nr if nr > 0 else np.zeros_like(r)]
    if certificate is not None:
        trials.append(np.asarray(certificate, complex))
    best = min(_natural_residual(A, y, x, xi, u) for u in trials)
    return best / (1.0 + np.linalg.norm(y))


def _real_form(M):
    """Real ``(2p, 2q)`` matrix acting on ``[Re z; Im z]``."""
    return np.block([[M.real, -M.imag], [M.imag, M.real]])


def _dual_barrier(A, AH, y, lam, quad, gap_tol=1e-9, growth=5.0, max_newton=200,
                  score=None, target=0.0):
    """Maximise ``Re(y^H v) - quad ||v||^2 / 2`` s.t. ``|a_i^H v| <= lam``.

    With ``quad = 1`` this is the LASSO dual and the optimal ``v`` is the
    LASSO residual; with ``quad = 0`` (and ``lam = 1``) it is the
    basis-pursuit dual. Each centred point also yields the primal
    ``x_i = 2 c_i / (t g_i)``, which satisfies ``A x = y - quad v`` and is
    within ``n / t`` of optimal. Returns the last centred ``(v, x)``, or with
    ``score`` the one scoring lowest, stopping early once ``target`` is met.
    """
    m, n = A.shape
    v = np.zeros(m, complex)
    scale = np.vdot(y, y).real if quad else lam * np.linalg.norm(y)
    lam2 = lam * lam

    def psi_change(v, dv, c, g, t):
        # barrier objective change, with log(g_new / g) taken by log1p of the
        # exact increment so that tiny steps at large t stay resolvable
        dc = AH @ dv
        dg = -(2 * (c.conj() * dc).real + np.abs(dc) ** 2)
        ratio = dg / g
        if np.any(ratio <= -1):
            return np.inf
        lin = 0.5 * quad * (2 * np.vdot(v, dv).real + np.vdot(dv, dv).real) - np.vdot(y, dv).real
        return t * lin - np.log1p(ratio).sum()

    t = n / scale
    best, best_score = (v, np.zeros(n, complex)), np.inf
    v_c, t_c = v, None  # last centred point
    while True:
        centred = False
        for _ in range(max_newton):
            c = AH @ v
            g = lam2 - np.abs(c) ** 2
            gc = t * (quad * v - y) + 2 * (A @ (c / g))
            grad = np.concatenate([gc.real, gc.imag])
            W = A * (c / g)
            Wr = np.vstack([W.real, W.imag])
            H = 2 * _real_form((A / g) @ AH) + 4 * Wr @ Wr.T
            H[np.diag_indices_from(H)] += t * quad
            try:
                d = np.linalg.solve(H, -grad)
            except np.linalg.LinAlgError:
                break
            dec = -grad @ d
            if not dec > 2e-9:
                centred = True
                break
            dv = d[:m] + 1j * d[m:]
            s = 1.0
            while psi_change(v, s * dv, c, g, t) > -0.25 * s * dec and s > 1e-14:
                s *= 0.5
            if s <= 1e-14:
                break
            v = v + s * dv
        if not centred:
            # too long a step along the path: retry from the last centre
            growth = np.sqrt(growth)
            if t_c is None or growth < 1.05:
                return best
            v, t = v_c, t_c * growth
            continue
        c = AH @ v
        point = (v, 2 * c / (t * (lam2 - np.abs(c) ** 2)))
        v_c, t_c = v, t
        if score is None:
            best = point
        else:
            val = score(*point)
            if val < best_score:
                best, best_score = point, val
            if val <= target:
                return best
        if n / t < gap_tol * scale:
            return best
        t *= growth


def _lasso_primal(A, AH, y, v, lam):
    """LASSO primal from a near-optimal dual ``v``.

    Active columns (``|a_i^H v|`` within a relative margin of ``lam``) are
    phase-aligned with ``a_i^H v`` and fitted to ``y - v`` by non-negative
    least squares. Several margins are tried and the fit with the lowest
    LASSO objective is kept.
    """
    c = AH @ v
    mag = np.abs(c)
    target = y - v
    rhs = np.concatenate([target.real, target.imag])
    best, best_val, seen = np.zeros(A.shape[1], complex), np.inf, set()
    for rel in (1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3):
        on = np.flatnonzero(mag >= lam * (1 - rel))
        key = tuple(on)
        if on.size == 0 or key in seen:
            continue
        seen.add(key)
        phase = c[on] / mag[on]
        B = A[:, on] * phase
        alpha, _ = nnls(np.vstack([B.real, B.imag]), rhs, maxiter=50 * on.size)
        x = np.zeros(A.shape[1], complex)
        x[on] = alpha * phase
        r = y - A @ x
        val = 0.5 * np.vdot(r, r).real + lam * alpha.sum()
        if val < best_val:
            best, best_val = x, val
    return best


def _basis_pursuit(A, AH, y, xi, kkt_tol):
    """Basis pursuit from the barrier's central path.

    Returns ``(x, u, kkt)`` with ``u = xi v`` the scaled dual, for the centred
    point whose KKT residual at ``xi`` is lowest. The central primal fits
    ``y`` only up to the Newton tolerance, so it is first projected onto
    ``A x = y`` by a minimum-norm correction.
    """
    gram = A @ AH

    def fitted(x):
        return x + AH @ np.linalg.solve(gram, y - A @ x)

    def score(v, x):
        return kkt_residual(A, y, fitted(x), xi, certificate=xi * v)

    v, x = _dual_barrier(A, AH, y, 1.0, 0.0, score=score, target=0.1 * kkt_tol)
    x = fitted(x)
    u = xi * v
    kkt = kkt_residual(A, y, x, xi, certificate=u)
    # the central point is dense; drop the smallest entries while it stays certified
    peak = np.abs(x).max()
    for rel in (1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8):
        trial = np.where(np.abs(x) >= rel * peak, x, 0)
        k = kkt_residual(A, y, trial, xi, certificate=u)
        if k <= kkt_tol:
            return trial, u, k
    return x, u, kkt


def _coordinate_min(a, n2, b, xi):
    """Minimiser over complex ``z`` of ``xi |z| + ||b - a z||``."""
    c = np.vdot(a, b) / n2
    ac = abs(c)
    if ac == 0 or xi * xi >= n2:
        return 0.0
    rho = np.linalg.norm(b - a * c)
    t = ac - xi * rho / np.sqrt(n2 * (n2 - xi * xi))
    return c / ac * t if t > 0 else 0.0


def _newton_direction(A_s, y, x_s, xi, damping):
    """Damped Newton step for ``f`` restricted to a support with ``r != 0``."""
    s = x_s.size
    B = _real_form(A_s)
    z = np.concatenate([x_s.real, x_s.imag])
    rho = B @ z - np.concatenate([y.real, y.imag])
    nr = np.linalg.norm(rho)
    if _is_exact_fit(rho, y):
        return None
    Btr = B.T @ rho
    grad = Btr / nr
    hess = (B.T @ B - np.outer(Btr, Btr) / nr**2) / nr
    mag = np.abs(x_s)
    ur, ui = x_s.real / mag, x_s.imag / mag
    grad[:s] += xi * ur
    grad[s:] += xi * ui
    # curvature of |x_i| across its phase direction
    w = xi / mag
    idx = np.arange(s)
    hess[idx, idx] += w * (1 - ur * ur)
    hess[idx + s, idx + s] += w * (1 - ui * ui)
    hess[idx, idx + s] -= w * ur * ui
    hess[idx + s, idx] -= w * ur * ui
    hess[np.diag_indices_from(hess)] += damping * (1.0 + np.abs(np.diag(hess)).max())
    try:
        d = np.linalg.solve(hess, -grad)
    except np.linalg.LinAlgError:
        return None
    slope = float(grad @ d)
    if not np.isfinite(slope) or slope >= 0:
        return None
    return d[:s] + 1j * d[s:], slope


def _refine(A, n2, y, x, xi, damping, rounds=4, newton_steps=30):
    """Coordinate sweeps and support Newton steps; never increases ``f``."""
    x = x.copy()
    f = objective(A, y, x, xi)
    for _ in range(rounds):
        for i in np.flatnonzero(x):
            b = y - A @ x + A[:, i] * x[i]
            x[i] = _coordinate_min(A[:, i], n2[i], b, xi)
        f = objective(A, y, x, xi)
        moved = False
        for _ in range(newton_steps):
            on = np.flatnonzero(x)
            if on.size == 0:
                break
            step = _newton_direction(A[:, on], y, x[on], xi, damping)
            if step is None or -step[1] < 1e-24:
                break
            d, slope = step
            alpha = 1.0
            while alpha > 1e-12:
                trial = x.copy()
                trial[on] += alpha * d
                f_trial = objective(A, y, trial, xi)
                if f_trial <= f + 1e-4 * alpha * slope:
                    break
                alpha *= 0.5
            if alpha <= 1e-12:
                break
            x, f = trial, f_trial
            moved = True
        if not moved:
            break
    return x, f


def sqrt_lasso(A, y, xi, tol=1e-6, kkt_tol=1e-5, max_iter=10_000, damping=1e-14):
    """Solve the complex square-root LASSO.

    Args:
        A: ``(m, n)`` complex dictionary.
        y: ``(m,)`` observation.
        xi: Regularisation weight, ``> 0``.
        tol: Outer steps that lower ``f`` by less than this fraction count
            as stalled; the run ends after a stalled step unless the KKT
            test already passed.
        kkt_tol: Converged once :func:`kkt_residual` is at most this.
        max_iter: Outer iteration budget.
        damping: Relative Levenberg term of the support Newton steps.

    Returns:
        SqrtLassoResult; ``converged`` reports the KKT test.

    Raises:
        SolverDiverged: the objective rose by more than ``1e-12`` (relative)
            between iterations.
    """
    if not xi > 0:
        raise ValueError("xi must be positive")
    A = np.asarray(A, complex)
    y = np.asarray(y, complex)
    n = A.shape[1]
    x = np.zeros(n, complex)
    f = objective(A, y, x, xi)
    history = [f]
    if np.linalg.norm(y) == 0:
        return SqrtLassoResult(x, history, 0.0, 0, True)
    kkt = kkt_residual(A, y, x, xi)
    if kkt <= kkt_tol:
        return SqrtLassoResult(x, history, kkt, 0, True)

    AH = A.conj().T
    n2 = np.sum(np.abs(A) ** 2, axis=0)

    # exact-fit regime: basis pursuit, certified by its scaled dual
    x_bp, u_bp, kkt_bp = _basis_pursuit(A, AH, y, xi, kkt_tol)
    f_bp = objective(A, y, x_bp, xi)
    if kkt_bp <= kkt_tol and f_bp < f:
        history.append(f_bp)
        return SqrtLassoResult(x_bp, history, kkt_bp, 1, True)

    x_a, hist_a, it = _alternate(A, AH, n2, y, xi, x, f, tol, kkt_tol, max_iter, damping)
    if f_bp < hist_a[-1]:
        # the uncertified basis-pursuit point still beats the alternation
        x_a, hist_a, it = x_bp, [f, f_bp], 1
    history = hist_a
    kkt = kkt_residual(A, y, x_a, xi, certificate=u_bp)
    return SqrtLassoResult(x_a, history, kkt, it, kkt <= kkt_tol)


def _alternate(A, AH, n2, y, xi, x, f, tol, kkt_tol, max_iter, damping):
    """Scaled-LASSO alternation from ``x``; returns ``(x, history, iterations)``."""
    history = [f]
    samples = []  # (sigma, ||LASSO residual at xi * sigma||)

    def lasso_at(sigma):
        v, _ = _dual_barrier(A, AH, y, xi * sigma, 1.0)
        x_l = _lasso_primal(A, AH, y, v, xi * sigma)
        samples.append((sigma, np.linalg.norm(y - A @ x_l)))
        return [x_l, _refine(A, n2, y, x_l, xi, damping)[0]]

    it = 0
    small_steps = 0
    for it in range(1, max_iter + 1):
        f_prev = f
        candidates = lasso_at(np.linalg.norm(y - A @ x))
        if len(samples) >= 2:
            # secant step on the fixed-point equation sigma = ||r(xi sigma)||
            (s0, t0), (s1, t1) = samples[-2], samples[-1]
            d0, d1 = t0 - s0, t1 - s1
            if d1 != d0:
                s_new = s1 - d1 * (s1 - s0) / (d1 - d0)
                if s_new > 0 and np.isfinite(s_new):
                    candidates += lasso_at(s_new)
        candidates.append(_refine(A, n2, y, x, xi, damping)[0])
        # the optimum here has a nonzero residual; an exact fit is a dead end
        values = [np.inf if _is_exact_fit(y - A @ c, y) else objective(A, y, c, xi)
                  for c in candidates]
        best = int(np.argmin(values))
        if not values[best] < f_prev:
            it -= 1
            break
        x, f = candidates[best], values[best]
        if f > f_prev + MONOTONE_SLACK * max(abs(f_prev), 1.0):
            raise SolverDiverged(f"objective rose from {f_prev!r} to {f!r}")
        history.append(f)
        if kkt_residual(A, y, x, xi) <= kkt_tol:
            break
        small_steps = small_steps + 1 if f_prev - f <= tol * f_prev else 0
        if small_steps >= 20:
            break
    return x, history, it
