"""Numba-compiled inner loops for variance recursions and simulation.

The recursions are inherently sequential (h_t depends on h_{t-1}), so these
run as JIT kernels; everything else in the package stays vectorized numpy.

Pre-sample convention shared by all kernels: lagged variances and squared
shocks are seeded with h_init.  Sign information for pre-sample shocks does
not exist, so sign-dependent terms take their symmetric expectation: the GJR
indicator is 1/2 and the signed EGARCH ratio a/sqrt(h) is 0 (while
|a|/sqrt(h) is 1, consistent with a^2 = h_init).
"""

import numpy as np
from numba import njit


@njit(cache=True)
def garch_recursion(a, alpha0, alphas, betas, h_init):
    """h_t = alpha0 + sum_i beta_i h_{t-i} + sum_i alpha_i a_{t-i}^2.

    ARCH(p) is the special case with no betas.
    """
    n = a.shape[0]
    q = alphas.shape[0]
    p = betas.shape[0]
    h = np.empty(n)
    for t in range(n):
        acc = alpha0
        for i in range(1, p + 1):
            acc += betas[i - 1] * (h[t - i] if t - i >= 0 else h_init)
        for i in range(1, q + 1):
            a2 = a[t - i] * a[t - i] if t - i >= 0 else h_init
            acc += alphas[i - 1] * a2
        h[t] = acc
    return h


@njit(cache=True)
def gjr_recursion(a, alpha0, alphas, gammas, betas, h_init):
    """h_t = alpha0 + sum_i (alpha_i + gamma_i S-_{t-i}) a_{t-i}^2 + sum_i beta_i h_{t-i},
    with S- = 1 iff the lagged shock is negative."""
    n = a.shape[0]
    q = alphas.shape[0]
    p = betas.shape[0]
    h = np.empty(n)
    for t in range(n):
        acc = alpha0
        for i in range(1, q + 1):
            if t - i >= 0:
                a2 = a[t - i] * a[t - i]
                s = 1.0 if a[t - i] < 0.0 else 0.0
            else:
                a2 = h_init
                s = 0.5
            acc += (alphas[i - 1] + gammas[i - 1] * s) * a2
        for i in range(1, p + 1):
            acc += betas[i - 1] * (h[t - i] if t - i >= 0 else h_init)
        h[t] = acc
    return h


@njit(cache=True)
def egarch_recursion(a, alpha0, alphas, gammas, betas, h_init, center):
    """ln h_t = alpha0 + sum_i beta_i ln h_{t-i} + sum_i alpha_i ((|z|-center) + gamma_i z),
    z = a_{t-i}/sqrt(h_{t-i}); computed in log space, then exponentiated.

    center = 0 gives the literal uncentered form; center = E|z| gives the
    conventional centered variant.
    """
    n = a.shape[0]
    q = alphas.shape[0]
    p = betas.shape[0]
    log_h = np.empty(n)
    log_h_init = np.log(h_init)
    for t in range(n):
        acc = alpha0
        for i in range(1, p + 1):
            acc += betas[i - 1] * (log_h[t - i] if t - i >= 0 else log_h_init)
        for i in range(1, q + 1):
            if t - i >= 0:
                z = a[t - i] / np.sqrt(np.exp(log_h[t - i]))
                abs_z = abs(z)
            else:
                z = 0.0
                abs_z = 1.0
            acc += alphas[i - 1] * ((abs_z - center) + gammas[i - 1] * z)
        log_h[t] = acc
    return np.exp(log_h)


@njit(cache=True)
def garch_simulate(eps, alpha0, alphas, betas, h0):
    n = eps.shape[0]
    q = alphas.shape[0]
    p = betas.shape[0]
    h = np.empty(n)
    a = np.empty(n)
    for t in range(n):
        acc = alpha0
        for i in range(1, p + 1):
            acc += betas[i - 1] * (h[t - i] if t - i >= 0 else h0)
        for i in range(1, q + 1):
            a2 = a[t - i] * a[t - i] if t - i >= 0 else h0
            acc += alphas[i - 1] * a2
        h[t] = acc
        a[t] = np.sqrt(h[t]) * eps[t]
    return a, h


@njit(cache=True)
def gjr_simulate(eps, alpha0, alphas, gammas, betas, h0):
    n = eps.shape[0]
    q = alphas.shape[0]
    p = betas.shape[0]
    h = np.empty(n)
    a = np.empty(n)
    for t in range(n):
        acc = alpha0
        for i in range(1, q + 1):
            if t - i >= 0:
                a2 = a[t - i] * a[t - i]
                s = 1.0 if a[t - i] < 0.0 else 0.0
            else:
                a2 = h0
                s = 0.5
            acc += (alphas[i - 1] + gammas[i - 1] * s) * a2
        for i in range(1, p + 1):
            acc += betas[i - 1] * (h[t - i] if t - i >= 0 else h0)
        h[t] = acc
        a[t] = np.sqrt(h[t]) * eps[t]
    return a, h


@njit(cache=True)
def egarch_simulate(eps, alpha0, alphas, gammas, betas, log_h0, center):
    n = eps.shape[0]
    q = alphas.shape[0]
    p = betas.shape[0]
    log_h = np.empty(n)
    a = np.empty(n)
    for t in range(n):
        acc = alpha0
        for i in range(1, p + 1):
            acc += betas[i - 1] * (log_h[t - i] if t - i >= 0 else log_h0)
        for i in range(1, q + 1):
            if t - i >= 0:
                z = eps[t - i]
                abs_z = abs(z)
            else:
                z = 0.0
                abs_z = 1.0
            acc += alphas[i - 1] * ((abs_z - center) + gammas[i - 1] * z)
        log_h[t] = acc
        a[t] = np.sqrt(np.exp(log_h[t])) * eps[t]
    return a, np.exp(log_h)


@njit(cache=True)
def svr_smo(K, y, box, tube, tol, max_iter):
    """Pairwise coordinate descent on the eps-insensitive SVR dual.

    Works on beta_i = alpha_i - alpha_i* in [-box, box] with sum(beta) = 0,
    minimizing 0.5 b'Kb - y'b + tube*||b||_1.  The first working-set index is
    the maximal violator on the "increase" side; the second is chosen among
    violating "decrease" candidates by maximal guaranteed objective decrease
    (second-order rule), which converges in far fewer passes than the plain
    first-order pair at n in the thousands.  Steps never cross zero inside a
    single update so each subproblem stays an exact quadratic.  Convergence
    is declared when the maximal first-order violation drops to tol.

    Returns (beta, iterations, converged, g_up, g_down) where the intercept
    lies in [-g_down, -g_up]; callers use the midpoint.
    """
    n = y.shape[0]
    beta = np.zeros(n)
    g = -y.copy()  # gradient of the smooth part: (K beta)_i - y_i
    g_up = 0.0
    g_down = 0.0
    it = 0
    while it < max_iter:
        i = -1
        g_up = 1e308
        g_down = -1e308
        for k in range(n):
            bk = beta[k]
            if bk < box:  # can increase
                cost = g[k] + (tube if bk >= 0.0 else -tube)
                if cost < g_up:
                    g_up = cost
                    i = k
            if bk > -box:  # can decrease
                cost = g[k] + (tube if bk > 0.0 else -tube)
                if cost > g_down:
                    g_down = cost
        if i < 0 or g_down - g_up <= tol:
            return beta, it, True, g_up, g_down
        # second index: largest decrease of the quadratic model over the pair
        j = -1
        best_gain = 0.0
        k_ii = K[i, i]
        for k in range(n):
            bk = beta[k]
            if k != i and bk > -box:
                diff = (g[k] + (tube if bk > 0.0 else -tube)) - g_up
                if diff > 0.0:
                    curv = k_ii + K[k, k] - 2.0 * K[i, k]
                    if curv < 1e-12:
                        curv = 1e-12
                    gain = diff * diff / curv
                    if gain > best_gain:
                        best_gain = gain
                        j = k
        if j < 0:
            return beta, it, True, g_up, g_down
        bi = beta[i]
        bj = beta[j]
        # step cap: box edges, plus the zero kinks of the two coefficients
        t_max = box - bi
        if bj + box < t_max:
            t_max = bj + box
        if bi < 0.0 and -bi < t_max:
            t_max = -bi
        if bj > 0.0 and bj < t_max:
            t_max = bj
        gap = (g[j] + (tube if bj > 0.0 else -tube)) - g_up
        curv = k_ii + K[j, j] - 2.0 * K[i, j]
        if curv > 1e-12:
            step = gap / curv
            if step > t_max:
                step = t_max
        else:
            step = t_max
        # land exactly on box edges / kinks so the sign state stays crisp
        if step == box - bi:
            beta[i] = box
        elif bi < 0.0 and step == -bi:
            beta[i] = 0.0
        else:
            beta[i] = bi + step
        if step == bj + box:
            beta[j] = -box
        elif bj > 0.0 and step == bj:
            beta[j] = 0.0
        else:
            beta[j] = bj - step
        for k in range(n):
            g[k] += step * (K[k, i] - K[k, j])
        it += 1
    return beta, it, False, g_up, g_down
