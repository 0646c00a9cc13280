"""Normal quantile and truncated-normal inversion.

The quantile is Wichura's AS241 (PPND16) rational approximation, good to
about 1e-16 relative error over the full double range.  Both functions are
vectorized and accept scalars or arrays.
"""

import numpy as np
from scipy.special import log_ndtr, ndtr

_A = (3.3871328727963666080e0, 1.3314166789178437745e2, 1.9715909503065514427e3,
      1.3731693765509461125e4, 4.5921953931549871457e4, 6.7265770927008700853e4,
      3.3430575583588128105e4, 2.5090809287301226727e3)
_B = (1.0, 4.2313330701600911252e1, 6.8718700749205790830e2, 5.3941960214247511077e3,
      2.1213794301586595867e4, 3.9307895800092710610e4, 2.8729085735721942674e4,
      5.2264952788528545610e3)
_C = (1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
      3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4)
_D = (1.0, 2.05319162663775882187e0, 1.67638483018380384940e0, 6.89767334985100004550e-1,
      1.48103976427480074590e-1, 1.51986665636164571966e-2, 5.47593808499534494600e-4,
      1.05075007164441684324e-9)
_E = (6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
      2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7)
_F = (1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1, 1.48753612908506148525e-2,
      7.86869131145613259100e-4, 1.84631831751005468180e-5, 1.42151175831644588870e-7,
      2.04426310338993978564e-15)

# beyond this many standard deviations the tail probabilities are handled in log space
_LOG_TAIL = 25.0


def _poly(coef, x):
    out = coef[-1] * x + coef[-2]
    for c in coef[-3::-1]:
        out = out * x + c
    return out


def norm_cdf(x):
    return ndtr(x)


def inv_norm_cdf(p):
    """Standard normal quantile for ``0 < p < 1``."""
    p = np.asarray(p, dtype=np.float64)
    if not np.all((p > 0.0) & (p < 1.0)):
        raise ValueError("inverse normal CDF needs 0 < p < 1")
    scalar = p.ndim == 0
    q = p - 0.5
    # every branch is evaluated on the whole array; np.where picks per element
    rc = 0.180625 - q * q
    central = q * _poly(_A, rc) / _poly(_B, rc)
    r = np.sqrt(-np.log(np.minimum(p, 1.0 - p)))
    rn = r - 1.6
    rf = r - 5.0
    tail = np.where(r <= 5.0, _poly(_C, rn) / _poly(_D, rn), _poly(_E, rf) / _poly(_F, rf))
    out = np.where(np.abs(q) <= 0.425, central, np.copysign(tail, q))
    return float(out) if scalar else out


def _upper_tail_log_inverse(log_target, start):
    """Solve ``log Q(x) = log_target`` for x by Newton steps (Q the upper tail)."""
    x = start
    for _ in range(50):
        logq = log_ndtr(-x)
        # d/dx log Q(x) = -phi(x) / Q(x)
        slope = -np.exp(-0.5 * x * x - 0.5 * np.log(2 * np.pi) - logq)
        step = (logq - log_target) / slope
        x = x - step
        if np.all(np.abs(step) <= 1e-15 * np.maximum(1.0, np.abs(x))):
            break
    return x


def _upper_truncated(a, u):
    """Quantile ``u`` of N(0, 1) conditioned on ``X >= a``."""
    a = np.asarray(a, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    lower = ndtr(a)
    upper = ndtr(-a)
    # a <= 0: Phi(a) <= 1/2 keeps full precision; a > 0: invert the upper tail instead
    below = a <= 0.0
    target = np.where(below, lower + u * upper, (1.0 - u) * upper)
    far = a > _LOG_TAIL
    target = np.where(far, 0.5, target)
    x = inv_norm_cdf(target)
    x = np.where(below, x, -x)
    if far.any():
        af, uf = a[far], u[far]
        log_target = np.log1p(-uf) + log_ndtr(-af)
        x[far] = _upper_tail_log_inverse(log_target, af - np.log1p(-uf) / af)
    return np.maximum(x, a)


def trunc_norm_inverse(mu, y, u):
    """Inverse-CDF draw of ``Z ~ N(mu, 1)`` truncated to ``Z >= 0`` (y=1) or ``Z <= 0`` (y=0).

    ``u`` must lie strictly inside (0, 1); clamp upstream.  The result always
    respects the truncation side.
    """
    mu = np.asarray(mu, dtype=np.float64)
    y = np.asarray(y)
    u = np.asarray(u, dtype=np.float64)
    if np.any(~((u > 0.0) & (u < 1.0))):
        raise ValueError("truncated-normal inversion needs 0 < u < 1")
    scalar = mu.ndim == 0 and y.ndim == 0 and u.ndim == 0
    mu, y, u = np.broadcast_arrays(mu, y, u)
    pos = y == 1
    # y=1: Z - mu >= -mu at quantile u;  y=0: mu - Z >= mu at quantile 1 - u
    x = _upper_truncated(np.where(pos, -mu, mu), np.where(pos, u, 1.0 - u))
    z = np.where(pos, np.maximum(mu + x, 0.0), np.minimum(mu - x, -np.finfo(float).tiny))
    return float(z) if scalar else z
