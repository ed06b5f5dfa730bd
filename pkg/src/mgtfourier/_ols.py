import numpy as np


def linear_fit(x, y):
    """Ordinary least squares y ~ slope*x + intercept; returns (slope, intercept, r2).

    r2 is reported as 1 when the residual has zero variance (exact fit),
    including the constant-data case.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xm, ym = x.mean(), y.mean()
    dx, dy = x - xm, y - ym
    sxx = np.dot(dx, dx)
    slope = np.dot(dx, dy) / sxx
    intercept = ym - slope * xm
    resid = dy - slope * dx
    ss_res = np.dot(resid, resid)
    ss_tot = np.dot(dy, dy)
    if ss_res <= 1e-28 * max(ss_tot, 1.0) or ss_tot == 0:
        r2 = 1.0
    else:
        r2 = max(0.0, 1.0 - ss_res / ss_tot)
    return float(slope), float(intercept), float(r2)
