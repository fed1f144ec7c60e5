"""Per-well time-series analysis.

A Gaussian-kernel local linear regression supplies the smoothed trend level,
its pointwise 95% band, and the instantaneous gradient; bandwidth is chosen
by the corrected-AIC criterion.  The Mann-Kendall test (tie-corrected, with
continuity correction) and plain linear / log-linear OLS fits are provided
alongside.

Times are float day ordinals (``date.toordinal()``); slopes are per day.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientDataError

DAYS_PER_YEAR = 365.25

#: z multiplier for the 95% pointwise confidence band
Z95 = 1.96

# Numerical guards for the local 2x2 system and the AICc noise floor.
_MAX_LOCAL_COND = 1e8
_FLOOR_GROWTH = 1.25


def kernel_weight(u, h):
    """Gaussian weight exp(-u^2 / (2 h^2)); maximal at u = 0, symmetric."""
    if h <= 0 or not math.isfinite(h):
        raise ValueError(f"bandwidth must be positive and finite, got {h}")
    u = np.asarray(u, dtype=float)
    return np.exp(-0.5 * (u / h) ** 2)


def _local_moments(times, x0s, h):
    """Weighted moments of the z-scaled local design at each eval point.

    Regressing on z = (t - x0)/h keeps the 2x2 system well scaled; the
    slope in t units is the z-slope divided by h.
    """
    z = (times[None, :] - np.asarray(x0s, dtype=float)[:, None]) / h
    w = np.exp(-0.5 * z * z)
    s0 = w.sum(axis=1)
    s1 = (w * z).sum(axis=1)
    s2 = (w * z * z).sum(axis=1)
    return z, w, s0, s1, s2


def _moment_conds(s0, s1, s2):
    # 2x2 symmetric PSD condition numbers from eigenvalues
    tr = s0 + s2
    det = s0 * s2 - s1 * s1
    disc = np.maximum(tr * tr / 4.0 - det, 0.0)
    lo = tr / 2.0 - np.sqrt(disc)
    hi = tr / 2.0 + np.sqrt(disc)
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.where(lo > 0, hi / lo, np.inf)
    return cond


def _kernels_batch(times, x0s, h):
    """Equivalent-kernel level and slope rows at each eval point (closed
    form for the weighted 2x2 solve)."""
    z, w, s0, s1, s2 = _local_moments(times, x0s, h)
    det = (s0 * s2 - s1 * s1)[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        lev = w * (s2[:, None] - s1[:, None] * z) / det
        slp = w * (s0[:, None] * z - s1[:, None]) / det / h
    return lev, slp


def equivalent_kernel(times, x0, h):
    """Rows of the smoother matrix at x0.

    Returns ``(l_level, l_slope)`` with fitted(x0) = l_level . y and
    derivative(x0) = l_slope . y.  l_level sums to 1 and has zero first
    moment about x0.
    """
    times = np.asarray(times, dtype=float)
    lev, slp = _kernels_batch(times, [x0], h)
    return lev[0], slp[0]


def local_linear_fit(times, values, eval_times, h):
    """Local linear regression on an evaluation grid.

    Solves, at each eval point x, the weighted least-squares problem over
    {y_i - a - b (t_i - x)} with Gaussian weights of bandwidth ``h``.

    Returns ``(fitted, se, derivative)`` arrays over ``eval_times``.  The
    standard error is sigma_hat * ||l(x)|| with l(x) the equivalent-kernel
    weight vector and sigma_hat^2 the residual-df variance estimate
    RSS / (n - 2 tr(H) + tr(H H')).
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    eval_times = np.asarray(eval_times, dtype=float)
    if len(np.unique(times)) < 3:
        raise InsufficientDataError(
            f"local linear fit needs >= 3 distinct time points, got {len(np.unique(times))}"
        )
    if h <= 0 or not math.isfinite(h):
        raise ValueError(f"bandwidth must be positive and finite, got {h}")

    h = _apply_bandwidth_floor(times, np.concatenate([eval_times, times]), h)

    lev, slp = _kernels_batch(times, eval_times, h)
    fitted = lev @ values
    deriv = slp @ values
    norms = np.sqrt((lev * lev).sum(axis=1))

    sigma2 = residual_variance(times, values, h)
    se = math.sqrt(max(sigma2, 0.0)) * norms
    return fitted, se, deriv


def hat_matrix(times, h):
    """Smoother matrix H mapping observations to fitted values at the
    observation times."""
    times = np.asarray(times, dtype=float)
    return _kernels_batch(times, times, h)[0]


def residual_variance(times, values, h):
    """sigma^2 estimate RSS / (n - 2 tr(H) + tr(H H'))."""
    values = np.asarray(values, dtype=float)
    H = hat_matrix(times, h)
    resid = values - H @ values
    rss = float(resid @ resid)
    n = len(values)
    scale = max(1.0, float(np.max(np.abs(values))))
    if rss <= n * (1e-12 * scale) ** 2:
        return 0.0  # exact fit up to rounding
    df = n - 2.0 * np.trace(H) + float((H * H).sum())
    if df <= 0:
        return 0.0
    return rss / df


def bandwidth_floor(times, eval_times, h0):
    """Smallest multiple of h0 keeping the local 2x2 system's condition
    number below 1e8 at every eval point."""
    times = np.asarray(times, dtype=float)
    span = float(times.max() - times.min())
    h = float(h0)
    cap = 8.0 * max(span, h)
    while h < cap:
        _, _, s0, s1, s2 = _local_moments(times, eval_times, h)
        if float(_moment_conds(s0, s1, s2).max()) < _MAX_LOCAL_COND:
            return h
        h *= _FLOOR_GROWTH
    return h


def _apply_bandwidth_floor(times, eval_times, h):
    floored = bandwidth_floor(times, eval_times, h)
    if floored > h:
        warnings.warn(
            f"bandwidth {h:.4g} raised to {floored:.4g} to keep local fits "
            "well conditioned",
            stacklevel=3,
        )
    return floored


def aicc(times, values, h):
    """Corrected AIC for a given bandwidth:
    log(sigma2) + 2 (tr(H) + 1) / (n - tr(H) - 2), sigma2 = RSS / n.

    Returns +inf when the denominator is not positive (h inadmissible).
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    n = len(times)
    _, _, s0, s1, s2 = _local_moments(times, times, h)
    if float(_moment_conds(s0, s1, s2).max()) >= _MAX_LOCAL_COND:
        return np.inf
    H = hat_matrix(times, h)
    trH = float(np.trace(H))
    denom = n - trH - 2.0
    if denom <= 0:
        return np.inf
    resid = values - H @ values
    sigma2 = float(resid @ resid) / n
    # Floor sigma2 at squared machine-level noise so that an exact fit does
    # not let rounding dust in the RSS drive the selection.
    scale = max(1.0, float(np.max(np.abs(values))))
    sigma2 = max(sigma2, (1e-10 * scale) ** 2)
    return math.log(sigma2) + 2.0 * (trH + 1.0) / denom


def default_bandwidth_grid(times, size=20):
    """20 log-spaced bandwidths from range/50 to 2*range."""
    times = np.asarray(times, dtype=float)
    span = float(times.max() - times.min())
    if span <= 0:
        raise InsufficientDataError("time range is degenerate")
    return np.geomspace(span / 50.0, 2.0 * span, size)


def select_bandwidth(times, values, candidates=None):
    """Pick the corrected-AIC minimising bandwidth from a candidate grid,
    breaking ties toward the larger (smoother) bandwidth."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(times) < 5:
        raise InsufficientDataError(
            f"bandwidth selection needs >= 5 samples, got {len(times)}"
        )
    if candidates is None:
        candidates = default_bandwidth_grid(times)
    candidates = np.sort(np.asarray(candidates, dtype=float))
    if candidates.size == 0:
        raise ValueError("empty bandwidth candidate grid")

    best_h, best_score = None, np.inf
    for h in candidates:
        score = aicc(times, values, h)
        if score <= best_score:  # <= breaks ties toward larger h
            best_h, best_score = float(h), score
    if not math.isfinite(best_score):
        warnings.warn(
            "no admissible bandwidth candidate; falling back to the largest",
            stacklevel=2,
        )
        return float(candidates[-1])
    return best_h


@dataclass(frozen=True)
class MannKendallResult:
    S: int
    tau: float
    var_S: float
    p_value: float

    def to_dict(self):
        return {"S": self.S, "tau": self.tau, "var_S": self.var_S, "p_value": self.p_value}


def mann_kendall(values):
    """Mann-Kendall trend test on a time-ordered series.

    S is the signed pair count, tau the tie-corrected rank correlation
    (tau-b with unique timestamps), var_S carries the standard tie-group
    correction, and the two-sided p-value uses the normal approximation
    with a +/-1 continuity correction.
    """
    values = np.asarray(values, dtype=float)
    n = len(values)
    if n < 2:
        raise InsufficientDataError(f"Mann-Kendall needs >= 2 values, got {n}")

    diffs = np.sign(values[None, :] - values[:, None])
    S = int(np.triu(diffs, k=1).sum())

    _, counts = np.unique(values, return_counts=True)
    ties = counts[counts > 1]
    var_S = (n * (n - 1) * (2 * n + 5) - np.sum(ties * (ties - 1) * (2 * ties + 5))) / 18.0

    n0 = n * (n - 1) / 2.0
    n1 = float(np.sum(ties * (ties - 1) / 2.0))
    denom = math.sqrt((n0 - n1) * n0) if n0 > n1 else 0.0
    tau = S / denom if denom > 0 else 0.0

    if var_S <= 0:
        return MannKendallResult(S=S, tau=tau, var_S=0.0, p_value=1.0)
    if S > 0:
        z = (S - 1) / math.sqrt(var_S)
    elif S < 0:
        z = (S + 1) / math.sqrt(var_S)
    else:
        z = 0.0
    p = 2.0 * _norm_sf(abs(z))
    return MannKendallResult(S=S, tau=tau, var_S=float(var_S), p_value=min(p, 1.0))


def _norm_sf(z):
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def parametric_fit(times, values, form="linear"):
    """OLS straight-line fit on the chosen scale.

    ``linear`` regresses values on time; ``log-linear`` regresses
    ln(values) (all values must be positive).  Returns
    ``(intercept, slope, slope_se)`` with slope per day.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(times) < 3:
        raise InsufficientDataError(f"parametric fit needs >= 3 samples, got {len(times)}")
    if form == "log-linear":
        bad = np.nonzero(values <= 0)[0]
        if bad.size:
            raise ValueError(
                f"log-linear fit needs positive values; offending sample index {bad[0]} "
                f"(value {values[bad[0]]})"
            )
        y = np.log(values)
    elif form == "linear":
        y = values
    else:
        raise ValueError(f"form must be 'linear' or 'log-linear', got {form!r}")

    n = len(times)
    tbar = times.mean()
    sxx = float(((times - tbar) ** 2).sum())
    if sxx <= 0:
        raise InsufficientDataError("all samples share one time point")
    slope = float(((times - tbar) * (y - y.mean())).sum()) / sxx
    intercept = float(y.mean() - slope * tbar)
    resid = y - (intercept + slope * times)
    rss = float(resid @ resid)
    sigma2 = rss / (n - 2) if n > 2 else 0.0
    slope_se = math.sqrt(max(sigma2, 0.0) / sxx)
    return intercept, slope, slope_se


@dataclass
class WellTrendFit:
    """Fitted per-well, per-solute trend smoother.

    ``fitted``/``se``/``derivative`` live on the ``scale`` of the fit
    (natural log by default); eval_times are integer day ordinals.
    """

    well_id: str
    solute: str
    scale: str  # "log" | "linear"
    eval_times: np.ndarray
    fitted: np.ndarray
    se: np.ndarray
    derivative: np.ndarray
    h: float
    n: int
    sigma2: float
    mk: MannKendallResult
    sample_times: np.ndarray = None
    sample_values: np.ndarray = None  # working values, original units
    sample_censored: np.ndarray = None
    units: str = ""
    notes: list = field(default_factory=list)

    def at(self, t):
        """(level, se, derivative) at time t by interpolation on the grid."""
        t = float(t)
        lo, hi = self.eval_times[0], self.eval_times[-1]
        if not (lo <= t <= hi):
            raise ValueError(f"t={t} outside fitted range [{lo}, {hi}]")
        return (
            float(np.interp(t, self.eval_times, self.fitted)),
            float(np.interp(t, self.eval_times, self.se)),
            float(np.interp(t, self.eval_times, self.derivative)),
        )

    def band(self, t):
        """95% confidence band (lower, upper) at t, back-transformed to
        concentration units on the log scale."""
        m, s, _ = self.at(t)
        lo, hi = m - Z95 * s, m + Z95 * s
        if self.scale == "log":
            return math.exp(lo), math.exp(hi)
        return lo, hi

    def to_dict(self):
        from datetime import date

        # curve/band arrays are the back-transformed concentration-scale
        # view so renderers never recompute model quantities client-side
        mid = self.fitted
        lo = self.fitted - Z95 * self.se
        hi = self.fitted + Z95 * self.se
        if self.scale == "log":
            mid, lo, hi = np.exp(mid), np.exp(lo), np.exp(hi)
        return {
            "well_id": self.well_id,
            "solute": self.solute,
            "scale": self.scale,
            "units": self.units,
            "eval_times": [date.fromordinal(int(t)).isoformat() for t in self.eval_times],
            "fitted": [float(v) for v in self.fitted],
            "se": [float(v) for v in self.se],
            "derivative": [float(v) for v in self.derivative],
            "curve": [float(v) for v in mid],
            "band_lower": [float(v) for v in lo],
            "band_upper": [float(v) for v in hi],
            "h": self.h,
            "n": self.n,
            "sigma2": self.sigma2,
            "mk": self.mk.to_dict(),
            "samples": {
                "times": [date.fromordinal(int(t)).isoformat() for t in self.sample_times],
                "values": [float(v) for v in self.sample_values],
                "censored": [bool(c) for c in self.sample_censored],
            },
            "notes": list(self.notes),
        }


def make_eval_grid(t_min, t_max, midpoints=(), points=101):
    """101 equally spaced integer-day times spanning [t_min, t_max], unioned
    with the supplied interval midpoints."""
    grid = np.rint(np.linspace(t_min, t_max, points)).astype(int)
    if len(midpoints):
        grid = np.union1d(grid, np.asarray(sorted(midpoints), dtype=int))
    return grid.astype(float)


def fit_well_trend(
    well_id,
    solute,
    times,
    values,
    censored,
    eval_times=None,
    scale="log",
    h=None,
    units="",
    zero_floor=None,
):
    """Fit the trend smoother for one (well, solute) series.

    ``values`` are working concentrations in original units.  On the log
    scale, zeros are floored at ``zero_floor`` (half the smallest positive
    site value for the solute; computed from this series when not given)
    and noted.  Returns a WellTrendFit, or raises InsufficientDataError
    for degenerate series.
    """
    order = np.argsort(np.asarray(times, dtype=float), kind="stable")
    times = np.asarray(times, dtype=float)[order]
    values = np.asarray(values, dtype=float)[order]
    censored = np.asarray(censored, dtype=bool)[order]
    notes = []

    if len(np.unique(times)) < 3:
        raise InsufficientDataError(
            f"{well_id}/{solute}: needs >= 3 distinct sampling dates, got {len(np.unique(times))}"
        )

    if scale == "log":
        y = values.copy()
        if (y <= 0).any():
            if zero_floor is None:
                positive = y[y > 0]
                if positive.size == 0:
                    raise InsufficientDataError(
                        f"{well_id}/{solute}: all working values are zero; cannot log"
                    )
                zero_floor = 0.5 * float(positive.min())
            notes.append(
                f"{int((y <= 0).sum())} nonpositive value(s) floored at {zero_floor!r} before log"
            )
            y = np.maximum(y, zero_floor)
        y = np.log(y)
    elif scale == "linear":
        y = values
    else:
        raise ValueError(f"scale must be 'log' or 'linear', got {scale!r}")

    if eval_times is None:
        eval_times = make_eval_grid(times.min(), times.max())
    eval_times = np.asarray(eval_times, dtype=float)

    if h is None:
        if len(times) >= 5:
            h = select_bandwidth(times, y)
        else:
            h = float(2.0 * (times.max() - times.min()))
            notes.append("too few samples for bandwidth selection; using 2x range")

    # Floor once here so the stored h matches what the smoother actually used.
    floored = bandwidth_floor(times, np.concatenate([eval_times, times]), h)
    if floored > h:
        notes.append(f"bandwidth raised from {h:.6g} to {floored:.6g} (conditioning floor)")
        h = floored

    fitted, se, deriv = local_linear_fit(times, y, eval_times, h)
    sigma2 = residual_variance(times, y, h)
    mk = mann_kendall(values)

    return WellTrendFit(
        well_id=well_id,
        solute=solute,
        scale=scale,
        eval_times=eval_times,
        fitted=fitted,
        se=se,
        derivative=deriv,
        h=float(h),
        n=int(len(times)),
        sigma2=float(sigma2),
        mk=mk,
        sample_times=times,
        sample_values=values,
        sample_censored=censored,
        units=units,
        notes=notes,
    )
