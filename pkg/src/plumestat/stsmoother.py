"""Penalized tensor-product B-spline smoother over (x, y, t).

The natural-log concentration response is modelled as y = B(x) alpha + eps
where B holds tensor products of per-axis B-spline bases (cubic by default,
equally spaced knots over each recentered axis).  Roughness is penalized
through d-th order finite differences of coefficients of adjacent splines,
applied along each lattice axis and sharing a single nonnegative weight
lambda; the estimate solves

    (B'B + lambda D'D) alpha = B'y

via a symmetric positive-definite factorization (dense Cholesky for small
coefficient counts, sparse LU above that), never an explicit inverse.
Lambda is picked by generalized cross-validation over a log-spaced grid.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.linalg import qr, solve_triangular
from scipy.sparse.linalg import splu

from .errors import ExtrapolationError, FitError, RankDeficiencyError

DENSE_LIMIT = 500  # below this coefficient count the dense path is faster

_RANGE_TOL = 1e-9  # relative slack when testing in-range, absorbs recentering round-off

DEFAULT_LAMBDA_GRID = np.geomspace(1e-4, 1e6, 30)


@dataclass(frozen=True)
class BSplineBasis1D:
    """Uniform B-spline basis on one axis.

    ``lo``/``hi`` bound the data range in original units; knots live on the
    recentered [0, 1] axis with ``degree`` padding knots per side.
    """

    lo: float
    hi: float
    m1: int
    degree: int
    knots: np.ndarray

    @property
    def nseg(self):
        return self.m1 - self.degree

    def recenter(self, x):
        return (np.asarray(x, dtype=float) - self.lo) / (self.hi - self.lo)

    def in_range(self, x):
        u = self.recenter(x)
        return (u >= -_RANGE_TOL) & (u <= 1.0 + _RANGE_TOL)

    def compact(self, x):
        """Nonzero basis values at each point.

        Returns ``(first, weights)``: ``weights[i, k]`` is basis function
        ``first[i] + k`` evaluated at ``x[i]``; ``first[i] = -1`` flags an
        out-of-range point (its weights row is zero).
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        u = self.recenter(x)
        ok = (u >= -_RANGE_TOL) & (u <= 1.0 + _RANGE_TOL)
        uc = np.clip(u, 0.0, 1.0)
        p = self.degree
        seg = np.minimum((uc * self.nseg).astype(int), self.nseg - 1)
        left = seg + p  # knots[left] <= u < knots[left + 1] on the clipped axis

        npts = x.size
        work = np.zeros((npts, p + 1))
        work[:, 0] = 1.0
        knots = self.knots
        for i in range(1, p + 1):
            temp = work[:, :i].copy()
            work[:, 0] = 0.0
            for j in range(1, i + 1):
                right_knot = knots[left + j]
                left_knot = knots[left + j - i]
                factor = temp[:, j - 1] / (right_knot - left_knot)
                work[:, j - 1] += factor * (right_knot - uc)
                work[:, j] = factor * (uc - left_knot)

        first = left - p
        work[~ok] = 0.0
        first = np.where(ok, first, -1)
        return first, work

    def evaluate(self, x):
        """Dense basis matrix (len(x), m1); zero rows outside the range."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        first, work = self.compact(x)
        B = np.zeros((x.size, self.m1))
        rows = np.nonzero(first >= 0)[0]
        for k in range(self.degree + 1):
            B[rows, first[rows] + k] = work[rows, k]
        return B

    def to_dict(self):
        return {
            "lo": self.lo,
            "hi": self.hi,
            "m1": self.m1,
            "degree": self.degree,
            "knots": [float(k) for k in self.knots],
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            lo=d["lo"],
            hi=d["hi"],
            m1=d["m1"],
            degree=d["degree"],
            knots=np.asarray(d["knots"], dtype=float),
        )


def build_basis(values, m1, degree=3):
    """Basis over the range of ``values`` with ``m1`` functions of the given
    degree and equally spaced knots."""
    if degree < 1:
        raise ValueError(f"degree must be >= 1, got {degree}")
    if m1 < degree + 1:
        raise ValueError(f"need at least degree+1 = {degree + 1} basis functions, got {m1}")
    values = np.asarray(values, dtype=float)
    lo, hi = float(values.min()), float(values.max())
    if not (hi > lo):
        raise ValueError("axis data range is degenerate (zero width)")
    nseg = m1 - degree
    delta = 1.0 / nseg
    knots = (np.arange(m1 + degree + 1) - degree) * delta
    return BSplineBasis1D(lo=lo, hi=hi, m1=m1, degree=degree, knots=knots)


@dataclass
class STDesign:
    """Tensor-product design for scattered (x, y, t) observations."""

    basis_x: BSplineBasis1D
    basis_y: BSplineBasis1D
    basis_t: BSplineBasis1D
    B: sp.csr_matrix  # n x m
    y: np.ndarray  # responses (log concentration)

    @property
    def m(self):
        return self.basis_x.m1 * self.basis_y.m1 * self.basis_t.m1

    @property
    def n(self):
        return self.B.shape[0]

    def bases(self):
        return (self.basis_x, self.basis_y, self.basis_t)


def tensor_rows(bases, pts):
    """Sparse matrix of tensor-product basis rows at ``pts`` (k x 3, axis
    order x, y, t).  Every point must be in range on all axes."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    bx, by, bt = bases
    fx, wx = bx.compact(pts[:, 0])
    fy, wy = by.compact(pts[:, 1])
    ft, wt = bt.compact(pts[:, 2])
    if (fx < 0).any() or (fy < 0).any() or (ft < 0).any():
        bad = np.nonzero((fx < 0) | (fy < 0) | (ft < 0))[0]
        coords = [tuple(float(c) for c in pts[i]) for i in bad[:5]]
        raise ExtrapolationError(
            f"{bad.size} point(s) outside the fitted range, e.g. {coords}", points=coords
        )

    k = pts.shape[0]
    px, py, pt = bx.degree + 1, by.degree + 1, bt.degree + 1
    my, mt = by.m1, bt.m1
    nnz_row = px * py * pt

    # outer products of the per-axis nonzero blocks
    vals = (wx[:, :, None, None] * wy[:, None, :, None] * wt[:, None, None, :]).reshape(k, -1)
    ix = fx[:, None] + np.arange(px)[None, :]
    iy = fy[:, None] + np.arange(py)[None, :]
    it = ft[:, None] + np.arange(pt)[None, :]
    cols = (
        (ix[:, :, None, None] * my + iy[:, None, :, None]) * mt + it[:, None, None, :]
    ).reshape(k, -1)
    rows = np.repeat(np.arange(k), nnz_row)
    m = bx.m1 * my * mt
    return sp.csr_matrix((vals.ravel(), (rows, cols.ravel())), shape=(k, m))


def build_design(x, y_coord, t, response, m_x=6, m_y=6, m_t=6, degree=3,
                 bases=None):
    """Assemble the design from observation coordinates and the (already
    logged) response vector.  When ``bases`` is given the ranges come from
    it rather than the observations, letting the spatial basis span the
    whole well field."""
    x = np.asarray(x, dtype=float)
    y_coord = np.asarray(y_coord, dtype=float)
    t = np.asarray(t, dtype=float)
    response = np.asarray(response, dtype=float)
    if not (len(x) == len(y_coord) == len(t) == len(response)):
        raise ValueError("coordinate and response lengths differ")
    if len(x) == 0:
        raise ValueError("no observations")
    if bases is None:
        bases = (
            build_basis(x, m_x, degree),
            build_basis(y_coord, m_y, degree),
            build_basis(t, m_t, degree),
        )
    B = tensor_rows(bases, np.column_stack([x, y_coord, t]))
    return STDesign(basis_x=bases[0], basis_y=bases[1], basis_t=bases[2],
                    B=B, y=response)


def difference_matrix(m1, d):
    """d-th order finite-difference operator, shape (m1 - d, m1)."""
    if d < 1 or d >= m1:
        raise ValueError(f"difference order {d} invalid for {m1} coefficients")
    return np.diff(np.eye(m1), n=d, axis=0)


@dataclass
class PenaltyMatrix:
    """Stacked per-axis difference penalty on the coefficient lattice."""

    d: int
    D: sp.csr_matrix  # stacked (Dx x I x I; I x Dy x I; I x I x Dt)

    def gram(self):
        return (self.D.T @ self.D).tocsr()


def build_penalty(m_x, m_y, m_t, d=2):
    """Apply the d-th difference operator along each lattice axis and stack
    the three blocks (shared lambda)."""
    Dx = sp.csr_matrix(difference_matrix(m_x, d))
    Dy = sp.csr_matrix(difference_matrix(m_y, d))
    Dt = sp.csr_matrix(difference_matrix(m_t, d))
    Ix, Iy, It = (sp.identity(m, format="csr") for m in (m_x, m_y, m_t))
    blocks = [
        sp.kron(sp.kron(Dx, Iy), It),
        sp.kron(sp.kron(Ix, Dy), It),
        sp.kron(sp.kron(Ix, Iy), Dt),
    ]
    return PenaltyMatrix(d=d, D=sp.vstack(blocks).tocsr())


class _PenalizedSolver:
    """Reusable solver for (B'B + lambda D'D) alpha = B'y across a grid.

    Below DENSE_LIMIT coefficients the solve goes through a column-pivoted
    QR of the stacked matrix [B; sqrt(lambda) D], which stays accurate even
    for extreme penalties (the normal equations square the condition
    number).  Larger systems use a sparse LU of the normal equations with
    one refinement step.
    """

    def __init__(self, design, penalty):
        self.design = design
        self.penalty = penalty
        self.B = design.B.tocsr()
        self.y = design.y
        self.n, self.m = self.B.shape
        self.Bty = np.asarray(self.B.T @ self.y).ravel()
        self._dense = self.m < DENSE_LIMIT
        if self._dense:
            self.B_dense = self.B.toarray()
            self.D_dense = penalty.D.toarray()
        else:
            self.BtB = (self.B.T @ self.B).tocsc()
            self.P = penalty.gram().tocsc()

    def solve(self, lam):
        """alpha, edf = tr(H), rss for one lambda."""
        if lam < 0:
            raise ValueError(f"lambda must be nonnegative, got {lam}")
        if self._dense:
            return self._solve_qr(lam)
        return self._solve_sparse(lam)

    def _solve_qr(self, lam):
        X = np.vstack([self.B_dense, math.sqrt(lam) * self.D_dense])
        rhs = np.concatenate([self.y, np.zeros(self.D_dense.shape[0])])
        Q, R, piv = qr(X, mode="economic", pivoting=True)
        diag = np.abs(np.diag(R))
        if diag.size == 0 or diag.min() <= diag.max() * max(X.shape) * np.finfo(float).eps:
            raise self._singular(lam)
        z = solve_triangular(R, Q.T @ rhs)
        alpha = np.empty(self.m)
        alpha[piv] = z
        # edf = tr(B A^-1 B') = ||B_perm R^-1||_F^2 since A = R'R (permuted)
        Z = solve_triangular(R, self.B_dense[:, piv].T, trans="T")
        edf = float((Z * Z).sum())
        resid = self.y - self.B_dense @ alpha
        return alpha, edf, float(resid @ resid)

    def _solve_sparse(self, lam):
        A = (self.BtB + lam * self.P).tocsc()
        try:
            lu = splu(A)
        except RuntimeError:
            raise self._singular(lam) from None
        Ad = A.toarray()
        alpha = lu.solve(self.Bty)
        alpha = alpha + lu.solve(self.Bty - Ad @ alpha)
        edf = float(np.trace(lu.solve(self.BtB.toarray())))
        resid = self.y - self.B @ alpha
        return alpha, edf, float(resid @ resid)

    def _singular(self, lam):
        if lam == 0:
            return RankDeficiencyError(
                "B'B is singular at lambda = 0; use lambda > 0 (or a smaller basis)"
            )
        return RankDeficiencyError(
            f"penalized system singular at lambda = {lam}; "
            "the design does not identify the penalty null space"
        )


@dataclass
class STModel:
    """Fitted spatiotemporal concentration smoother."""

    basis_x: BSplineBasis1D
    basis_y: BSplineBasis1D
    basis_t: BSplineBasis1D
    d: int
    lam: float
    alpha: np.ndarray
    sigma2: float
    edf: float
    n: int
    log_scale: bool = True
    solute: str = ""
    units: str = ""

    def bases(self):
        return (self.basis_x, self.basis_y, self.basis_t)

    @property
    def m(self):
        return self.alpha.size

    def linear_predictor(self, points):
        """B(points) . alpha on the model (log) scale."""
        rows = tensor_rows(self.bases(), points)
        return np.asarray(rows @ self.alpha).ravel()

    def predict(self, points):
        """Concentration predictions at (x, y, t) points in original units."""
        eta = self.linear_predictor(points)
        return np.exp(eta) if self.log_scale else eta

    def to_dict(self):
        return {
            "solute": self.solute,
            "units": self.units,
            "bases": {
                "x": self.basis_x.to_dict(),
                "y": self.basis_y.to_dict(),
                "t": self.basis_t.to_dict(),
            },
            "d": self.d,
            "lambda": self.lam,
            "alpha": [float(a) for a in self.alpha],
            "sigma2": self.sigma2,
            "edf": self.edf,
            "n": self.n,
            "log_scale": self.log_scale,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            basis_x=BSplineBasis1D.from_dict(d["bases"]["x"]),
            basis_y=BSplineBasis1D.from_dict(d["bases"]["y"]),
            basis_t=BSplineBasis1D.from_dict(d["bases"]["t"]),
            d=d["d"],
            lam=d["lambda"],
            alpha=np.asarray(d["alpha"], dtype=float),
            sigma2=d["sigma2"],
            edf=d["edf"],
            n=d["n"],
            log_scale=d["log_scale"],
            solute=d.get("solute", ""),
            units=d.get("units", ""),
        )

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def fit(design, penalty, lam, log_scale=True, solute="", units=""):
    """Solve the penalized normal equations for one lambda."""
    eq = _PenalizedSolver(design, penalty)
    return _fit_with(eq, design, penalty, lam, log_scale, solute, units)


def _fit_with(eq, design, penalty, lam, log_scale=True, solute="", units=""):
    alpha, edf, rss = eq.solve(lam)
    denom = eq.n - edf
    sigma2 = rss / denom if denom > 0 else 0.0
    return STModel(
        basis_x=design.basis_x,
        basis_y=design.basis_y,
        basis_t=design.basis_t,
        d=penalty.d,
        lam=float(lam),
        alpha=alpha,
        sigma2=float(sigma2),
        edf=edf,
        n=eq.n,
        log_scale=log_scale,
        solute=solute,
        units=units,
    )


def gcv_score(n, rss, edf):
    """Generalized cross-validation: n * RSS / (n - edf)^2."""
    denom = n - edf
    if denom <= 0:
        return np.inf
    return n * rss / denom**2


def select_lambda(design, penalty, grid=None):
    """GCV grid search; ties (within 1 part in 1e12) go to the larger
    lambda.  Raises FitError when every candidate saturates the data."""
    if grid is None:
        grid = DEFAULT_LAMBDA_GRID
    grid = np.sort(np.asarray(grid, dtype=float))
    if grid.size == 0:
        raise ValueError("empty lambda grid")
    if grid.size == 1:
        warnings.warn("lambda grid has a single value; using it as-is", stacklevel=2)
        return float(grid[0])

    eq = _PenalizedSolver(design, penalty)
    # a fit that saturates the data (tr(H) -> n) makes GCV meaningless
    saturation = eq.n - max(1e-3, 1e-6 * eq.n)
    best_lam, best_score = None, np.inf
    for lam in grid:
        try:
            _, edf, rss = eq.solve(float(lam))
        except RankDeficiencyError:
            continue
        if edf >= saturation:
            continue
        score = gcv_score(eq.n, rss, edf)
        if score <= best_score * (1.0 + 1e-12):
            best_lam, best_score = float(lam), min(score, best_score)
    if best_lam is None or not math.isfinite(best_score):
        raise FitError(
            "GCV found no admissible lambda (tr(H) >= n everywhere); "
            "the basis is too rich for the data, reduce m_x/m_y/m_t"
        )
    return best_lam


def fit_auto(design, penalty, grid=None, log_scale=True, solute="", units=""):
    """Select lambda by GCV, then fit."""
    lam = select_lambda(design, penalty, grid)
    eq = _PenalizedSolver(design, penalty)
    return _fit_with(eq, design, penalty, lam, log_scale, solute, units)
