"""Deterministic numerical kernels.

Composite Gauss-Legendre quadrature on the unit interval and square, a
two-sided bivariate ECDF distance, histogram binning of pair samples,
and the second singular value of the normalized binned operator via
power iteration with explicit deflation of the known top pair.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EvaluationError, NonConvergenceError, ValidationError

_RULES = ("gauss-legendre", "tensor-gauss-legendre")


@dataclass(frozen=True)
class QuadratureSpec:
    """Composite Gauss-Legendre rule on [0, 1] (per axis).

    Parameters
    ----------
    rule : str
        "gauss-legendre" for 1-D integrals, "tensor-gauss-legendre" for
        the tensor-product rule on the unit square.
    nodes_per_axis : int
        Gauss-Legendre nodes per panel, exact for polynomials of degree
        <= 2*nodes_per_axis - 1 on each panel.
    subdivisions : int
        Equal panels per axis.
    """

    rule: str = "gauss-legendre"
    nodes_per_axis: int = 32
    subdivisions: int = 8

    def __post_init__(self):
        if self.rule not in _RULES:
            raise ValidationError(f"unknown quadrature rule {self.rule!r}")
        if not 2 <= int(self.nodes_per_axis) <= 1024:
            raise ValidationError("nodes_per_axis must be in [2, 1024]")
        if not 1 <= int(self.subdivisions) <= 4096:
            raise ValidationError("subdivisions must be in [1, 4096]")
        object.__setattr__(self, "nodes_per_axis", int(self.nodes_per_axis))
        object.__setattr__(self, "subdivisions", int(self.subdivisions))

    def axis_nodes(self) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and weights of the composite rule on [0, 1]."""
        x, w = np.polynomial.legendre.leggauss(self.nodes_per_axis)
        h = 1.0 / self.subdivisions
        starts = np.arange(self.subdivisions) * h
        nodes = (starts[:, None] + (x[None, :] + 1.0) * (h / 2.0)).ravel()
        weights = np.tile(w * (h / 2.0), self.subdivisions)
        return nodes, weights


#: Default rule for covariance integrals on the unit square.
DEFAULT_QUAD_2D = QuadratureSpec("tensor-gauss-legendre", 32, 8)

#: Default rule for the overlap integral on [0, 1].
DEFAULT_QUAD_1D = QuadratureSpec("gauss-legendre", 32, 1)


def _require_finite(values: np.ndarray, where: np.ndarray) -> None:
    bad = ~np.isfinite(values)
    if np.any(bad):
        idx = np.argwhere(bad)[0]
        node = where[tuple(idx)] if where.ndim > 1 else where[idx[0]]
        raise EvaluationError(f"integrand is non-finite at node {node}")


def quad_1d(f, spec: QuadratureSpec = DEFAULT_QUAD_1D) -> float:
    """Integrate ``f`` over [0, 1].

    ``f`` must accept a 1-D array of nodes and return values of the same
    shape.  Non-finite values raise :class:`EvaluationError` naming the
    offending node.
    """
    if spec.rule != "gauss-legendre":
        raise ValidationError("quad_1d requires the gauss-legendre rule")
    nodes, weights = spec.axis_nodes()
    values = np.asarray(f(nodes), dtype=float)
    if values.shape != nodes.shape:
        raise ValidationError("integrand must return one value per node")
    _require_finite(values, nodes)
    return float(weights @ values)


def quad_2d(f, spec: QuadratureSpec = DEFAULT_QUAD_2D) -> float:
    """Integrate ``f`` over the unit square with a tensor GL rule.

    ``f`` must broadcast over coordinate grids ``(U, V)``.
    """
    if spec.rule != "tensor-gauss-legendre":
        raise ValidationError("quad_2d requires the tensor-gauss-legendre rule")
    nodes, weights = spec.axis_nodes()
    U, V = np.meshgrid(nodes, nodes, indexing="ij")
    values = np.asarray(f(U, V), dtype=float)
    if values.shape != U.shape:
        raise ValidationError("integrand must return one value per grid node")
    bad = ~np.isfinite(values)
    if np.any(bad):
        i, j = np.argwhere(bad)[0]
        raise EvaluationError(f"integrand is non-finite at node ({nodes[i]}, {nodes[j]})")
    return float(weights @ values @ weights)


# ---------------------------------------------------------------------------
# Bivariate ECDF distance


def _dense_codes(a: np.ndarray) -> np.ndarray:
    # Integer codes preserving order and ties.
    _, codes = np.unique(a, return_inverse=True)
    return codes.astype(np.int64)


def _count_prev(codes: np.ndarray, strict: bool) -> np.ndarray:
    """For each position i, count earlier positions j with
    codes[j] <= codes[i] (strict=False) or codes[j] < codes[i] (strict=True).

    Bottom-up merge counting; O(n log^2 n) with vectorized levels.
    """
    n = codes.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    size = 1 << int(np.ceil(np.log2(max(n, 1)))) if n > 1 else 1
    pad_code = codes.max(initial=0) + 1
    ys = np.full(size, pad_code, dtype=np.int64)
    ys[:n] = codes
    pos = np.arange(size)
    counts = np.zeros(size, dtype=np.int64)
    side = "left" if strict else "right"
    offset = pad_code + 1
    width = 1
    while width < size:
        pairs = size // (2 * width)
        block = ys.reshape(pairs, 2 * width)
        pos_block = pos.reshape(pairs, 2 * width)
        left = block[:, :width]
        right = block[:, width:]
        # Rows are value-disjoint after offsetting, so one flat search works.
        row_off = (np.arange(pairs, dtype=np.int64) * offset)[:, None]
        flat_left = (left + row_off).ravel()
        flat_right = (right + row_off).ravel()
        located = np.searchsorted(flat_left, flat_right, side=side)
        located -= np.repeat(np.arange(pairs, dtype=np.int64) * width, width)
        counts[pos_block[:, width:].ravel()] += located
        order = np.argsort(block, axis=1, kind="stable")
        ys = np.take_along_axis(block, order, axis=1).ravel()
        pos = np.take_along_axis(pos_block, order, axis=1).ravel()
        width *= 2
    return counts[:n]


def _group_max_runs(keys_a: np.ndarray, keys_b: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Within runs of identical (keys_a, keys_b), replace values by the run max."""
    n = values.shape[0]
    if n == 0:
        return values
    new_run = np.empty(n, dtype=bool)
    new_run[0] = True
    new_run[1:] = (keys_a[1:] != keys_a[:-1]) | (keys_b[1:] != keys_b[:-1])
    run_id = np.cumsum(new_run) - 1
    run_max = np.full(run_id[-1] + 1, np.iinfo(np.int64).min, dtype=values.dtype)
    np.maximum.at(run_max, run_id, values)
    return run_max[run_id]


def ecdf_ks(sample, cdf) -> float:
    """Kolmogorov-Smirnov style distance between a pair sample and a cdf.

    The empirical joint cdf is compared with ``cdf`` at every sample
    point from both sides of the jump: with inclusive counts
    ``#{x_j <= x_i, y_j <= y_i}/n`` and with strict counts (the
    lower-left corner of the jump cell).  ``cdf`` must broadcast over
    coordinate arrays.

    Parameters
    ----------
    sample : PairSample or (n, 2) array
    cdf : callable
        ``cdf(x, y) -> array`` of joint cdf values.

    Returns
    -------
    float
        ``max_i max(|F_n(x_i, y_i) - C(x_i, y_i)|, |F_n(x_i-, y_i-) - C(x_i, y_i)|)``.
    """
    pairs = np.asarray(getattr(sample, "pairs", sample), dtype=float)
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise ValidationError("sample must be an (n, 2) array of pairs")
    n = pairs.shape[0]
    if n == 0:
        raise ValidationError("sample must contain at least one pair")
    x, y = pairs[:, 0], pairs[:, 1]
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValidationError("sample coordinates must be finite")
    cx, cy = _dense_codes(x), _dense_codes(y)

    # Inclusive counts: lexicographic order (x asc, y asc) puts every
    # dominated-or-equal point before or at i except later duplicates,
    # which the run-max pass folds back in.
    order = np.lexsort((cy, cx))
    inc_sorted = _count_prev(cy[order], strict=False) + 1
    inc_sorted = _group_max_runs(cx[order], cy[order], inc_sorted)
    inclusive = np.empty(n, dtype=np.int64)
    inclusive[order] = inc_sorted

    # Strict counts: order y descending inside each x so that same-x
    # predecessors can never be counted as strictly below.
    order2 = np.lexsort((-cy, cx))
    strict_sorted = _count_prev(cy[order2], strict=True)
    strict = np.empty(n, dtype=np.int64)
    strict[order2] = strict_sorted

    target = np.asarray(cdf(x, y), dtype=float)
    if target.shape != x.shape:
        raise ValidationError("cdf must return one value per sample point")
    if not np.all(np.isfinite(target)):
        raise ValidationError("cdf returned non-finite values on the sample")
    upper = np.abs(inclusive / n - target)
    lower = np.abs(strict / n - target)
    return float(max(upper.max(), lower.max()))


# ---------------------------------------------------------------------------
# Binned operator and its second singular value


@dataclass(frozen=True, eq=False)
class BinnedOperator:
    """Joint histogram masses on an m x m grid with marginals.

    Invariants (checked on construction): all masses nonnegative, rows
    and columns sum to the stated marginals within 1e-12, total mass 1
    within 1e-12.
    """

    joint_mass: np.ndarray
    row_marginal: np.ndarray = field(default=None)
    col_marginal: np.ndarray = field(default=None)

    def __post_init__(self):
        joint = np.asarray(self.joint_mass, dtype=float)
        if joint.ndim != 2 or joint.shape[0] != joint.shape[1] or joint.shape[0] < 2:
            raise ValidationError("joint_mass must be a square matrix with m >= 2")
        object.__setattr__(self, "joint_mass", joint)
        row = joint.sum(axis=1) if self.row_marginal is None else np.asarray(self.row_marginal, float)
        col = joint.sum(axis=0) if self.col_marginal is None else np.asarray(self.col_marginal, float)
        object.__setattr__(self, "row_marginal", row)
        object.__setattr__(self, "col_marginal", col)
        if row.shape != (joint.shape[0],) or col.shape != (joint.shape[1],):
            raise ValidationError("marginals must have one entry per bin")
        if np.any(joint < 0) or np.any(row < 0) or np.any(col < 0):
            raise ValidationError("masses must be nonnegative")
        if abs(joint.sum() - 1.0) > 1e-12:
            raise ValidationError("joint mass must sum to 1 within 1e-12")
        if np.max(np.abs(joint.sum(axis=1) - row)) > 1e-12:
            raise ValidationError("row marginal inconsistent with joint mass")
        if np.max(np.abs(joint.sum(axis=0) - col)) > 1e-12:
            raise ValidationError("column marginal inconsistent with joint mass")

    @property
    def m(self) -> int:
        return self.joint_mass.shape[0]


def bin_pairs(sample, m: int) -> BinnedOperator:
    """Histogram a copula-scale pair sample onto an m x m grid.

    Coordinates must lie in [0, 1]; the value 1.0 falls in the last bin.
    """
    pairs = np.asarray(getattr(sample, "pairs", sample), dtype=float)
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise ValidationError("sample must be an (n, 2) array of pairs")
    if pairs.shape[0] == 0:
        raise ValidationError("sample must contain at least one pair")
    if not 2 <= int(m) <= 4096:
        raise ValidationError("m must be in [2, 4096]")
    u, v = pairs[:, 0], pairs[:, 1]
    if np.any(u < 0) or np.any(u > 1) or np.any(v < 0) or np.any(v > 1):
        raise ValidationError("coordinates must lie in [0, 1] (copula scale)")
    counts, _, _ = np.histogram2d(u, v, bins=int(m), range=[[0.0, 1.0], [0.0, 1.0]])
    return BinnedOperator(counts / pairs.shape[0])


def _normalized_matrix(op: BinnedOperator) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rows = op.row_marginal > 0
    cols = op.col_marginal > 0
    u1 = np.sqrt(op.row_marginal[rows])
    v1 = np.sqrt(op.col_marginal[cols])
    A = op.joint_mass[np.ix_(rows, cols)] / np.outer(u1, v1)
    return A, u1, v1


def _power_iteration_second(A, u1, v1, tol, max_iter):
    """Second singular value of A whose top pair is (1, u1, v1)."""
    rdim, cdim = A.shape
    if min(rdim, cdim) < 2:
        return 0.0, 0.0, 0, np.zeros(cdim)
    # Deterministic pseudo-random start, independent of any user stream.
    start = np.random.Generator(np.random.Philox(key=cdim)).standard_normal(cdim)
    v = start - (v1 @ start) * v1
    norm = np.linalg.norm(v)
    if norm < 1e-300:
        return 0.0, 0.0, 0, v
    v /= norm
    sigma = 0.0
    residual = np.inf
    for iteration in range(1, int(max_iter) + 1):
        u = A @ v
        u -= (u1 @ u) * u1
        sigma = np.linalg.norm(u)
        if sigma < 1e-300:
            return 0.0, 0.0, iteration, v
        u /= sigma
        w = A.T @ u
        w -= (v1 @ w) * v1
        residual = float(np.linalg.norm(w - sigma * v) / max(sigma, 1e-300))
        norm = np.linalg.norm(w)
        if norm < 1e-300:
            return 0.0, 0.0, iteration, v
        v = w / norm
        if residual <= tol:
            return float(sigma), residual, iteration, v
    raise NonConvergenceError(
        f"power iteration did not reach residual {tol:g} in {max_iter} iterations "
        f"(last residual {residual:g})",
        iterate=v,
        residual=residual,
        iterations=int(max_iter),
    )


def second_singular_value(op: BinnedOperator, tol: float = 1e-10, max_iter: int = 10000) -> float:
    """Second singular value of the marginal-normalized operator.

    The matrix ``A[i, j] = joint[i, j] / sqrt(row[i] * col[j])`` (over
    nonzero marginals) has top singular pair ``(1, sqrt(row), sqrt(col))``;
    that pair is deflated by explicit orthogonalization each iteration
    and the next singular value is found by power iteration on the
    residual operator.

    Returns a value clamped to [0, 1].  Raises
    :class:`NonConvergenceError` (carrying the last iterate and its
    residual) if the tolerance is not met within ``max_iter``.
    """
    if not 0 < tol < 1:
        raise ValidationError("tol must be in (0, 1)")
    if int(max_iter) < 1:
        raise ValidationError("max_iter must be >= 1")
    A, u1, v1 = _normalized_matrix(op)
    sigma, _, _, _ = _power_iteration_second(A, u1, v1, tol, int(max_iter))
    return float(min(max(sigma, 0.0), 1.0))


def second_singular_value_detail(op: BinnedOperator, tol: float = 1e-10,
                                 max_iter: int = 10000) -> tuple[float, float, int]:
    """Like :func:`second_singular_value` but also reports the achieved
    residual and the iteration count."""
    if not 0 < tol < 1:
        raise ValidationError("tol must be in (0, 1)")
    if int(max_iter) < 1:
        raise ValidationError("max_iter must be >= 1")
    A, u1, v1 = _normalized_matrix(op)
    sigma, residual, iterations, _ = _power_iteration_second(A, u1, v1, tol, int(max_iter))
    return float(min(max(sigma, 0.0), 1.0)), residual, iterations
