"""Dense two-phase simplex solver with Bland's anti-cycling rule.

Deliberately small and deterministic: desk-scale problems (up to a few
hundred variables), 64-bit floats throughout, lowest-index tie breaking
everywhere.  Used for the per-atom feasibility systems of the minimal
part-count search and for the minimal-norm extension program.

Conventions
-----------
minimize    c . x
subject to  a_eq x == b_eq
            g_ub x <= h_ub
            lower[j] <= x[j] <= upper[j]   (None means unbounded on that side;
                                            the default bound is 0 <= x[j])

Duals are reported per constraint, equality rows first, then inequality
rows.  Signs follow the convention in which the dual objective is
``b_eq . y_eq + h_ub . y_ub`` with ``y_ub <= 0``, so weak duality reads
``dual objective <= primal objective``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-8
DUAL_TOL = 1e-7


class LPError(RuntimeError):
    """Raised when the solver cannot certify a result (should not happen on
    well-posed inputs; surfaced instead of returning garbage)."""


def _matrix(a, rows: int | None, cols: int) -> np.ndarray:
    if a is None:
        return np.zeros((0, cols))
    m = np.atleast_2d(np.asarray(a, dtype=np.float64))
    if m.size == 0:
        return np.zeros((0, cols))
    if m.shape[1] != cols:
        raise ValueError(f"constraint matrix has {m.shape[1]} columns, expected {cols}")
    if rows is not None and m.shape[0] != rows:
        raise ValueError(f"constraint matrix has {m.shape[0]} rows, expected {rows}")
    return m


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """Data of one dense LP; see the module docstring for the conventions."""

    c: np.ndarray
    a_eq: np.ndarray
    b_eq: np.ndarray
    g_ub: np.ndarray
    h_ub: np.ndarray
    lower: tuple
    upper: tuple

    def __post_init__(self):
        c = np.asarray(self.c, dtype=np.float64).ravel()
        n = c.size
        if n == 0:
            raise ValueError("an LP needs at least one variable")
        b_eq = np.asarray(self.b_eq, dtype=np.float64).ravel() if self.b_eq is not None else np.zeros(0)
        h_ub = np.asarray(self.h_ub, dtype=np.float64).ravel() if self.h_ub is not None else np.zeros(0)
        a_eq = _matrix(self.a_eq, b_eq.size if b_eq.size else None, n)
        g_ub = _matrix(self.g_ub, h_ub.size if h_ub.size else None, n)
        if a_eq.shape[0] != b_eq.size:
            raise ValueError("a_eq and b_eq sizes disagree")
        if g_ub.shape[0] != h_ub.size:
            raise ValueError("g_ub and h_ub sizes disagree")
        lower = self.lower if self.lower is not None else (0.0,) * n
        upper = self.upper if self.upper is not None else (None,) * n
        lower = tuple(None if lo is None else float(lo) for lo in lower)
        upper = tuple(None if up is None else float(up) for up in upper)
        if len(lower) != n or len(upper) != n:
            raise ValueError("bounds must have one entry per variable")
        for lo, up in zip(lower, upper):
            if lo is not None and up is not None and lo > up:
                raise ValueError("lower bound exceeds upper bound")
        for arr, name in ((c, "objective"), (a_eq, "a_eq"), (b_eq, "b_eq"),
                          (g_ub, "g_ub"), (h_ub, "h_ub")):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "a_eq", a_eq)
        object.__setattr__(self, "b_eq", b_eq)
        object.__setattr__(self, "g_ub", g_ub)
        object.__setattr__(self, "h_ub", h_ub)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def n_vars(self) -> int:
        return self.c.size

    @property
    def n_eq(self) -> int:
        return self.b_eq.size

    @property
    def n_ub(self) -> int:
        return self.h_ub.size


def linear_program(c, a_eq=None, b_eq=None, g_ub=None, h_ub=None,
                   lower=None, upper=None) -> LinearProgram:
    """Convenience constructor with the default bound 0 <= x."""
    return LinearProgram(c, a_eq, b_eq, g_ub, h_ub, lower, upper)


@dataclass(frozen=True, eq=False)
class LPSolution:
    status: str
    primal: np.ndarray | None
    dual: np.ndarray | None
    objective_value: float | None
    basis: tuple[int, ...] | None
    feasibility_residual: float
    cs_residual: float
    duality_gap: float

    @property
    def is_optimal(self) -> bool:
        return self.status == OPTIMAL


# ---------------------------------------------------------------------------
# standard form:  min c_s . y,  rows y = rhs,  y >= 0
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class _StandardForm:
    c: np.ndarray            # costs over structural columns (n_cols)
    rows: np.ndarray         # (m, n_cols) equality system including slacks
    rhs: np.ndarray          # (m,), normalized nonnegative
    row_sign: np.ndarray     # +1/-1 applied to each original row
    n_struct: int            # structural columns (before slacks)
    n_slack: int
    eq_rows: int             # leading rows that came from equalities
    col_plus: np.ndarray     # per original var: structural column of x+
    col_minus: np.ndarray    # per original var: column of x- or -1
    shift: np.ndarray        # per original var: additive shift (finite lower bound)
    offset: float            # constant added back to the objective
    slack_basis_ok: np.ndarray  # per row: slack column usable as initial basis


def _standard_form(p: LinearProgram) -> _StandardForm:
    n = p.n_vars
    col_plus = np.zeros(n, dtype=np.int64)
    col_minus = np.full(n, -1, dtype=np.int64)
    shift = np.zeros(n)
    cols = []
    for j in range(n):
        lo = p.lower[j]
        if lo is None:
            col_plus[j] = len(cols)
            cols.append(j)
            col_minus[j] = len(cols)
            cols.append(j)
        else:
            shift[j] = lo
            col_plus[j] = len(cols)
            cols.append(j)
    n_struct = len(cols)

    def expand(mat: np.ndarray) -> np.ndarray:
        out = np.zeros((mat.shape[0], n_struct))
        for j in range(n):
            out[:, col_plus[j]] += mat[:, j]
            if col_minus[j] >= 0:
                out[:, col_minus[j]] -= mat[:, j]
        return out

    a_eq = expand(p.a_eq)
    b_eq = p.b_eq - p.a_eq @ shift
    # upper bounds become extra <= rows in the expanded columns
    ub_rows = []
    ub_rhs = []
    for j in range(n):
        up = p.upper[j]
        if up is None:
            continue
        row = np.zeros(n_struct)
        row[col_plus[j]] = 1.0
        if col_minus[j] >= 0:
            row[col_minus[j]] = -1.0
        ub_rows.append(row)
        ub_rhs.append(up - shift[j])
    g_ub = expand(p.g_ub)
    h_ub = p.h_ub - p.g_ub @ shift
    if ub_rows:
        g_ub = np.vstack([g_ub, np.array(ub_rows)])
        h_ub = np.concatenate([h_ub, np.array(ub_rhs)])

    m_eq, m_ub = a_eq.shape[0], g_ub.shape[0]
    m = m_eq + m_ub
    n_slack = m_ub
    rows = np.zeros((m, n_struct + n_slack))
    rhs = np.zeros(m)
    rows[:m_eq, :n_struct] = a_eq
    rhs[:m_eq] = b_eq
    rows[m_eq:, :n_struct] = g_ub
    rows[m_eq:, n_struct:] = np.eye(m_ub)
    rhs[m_eq:] = h_ub

    row_sign = np.ones(m)
    neg = rhs < 0.0
    rows[neg] *= -1.0
    rhs[neg] *= -1.0
    row_sign[neg] = -1.0

    slack_basis_ok = np.zeros(m, dtype=bool)
    slack_basis_ok[m_eq:] = ~neg[m_eq:]

    c = np.zeros(n_struct + n_slack)
    for j in range(n):
        c[col_plus[j]] += p.c[j]
        if col_minus[j] >= 0:
            c[col_minus[j]] -= p.c[j]
    offset = float(p.c @ shift)
    return _StandardForm(c, rows, rhs, row_sign, n_struct, n_slack, m_eq,
                         col_plus, col_minus, shift, offset, slack_basis_ok)


def _pivot(tab: np.ndarray, row: int, col: int) -> None:
    tab[row] /= tab[row, col]
    factors = tab[:, col].copy()
    factors[row] = 0.0
    tab -= np.outer(factors, tab[row])


def _run_simplex(tab: np.ndarray, basis: list[int], n_cols: int,
                 max_iter: int) -> str:
    """Iterate on a tableau whose last row is the (negated-cost) objective and
    whose last column is the rhs.  Bland's rule: lowest eligible index enters;
    on ratio ties the row whose basic variable has the lowest index leaves.
    Returns OPTIMAL or UNBOUNDED (of the phase objective)."""
    m = tab.shape[0] - 1
    for _ in range(max_iter):
        red = tab[-1, :n_cols]
        candidates = np.nonzero(red < -PIVOT_TOL)[0]
        if candidates.size == 0:
            return OPTIMAL
        col = int(candidates[0])
        col_vals = tab[:m, col]
        rows_ok = np.nonzero(col_vals > PIVOT_TOL)[0]
        if rows_ok.size == 0:
            return UNBOUNDED
        ratios = tab[rows_ok, -1] / col_vals[rows_ok]
        best = ratios.min()
        tied = rows_ok[ratios <= best + 1e-15 * (1.0 + abs(best))]
        row = int(min(tied, key=lambda r: basis[r]))
        _pivot(tab, row, col)
        basis[row] = col
        tab[:m, -1] = np.maximum(tab[:m, -1], 0.0)
    raise LPError("simplex iteration limit exceeded")


def solve(p: LinearProgram) -> LPSolution:
    """Solve the LP; deterministic for identical inputs."""
    sf = _standard_form(p)
    m, n_cols = sf.rows.shape
    scale = 1.0 + float(np.max(np.abs(sf.rhs))) if m else 1.0
    max_iter = 20000 + 200 * (m + n_cols)

    # ----- phase 1: drive artificial variables to zero ---------------------
    art_cols = []
    basis: list[int] = []
    for i in range(m):
        if sf.slack_basis_ok[i]:
            basis.append(sf.n_struct + (i - sf.eq_rows))
        else:
            art_cols.append(i)
            basis.append(-1)
    n_art = len(art_cols)
    tab = np.zeros((m + 1, n_cols + n_art + 1))
    tab[:m, :n_cols] = sf.rows
    tab[:m, -1] = sf.rhs
    for k, i in enumerate(art_cols):
        tab[i, n_cols + k] = 1.0
        basis[i] = n_cols + k
    # phase-1 objective: minimize the sum of artificials
    tab[-1, n_cols:n_cols + n_art] = 1.0
    for i in art_cols:
        tab[-1] -= tab[i]
    status = _run_simplex(tab, basis, n_cols + n_art, max_iter)
    if status != OPTIMAL:
        raise LPError("phase-1 objective unbounded (cannot happen)")
    if -tab[-1, -1] > FEAS_TOL * scale:
        return LPSolution(INFEASIBLE, None, None, None, None,
                          float("nan"), float("nan"), float("nan"))

    # drive surviving artificials out of the basis, dropping redundant rows
    keep_rows = np.ones(m, dtype=bool)
    for i in range(m):
        if basis[i] < n_cols:
            continue
        pivot_col = -1
        for j in range(n_cols):
            if j not in basis and abs(tab[i, j]) > PIVOT_TOL:
                pivot_col = j
                break
        if pivot_col >= 0:
            _pivot(tab, i, pivot_col)
            basis[i] = pivot_col
        else:
            keep_rows[i] = False  # redundant constraint row

    row_keep_idx = np.nonzero(keep_rows)[0]
    tab2 = np.zeros((row_keep_idx.size + 1, n_cols + 1))
    tab2[:-1, :n_cols] = tab[row_keep_idx][:, :n_cols]
    tab2[:-1, -1] = tab[row_keep_idx][:, -1]
    basis2 = [basis[i] for i in row_keep_idx]

    # ----- phase 2: original objective -------------------------------------
    tab2[-1, :n_cols] = sf.c
    for r, b in enumerate(basis2):
        tab2[-1] -= sf.c[b] * tab2[r]
    status = _run_simplex(tab2, basis2, n_cols, max_iter)
    if status == UNBOUNDED:
        return LPSolution(UNBOUNDED, None, None, None, None,
                          float("nan"), float("nan"), float("nan"))

    x_std = np.zeros(n_cols)
    for r, b in enumerate(basis2):
        x_std[b] = tab2[r, -1]
    return _finish(p, sf, row_keep_idx, basis2, x_std)


def _primal_from_std(p: LinearProgram, sf: _StandardForm, x_std: np.ndarray) -> np.ndarray:
    x = np.empty(p.n_vars)
    for j in range(p.n_vars):
        x[j] = x_std[sf.col_plus[j]] + sf.shift[j]
        if sf.col_minus[j] >= 0:
            x[j] -= x_std[sf.col_minus[j]]
    return x


def _finish(p: LinearProgram, sf: _StandardForm, row_keep_idx: np.ndarray,
            basis: list[int], x_std: np.ndarray) -> LPSolution:
    x = _primal_from_std(p, sf, x_std)
    objective = float(p.c @ x)

    # duals from the final basis: solve B^T y = c_B on the kept rows
    kept = sf.rows[row_keep_idx]
    bmat = kept[:, basis]
    c_b = sf.c[np.array(basis, dtype=np.int64)]
    try:
        y_kept = np.linalg.solve(bmat.T, c_b)
    except np.linalg.LinAlgError:
        y_kept = np.linalg.lstsq(bmat.T, c_b, rcond=None)[0]
    y_std = np.zeros(sf.rows.shape[0])
    y_std[row_keep_idx] = y_kept
    y_orig_rows = sf.row_sign * y_std  # undo rhs sign normalization

    m_eq = sf.eq_rows
    n_public = p.n_eq + p.n_ub
    dual = np.concatenate([y_orig_rows[:m_eq], y_orig_rows[m_eq:m_eq + p.n_ub]])
    assert dual.size == n_public

    # residuals, in the original problem space
    feas = 0.0
    if p.n_eq:
        feas = max(feas, float(np.max(np.abs(p.a_eq @ x - p.b_eq))))
    if p.n_ub:
        feas = max(feas, float(np.max(p.g_ub @ x - p.h_ub, initial=0.0)))
    for j in range(p.n_vars):
        lo, up = p.lower[j], p.upper[j]
        if lo is not None:
            feas = max(feas, lo - x[j])
        if up is not None:
            feas = max(feas, x[j] - up)

    # duality gap against the dual objective of the full standard system
    dual_obj = float(sf.rhs @ y_std) + sf.offset
    gap = abs(objective - dual_obj)

    # complementary slackness on the standard system
    red = sf.c - sf.rows.T @ y_std
    cs = float(np.max(np.abs(x_std * red), initial=0.0))
    slack_rows = sf.rhs - sf.rows @ x_std
    cs = max(cs, float(np.max(np.abs(y_std * slack_rows), initial=0.0)))

    return LPSolution(OPTIMAL, x, dual, objective, tuple(int(b) for b in basis),
                      float(feas), cs, gap)


def objective_for_basis(p: LinearProgram, basis: tuple[int, ...]) -> float:
    """Recompute the objective value of a basic solution from its basis.

    Used to confirm that re-solving with a known-optimal basis reproduces the
    solved objective.
    """
    sf = _standard_form(p)
    cols = np.array(basis, dtype=np.int64)
    bmat = sf.rows[:, cols]
    if bmat.shape[0] == cols.size:
        x_b = np.linalg.solve(bmat, sf.rhs)
    else:
        # the solve dropped redundant rows; the overdetermined system is
        # consistent, so least squares recovers the exact basic solution
        x_b = np.linalg.lstsq(bmat, sf.rhs, rcond=None)[0]
    x_std = np.zeros(sf.rows.shape[1])
    x_std[cols] = x_b
    x = _primal_from_std(p, sf, x_std)
    return float(p.c @ x)


def is_feasible(p: LinearProgram) -> bool:
    """Phase-1 feasibility answer for the constraint system of ``p``."""
    probe = LinearProgram(np.zeros(p.n_vars), p.a_eq, p.b_eq, p.g_ub, p.h_ub,
                          p.lower, p.upper)
    return solve(probe).status == OPTIMAL
