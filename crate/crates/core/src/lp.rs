//! Dense linear programs solved by a two-phase revised simplex method.
//!
//! Problems are stated as `min cᵀx` subject to rows `aᵢᵀx {≤,≥,=} bᵢ` and
//! per-variable bounds `l ≤ x ≤ u` (`l` may be `-∞`, `u` may be `+∞`).
//! The solver converts to standard form, equilibrates rows and columns by
//! powers of two, and pivots with Bland's rule so degenerate problems cannot
//! cycle. Duals are reported in the original row space with the sign
//! convention of a minimization: `y ≥ 0` on `≥` rows, `y ≤ 0` on `≤` rows.

use std::fmt;

use crate::matrix::{dot, Matrix};

const PIVOT_TOL: f64 = 1e-9;
const OPTIMALITY_TOL: f64 = 1e-10;
const PHASE1_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 40;
const DUAL_ROUNDOFF: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpProblem {
    /// Minimized.
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LpProblem {
    /// Nonnegative variables, no rows yet.
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LpProblem {
            objective,
            constraints: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, sense: Sense, rhs: f64) -> &mut Self {
        self.constraints.push(Constraint { coeffs, sense, rhs });
        self
    }

    pub fn with_row(mut self, coeffs: Vec<f64>, sense: Sense, rhs: f64) -> Self {
        self.add_row(coeffs, sense, rhs);
        self
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.constraints.len()
    }

    pub fn row_senses(&self) -> impl Iterator<Item = Sense> + '_ {
        self.constraints.iter().map(|c| c.sense)
    }

    /// Constraint matrix as a dense `rows × vars` matrix.
    pub fn matrix(&self) -> Matrix {
        let rows: Vec<Vec<f64>> = self.constraints.iter().map(|c| c.coeffs.clone()).collect();
        if rows.is_empty() {
            Matrix::zeros(0, self.num_vars())
        } else {
            Matrix::from_rows(&rows)
        }
    }

    fn check(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        let bad = |msg: String| Err(LpError::InvalidProblem(msg));
        if self.lower.len() != n || self.upper.len() != n {
            return bad(format!("bounds have lengths {}/{}, expected {n}", self.lower.len(), self.upper.len()));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return bad("non-finite objective coefficient".into());
        }
        for (i, row) in self.constraints.iter().enumerate() {
            if row.coeffs.len() != n {
                return bad(format!("row {i} has {} coefficients, expected {n}", row.coeffs.len()));
            }
            if row.coeffs.iter().any(|a| !a.is_finite()) || !row.rhs.is_finite() {
                return bad(format!("row {i} has a non-finite coefficient"));
            }
        }
        for j in 0..n {
            let (l, u) = (self.lower[j], self.upper[j]);
            if l.is_nan() || u.is_nan() || l == f64::INFINITY || u == f64::NEG_INFINITY || l > u {
                return bad(format!("variable {j} has invalid bounds [{l}, {u}]"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Optimal point; empty unless `Optimal`.
    pub primal: Vec<f64>,
    /// One multiplier per constraint row; empty unless `Optimal`.
    pub dual: Vec<f64>,
    /// `c − Aᵀy` per variable; empty unless `Optimal`.
    pub reduced_costs: Vec<f64>,
    pub objective_value: f64,
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// Dual objective `bᵀy + Σ_j (rⱼ⁺ lⱼ + rⱼ⁻ uⱼ)`; `-∞` when a reduced cost
    /// has the wrong sign (beyond round-off) for an infinite bound.
    pub fn dual_objective(&self, problem: &LpProblem) -> f64 {
        let mut value: f64 = problem
            .constraints
            .iter()
            .zip(&self.dual)
            .map(|(c, y)| c.rhs * y)
            .sum();
        for (j, &r) in self.reduced_costs.iter().enumerate() {
            let bound = if r > 0.0 { problem.lower[j] } else { problem.upper[j] };
            if bound.is_infinite() {
                if r.abs() > DUAL_ROUNDOFF {
                    return f64::NEG_INFINITY;
                }
            } else if r != 0.0 {
                value += r * bound;
            }
        }
        value
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum LpError {
    #[error("invalid linear program: {0}")]
    InvalidProblem(String),
    #[error("simplex did not converge within {iterations} iterations")]
    NumericalFailure { iterations: usize },
    #[error("basis matrix became singular")]
    SingularBasis,
}

/// How an original variable maps onto standard-form columns.
#[derive(Clone, Copy, Debug)]
enum VarMap {
    /// `x = offset + z[col]`
    Shifted { col: usize, offset: f64 },
    /// `x = offset − z[col]`
    Mirrored { col: usize, offset: f64 },
    /// `x = z[pos] − z[neg]`
    Free { pos: usize, neg: usize },
}

/// `min cᵀz, A z = b, z ≥ 0` after scaling, with the bookkeeping needed to
/// map solutions back.
struct StandardForm {
    m: usize,
    /// Column-major scaled constraint matrix (structural + slack columns).
    cols: Vec<Vec<f64>>,
    cost: Vec<f64>,
    rhs: Vec<f64>,
    row_scale: Vec<f64>,
    col_scale: Vec<f64>,
    /// `-1.0` for rows negated to make `b ≥ 0`.
    row_sign: Vec<f64>,
    vars: Vec<VarMap>,
    user_rows: usize,
}

fn pow2_scale(max_abs: f64) -> f64 {
    if max_abs > 0.0 && max_abs.is_finite() {
        (-max_abs.log2().round()).exp2()
    } else {
        1.0
    }
}

impl StandardForm {
    fn build(p: &LpProblem) -> Self {
        let n = p.num_vars();
        let mut vars = Vec::with_capacity(n);
        let mut next = 0;
        let mut bound_rows: Vec<(usize, f64)> = Vec::new();
        for j in 0..n {
            let (l, u) = (p.lower[j], p.upper[j]);
            if l.is_finite() {
                vars.push(VarMap::Shifted { col: next, offset: l });
                if u.is_finite() {
                    bound_rows.push((next, u - l));
                }
                next += 1;
            } else if u.is_finite() {
                vars.push(VarMap::Mirrored { col: next, offset: u });
                next += 1;
            } else {
                vars.push(VarMap::Free { pos: next, neg: next + 1 });
                next += 2;
            }
        }
        let structural = next;
        let user_rows = p.num_rows();
        let m = user_rows + bound_rows.len();

        // Dense rows over structural columns, then slacks.
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        let mut slack_sign: Vec<Option<f64>> = Vec::with_capacity(m);
        for c in &p.constraints {
            let mut row = vec![0.0; structural];
            let mut b = c.rhs;
            for (j, &a) in c.coeffs.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                match vars[j] {
                    VarMap::Shifted { col, offset } => {
                        row[col] += a;
                        b -= a * offset;
                    }
                    VarMap::Mirrored { col, offset } => {
                        row[col] -= a;
                        b -= a * offset;
                    }
                    VarMap::Free { pos, neg } => {
                        row[pos] += a;
                        row[neg] -= a;
                    }
                }
            }
            rows.push(row);
            rhs.push(b);
            slack_sign.push(match c.sense {
                Sense::Le => Some(1.0),
                Sense::Ge => Some(-1.0),
                Sense::Eq => None,
            });
        }
        for &(col, width) in &bound_rows {
            let mut row = vec![0.0; structural];
            row[col] = 1.0;
            rows.push(row);
            rhs.push(width);
            slack_sign.push(Some(1.0));
        }

        let num_slacks = slack_sign.iter().filter(|s| s.is_some()).count();
        let total = structural + num_slacks;
        let mut full = vec![vec![0.0; total]; m];
        let mut slack_col = structural;
        for i in 0..m {
            full[i][..structural].copy_from_slice(&rows[i]);
            if let Some(s) = slack_sign[i] {
                full[i][slack_col] = s;
                slack_col += 1;
            }
        }

        let mut row_sign = vec![1.0; m];
        for i in 0..m {
            if rhs[i] < 0.0 {
                row_sign[i] = -1.0;
                rhs[i] = -rhs[i];
                for a in full[i].iter_mut() {
                    *a = -*a;
                }
            }
        }

        let mut cost = vec![0.0; total];
        for (j, &c) in p.objective.iter().enumerate() {
            match vars[j] {
                VarMap::Shifted { col, .. } => cost[col] += c,
                VarMap::Mirrored { col, .. } => cost[col] -= c,
                VarMap::Free { pos, neg } => {
                    cost[pos] += c;
                    cost[neg] -= c;
                }
            }
        }

        // Equilibrate: rows first, then columns, both by max-abs.
        let row_scale: Vec<f64> = full
            .iter()
            .map(|r| pow2_scale(r.iter().fold(0.0_f64, |acc, a| acc.max(a.abs()))))
            .collect();
        for (r, s) in full.iter_mut().zip(&row_scale) {
            for a in r.iter_mut() {
                *a *= s;
            }
        }
        let col_scale: Vec<f64> = (0..total)
            .map(|j| pow2_scale(full.iter().fold(0.0_f64, |acc, r| acc.max(r[j].abs()))))
            .collect();
        let cols: Vec<Vec<f64>> = (0..total)
            .map(|j| full.iter().map(|r| r[j] * col_scale[j]).collect())
            .collect();
        for (c, s) in cost.iter_mut().zip(&col_scale) {
            *c *= s;
        }
        for (b, s) in rhs.iter_mut().zip(&row_scale) {
            *b *= s;
        }

        StandardForm {
            m,
            cols,
            cost,
            rhs,
            row_scale,
            col_scale,
            row_sign,
            vars,
            user_rows,
        }
    }

    fn num_cols(&self) -> usize {
        self.cols.len()
    }
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
}

/// Revised simplex state over the standard form plus one artificial per row.
struct Simplex<'a> {
    sf: &'a StandardForm,
    /// Column index per basis position; indices ≥ `sf.num_cols()` are artificials.
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    binv: Vec<Vec<f64>>,
    xb: Vec<f64>,
    iterations: usize,
    cap: usize,
    since_refactor: usize,
}

impl<'a> Simplex<'a> {
    fn new(sf: &'a StandardForm) -> Self {
        let m = sf.m;
        let n = sf.num_cols();
        let basis: Vec<usize> = (n..n + m).collect();
        let mut in_basis = vec![false; n + m];
        for &b in &basis {
            in_basis[b] = true;
        }
        let mut binv = vec![vec![0.0; m]; m];
        for (i, row) in binv.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Simplex {
            sf,
            basis,
            in_basis,
            binv,
            xb: sf.rhs.clone(),
            iterations: 0,
            cap: 50 * (m + n).max(1),
            since_refactor: 0,
        }
    }

    fn column(&self, j: usize, out: &mut [f64]) {
        let n = self.sf.num_cols();
        if j < n {
            out.copy_from_slice(&self.sf.cols[j]);
        } else {
            out.iter_mut().for_each(|v| *v = 0.0);
            out[j - n] = 1.0;
        }
    }

    /// `B⁻¹ a_j`
    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.sf.m;
        let n = self.sf.num_cols();
        if j >= n {
            return self.binv.iter().map(|r| r[j - n]).collect();
        }
        let col = &self.sf.cols[j];
        (0..m).map(|i| dot(&self.binv[i], col)).collect()
    }

    /// `yᵀ = c_Bᵀ B⁻¹`
    fn duals(&self, cost: &dyn Fn(usize) -> f64) -> Vec<f64> {
        let m = self.sf.m;
        let mut y = vec![0.0; m];
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost(b);
            if cb != 0.0 {
                for (yk, &v) in y.iter_mut().zip(&self.binv[i]) {
                    *yk += cb * v;
                }
            }
        }
        y
    }

    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.sf.m;
        // Gauss-Jordan on [B | I] with partial pivoting.
        let mut b = vec![vec![0.0; m]; m];
        let mut col = vec![0.0; m];
        for (k, &j) in self.basis.iter().enumerate() {
            self.column(j, &mut col);
            for i in 0..m {
                b[i][k] = col[i];
            }
        }
        let mut inv = vec![vec![0.0; m]; m];
        for (i, row) in inv.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        for c in 0..m {
            let p = (c..m)
                .max_by(|&x, &y| b[x][c].abs().total_cmp(&b[y][c].abs()))
                .unwrap();
            if b[p][c].abs() < 1e-13 {
                return Err(LpError::SingularBasis);
            }
            b.swap(c, p);
            inv.swap(c, p);
            let piv = b[c][c];
            for v in b[c].iter_mut() {
                *v /= piv;
            }
            for v in inv[c].iter_mut() {
                *v /= piv;
            }
            for r in 0..m {
                if r == c {
                    continue;
                }
                let f = b[r][c];
                if f != 0.0 {
                    for k in 0..m {
                        b[r][k] -= f * b[c][k];
                        inv[r][k] -= f * inv[c][k];
                    }
                }
            }
        }
        self.binv = inv;
        self.xb = (0..m).map(|i| dot(&self.binv[i], &self.sf.rhs)).collect();
        self.since_refactor = 0;
        Ok(())
    }

    fn pivot(&mut self, leave_pos: usize, enter: usize, alpha: &[f64]) -> Result<(), LpError> {
        let m = self.sf.m;
        let ar = alpha[leave_pos];
        let step = self.xb[leave_pos] / ar;
        for i in 0..m {
            if i != leave_pos {
                self.xb[i] -= step * alpha[i];
            }
        }
        self.xb[leave_pos] = step;

        let pivot_row: Vec<f64> = self.binv[leave_pos].iter().map(|v| v / ar).collect();
        for i in 0..m {
            if i == leave_pos || alpha[i] == 0.0 {
                continue;
            }
            let f = alpha[i];
            for (v, &p) in self.binv[i].iter_mut().zip(&pivot_row) {
                *v -= f * p;
            }
        }
        self.binv[leave_pos] = pivot_row;

        self.in_basis[self.basis[leave_pos]] = false;
        self.in_basis[enter] = true;
        self.basis[leave_pos] = enter;
        self.since_refactor += 1;
        if self.since_refactor >= REFACTOR_EVERY {
            self.refactor()?;
        }
        Ok(())
    }

    /// Runs Bland's-rule simplex iterations over the allowed entering columns.
    fn run(&mut self, cost: &dyn Fn(usize) -> f64, allow_artificial: bool) -> Result<PhaseOutcome, LpError> {
        let n = self.sf.num_cols();
        let limit = if allow_artificial { n + self.sf.m } else { n };
        loop {
            if self.iterations >= self.cap {
                return Err(LpError::NumericalFailure {
                    iterations: self.iterations,
                });
            }
            let y = self.duals(cost);
            // Bland: lowest-index improving column.
            let mut entering = None;
            let mut col = vec![0.0; self.sf.m];
            for j in 0..limit {
                if self.in_basis[j] {
                    continue;
                }
                self.column(j, &mut col);
                let d = cost(j) - dot(&y, &col);
                if d < -OPTIMALITY_TOL {
                    entering = Some(j);
                    break;
                }
            }
            let Some(q) = entering else {
                return Ok(PhaseOutcome::Optimal);
            };
            let alpha = self.ftran(q);

            // Ratio test; ties broken by lowest basic variable index.
            let mut leave: Option<(usize, f64)> = None;
            for (i, &a) in alpha.iter().enumerate() {
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.xb[i].max(0.0) / a;
                match leave {
                    None => leave = Some((i, ratio)),
                    Some((best, r)) => {
                        let tie = (ratio - r).abs() <= 1e-12 * (1.0 + r.abs());
                        if (ratio < r && !tie) || (tie && self.basis[i] < self.basis[best]) {
                            leave = Some((i, ratio));
                        }
                    }
                }
            }
            let Some((r, _)) = leave else {
                return Ok(PhaseOutcome::Unbounded);
            };
            self.iterations += 1;
            self.pivot(r, q, &alpha)?;
        }
    }

    /// Pivots basic artificials out wherever a structural column can replace them.
    fn expel_artificials(&mut self) -> Result<(), LpError> {
        let n = self.sf.num_cols();
        for pos in 0..self.sf.m {
            if self.basis[pos] < n {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..n {
                if self.in_basis[j] {
                    continue;
                }
                let a = dot(&self.binv[pos], &self.sf.cols[j]);
                if a.abs() > 1e-7 && best.is_none_or(|(_, b)| a.abs() > b.abs()) {
                    best = Some((j, a));
                }
            }
            if let Some((j, _)) = best {
                let alpha = self.ftran(j);
                self.pivot(pos, j, &alpha)?;
            }
        }
        Ok(())
    }
}

pub fn solve_lp(problem: &LpProblem) -> Result<LpSolution, LpError> {
    problem.check()?;
    let sf = StandardForm::build(problem);
    let n = sf.num_cols();
    let mut spx = Simplex::new(&sf);

    let phase1_cost = |j: usize| if j >= n { 1.0 } else { 0.0 };
    spx.run(&phase1_cost, true)?;
    spx.refactor()?;
    let infeasibility: f64 = spx
        .basis
        .iter()
        .zip(&spx.xb)
        .filter(|(&b, _)| b >= n)
        .map(|(_, &x)| x.max(0.0))
        .sum();
    let rhs_scale = 1.0 + sf.rhs.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
    if infeasibility > PHASE1_TOL * rhs_scale {
        return Ok(LpSolution {
            status: LpStatus::Infeasible,
            primal: Vec::new(),
            dual: Vec::new(),
            reduced_costs: Vec::new(),
            objective_value: f64::NAN,
            iterations: spx.iterations,
        });
    }
    spx.expel_artificials()?;

    let phase2_cost = |j: usize| if j >= n { 0.0 } else { sf.cost[j] };
    let outcome = spx.run(&phase2_cost, false)?;
    if let PhaseOutcome::Unbounded = outcome {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            primal: Vec::new(),
            dual: Vec::new(),
            reduced_costs: Vec::new(),
            objective_value: f64::NEG_INFINITY,
            iterations: spx.iterations,
        });
    }
    spx.refactor()?;

    let mut z = vec![0.0; n];
    for (&b, &x) in spx.basis.iter().zip(&spx.xb) {
        if b < n {
            z[b] = x.max(0.0) * sf.col_scale[b];
        }
    }
    let primal: Vec<f64> = sf
        .vars
        .iter()
        .map(|v| match *v {
            VarMap::Shifted { col, offset } => offset + z[col],
            VarMap::Mirrored { col, offset } => offset - z[col],
            VarMap::Free { pos, neg } => z[pos] - z[neg],
        })
        .collect();

    let ys = spx.duals(&phase2_cost);
    let dual: Vec<f64> = (0..sf.user_rows)
        .map(|i| ys[i] * sf.row_scale[i] * sf.row_sign[i])
        .collect();
    let aty = problem.matrix().tr_mul_vec(&dual);
    let reduced_costs: Vec<f64> = problem.objective.iter().zip(&aty).map(|(c, a)| c - a).collect();

    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective_value: dot(&problem.objective, &primal),
        primal,
        dual,
        reduced_costs,
        iterations: spx.iterations,
    })
}
