//! Two-phase dense simplex with Bland's rule.
//!
//! Infeasibility is reported with a Farkas certificate that can be checked
//! by substitution alone, see [`FarkasCertificate::verify`].

use serde::{Deserialize, Serialize};

use super::linalg::{dot, Vector};
use super::scalar::Scalar;
use crate::error::{GptError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowKind {
    /// `a . x <= b`
    Le,
    /// `a . x >= b`
    Ge,
    /// `a . x == b`
    Eq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    Free,
    NonNeg,
}

#[derive(Clone, Debug)]
pub struct Constraint<S> {
    pub coeffs: Vector<S>,
    pub kind: RowKind,
    pub rhs: S,
}

/// A linear program `min c . x` subject to row constraints and sign
/// restrictions on the variables. Without an objective it is a pure
/// feasibility problem.
#[derive(Clone, Debug)]
pub struct LinearProgram<S> {
    vars: Vec<VarKind>,
    rows: Vec<Constraint<S>>,
    objective: Option<Vector<S>>,
}

/// Multipliers `y`, one per row, proving that no feasible point exists:
/// sign conditions per row kind, `y^T A` vanishing on free columns and
/// nonnegative on sign-restricted ones, and `y . b < 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct FarkasCertificate<S> {
    pub multipliers: Vector<S>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Feasibility<S> {
    Feasible(Vector<S>),
    Infeasible(FarkasCertificate<S>),
}

impl<S> Feasibility<S> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome<S> {
    Optimal { x: Vector<S>, value: S },
    Infeasible(FarkasCertificate<S>),
    Unbounded,
}

impl<S: Scalar> LinearProgram<S> {
    pub fn new(vars: Vec<VarKind>) -> Self {
        LinearProgram {
            vars,
            rows: Vec::new(),
            objective: None,
        }
    }

    pub fn free(n: usize) -> Self {
        Self::new(vec![VarKind::Free; n])
    }

    pub fn nonneg(n: usize) -> Self {
        Self::new(vec![VarKind::NonNeg; n])
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_kinds(&self) -> &[VarKind] {
        &self.vars
    }

    pub fn rows(&self) -> &[Constraint<S>] {
        &self.rows
    }

    pub fn constrain(&mut self, coeffs: Vector<S>, kind: RowKind, rhs: S) -> &mut Self {
        assert_eq!(
            coeffs.len(),
            self.vars.len(),
            "constraint width must match variable count"
        );
        self.rows.push(Constraint { coeffs, kind, rhs });
        self
    }

    pub fn eq(&mut self, coeffs: Vector<S>, rhs: S) -> &mut Self {
        self.constrain(coeffs, RowKind::Eq, rhs)
    }

    pub fn le(&mut self, coeffs: Vector<S>, rhs: S) -> &mut Self {
        self.constrain(coeffs, RowKind::Le, rhs)
    }

    pub fn ge(&mut self, coeffs: Vector<S>, rhs: S) -> &mut Self {
        self.constrain(coeffs, RowKind::Ge, rhs)
    }

    pub fn minimize(&mut self, c: Vector<S>) -> &mut Self {
        assert_eq!(c.len(), self.vars.len());
        self.objective = Some(c);
        self
    }

    pub fn maximize(&mut self, c: Vector<S>) -> &mut Self {
        self.minimize(c.into_iter().map(|x| -x).collect())
    }

    /// Checks a candidate point against every row and sign restriction.
    pub fn is_feasible_point(&self, x: &[S]) -> bool {
        if x.len() != self.vars.len() {
            return false;
        }
        let signs = self
            .vars
            .iter()
            .zip(x)
            .all(|(k, v)| *k == VarKind::Free || v.is_nonneg());
        signs
            && self.rows.iter().all(|row| {
                let lhs = dot(&row.coeffs, x);
                match row.kind {
                    RowKind::Le => lhs.cmp_tol(&row.rhs).is_le(),
                    RowKind::Ge => lhs.cmp_tol(&row.rhs).is_ge(),
                    RowKind::Eq => lhs.cmp_tol(&row.rhs).is_eq(),
                }
            })
    }

    pub fn feasibility(&self) -> Result<Feasibility<S>> {
        let origin = vec![S::zero(); self.vars.len()];
        if self.is_feasible_point(&origin) {
            return Ok(Feasibility::Feasible(origin));
        }
        let mut tab = Tableau::build(self);
        match tab.phase_one()? {
            Some(cert) => Ok(Feasibility::Infeasible(cert)),
            None => Ok(Feasibility::Feasible(tab.solution())),
        }
    }

    pub fn solve(&self) -> Result<LpOutcome<S>> {
        let mut tab = Tableau::build(self);
        if let Some(cert) = tab.phase_one()? {
            return Ok(LpOutcome::Infeasible(cert));
        }
        let Some(c) = &self.objective else {
            let x = tab.solution();
            return Ok(LpOutcome::Optimal { x, value: S::zero() });
        };
        tab.drive_out_artificials();
        if !tab.phase_two(c)? {
            return Ok(LpOutcome::Unbounded);
        }
        let x = tab.solution();
        let value = dot(c, &x);
        Ok(LpOutcome::Optimal { x, value })
    }
}

impl<S: Scalar> FarkasCertificate<S> {
    pub fn verify(&self, lp: &LinearProgram<S>) -> bool {
        let y = &self.multipliers;
        if y.len() != lp.rows.len() {
            return false;
        }
        let signs_ok = lp.rows.iter().zip(y).all(|(row, yi)| match row.kind {
            RowKind::Le => yi.is_nonneg(),
            RowKind::Ge => !yi.is_pos(),
            RowKind::Eq => true,
        });
        if !signs_ok {
            return false;
        }
        for (j, kind) in lp.vars.iter().enumerate() {
            let col: S = lp
                .rows
                .iter()
                .zip(y)
                .map(|(r, yi)| yi.clone() * r.coeffs[j].clone())
                .sum();
            let ok = match kind {
                VarKind::Free => col.is_zero(),
                VarKind::NonNeg => col.is_nonneg(),
            };
            if !ok {
                return false;
            }
        }
        let yb: S = lp.rows.iter().zip(y).map(|(r, yi)| yi.clone() * r.rhs.clone()).sum();
        yb.is_neg()
    }
}

/// Convenience entry point: free variables, `equalities` as `a . x = b`,
/// `inequalities` as `a . x <= b`.
pub fn lp_feasible<S: Scalar>(
    dim: usize,
    equalities: &[(Vector<S>, S)],
    inequalities: &[(Vector<S>, S)],
) -> Result<Feasibility<S>> {
    let mut lp = LinearProgram::free(dim);
    for (a, b) in equalities {
        if a.len() != dim {
            return Err(GptError::DimensionMismatch {
                expected: dim,
                got: a.len(),
            });
        }
        lp.eq(a.clone(), b.clone());
    }
    for (a, b) in inequalities {
        if a.len() != dim {
            return Err(GptError::DimensionMismatch {
                expected: dim,
                got: a.len(),
            });
        }
        lp.le(a.clone(), b.clone());
    }
    lp.feasibility()
}

// ---------------------------------------------------------------------------

/// Column bookkeeping: original variable `j` maps to one column (nonneg) or a
/// `(plus, minus)` pair (free).
#[derive(Clone, Copy)]
enum ColMap {
    Single(usize),
    Split(usize, usize),
}

struct Tableau<S> {
    m: usize,
    /// structural + slack columns
    n: usize,
    /// `m x (n + m + 1)`: structural, slack, artificial, rhs
    t: Vec<Vec<S>>,
    basis: Vec<usize>,
    row_sign: Vec<bool>,
    cols: Vec<ColMap>,
    /// rows dropped as redundant after phase one
    alive: Vec<bool>,
}

const MAX_PIVOTS: usize = 200_000;

impl<S: Scalar> Tableau<S> {
    fn build(lp: &LinearProgram<S>) -> Self {
        let m = lp.rows.len();
        let mut cols = Vec::with_capacity(lp.vars.len());
        let mut n = 0;
        for kind in &lp.vars {
            match kind {
                VarKind::NonNeg => {
                    cols.push(ColMap::Single(n));
                    n += 1;
                }
                VarKind::Free => {
                    cols.push(ColMap::Split(n, n + 1));
                    n += 2;
                }
            }
        }
        let slack_cols: Vec<Option<usize>> = lp
            .rows
            .iter()
            .map(|r| {
                (r.kind != RowKind::Eq).then(|| {
                    n += 1;
                    n - 1
                })
            })
            .collect();
        let width = n + m + 1;
        let mut t = vec![vec![S::zero(); width]; m];
        let mut row_sign = vec![false; m];
        for (i, row) in lp.rows.iter().enumerate() {
            let neg = row.rhs.is_neg();
            row_sign[i] = neg;
            let sgn = |v: S| if neg { -v } else { v };
            for (j, cm) in cols.iter().enumerate() {
                let a = row.coeffs[j].clone();
                match *cm {
                    ColMap::Single(c) => t[i][c] = sgn(a),
                    ColMap::Split(p, q) => {
                        t[i][p] = sgn(a.clone());
                        t[i][q] = sgn(-a);
                    }
                }
            }
            if let Some(sc) = slack_cols[i] {
                let v = if row.kind == RowKind::Le { S::one() } else { -S::one() };
                t[i][sc] = sgn(v);
            }
            t[i][n + i] = S::one();
            t[i][width - 1] = sgn(row.rhs.clone());
        }
        Tableau {
            m,
            n,
            t,
            basis: (n..n + m).collect(),
            row_sign,
            cols,
            alive: vec![true; m],
        }
    }

    fn rhs(&self, i: usize) -> &S {
        &self.t[i][self.n + self.m]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let width = self.t[r].len();
        let inv = S::one() / self.t[r][c].clone();
        for j in 0..width {
            let v = self.t[r][j].clone() * inv.clone();
            self.t[r][j] = v;
        }
        let prow = self.t[r].clone();
        for i in 0..self.m {
            if i == r || self.t[i][c].is_zero() {
                if i != r {
                    self.t[i][c] = S::zero();
                }
                continue;
            }
            let f = self.t[i][c].clone();
            for (j, pv) in prow.iter().enumerate() {
                if !pv.is_zero() {
                    let v = self.t[i][j].clone() - f.clone() * pv.clone();
                    self.t[i][j] = v;
                }
            }
            self.t[i][c] = S::zero();
        }
        self.basis[r] = c;
    }

    /// Runs the Bland-rule simplex for `costs` (indexed by column). Columns
    /// with `allowed[c] == false` never enter. Returns `false` on unboundedness.
    fn optimize(&mut self, costs: &[S], allowed: &[bool]) -> Result<bool> {
        for _ in 0..MAX_PIVOTS {
            let cb: Vec<S> = self.basis.iter().map(|&b| costs[b].clone()).collect();
            let entering = (0..allowed.len()).find(|&j| {
                if !allowed[j] || self.basis.contains(&j) {
                    return false;
                }
                let z: S = (0..self.m)
                    .filter(|&i| self.alive[i])
                    .map(|i| cb[i].clone() * self.t[i][j].clone())
                    .sum();
                (costs[j].clone() - z).is_neg()
            });
            let Some(c) = entering else {
                return Ok(true);
            };
            let mut best: Option<(usize, S)> = None;
            for i in 0..self.m {
                if !self.alive[i] || !self.t[i][c].is_pos() {
                    continue;
                }
                let ratio = self.rhs(i).clone() / self.t[i][c].clone();
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => match ratio.cmp_tol(&br) {
                        std::cmp::Ordering::Less => Some((i, ratio)),
                        std::cmp::Ordering::Equal if self.basis[i] < self.basis[bi] => Some((i, ratio)),
                        _ => Some((bi, br)),
                    },
                };
            }
            let Some((r, _)) = best else {
                return Ok(false);
            };
            self.pivot(r, c);
        }
        Err(GptError::Degenerate("simplex pivot limit reached".into()))
    }

    /// Returns a Farkas certificate if the system is infeasible.
    fn phase_one(&mut self) -> Result<Option<FarkasCertificate<S>>> {
        let total = self.n + self.m;
        let costs: Vec<S> = (0..total)
            .map(|j| if j >= self.n { S::one() } else { S::zero() })
            .collect();
        let allowed = vec![true; total];
        self.optimize(&costs, &allowed)?;
        let value: S = (0..self.m)
            .filter(|&i| self.basis[i] >= self.n)
            .map(|i| self.rhs(i).clone())
            .sum();
        if !value.is_pos() {
            return Ok(None);
        }
        // y = c_B B^{-1}; the artificial block of the tableau holds B^{-1}.
        let mut mult = Vec::with_capacity(self.m);
        for k in 0..self.m {
            let y: S = (0..self.m)
                .filter(|&i| self.basis[i] >= self.n)
                .map(|i| self.t[i][self.n + k].clone())
                .sum();
            let w = -y;
            mult.push(if self.row_sign[k] { -w } else { w });
        }
        Ok(Some(FarkasCertificate { multipliers: mult }))
    }

    fn drive_out_artificials(&mut self) {
        for i in 0..self.m {
            if self.basis[i] < self.n {
                continue;
            }
            let col = (0..self.n).find(|&j| !self.t[i][j].is_zero() && !self.basis.contains(&j));
            match col {
                Some(j) => self.pivot(i, j),
                None => self.alive[i] = false,
            }
        }
    }

    fn phase_two(&mut self, c: &[S]) -> Result<bool> {
        let total = self.n + self.m;
        let mut costs = vec![S::zero(); total];
        for (j, cm) in self.cols.iter().enumerate() {
            match *cm {
                ColMap::Single(k) => costs[k] = c[j].clone(),
                ColMap::Split(p, q) => {
                    costs[p] = c[j].clone();
                    costs[q] = -c[j].clone();
                }
            }
        }
        let allowed: Vec<bool> = (0..total).map(|j| j < self.n).collect();
        self.optimize(&costs, &allowed)
    }

    fn solution(&self) -> Vector<S> {
        let mut z = vec![S::zero(); self.n + self.m];
        for i in 0..self.m {
            if self.alive[i] {
                z[self.basis[i]] = self.rhs(i).clone();
            }
        }
        self.cols
            .iter()
            .map(|cm| match *cm {
                ColMap::Single(k) => z[k].clone(),
                ColMap::Split(p, q) => z[p].clone() - z[q].clone(),
            })
            .collect()
    }
}
