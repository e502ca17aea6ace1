//! Second-order cone program assembly and interior-point solution.
//!
//! The per-iteration convex programs are collected into a [`ConeProgram`]:
//! a sparse affine objective, equality rows, nonnegativity rows, and
//! second-order cone memberships over affine expressions of a flat real
//! decision vector.  Variables are declared in named blocks so callers can
//! address solution slices symbolically.  Solving hands the assembled
//! matrices to a primal-dual interior-point backend and maps its
//! termination status onto [`SolveStatus`].

use std::fmt::Write as _;
use std::ops::Range;

use clarabel::algebra::CscMatrix;
use clarabel::solver::SupportedConeT::{NonnegativeConeT, SecondOrderConeT, ZeroConeT};
use clarabel::solver::{DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus};

use crate::scalar::Real;

// --- Affine expressions -----------------------------------------------------

/// Sparse affine expression `Σ coeff·x[var] + constant` over the decision
/// vector.  Duplicate variable indices are permitted and summed on assembly.
#[derive(Clone, Debug, Default)]
pub struct AffExpr<T> {
    pub terms: Vec<(usize, T)>,
    pub constant: T,
}

impl<T: Real> AffExpr<T> {
    pub fn zero() -> Self {
        Self {
            terms: Vec::new(),
            constant: T::zero(),
        }
    }

    pub fn constant(c: T) -> Self {
        Self {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn var(i: usize) -> Self {
        Self::term(i, T::one())
    }

    pub fn term(i: usize, coeff: T) -> Self {
        Self {
            terms: vec![(i, coeff)],
            constant: T::zero(),
        }
    }

    pub fn push(&mut self, i: usize, coeff: T) {
        if coeff != T::zero() {
            self.terms.push((i, coeff));
        }
    }

    pub fn add_constant(&mut self, c: T) {
        self.constant += c;
    }

    /// `self += scale · other`.
    pub fn add_scaled(&mut self, other: &AffExpr<T>, scale: T) {
        if scale == T::zero() {
            return;
        }
        for &(i, c) in &other.terms {
            self.push(i, scale * c);
        }
        self.constant += scale * other.constant;
    }

    pub fn scaled(mut self, s: T) -> Self {
        for t in &mut self.terms {
            t.1 *= s;
        }
        self.constant *= s;
        self
    }

    pub fn neg(self) -> Self {
        self.scaled(-T::one())
    }

    pub fn minus(mut self, other: &AffExpr<T>) -> Self {
        self.add_scaled(other, -T::one());
        self
    }

    /// True when the expression has no variable terms and zero constant;
    /// such expressions are dropped rather than emitted as cone rows.
    pub fn is_structurally_zero(&self) -> bool {
        self.terms.is_empty() && self.constant == T::zero()
    }

    /// Evaluate at a concrete decision vector.
    pub fn eval(&self, x: &[T]) -> T {
        self.terms
            .iter()
            .fold(self.constant, |acc, &(i, c)| acc + c * x[i])
    }
}

// --- Program container ------------------------------------------------------

/// Named contiguous slice of the decision vector.
#[derive(Clone, Debug)]
pub struct VarBlock {
    pub name: String,
    pub start: usize,
    pub len: usize,
}

impl VarBlock {
    pub fn range(&self) -> Range<usize> {
        self.start..self.start + self.len
    }
}

/// Structural row/cone counts, used by construction-audit tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProgramStats {
    pub variables: usize,
    pub blocks: usize,
    pub equalities: usize,
    pub nonneg_rows: usize,
    pub soc_cones: usize,
    pub soc_rows: usize,
}

/// A second-order cone program in maximization form:
///
/// maximize `objective(x)` subject to
/// `e(x) = 0` for each equality, `e(x) ≤ 0` for each inequality, and
/// `‖(v_1(x), …, v_d(x))‖ ≤ t(x)` for each second-order cone.
#[derive(Clone, Debug)]
pub struct ConeProgram<T> {
    num_vars: usize,
    blocks: Vec<VarBlock>,
    objective: AffExpr<T>,
    equalities: Vec<AffExpr<T>>,
    inequalities: Vec<AffExpr<T>>,
    socs: Vec<(AffExpr<T>, Vec<AffExpr<T>>)>,
}

impl<T: Real> Default for ConeProgram<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> ConeProgram<T> {
    pub fn new() -> Self {
        Self {
            num_vars: 0,
            blocks: Vec::new(),
            objective: AffExpr::zero(),
            equalities: Vec::new(),
            inequalities: Vec::new(),
            socs: Vec::new(),
        }
    }

    /// Declare `len` fresh variables under `name` and return their indices.
    pub fn add_block(&mut self, name: &str, len: usize) -> Range<usize> {
        assert!(
            self.blocks.iter().all(|b| b.name != name),
            "duplicate variable block"
        );
        let start = self.num_vars;
        self.num_vars += len;
        self.blocks.push(VarBlock {
            name: name.to_string(),
            start,
            len,
        });
        start..self.num_vars
    }

    /// Indices of a previously declared block.
    pub fn block(&self, name: &str) -> Range<usize> {
        self.blocks
            .iter()
            .find(|b| b.name == name)
            .unwrap_or_else(|| panic!("unknown variable block `{name}`"))
            .range()
    }

    pub fn blocks(&self) -> &[VarBlock] {
        &self.blocks
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Set the functional to maximize.
    pub fn maximize(&mut self, e: AffExpr<T>) {
        self.objective = e;
    }

    pub fn objective(&self) -> &AffExpr<T> {
        &self.objective
    }

    /// Add `e(x) = 0`.
    pub fn eq0(&mut self, e: AffExpr<T>) {
        self.check(&e);
        self.equalities.push(e);
    }

    /// Add `e(x) ≤ 0`.
    pub fn leq0(&mut self, e: AffExpr<T>) {
        self.check(&e);
        self.inequalities.push(e);
    }

    /// Add `‖(v_1(x), …, v_d(x))‖ ≤ t(x)`.  An empty `v` degenerates to
    /// `t(x) ≥ 0` and is emitted as a nonnegativity row.
    pub fn soc(&mut self, t: AffExpr<T>, v: Vec<AffExpr<T>>) {
        self.check(&t);
        for e in &v {
            self.check(e);
        }
        if v.is_empty() {
            self.leq0(t.neg());
        } else {
            self.socs.push((t, v));
        }
    }

    fn check(&self, e: &AffExpr<T>) {
        for &(i, c) in &e.terms {
            assert!(i < self.num_vars, "constraint references undeclared variable");
            assert!(c.is_finite(), "non-finite coefficient");
        }
        assert!(e.constant.is_finite(), "non-finite constant");
    }

    pub fn stats(&self) -> ProgramStats {
        ProgramStats {
            variables: self.num_vars,
            blocks: self.blocks.len(),
            equalities: self.equalities.len(),
            nonneg_rows: self.inequalities.len(),
            soc_cones: self.socs.len(),
            soc_rows: self.socs.iter().map(|(_, v)| 1 + v.len()).sum(),
        }
    }

    /// Residuals of all constraints at a concrete point, for feasibility
    /// injection tests: equalities as `|e(x)|`, inequalities as `e(x)`,
    /// cones as `‖v(x)‖ − t(x)`.  All entries ≤ tol means feasible.
    pub fn residuals(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.num_vars, "point length mismatch");
        let mut out = Vec::new();
        for e in &self.equalities {
            out.push(e.eval(x).abs());
        }
        for e in &self.inequalities {
            out.push(e.eval(x));
        }
        for (t, v) in &self.socs {
            let norm = v
                .iter()
                .map(|e| {
                    let val = e.eval(x);
                    val * val
                })
                .fold(T::zero(), |a, b| a + b)
                .sqrt();
            out.push(norm - t.eval(x));
        }
        out
    }

    /// Plain-text dump for external cross-checking.  Field order:
    /// variables (blocks), objective, equalities, nonnegativity rows,
    /// second-order cones.
    pub fn dump_text(&self) -> String {
        fn expr<T: Real>(e: &AffExpr<T>) -> String {
            let mut s = format!("{:e}", e.constant);
            for &(i, c) in &e.terms {
                let _ = write!(s, " + {c:e}*x{i}");
            }
            s
        }
        let mut out = format!("variables {}\n", self.num_vars);
        for b in &self.blocks {
            let _ = writeln!(out, "block {} {} {}", b.name, b.start, b.len);
        }
        let _ = writeln!(out, "maximize {}", expr(&self.objective));
        let _ = writeln!(out, "equalities {}", self.equalities.len());
        for e in &self.equalities {
            let _ = writeln!(out, "  0 = {}", expr(e));
        }
        let _ = writeln!(out, "nonnegative {}", self.inequalities.len());
        for e in &self.inequalities {
            let _ = writeln!(out, "  0 >= {}", expr(e));
        }
        let _ = writeln!(out, "soc {}", self.socs.len());
        for (t, v) in &self.socs {
            let _ = writeln!(out, "  t: {}", expr(t));
            for e in v {
                let _ = writeln!(out, "  v: {}", expr(e));
            }
        }
        out
    }
}

// --- Solution ---------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    MaxIterations,
    NumericalFailure,
}

/// Primal solution with named-block access.
#[derive(Clone, Debug)]
pub struct Solution<T> {
    pub status: SolveStatus,
    pub x: Vec<T>,
    /// Value of the maximized objective (constant included).
    pub objective: T,
    /// Relative duality gap `|primal − dual| / max(1, |primal|)`.
    pub gap: T,
    pub iterations: u32,
    blocks: Vec<VarBlock>,
}

impl<T: Real> ConeProgram<T> {
    /// Wrap a concrete decision vector as a zero-gap solution, for
    /// injection tests and diagnostics.  Does not check feasibility;
    /// pair with [`ConeProgram::residuals`].
    pub fn solution_at(&self, x: Vec<T>) -> Solution<T> {
        assert_eq!(x.len(), self.num_vars, "point length mismatch");
        Solution {
            status: SolveStatus::Optimal,
            objective: self.objective.eval(&x),
            gap: T::zero(),
            iterations: 0,
            x,
            blocks: self.blocks.clone(),
        }
    }
}

impl<T: Real> Solution<T> {
    pub fn block(&self, name: &str) -> &[T] {
        let b = self
            .blocks
            .iter()
            .find(|b| b.name == name)
            .unwrap_or_else(|| panic!("unknown variable block `{name}`"));
        &self.x[b.range()]
    }
}

// --- Backend ----------------------------------------------------------------

/// Column-sorted CSC assembly from per-row sparse expressions.
fn to_csc<T: Real>(rows: &[(usize, &AffExpr<T>, T)], m: usize, n: usize) -> CscMatrix<T> {
    // bucket entries per column, merging duplicate row indices
    let mut cols: Vec<Vec<(usize, T)>> = vec![Vec::new(); n];
    for &(r, e, sign) in rows {
        for &(i, c) in &e.terms {
            cols[i].push((r, sign * c));
        }
    }
    let mut colptr = Vec::with_capacity(n + 1);
    let mut rowval = Vec::new();
    let mut nzval = Vec::new();
    colptr.push(0);
    for col in &mut cols {
        col.sort_by_key(|&(r, _)| r);
        let mut merged: Vec<(usize, T)> = Vec::with_capacity(col.len());
        for &(r, v) in col.iter() {
            match merged.last_mut() {
                Some(last) if last.0 == r => last.1 += v,
                _ => merged.push((r, v)),
            }
        }
        for (r, v) in merged {
            rowval.push(r);
            nzval.push(v);
        }
        colptr.push(rowval.len());
    }
    CscMatrix::new(m, n, colptr, rowval, nzval)
}

/// Solve the program with an interior-point method.
///
/// `gap_tol` bounds the admissible relative duality gap for an `Optimal`
/// verdict on near-converged runs; `feas_tol` is forwarded to the backend's
/// feasibility tolerance; `max_iter` caps interior-point iterations.
/// Deterministic: identical inputs produce identical output.
pub fn solve<T: Real>(cp: &ConeProgram<T>, gap_tol: T, feas_tol: T, max_iter: u32) -> Solution<T> {
    assert!(gap_tol > T::zero() && feas_tol > T::zero() && max_iter > 0);
    let n = cp.num_vars;
    assert!(n > 0, "program has no variables");

    // objective: maximize c'x + d  ->  minimize (-c)'x
    let mut q = vec![T::zero(); n];
    for &(i, c) in &cp.objective.terms {
        q[i] -= c;
    }

    // rows in cone order: zero cone (equalities), nonnegative, SOC blocks.
    // For e(x) ≤/= 0 the slack is s = -e(x): A row = +coeffs, b = -constant.
    // For SOC entries s must equal the expression: A row = -coeffs, b = +constant.
    let mut rows: Vec<(usize, &AffExpr<T>, T)> = Vec::new();
    let mut b = Vec::new();
    let mut cones = Vec::new();
    let mut r = 0;
    if !cp.equalities.is_empty() {
        for e in &cp.equalities {
            rows.push((r, e, T::one()));
            b.push(-e.constant);
            r += 1;
        }
        cones.push(ZeroConeT(cp.equalities.len()));
    }
    if !cp.inequalities.is_empty() {
        for e in &cp.inequalities {
            rows.push((r, e, T::one()));
            b.push(-e.constant);
            r += 1;
        }
        cones.push(NonnegativeConeT(cp.inequalities.len()));
    }
    for (t, v) in &cp.socs {
        rows.push((r, t, -T::one()));
        b.push(t.constant);
        r += 1;
        for e in v {
            rows.push((r, e, -T::one()));
            b.push(e.constant);
            r += 1;
        }
        cones.push(SecondOrderConeT(1 + v.len()));
    }

    let a = to_csc(&rows, r, n);
    let p = CscMatrix::<T>::zeros((n, n));
    let settings = DefaultSettingsBuilder::<T>::default()
        .verbose(false)
        .max_iter(max_iter)
        .tol_gap_abs(gap_tol * T::of(0.1))
        .tol_gap_rel(gap_tol * T::of(0.1))
        .tol_feas(feas_tol * T::of(0.1))
        .build()
        .expect("interior-point settings");
    let mut solver = DefaultSolver::new(&p, &q, &a, &b, &cones, settings);
    solver.solve();

    let sol = &solver.solution;
    let objective = cp.objective.constant - sol.obj_val;
    let gap = (sol.obj_val - sol.obj_val_dual).abs() / T::one().max(sol.obj_val.abs());
    let status = match sol.status {
        SolverStatus::Solved => SolveStatus::Optimal,
        // progress can stall with a solution in hand; judge it by its gap
        SolverStatus::AlmostSolved | SolverStatus::InsufficientProgress => {
            if gap <= gap_tol {
                SolveStatus::Optimal
            } else {
                SolveStatus::MaxIterations
            }
        }
        // on a numerical error the solver retreats to its previous
        // iterate, which may already meet the gap target
        SolverStatus::NumericalError => {
            if gap <= gap_tol {
                SolveStatus::Optimal
            } else {
                SolveStatus::NumericalFailure
            }
        }
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
            SolveStatus::PrimalInfeasible
        }
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => {
            SolveStatus::DualInfeasible
        }
        SolverStatus::MaxIterations | SolverStatus::MaxTime => SolveStatus::MaxIterations,
        _ => SolveStatus::NumericalFailure,
    };
    Solution {
        status,
        x: sol.x.clone(),
        objective,
        gap,
        iterations: sol.iterations,
        blocks: cp.blocks.clone(),
    }
}
