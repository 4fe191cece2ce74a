//! Problem instances, solver parameters, stepsize regions and the Lagrangian
//! functionals.
//!
//! A [`BlockProblem`] is
//!
//! ```text
//! min  Σᵢ fᵢ(xᵢ) + Σⱼ gⱼ(yⱼ)
//! s.t. Σᵢ Aᵢ xᵢ + Σⱼ Bⱼ yⱼ = c,   xᵢ ∈ 𝒳ᵢ,  yⱼ ∈ 𝒴ⱼ
//! ```
//!
//! with the objectives drawn from a closed catalog whose subdifferentials are
//! piecewise linear and whose per-block subproblems have exact solutions.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};

/// Smallest-to-largest singular value ratio at or below which a coupling
/// matrix is treated as rank deficient.
pub const RANK_RTOL: f64 = 1e-10;

/// Box dimension above which validation warns about enumeration cost.
pub const BOX_DIM_WARN: usize = 8;

/// Hard cap on the dimension of a bound-constrained block.
pub const BOX_DIM_CAP: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    /// `½ zᵀ P z + rᵀ z + t`
    Quadratic { p: Matrix, r: Vector, t: f64 },
    /// `weight · ‖z‖₁`
    L1 { weight: f64 },
    /// `rᵀ z`
    Linear { r: Vector },
}

impl Objective {
    pub fn value(&self, z: &Vector) -> f64 {
        match self {
            Objective::Quadratic { p, r, t } => 0.5 * linalg::quad_form(p, z) + r.dot(z) + t,
            Objective::L1 { weight } => weight * z.lp_norm(1),
            Objective::Linear { r } => r.dot(z),
        }
    }

    /// Gradient for the smooth variants, `None` for `L1`.
    pub fn gradient(&self, z: &Vector) -> Option<Vector> {
        match self {
            Objective::Quadratic { p, r, .. } => Some(p * z + r),
            Objective::Linear { r } => Some(r.clone()),
            Objective::L1 { .. } => None,
        }
    }

    /// Componentwise bounds `[lo, hi]` of the subdifferential at `z`.
    /// Smooth objectives return the degenerate interval at the gradient.
    pub fn subdifferential_bounds(&self, z: &Vector) -> (Vector, Vector) {
        match self {
            Objective::L1 { weight } => {
                let w = *weight;
                let lo = z.map(|zi| if zi > 0.0 { w } else { -w });
                let hi = z.map(|zi| if zi < 0.0 { -w } else { w });
                (lo, hi)
            }
            _ => {
                let g = self.gradient(z).expect("smooth objective");
                (g.clone(), g)
            }
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Objective::Quadratic { .. } => "quadratic",
            Objective::L1 { .. } => "l1",
            Objective::Linear { .. } => "linear",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleSet {
    Free,
    /// Componentwise bounds; infinite entries are unbounded sides.
    Box { lo: Vector, hi: Vector },
    Nonnegative,
}

impl FeasibleSet {
    /// Explicit `(lo, hi)` bound vectors for a block of dimension `dim`.
    pub fn bounds(&self, dim: usize) -> (Vector, Vector) {
        match self {
            FeasibleSet::Free => (
                Vector::from_element(dim, f64::NEG_INFINITY),
                Vector::from_element(dim, f64::INFINITY),
            ),
            FeasibleSet::Box { lo, hi } => (lo.clone(), hi.clone()),
            FeasibleSet::Nonnegative => (Vector::zeros(dim), Vector::from_element(dim, f64::INFINITY)),
        }
    }

    pub fn contains(&self, z: &Vector, tol: f64) -> bool {
        let (lo, hi) = self.bounds(z.len());
        z.iter()
            .zip(lo.iter().zip(hi.iter()))
            .all(|(&v, (&l, &h))| v >= l - tol && v <= h + tol)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            FeasibleSet::Free => "free",
            FeasibleSet::Box { .. } => "box",
            FeasibleSet::Nonnegative => "nonnegative",
        }
    }
}

/// One block `(objective, coupling matrix, feasible set)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub objective: Objective,
    pub matrix: Matrix,
    pub set: FeasibleSet,
}

impl Block {
    pub fn new(objective: Objective, matrix: Matrix, set: FeasibleSet) -> Self {
        Self { objective, matrix, set }
    }

    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }
}

/// Returns `α` if `a` is (numerically) `α·I` with `α > 0`.
pub fn scaled_identity_factor(a: &Matrix) -> Option<f64> {
    if a.nrows() != a.ncols() || a.nrows() == 0 {
        return None;
    }
    let alpha = a[(0, 0)];
    if !(alpha > 0.0) {
        return None;
    }
    let tol = 1e-12 * alpha;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let expect = if i == j { alpha } else { 0.0 };
            if (a[(i, j)] - expect).abs() > tol {
                return None;
            }
        }
    }
    Some(alpha)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockProblem {
    pub x_blocks: Vec<Block>,
    pub y_blocks: Vec<Block>,
    pub c: Vector,
}

impl BlockProblem {
    pub fn new(x_blocks: Vec<Block>, y_blocks: Vec<Block>, c: Vector) -> Self {
        Self { x_blocks, y_blocks, c }
    }

    pub fn p(&self) -> usize {
        self.x_blocks.len()
    }

    pub fn q(&self) -> usize {
        self.y_blocks.len()
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn x_dims(&self) -> Vec<usize> {
        self.x_blocks.iter().map(Block::dim).collect()
    }

    pub fn y_dims(&self) -> Vec<usize> {
        self.y_blocks.iter().map(Block::dim).collect()
    }

    pub fn x_total(&self) -> usize {
        self.x_blocks.iter().map(Block::dim).sum()
    }

    pub fn y_total(&self) -> usize {
        self.y_blocks.iter().map(Block::dim).sum()
    }

    /// Side of the stacked `w = (x, y, λ)` vector.
    pub fn stacked_dim(&self) -> usize {
        self.x_total() + self.y_total() + self.n()
    }

    /// `[A₁ ⋯ A_p]`
    pub fn a_matrix(&self) -> Matrix {
        hstack(self.n(), self.x_blocks.iter().map(|b| &b.matrix))
    }

    /// `[B₁ ⋯ B_q]`
    pub fn b_matrix(&self) -> Matrix {
        hstack(self.n(), self.y_blocks.iter().map(|b| &b.matrix))
    }

    pub fn apply_a(&self, x: &[Vector]) -> Vector {
        apply_group(self.n(), &self.x_blocks, x)
    }

    pub fn apply_b(&self, y: &[Vector]) -> Vector {
        apply_group(self.n(), &self.y_blocks, y)
    }

    /// `𝒜x + ℬy − c`
    pub fn constraint_residual(&self, x: &[Vector], y: &[Vector]) -> Vector {
        self.apply_a(x) + self.apply_b(y) - &self.c
    }

    pub fn objective_value(&self, w: &Iterate) -> f64 {
        let fx: f64 = self.x_blocks.iter().zip(&w.x).map(|(b, v)| b.objective.value(v)).sum();
        let gy: f64 = self.y_blocks.iter().zip(&w.y).map(|(b, v)| b.objective.value(v)).sum();
        fx + gy
    }

    pub fn check_iterate(&self, w: &Iterate) -> Result<()> {
        let ok = w.x.len() == self.p()
            && w.y.len() == self.q()
            && w.lambda.len() == self.n()
            && w.x.iter().zip(&self.x_blocks).all(|(v, b)| v.len() == b.dim())
            && w.y.iter().zip(&self.y_blocks).all(|(v, b)| v.len() == b.dim());
        if ok {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "iterate shape does not match problem (p={}, q={}, n={})",
                self.p(),
                self.q(),
                self.n()
            )))
        }
    }
}

fn hstack<'a>(rows: usize, blocks: impl Iterator<Item = &'a Matrix>) -> Matrix {
    let blocks: Vec<&Matrix> = blocks.collect();
    let cols: usize = blocks.iter().map(|m| m.ncols()).sum();
    let mut out = Matrix::zeros(rows, cols);
    let mut off = 0;
    for m in blocks {
        out.view_mut((0, off), (rows, m.ncols())).copy_from(m);
        off += m.ncols();
    }
    out
}

fn apply_group(n: usize, blocks: &[Block], v: &[Vector]) -> Vector {
    let mut acc = Vector::zeros(n);
    for (b, vi) in blocks.iter().zip(v) {
        acc += &b.matrix * vi;
    }
    acc
}

/// Validation findings. Violations make an input unusable; warnings do not.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<ValidationReport> {
        if self.is_valid() {
            Ok(self)
        } else {
            Err(Error::Validation(self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "violation: {v}")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

pub fn validate_problem(problem: &BlockProblem) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = problem.n();
    if problem.p() == 0 {
        report.violations.push("x group is empty (p must be at least 1)".into());
    }
    if problem.q() == 0 {
        report.violations.push("y group is empty (q must be at least 1)".into());
    }
    if n == 0 {
        report.violations.push("constraint dimension n must be at least 1".into());
    }
    let groups = [("x", &problem.x_blocks, "A"), ("y", &problem.y_blocks, "B")];
    for (group, blocks, mat_name) in groups {
        for (i, block) in blocks.iter().enumerate() {
            let label = format!("{group} block {}", i + 1);
            validate_block(&mut report, &label, mat_name, i + 1, block, n);
        }
    }
    report
}

fn validate_block(
    report: &mut ValidationReport,
    label: &str,
    mat_name: &str,
    index: usize,
    block: &Block,
    n: usize,
) {
    let a = &block.matrix;
    let dim = a.ncols();
    if a.nrows() != n {
        report.violations.push(format!(
            "{label}: {mat_name}{index} has {} rows, expected n={n}",
            a.nrows()
        ));
    }
    if dim == 0 {
        report.violations.push(format!("{label}: {mat_name}{index} has no columns"));
    } else if a.iter().any(|v| !v.is_finite()) {
        report.violations.push(format!("{label}: {mat_name}{index} has non-finite entries"));
    } else {
        let (lo, hi) = linalg::singular_value_range(a);
        if a.nrows() < dim || hi == 0.0 || lo <= RANK_RTOL * hi {
            report.violations.push(format!(
                "{label}: {mat_name}{index} is rank deficient (min singular value {lo:e}, max {hi:e})"
            ));
        }
    }

    match &block.objective {
        Objective::Quadratic { p, r, t } => {
            if p.nrows() != dim || p.ncols() != dim {
                report.violations.push(format!(
                    "{label}: quadratic P is {}x{}, expected {dim}x{dim}",
                    p.nrows(),
                    p.ncols()
                ));
            } else if dim > 0 {
                let scale = p.norm().max(1.0);
                if linalg::relative_asymmetry(p) * p.norm() > 1e-12 * scale {
                    report.violations.push(format!("{label}: quadratic P is not symmetric"));
                } else if linalg::min_eigenvalue(p) < -1e-12 * scale {
                    report.violations.push(format!("{label}: quadratic P is not positive semidefinite"));
                }
            }
            if r.len() != dim {
                report.violations.push(format!("{label}: quadratic r has length {}, expected {dim}", r.len()));
            }
            if !t.is_finite() {
                report.violations.push(format!("{label}: quadratic constant is not finite"));
            }
        }
        Objective::L1 { weight } => {
            if !(*weight >= 0.0) || !weight.is_finite() {
                report.violations.push(format!("{label}: l1 weight must be finite and nonnegative"));
            }
            if scaled_identity_factor(a).is_none() {
                report.violations.push(format!(
                    "{label}: l1 objective requires {mat_name}{index} to be a positive multiple of the identity"
                ));
            }
            if matches!(block.set, FeasibleSet::Box { .. }) {
                report.violations.push(format!("{label}: l1 objective over a box set is not supported"));
            }
        }
        Objective::Linear { r } => {
            if r.len() != dim {
                report.violations.push(format!("{label}: linear r has length {}, expected {dim}", r.len()));
            }
        }
    }

    if let FeasibleSet::Box { lo, hi } = &block.set {
        if lo.len() != dim || hi.len() != dim {
            report.violations.push(format!("{label}: box bounds have the wrong length"));
        } else if lo.iter().zip(hi.iter()).any(|(l, h)| !(l <= h) || *l == f64::INFINITY || *h == f64::NEG_INFINITY) {
            report.violations.push(format!("{label}: box requires lo <= hi componentwise"));
        }
    }
    let enumerated = matches!(block.set, FeasibleSet::Box { .. } | FeasibleSet::Nonnegative)
        && !matches!(block.objective, Objective::L1 { .. });
    if enumerated {
        if dim > BOX_DIM_CAP {
            report.violations.push(format!(
                "{label}: bound-constrained block of dimension {dim} exceeds the enumeration cap {BOX_DIM_CAP}"
            ));
        } else if dim > BOX_DIM_WARN {
            report.warnings.push(format!(
                "{label}: bound-constrained block of dimension {dim} makes active-set enumeration slow"
            ));
        }
    }
}

/// `𝒢 = {τ + s > 0, −τ² − s² − τs + τ + s + 1 > 0}`
pub fn in_region_g(tau: f64, s: f64) -> bool {
    tau + s > 0.0 && -tau * tau - s * s - tau * s + tau + s + 1.0 > 0.0
}

/// `𝒟 = {τ < 1, s < 1, τ + s > 0}`
pub fn in_region_d(tau: f64, s: f64) -> bool {
    tau < 1.0 && s < 1.0 && tau + s > 0.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RegionPolicy {
    /// `(τ, s)` must lie in 𝒟, where every rate certificate applies.
    #[default]
    RequireD,
    /// `(τ, s)` only needs to lie in 𝒢; rate diagnostics are then uncertified.
    AllowG,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub beta: f64,
    pub tau: f64,
    pub s: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub max_iters: usize,
    /// Composite-residual stopping tolerance. Zero disables early stopping.
    pub tol: f64,
    pub region_policy: RegionPolicy,
}

impl SolverConfig {
    pub const DEFAULT_BETA: f64 = 1.0;
    pub const DEFAULT_TAU: f64 = 0.3;
    pub const DEFAULT_S: f64 = 0.4;
    pub const DEFAULT_MAX_ITERS: usize = 2000;
    pub const DEFAULT_TOL: f64 = 1e-10;

    /// Defaults for `problem`: `σ1 = p − 0.5`, `σ2 = q − 0.5`.
    pub fn for_problem(problem: &BlockProblem) -> Self {
        Self {
            beta: Self::DEFAULT_BETA,
            tau: Self::DEFAULT_TAU,
            s: Self::DEFAULT_S,
            sigma1: problem.p() as f64 - 0.5,
            sigma2: problem.q() as f64 - 0.5,
            max_iters: Self::DEFAULT_MAX_ITERS,
            tol: Self::DEFAULT_TOL,
            region_policy: RegionPolicy::RequireD,
        }
    }

    pub fn with_steps(mut self, tau: f64, s: f64) -> Self {
        self.tau = tau;
        self.s = s;
        self
    }

    pub fn in_region_d(&self) -> bool {
        in_region_d(self.tau, self.s)
    }
}

pub fn validate_config(config: &SolverConfig, problem: &BlockProblem) -> ValidationReport {
    let mut report = ValidationReport::default();
    let p = problem.p() as f64;
    let q = problem.q() as f64;
    if !(config.beta > 0.0) || !config.beta.is_finite() {
        report.violations.push(format!("beta must be positive, got {}", config.beta));
    }
    if !(config.sigma1 > p - 1.0) || !config.sigma1.is_finite() {
        report
            .violations
            .push(format!("sigma1 must exceed p-1 = {}, got {}", p - 1.0, config.sigma1));
    }
    if !(config.sigma2 > q - 1.0) || !config.sigma2.is_finite() {
        report
            .violations
            .push(format!("sigma2 must exceed q-1 = {}, got {}", q - 1.0, config.sigma2));
    }
    if !(config.tol >= 0.0) {
        report.violations.push(format!("tol must be nonnegative, got {}", config.tol));
    }
    let (tau, s) = (config.tau, config.s);
    let in_d = in_region_d(tau, s);
    let in_g = in_region_g(tau, s);
    match config.region_policy {
        RegionPolicy::RequireD if !in_d => report
            .violations
            .push(format!("(tau, s) = ({tau}, {s}) is outside region D")),
        RegionPolicy::AllowG if !in_g => report
            .violations
            .push(format!("(tau, s) = ({tau}, {s}) is outside region G")),
        RegionPolicy::AllowG if !in_d => report.warnings.push(format!(
            "(tau, s) = ({tau}, {s}) is in G but not D; rate diagnostics are not certified"
        )),
        _ => {}
    }
    report
}

/// `w = (x, y, λ)`
#[derive(Debug, Clone, PartialEq)]
pub struct Iterate {
    pub x: Vec<Vector>,
    pub y: Vec<Vector>,
    pub lambda: Vector,
}

impl Iterate {
    pub fn new(x: Vec<Vector>, y: Vec<Vector>, lambda: Vector) -> Self {
        Self { x, y, lambda }
    }

    pub fn zeros(problem: &BlockProblem) -> Self {
        Self {
            x: problem.x_blocks.iter().map(|b| Vector::zeros(b.dim())).collect(),
            y: problem.y_blocks.iter().map(|b| Vector::zeros(b.dim())).collect(),
            lambda: Vector::zeros(problem.n()),
        }
    }

    pub fn stacked(&self) -> Vector {
        let parts = self.x.iter().chain(self.y.iter()).chain(std::iter::once(&self.lambda));
        let len: usize = self.x.iter().chain(self.y.iter()).map(|v| v.len()).sum::<usize>() + self.lambda.len();
        let mut out = Vector::zeros(len);
        let mut off = 0;
        for v in parts {
            out.rows_mut(off, v.len()).copy_from(v);
            off += v.len();
        }
        out
    }

    pub fn from_stacked(problem: &BlockProblem, v: &Vector) -> Result<Self> {
        if v.len() != problem.stacked_dim() {
            return Err(Error::DimensionMismatch(format!(
                "stacked vector has length {}, expected {}",
                v.len(),
                problem.stacked_dim()
            )));
        }
        let mut off = 0;
        let mut take = |len: usize| {
            let out = v.rows(off, len).into_owned();
            off += len;
            out
        };
        let x = problem.x_blocks.iter().map(|b| take(b.dim())).collect();
        let y = problem.y_blocks.iter().map(|b| take(b.dim())).collect();
        let lambda = take(problem.n());
        Ok(Self { x, y, lambda })
    }

    pub fn norm(&self) -> f64 {
        self.stacked().norm()
    }

    pub fn is_finite(&self) -> bool {
        self.x
            .iter()
            .chain(self.y.iter())
            .chain(std::iter::once(&self.lambda))
            .all(|v| v.iter().all(|e| e.is_finite()))
    }

    /// Projects the primal blocks onto their feasible sets.
    pub fn projected(&self, problem: &BlockProblem) -> Self {
        let proj = |blocks: &[Block], v: &[Vector]| -> Vec<Vector> {
            blocks.iter().zip(v).map(|(b, vi)| crate::oracles::project(&b.set, vi)).collect()
        };
        Self {
            x: proj(&problem.x_blocks, &self.x),
            y: proj(&problem.y_blocks, &self.y),
            lambda: self.lambda.clone(),
        }
    }
}

/// `L(x, y, λ) = Σfᵢ(xᵢ) + Σgⱼ(yⱼ) − ⟨λ, 𝒜x + ℬy − c⟩`
pub fn lagrangian(problem: &BlockProblem, w: &Iterate) -> f64 {
    let r = problem.constraint_residual(&w.x, &w.y);
    problem.objective_value(w) - w.lambda.dot(&r)
}

/// `L_β = L + (β/2)‖𝒜x + ℬy − c‖²`
pub fn augmented_lagrangian(problem: &BlockProblem, w: &Iterate, beta: f64) -> f64 {
    let r = problem.constraint_residual(&w.x, &w.y);
    problem.objective_value(w) - w.lambda.dot(&r) + 0.5 * beta * r.norm_squared()
}

/// The affine map `𝒥(w) = (−𝒜ᵀλ; −ℬᵀλ; 𝒜x + ℬy − c)`, stacked.
pub fn affine_map(problem: &BlockProblem, w: &Iterate) -> Vector {
    let r = problem.constraint_residual(&w.x, &w.y);
    let x: Vec<Vector> = problem.x_blocks.iter().map(|b| -(b.matrix.transpose() * &w.lambda)).collect();
    let y: Vec<Vector> = problem.y_blocks.iter().map(|b| -(b.matrix.transpose() * &w.lambda)).collect();
    Iterate::new(x, y, r).stacked()
}

/// One chosen subgradient per block.
#[derive(Debug, Clone, PartialEq)]
pub struct Subgradients {
    pub x: Vec<Vector>,
    pub y: Vec<Vector>,
}

impl Subgradients {
    /// Gradients of the smooth blocks; `L1` blocks get the element of the
    /// subdifferential nearest zero.
    pub fn canonical(problem: &BlockProblem, w: &Iterate) -> Self {
        let pick = |blocks: &[Block], v: &[Vector]| -> Vec<Vector> {
            blocks
                .iter()
                .zip(v)
                .map(|(b, vi)| {
                    let (lo, hi) = b.objective.subdifferential_bounds(vi);
                    lo.zip_map(&hi, |l, h| 0.0_f64.clamp(l, h))
                })
                .collect()
        };
        Self { x: pick(&problem.x_blocks, &w.x), y: pick(&problem.y_blocks, &w.y) }
    }
}

/// First-order map: `(ηᵢ − Aᵢᵀλ; νⱼ − Bⱼᵀλ; 𝒜x + ℬy − c)` with the supplied
/// subgradients `ηᵢ ∈ ∂fᵢ(xᵢ)`, `νⱼ ∈ ∂gⱼ(yⱼ)`.
pub fn kkt_map(problem: &BlockProblem, w: &Iterate, subgradients: &Subgradients) -> Result<Vector> {
    problem.check_iterate(w)?;
    let shapes_ok = subgradients.x.len() == problem.p()
        && subgradients.y.len() == problem.q()
        && subgradients.x.iter().zip(&w.x).all(|(g, v)| g.len() == v.len())
        && subgradients.y.iter().zip(&w.y).all(|(g, v)| g.len() == v.len());
    if !shapes_ok {
        return Err(Error::DimensionMismatch("subgradient shapes do not match the iterate".into()));
    }
    let x = problem
        .x_blocks
        .iter()
        .zip(&subgradients.x)
        .map(|(b, g)| g - b.matrix.transpose() * &w.lambda)
        .collect();
    let y = problem
        .y_blocks
        .iter()
        .zip(&subgradients.y)
        .map(|(b, g)| g - b.matrix.transpose() * &w.lambda)
        .collect();
    let r = problem.constraint_residual(&w.x, &w.y);
    Ok(Iterate::new(x, y, r).stacked())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m1(v: f64) -> Matrix {
        Matrix::from_element(1, 1, v)
    }

    fn v(vals: &[f64]) -> Vector {
        Vector::from_row_slice(vals)
    }

    fn scalar_problem(a: Matrix) -> BlockProblem {
        let quad = Objective::Quadratic { p: m1(2.0), r: v(&[0.0]), t: 0.0 };
        BlockProblem::new(
            vec![Block::new(quad.clone(), a, FeasibleSet::Free)],
            vec![Block::new(quad, m1(1.0), FeasibleSet::Free)],
            v(&[1.0]),
        )
    }

    #[test]
    fn scalar_instance_is_valid() {
        assert!(validate_problem(&scalar_problem(m1(1.0))).is_valid());
    }

    #[test]
    fn zero_column_is_rank_deficient() {
        let quad = Objective::Quadratic { p: m1(2.0), r: v(&[0.0]), t: 0.0 };
        let prob = BlockProblem::new(
            vec![Block::new(quad.clone(), Matrix::zeros(2, 1), FeasibleSet::Free)],
            vec![Block::new(quad, Matrix::from_column_slice(2, 1, &[1.0, 0.0]), FeasibleSet::Free)],
            v(&[1.0, 1.0]),
        );
        let report = validate_problem(&prob);
        assert_eq!(report.violations.len(), 1);
        assert!(report.violations[0].contains("rank deficient"));
    }

    #[test]
    fn row_mismatch_is_reported() {
        let quad = Objective::Quadratic { p: m1(2.0), r: v(&[0.0]), t: 0.0 };
        let prob = BlockProblem::new(
            vec![Block::new(quad.clone(), Matrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0]), FeasibleSet::Free)],
            vec![Block::new(quad, Matrix::from_column_slice(2, 1, &[1.0, 0.0]), FeasibleSet::Free)],
            v(&[1.0, 1.0]),
        );
        let report = validate_problem(&prob);
        assert!(report.violations.iter().any(|s| s.contains("3 rows")));
    }

    #[test]
    fn region_g_examples() {
        assert!(in_region_g(0.5, 0.5));
        assert!(!in_region_g(1.0, 1.0));
        assert!(in_region_g(1.5, 0.3));
        assert!(!in_region_g(-0.2, 0.1));
    }

    #[test]
    fn region_d_examples() {
        assert!(in_region_d(0.5, 0.5));
        assert!(!in_region_d(1.5, 0.3));
        assert!(in_region_d(0.9, 0.9));
        // 𝒟 lies inside 𝒢: the 𝒢 quadratic is concave and vanishes at the
        // vertices of 𝒟.
        assert!(in_region_g(0.9, 0.9));
    }

    #[test]
    fn region_d_points_have_positive_sum_on_grid() {
        for i in 0..10 {
            for j in 0..10 {
                let tau = -2.0 + 4.0 * (i as f64 + 0.5) / 10.0;
                let s = -2.0 + 4.0 * (j as f64 + 0.5) / 10.0;
                if in_region_d(tau, s) {
                    assert!(tau + s > 0.0);
                }
            }
        }
    }

    #[test]
    fn config_sigma_bounds_are_strict() {
        let quad = Objective::Quadratic { p: m1(2.0), r: v(&[0.0]), t: 0.0 };
        let two_x = BlockProblem::new(
            vec![
                Block::new(quad.clone(), m1(1.0), FeasibleSet::Free),
                Block::new(quad.clone(), m1(1.0), FeasibleSet::Free),
            ],
            vec![Block::new(quad, m1(1.0), FeasibleSet::Free)],
            v(&[1.0]),
        );
        let mut cfg = SolverConfig::for_problem(&two_x);
        cfg.sigma1 = 1.0;
        let report = validate_config(&cfg, &two_x);
        assert_eq!(report.violations.len(), 1);
        assert!(report.violations[0].contains("sigma1"));

        let prob = scalar_problem(m1(1.0));
        let cfg = SolverConfig { sigma1: 0.5, sigma2: 0.5, ..SolverConfig::for_problem(&prob) }.with_steps(0.3, 0.4);
        let report = validate_config(&cfg, &prob);
        assert!(report.violations.is_empty() && report.warnings.is_empty());
    }

    #[test]
    fn config_region_policy() {
        let prob = scalar_problem(m1(1.0));
        let mut cfg = SolverConfig::for_problem(&prob).with_steps(1.5, 0.3);
        assert!(!validate_config(&cfg, &prob).is_valid());
        cfg.region_policy = RegionPolicy::AllowG;
        let report = validate_config(&cfg, &prob);
        assert!(report.is_valid());
        assert_eq!(report.warnings.len(), 1);
    }

    #[test]
    fn lagrangian_values() {
        let prob = scalar_problem(m1(1.0));
        // f = g = x² here because P = 2.
        let w = Iterate::new(vec![v(&[0.5])], vec![v(&[0.5])], v(&[1.0]));
        assert!((lagrangian(&prob, &w) - 0.5).abs() < 1e-15);
        assert!((augmented_lagrangian(&prob, &w, 3.0) - 0.5).abs() < 1e-15);
        let zero = Iterate::zeros(&prob);
        assert!((augmented_lagrangian(&prob, &zero, 2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn kkt_map_vanishes_at_saddle_point() {
        let prob = scalar_problem(m1(1.0));
        let w = Iterate::new(vec![v(&[0.5])], vec![v(&[0.5])], v(&[1.0]));
        let sub = Subgradients::canonical(&prob, &w);
        let j = kkt_map(&prob, &w, &sub).unwrap();
        assert!(j.norm() < 1e-15);

        let w0 = Iterate::new(vec![v(&[0.2])], vec![v(&[0.1])], v(&[0.0]));
        let j = affine_map(&prob, &w0);
        assert_eq!(j.as_slice(), &[0.0, 0.0, 0.2 + 0.1 - 1.0]);
    }

    #[test]
    fn stacked_round_trip() {
        let prob = scalar_problem(m1(1.0));
        let w = Iterate::new(vec![v(&[1.0])], vec![v(&[2.0])], v(&[3.0]));
        let back = Iterate::from_stacked(&prob, &w.stacked()).unwrap();
        assert_eq!(back, w);
        assert!(Iterate::from_stacked(&prob, &v(&[1.0])).is_err());
    }
}
