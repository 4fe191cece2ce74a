//! Seeded instance families with independently computed reference saddle
//! points.
//!
//! The pseudo-random stream is SplitMix64 (increment `0x9E3779B97F4A7C15`,
//! output mix multipliers `0xBF58476D1CE4E5B9` and `0x94D049BB133111EB`,
//! shifts 30/27/31). Uniforms take the top 53 bits of each output; normals
//! use the cosine branch of Box–Muller on `(1 − u₁, u₂)`. Reproducing those
//! rules reproduces every instance bit for bit.

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::diagnostics;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};
use crate::model::{validate_problem, Block, BlockProblem, FeasibleSet, Iterate, Objective, SolverConfig};

/// Largest number of components with more than one active-set pattern.
pub const PATTERN_CAP: usize = 8;
/// Largest KKT condition number accepted for quadratic instances.
pub const KKT_CONDITION_CAP: f64 = 1e10;
/// Required `‖e_ℳ(w*, 1)‖` of every bundled reference point.
pub const KKT_RESIDUAL_TOL: f64 = 1e-10;
const PATTERN_RTOL: f64 = 1e-10;
const REDUCED_CONDITION_CAP: f64 = 1e12;
const RETRIES: u64 = 32;

pub struct InstanceRng(SplitMix64);

impl InstanceRng {
    pub fn new(seed: u64) -> Self {
        Self(SplitMix64::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn log_uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.uniform_in(lo.ln(), hi.ln()).exp()
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn normal_vector(&mut self, len: usize) -> Vector {
        Vector::from_fn(len, |_, _| self.normal())
    }
}

/// Why `ℳ*` is a single point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingletonCertificate {
    /// Every block strictly convex and `[𝒜 ℬ]` of full row rank.
    StrongConvexity,
    /// Exactly one active-set pattern yields a KKT point, and its reduced
    /// system is nonsingular.
    UniqueActivePattern,
}

impl SingletonCertificate {
    pub fn as_str(&self) -> &'static str {
        match self {
            SingletonCertificate::StrongConvexity => "strong-convexity",
            SingletonCertificate::UniqueActivePattern => "unique-active-pattern",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "strong-convexity" => Some(SingletonCertificate::StrongConvexity),
            "unique-active-pattern" => Some(SingletonCertificate::UniqueActivePattern),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct InstanceBundle {
    pub name: String,
    pub problem: BlockProblem,
    pub w_star: Iterate,
    pub provenance: String,
    pub seed: u64,
    pub certificate: SingletonCertificate,
    /// `‖e_ℳ(w*, 1)‖` measured at construction.
    pub kkt_residual: f64,
}

impl InstanceBundle {
    /// Validates the problem and checks the reference point with the
    /// error map, independently of how it was computed.
    pub fn new(
        name: impl Into<String>,
        problem: BlockProblem,
        w_star: Iterate,
        provenance: impl Into<String>,
        seed: u64,
        certificate: SingletonCertificate,
    ) -> Result<Self> {
        validate_problem(&problem).into_result()?;
        problem.check_iterate(&w_star)?;
        let kkt_residual = diagnostics::error_map_residual(&problem, &w_star).norm();
        if !(kkt_residual <= KKT_RESIDUAL_TOL) {
            return Err(Error::DegenerateInstance(format!(
                "reference point has KKT residual {kkt_residual:e}"
            )));
        }
        Ok(Self { name: name.into(), problem, w_star, provenance: provenance.into(), seed, certificate, kkt_residual })
    }
}

/// Block dimensions and constraint rows of a generated instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenSpec {
    pub x_dims: Vec<usize>,
    pub y_dims: Vec<usize>,
    pub n: usize,
}

impl GenSpec {
    pub fn new(x_dims: Vec<usize>, y_dims: Vec<usize>, n: usize) -> Self {
        Self { x_dims, y_dims, n }
    }

    fn check(&self, max_dim: usize, max_n: usize) -> Result<()> {
        if self.x_dims.is_empty() || self.y_dims.is_empty() {
            return Err(Error::DimensionMismatch("need at least one block per group".into()));
        }
        if self.n == 0 || self.n > max_n {
            return Err(Error::DimensionMismatch(format!("n = {} outside 1..={max_n}", self.n)));
        }
        for &d in self.x_dims.iter().chain(&self.y_dims) {
            if d == 0 || d > max_dim || d > self.n {
                return Err(Error::DimensionMismatch(format!(
                    "block dimension {d} must lie in 1..=min({max_dim}, n = {})",
                    self.n
                )));
            }
        }
        Ok(())
    }

    fn describe(&self) -> String {
        format!("x_dims={:?} y_dims={:?} n={}", self.x_dims, self.y_dims, self.n)
    }
}

fn random_orthogonal(rng: &mut InstanceRng, k: usize) -> Matrix {
    let g = Matrix::from_fn(k, k, |_, _| rng.normal());
    g.qr().q()
}

/// `n × k` matrix `Q₁ diag(σ) Q₂ᵀ` with `σ` log-uniform in `[0.1n, n]`.
fn random_coupling(rng: &mut InstanceRng, n: usize, k: usize) -> Matrix {
    let q1 = random_orthogonal(rng, n);
    let q2 = random_orthogonal(rng, k);
    let nf = n as f64;
    let sigma = Vector::from_fn(k, |_, _| rng.log_uniform(0.1 * nf, nf));
    q1.columns(0, k) * Matrix::from_diagonal(&sigma) * q2.transpose()
}

/// Symmetric positive definite matrix with eigenvalues log-uniform in `[0.5, 2]`.
fn random_spd(rng: &mut InstanceRng, k: usize) -> Matrix {
    let q = random_orthogonal(rng, k);
    let e = Vector::from_fn(k, |_, _| rng.log_uniform(0.5, 2.0));
    linalg::symmetrize(&(&q * Matrix::from_diagonal(&e) * q.transpose()))
}

fn random_quadratic(rng: &mut InstanceRng, k: usize, r_scale: f64) -> Objective {
    let p = random_spd(rng, k);
    let r = rng.normal_vector(k) * r_scale;
    Objective::Quadratic { p, r, t: 0.0 }
}

fn require_row_rank(problem: &BlockProblem) -> Result<()> {
    let k = Matrix::from_fn(problem.n(), problem.x_total() + problem.y_total(), |_, _| 0.0);
    let mut k = k;
    let a = problem.a_matrix();
    let b = problem.b_matrix();
    k.columns_mut(0, a.ncols()).copy_from(&a);
    k.columns_mut(a.ncols(), b.ncols()).copy_from(&b);
    let sv = k.singular_values();
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if sv.len() < problem.n() || smin < 1e-8 * sv.max().max(1.0) {
        return Err(Error::DegenerateInstance("constraint matrix is not of full row rank".into()));
    }
    Ok(())
}

/// Strictly convex quadratics on Free sets; the reference point solves the
/// dense KKT system.
pub fn gen_quadratic(spec: &GenSpec, seed: u64) -> Result<InstanceBundle> {
    spec.check(6, 8)?;
    let mut rng = InstanceRng::new(seed);
    let make = |dims: &[usize], rng: &mut InstanceRng| -> Vec<Block> {
        dims.iter()
            .map(|&d| {
                let a = random_coupling(rng, spec.n, d);
                Block::new(random_quadratic(rng, d, 1.0), a, FeasibleSet::Free)
            })
            .collect()
    };
    let x = make(&spec.x_dims, &mut rng);
    let y = make(&spec.y_dims, &mut rng);
    let c = rng.normal_vector(spec.n);
    let problem = BlockProblem::new(x, y, c);
    require_row_rank(&problem)?;
    let system = KktSystem::new(&problem)?;
    let cond = system.full_condition();
    if cond > KKT_CONDITION_CAP {
        return Err(Error::DegenerateInstance(format!("KKT condition number {cond:e}")));
    }
    let w_star = system.enumerate()?;
    InstanceBundle::new(
        format!("quadratic-{seed}"),
        problem,
        w_star,
        format!("gen_quadratic {}: dense KKT solve", spec.describe()),
        seed,
        SingletonCertificate::StrongConvexity,
    )
}

/// The first x block is `weight·‖z‖₁` with coupling `αI` and dimension `n`;
/// every other block is a strictly convex quadratic. The reference point
/// comes from sign/zero pattern enumeration over the ℓ1 variables.
pub fn gen_l1(spec: &GenSpec, seed: u64) -> Result<InstanceBundle> {
    if spec.x_dims.first().copied() != Some(spec.n) {
        return Err(Error::DimensionMismatch(format!(
            "the l1 block is the first x block and must have dimension n = {}",
            spec.n
        )));
    }
    if spec.n > PATTERN_CAP {
        return Err(Error::PatternExplosion(spec.n, PATTERN_CAP));
    }
    spec.check(6, 8)?;
    let mut rng = InstanceRng::new(seed);
    let alpha = rng.uniform_in(1.0, 2.0);
    let weight = rng.uniform_in(0.5, 1.5);
    let mut x = vec![Block::new(
        Objective::L1 { weight },
        Matrix::identity(spec.n, spec.n) * alpha,
        FeasibleSet::Free,
    )];
    for &d in &spec.x_dims[1..] {
        let a = random_coupling(&mut rng, spec.n, d);
        x.push(Block::new(random_quadratic(&mut rng, d, 1.0), a, FeasibleSet::Free));
    }
    let y: Vec<Block> = spec
        .y_dims
        .iter()
        .map(|&d| {
            let b = random_coupling(&mut rng, spec.n, d);
            Block::new(random_quadratic(&mut rng, d, 1.0), b, FeasibleSet::Free)
        })
        .collect();
    let c = rng.normal_vector(spec.n);
    let problem = BlockProblem::new(x, y, c);
    let w_star = KktSystem::new(&problem)?.enumerate()?;
    InstanceBundle::new(
        format!("l1-{seed}"),
        problem,
        w_star,
        format!("gen_l1 {} alpha={alpha} weight={weight}: sign/zero pattern enumeration", spec.describe()),
        seed,
        SingletonCertificate::UniqueActivePattern,
    )
}

/// Strictly convex quadratics over finite boxes around a feasible point;
/// the reference point comes from lower/upper/interior enumeration.
pub fn gen_box_qp(spec: &GenSpec, seed: u64) -> Result<InstanceBundle> {
    let total: usize = spec.x_dims.iter().chain(&spec.y_dims).sum();
    if total > PATTERN_CAP {
        return Err(Error::PatternExplosion(total, PATTERN_CAP));
    }
    spec.check(6, 8)?;
    let mut rng = InstanceRng::new(seed);
    let mut u0 = Vec::new();
    let make = |dims: &[usize], rng: &mut InstanceRng, u0: &mut Vec<Vector>| -> Vec<Block> {
        dims.iter()
            .map(|&d| {
                let a = random_coupling(rng, spec.n, d);
                let obj = random_quadratic(rng, d, 3.0);
                let center = rng.normal_vector(d);
                let lo = Vector::from_fn(d, |i, _| center[i] - rng.uniform_in(0.1, 1.0));
                let hi = Vector::from_fn(d, |i, _| center[i] + rng.uniform_in(0.1, 1.0));
                u0.push(center);
                Block::new(obj, a, FeasibleSet::Box { lo, hi })
            })
            .collect()
    };
    let x = make(&spec.x_dims, &mut rng, &mut u0);
    let y = make(&spec.y_dims, &mut rng, &mut u0);
    let (u0x, u0y) = u0.split_at(x.len());
    let mut problem = BlockProblem::new(x, y, Vector::zeros(spec.n));
    problem.c = problem.apply_a(u0x) + problem.apply_b(u0y);
    let w_star = KktSystem::new(&problem)?.enumerate()?;
    InstanceBundle::new(
        format!("boxqp-{seed}"),
        problem,
        w_star,
        format!("gen_box_qp {}: lower/upper/interior pattern enumeration", spec.describe()),
        seed,
        SingletonCertificate::UniqueActivePattern,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Pattern {
    Interior,
    Lower(f64),
    Upper(f64),
    Zero,
    Signed(f64),
}

#[derive(Debug, Clone)]
enum Component {
    Smooth { lo: f64, hi: f64 },
    L1 { weight: f64, lo: f64, hi: f64 },
}

impl Component {
    fn patterns(&self) -> Vec<Pattern> {
        match *self {
            Component::Smooth { lo, hi } => {
                let mut v = vec![Pattern::Interior];
                if lo.is_finite() {
                    v.push(Pattern::Lower(lo));
                }
                if hi.is_finite() && hi != lo {
                    v.push(Pattern::Upper(hi));
                }
                v
            }
            Component::L1 { lo, hi, .. } => {
                let mut v = vec![Pattern::Zero];
                if hi > 0.0 {
                    v.push(Pattern::Signed(1.0));
                }
                if lo < 0.0 {
                    v.push(Pattern::Signed(-1.0));
                }
                v
            }
        }
    }
}

/// Stationarity `Pu + r − Kᵀλ ∈ −N(u) − ∂‖·‖₁` and feasibility `Ku = c`
/// for the stacked primal `u = (x, y)` and `K = [𝒜 ℬ]`.
struct KktSystem<'a> {
    problem: &'a BlockProblem,
    p: Matrix,
    r: Vector,
    k: Matrix,
    components: Vec<Component>,
}

impl<'a> KktSystem<'a> {
    fn new(problem: &'a BlockProblem) -> Result<Self> {
        let nu = problem.x_total() + problem.y_total();
        let mut p = Matrix::zeros(nu, nu);
        let mut r = Vector::zeros(nu);
        let mut k = Matrix::zeros(problem.n(), nu);
        let mut components = Vec::with_capacity(nu);
        let mut off = 0;
        for block in problem.x_blocks.iter().chain(&problem.y_blocks) {
            let d = block.dim();
            k.columns_mut(off, d).copy_from(&block.matrix);
            let (lo, hi) = block.set.bounds(d);
            match &block.objective {
                Objective::Quadratic { p: pb, r: rb, .. } => {
                    p.view_mut((off, off), (d, d)).copy_from(pb);
                    r.rows_mut(off, d).copy_from(rb);
                    components.extend((0..d).map(|i| Component::Smooth { lo: lo[i], hi: hi[i] }));
                }
                Objective::Linear { r: rb } => {
                    r.rows_mut(off, d).copy_from(rb);
                    components.extend((0..d).map(|i| Component::Smooth { lo: lo[i], hi: hi[i] }));
                }
                Objective::L1 { weight } => {
                    components.extend((0..d).map(|i| Component::L1 { weight: *weight, lo: lo[i], hi: hi[i] }));
                }
            }
            off += d;
        }
        let branching = components.iter().filter(|c| c.patterns().len() > 1).count();
        if branching > PATTERN_CAP {
            return Err(Error::PatternExplosion(branching, PATTERN_CAP));
        }
        Ok(Self { problem, p, r, k, components })
    }

    fn dims(&self) -> (usize, usize) {
        (self.components.len(), self.k.nrows())
    }

    fn assemble(&self, patterns: &[Pattern]) -> (Matrix, Vector) {
        let (nu, n) = self.dims();
        let kt = self.k.transpose();
        let mut m = Matrix::zeros(nu + n, nu + n);
        let mut rhs = Vector::zeros(nu + n);
        for (i, pat) in patterns.iter().enumerate() {
            match *pat {
                Pattern::Interior => {
                    m.view_mut((i, 0), (1, nu)).copy_from(&self.p.row(i));
                    m.view_mut((i, nu), (1, n)).copy_from(&(-kt.row(i)));
                    rhs[i] = -self.r[i];
                }
                Pattern::Lower(v) | Pattern::Upper(v) => {
                    m[(i, i)] = 1.0;
                    rhs[i] = v;
                }
                Pattern::Zero => m[(i, i)] = 1.0,
                Pattern::Signed(sign) => {
                    let Component::L1 { weight, .. } = self.components[i] else { unreachable!() };
                    m.view_mut((i, nu), (1, n)).copy_from(&(-kt.row(i)));
                    rhs[i] = -weight * sign;
                }
            }
        }
        m.view_mut((nu, 0), (n, nu)).copy_from(&self.k);
        rhs.rows_mut(nu, n).copy_from(&self.problem.c);
        (m, rhs)
    }

    fn full_condition(&self) -> f64 {
        let all = vec![Pattern::Interior; self.components.len()];
        linalg::condition_number(&self.assemble(&all).0)
    }

    fn consistent(&self, patterns: &[Pattern], sol: &Vector) -> bool {
        let (nu, n) = self.dims();
        let u = sol.rows(0, nu);
        let lambda = sol.rows(nu, n);
        let ktl = self.k.transpose() * lambda;
        let grad = &self.p * u + &self.r - &ktl;
        let tol = PATTERN_RTOL * (1.0 + linalg::inf_norm(&sol.clone_owned()));
        patterns.iter().enumerate().all(|(i, pat)| match (*pat, &self.components[i]) {
            (Pattern::Interior, Component::Smooth { lo, hi }) => u[i] >= lo - tol && u[i] <= hi + tol,
            (Pattern::Lower(_), _) => grad[i] >= -tol,
            (Pattern::Upper(_), _) => grad[i] <= tol,
            (Pattern::Zero, Component::L1 { weight, lo, hi }) => {
                // −(Kᵀλ)ᵢ + [−w, w] must meet −N_[lo,hi](0).
                let g_lo = if *lo < 0.0 { -weight } else { f64::NEG_INFINITY };
                let g_hi = if *hi > 0.0 { *weight } else { f64::INFINITY };
                ktl[i] >= g_lo - tol && ktl[i] <= g_hi + tol
            }
            (Pattern::Signed(sign), Component::L1 { lo, hi, .. }) => {
                sign * u[i] >= -tol && u[i] >= lo - tol && u[i] <= hi + tol
            }
            _ => false,
        })
    }

    /// A signed pattern can be consistent with a zero component up to
    /// roundoff; the KKT point then has that component exactly at zero,
    /// where the subdifferential is the whole interval `[−w, w]`.
    fn snap_l1_zeros(&self, sol: &mut Vector) {
        let tol = PATTERN_RTOL * (1.0 + linalg::inf_norm(sol));
        for (i, c) in self.components.iter().enumerate() {
            if matches!(c, Component::L1 { .. }) && sol[i].abs() <= tol {
                sol[i] = 0.0;
            }
        }
    }

    /// Solves every pattern's reduced system and returns the unique
    /// consistent point.
    fn enumerate(&self) -> Result<Iterate> {
        let choices: Vec<Vec<Pattern>> = self.components.iter().map(|c| c.patterns()).collect();
        let mut index = vec![0usize; choices.len()];
        let mut found: Vec<Vector> = Vec::new();
        loop {
            let patterns: Vec<Pattern> = index.iter().zip(&choices).map(|(&i, c)| c[i]).collect();
            let (m, rhs) = self.assemble(&patterns);
            if linalg::condition_number(&m) <= REDUCED_CONDITION_CAP {
                if let Some(mut sol) = linalg::solve_dense(&m, &rhs) {
                    if self.consistent(&patterns, &sol) {
                        self.snap_l1_zeros(&mut sol);
                        let scale = 1.0 + linalg::inf_norm(&sol);
                        if !found.iter().any(|f| linalg::inf_norm(&(f - &sol)) <= 1e-8 * scale) {
                            found.push(sol);
                        }
                    }
                }
            }
            // Mixed-radix increment.
            let mut pos = 0;
            loop {
                if pos == index.len() {
                    return self.finish(found);
                }
                index[pos] += 1;
                if index[pos] < choices[pos].len() {
                    break;
                }
                index[pos] = 0;
                pos += 1;
            }
        }
    }

    fn finish(&self, found: Vec<Vector>) -> Result<Iterate> {
        match found.len() {
            0 => Err(Error::DegenerateInstance("no active-set pattern yields a nonsingular KKT point".into())),
            1 => Iterate::from_stacked(self.problem, &found[0]),
            k => Err(Error::NonUniqueSolution(format!("{k} distinct KKT points"))),
        }
    }
}

/// Reference saddle point of a small polyhedral problem by active-set
/// enumeration, for problems outside the generator families.
pub fn enumerate_reference(problem: &BlockProblem) -> Result<Iterate> {
    KktSystem::new(problem)?.enumerate()
}

fn scalar(v: f64) -> Vector {
    Vector::from_element(1, v)
}

fn scalar_matrix(v: f64) -> Matrix {
    Matrix::from_element(1, 1, v)
}

fn quadratic_1d(p: f64, r: f64, t: f64) -> Objective {
    Objective::Quadratic { p: scalar_matrix(p), r: scalar(r), t }
}

/// `min x² + y²  s.t.  x + y = 1`, with `w* = (0.5, 0.5, 1)`.
pub fn qp1() -> InstanceBundle {
    let problem = BlockProblem::new(
        vec![Block::new(quadratic_1d(2.0, 0.0, 0.0), scalar_matrix(1.0), FeasibleSet::Free)],
        vec![Block::new(quadratic_1d(2.0, 0.0, 0.0), scalar_matrix(1.0), FeasibleSet::Free)],
        scalar(1.0),
    );
    let w_star = enumerate_reference(&problem).expect("qp1 is nondegenerate");
    InstanceBundle::new("qp1", problem, w_star, "hand data: dense KKT solve", 0, SingletonCertificate::StrongConvexity)
        .expect("qp1 reference is exact")
}

/// `min |x| + (y − 1)²  s.t.  x + y = 1`, with `w* = (0, 1, 0)`.
pub fn l1_scalar() -> InstanceBundle {
    let problem = BlockProblem::new(
        vec![Block::new(Objective::L1 { weight: 1.0 }, scalar_matrix(1.0), FeasibleSet::Free)],
        vec![Block::new(quadratic_1d(2.0, -2.0, 1.0), scalar_matrix(1.0), FeasibleSet::Free)],
        scalar(1.0),
    );
    let w_star = enumerate_reference(&problem).expect("l1_scalar is nondegenerate");
    InstanceBundle::new(
        "l1-scalar",
        problem,
        w_star,
        "hand data: sign/zero pattern enumeration",
        0,
        SingletonCertificate::UniqueActivePattern,
    )
    .expect("l1_scalar reference is exact")
}

/// `min x² + y²  s.t.  x + y = 2, x ∈ [0, 0.3]`, with `w* = (0.3, 1.7, 3.4)`.
pub fn box_scalar() -> InstanceBundle {
    let problem = BlockProblem::new(
        vec![Block::new(
            quadratic_1d(2.0, 0.0, 0.0),
            scalar_matrix(1.0),
            FeasibleSet::Box { lo: scalar(0.0), hi: scalar(0.3) },
        )],
        vec![Block::new(quadratic_1d(2.0, 0.0, 0.0), scalar_matrix(1.0), FeasibleSet::Free)],
        scalar(2.0),
    );
    let w_star = enumerate_reference(&problem).expect("box_scalar is nondegenerate");
    InstanceBundle::new(
        "box-scalar",
        problem,
        w_star,
        "hand data: lower/upper/interior pattern enumeration",
        0,
        SingletonCertificate::UniqueActivePattern,
    )
    .expect("box_scalar reference is exact")
}

/// `β = 1, σ1 = σ2 = 0.5, τ = 0.3, s = 0.4` with the default stopping rule.
pub fn golden_config(problem: &BlockProblem) -> SolverConfig {
    let mut cfg = SolverConfig::for_problem(problem);
    cfg.beta = 1.0;
    cfg.sigma1 = 0.5;
    cfg.sigma2 = 0.5;
    cfg.with_steps(0.3, 0.4)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Quadratic,
    L1,
    BoxQp,
}

impl Family {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "quadratic" => Some(Family::Quadratic),
            "l1" => Some(Family::L1),
            "boxqp" => Some(Family::BoxQp),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Quadratic => "quadratic",
            Family::L1 => "l1",
            Family::BoxQp => "boxqp",
        }
    }

    pub fn generate(&self, spec: &GenSpec, seed: u64) -> Result<InstanceBundle> {
        match self {
            Family::Quadratic => gen_quadratic(spec, seed),
            Family::L1 => gen_l1(spec, seed),
            Family::BoxQp => gen_box_qp(spec, seed),
        }
    }
}

/// Tries `seed, seed + 1, …` while generation reports a degenerate or
/// non-unique instance.
pub fn generate_with_retry(family: Family, spec: &GenSpec, seed: u64) -> Result<InstanceBundle> {
    let mut last = None;
    for s in seed..seed + RETRIES {
        match family.generate(spec, s) {
            Ok(b) => return Ok(b),
            Err(e @ (Error::DegenerateInstance(_) | Error::NonUniqueSolution(_))) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Bundled instances used by the acceptance suite and `gsadmm run --catalog`.
pub fn catalog() -> Vec<InstanceBundle> {
    let specs: [(Family, GenSpec, u64); 9] = [
        (Family::Quadratic, GenSpec::new(vec![2], vec![2], 2), 1),
        (Family::Quadratic, GenSpec::new(vec![2, 2], vec![2, 2], 3), 42),
        (Family::Quadratic, GenSpec::new(vec![1, 2, 1], vec![2, 1], 4), 5),
        (Family::L1, GenSpec::new(vec![2], vec![2], 2), 7),
        (Family::L1, GenSpec::new(vec![3, 2], vec![2], 3), 3),
        (Family::L1, GenSpec::new(vec![2], vec![1, 1], 2), 19),
        (Family::BoxQp, GenSpec::new(vec![2], vec![2], 2), 11),
        (Family::BoxQp, GenSpec::new(vec![2, 1], vec![2, 1], 3), 13),
        (Family::BoxQp, GenSpec::new(vec![1, 1], vec![2], 2), 23),
    ];
    let mut out = vec![qp1(), l1_scalar(), box_scalar()];
    for (family, spec, seed) in specs {
        out.push(generate_with_retry(family, &spec, seed).expect("catalog specs generate within the retry budget"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(v: &Iterate, expect: &[f64]) -> bool {
        let s = v.stacked();
        s.len() == expect.len() && s.iter().zip(expect).all(|(a, b)| (a - b).abs() < 1e-12)
    }

    #[test]
    fn splitmix_reference_output() {
        let mut r = InstanceRng::new(0);
        assert_eq!(r.next_u64(), 0xe220a8397b1dcdaf);
        let mut r = InstanceRng::new(0);
        let u = r.uniform();
        assert!((0.0..1.0).contains(&u));
    }

    #[test]
    fn hand_examples() {
        assert!(close(&qp1().w_star, &[0.5, 0.5, 1.0]));
        assert!(close(&l1_scalar().w_star, &[0.0, 1.0, 0.0]));
        assert!(close(&box_scalar().w_star, &[0.3, 1.7, 3.4]));
    }

    #[test]
    fn homogeneous_quadratic_has_zero_solution() {
        let mut b = gen_quadratic(&GenSpec::new(vec![1], vec![1], 1), 3).unwrap();
        for blk in b.problem.x_blocks.iter_mut().chain(b.problem.y_blocks.iter_mut()) {
            if let Objective::Quadratic { r, .. } = &mut blk.objective {
                r.fill(0.0);
            }
        }
        b.problem.c.fill(0.0);
        assert!(enumerate_reference(&b.problem).unwrap().stacked().amax() == 0.0);
    }

    #[test]
    fn seeded_examples() {
        let b = gen_quadratic(&GenSpec::new(vec![2, 2], vec![2, 2], 3), 42).unwrap();
        assert!(b.kkt_residual <= 1e-10);
        let b = gen_l1(&GenSpec::new(vec![2], vec![2], 2), 7).unwrap();
        assert!(b.kkt_residual <= 1e-10);
        let b = gen_box_qp(&GenSpec::new(vec![2], vec![2], 2), 11).unwrap();
        assert!(b.kkt_residual <= 1e-10);
    }

    #[test]
    fn generated_matrices_are_well_conditioned() {
        let b = gen_quadratic(&GenSpec::new(vec![1, 2, 3], vec![2, 3], 4), 9).unwrap();
        for blk in b.problem.x_blocks.iter().chain(&b.problem.y_blocks) {
            let (lo, hi) = linalg::singular_value_range(&blk.matrix);
            assert!(lo >= 0.1 && hi / lo <= 10.0 + 1e-9);
        }
    }

    #[test]
    fn determinism() {
        let spec = GenSpec::new(vec![2], vec![1, 2], 3);
        let a = gen_box_qp(&spec, 5);
        let b = gen_box_qp(&spec, 5);
        match (a, b) {
            (Ok(a), Ok(b)) => {
                assert_eq!(a.problem, b.problem);
                assert_eq!(a.w_star, b.w_star);
            }
            (Err(a), Err(b)) => assert_eq!(a.to_string(), b.to_string()),
            _ => panic!("nondeterministic outcome"),
        }
    }

    #[test]
    fn caps() {
        assert!(matches!(
            gen_l1(&GenSpec::new(vec![9], vec![2], 9), 1),
            Err(Error::PatternExplosion(9, 8))
        ));
        assert!(matches!(
            gen_box_qp(&GenSpec::new(vec![4, 3], vec![2], 4), 1),
            Err(Error::PatternExplosion(9, 8))
        ));
        assert!(matches!(
            gen_quadratic(&GenSpec::new(vec![3], vec![1], 2), 1),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn unbounded_box_matches_quadratic() {
        let q = gen_quadratic(&GenSpec::new(vec![2], vec![2], 2), 4).unwrap();
        let mut p = q.problem.clone();
        for blk in p.x_blocks.iter_mut().chain(p.y_blocks.iter_mut()) {
            blk.set = FeasibleSet::Box {
                lo: Vector::from_element(blk.dim(), f64::NEG_INFINITY),
                hi: Vector::from_element(blk.dim(), f64::INFINITY),
            };
        }
        let w = enumerate_reference(&p).unwrap();
        assert!((w.stacked() - q.w_star.stacked()).amax() < 1e-12);
    }

    #[test]
    fn catalog_is_certified() {
        let cat = catalog();
        assert!(cat.len() >= 10);
        assert!(cat.iter().all(|b| b.kkt_residual <= KKT_RESIDUAL_TOL));
    }

    #[test]
    fn l1_zero_components_are_exact() {
        // Seeds whose lead block sits at zero; a signed pattern used to
        // leave ~1e-16 there and fail the error-map check.
        let spec = GenSpec::new(vec![3, 2], vec![2], 3);
        for seed in 1..=8 {
            let b = gen_l1(&spec, seed).unwrap();
            assert!(b.w_star.x[0].iter().all(|v| *v == 0.0 || v.abs() > 1e-9), "seed {seed}: {:?}", b.w_star.x[0]);
        }
    }
}
