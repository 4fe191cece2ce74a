//! Test-only oracles, independent of the library's solvers.
#![allow(dead_code)]

use gsadmm::generators::{generate_with_retry, Family, GenSpec, InstanceRng};
use gsadmm::{FeasibleSet, InstanceBundle, Matrix, Objective, Vector};

/// A proximal query `min φ(z) + (ρ/2)‖Az − u‖²` over a set, in a form
/// evaluated with plain arithmetic.
#[derive(Debug, Clone)]
pub struct BruteQuery {
    pub objective: Objective,
    pub set: FeasibleSet,
    pub a: Matrix,
    pub rho: f64,
    pub u: Vector,
}

impl BruteQuery {
    pub fn dim(&self) -> usize {
        self.a.ncols()
    }

    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.dim();
        match &self.set {
            FeasibleSet::Free => (vec![f64::NEG_INFINITY; d], vec![f64::INFINITY; d]),
            FeasibleSet::Nonnegative => (vec![0.0; d], vec![f64::INFINITY; d]),
            FeasibleSet::Box { lo, hi } => (lo.iter().copied().collect(), hi.iter().copied().collect()),
        }
    }

    /// Objective value; `+∞` outside the set.
    pub fn eval(&self, z: &[f64]) -> f64 {
        let (lo, hi) = self.bounds();
        if z.iter().zip(lo.iter().zip(&hi)).any(|(v, (l, h))| v < l || v > h) {
            return f64::INFINITY;
        }
        let d = self.dim();
        let mut phi = 0.0;
        match &self.objective {
            Objective::Quadratic { p, r, t } => {
                for (i, zi) in z.iter().enumerate() {
                    phi += r[i] * zi;
                    for (j, zj) in z.iter().enumerate() {
                        phi += 0.5 * zi * p[(i, j)] * zj;
                    }
                }
                phi += t;
            }
            Objective::L1 { weight } => phi = weight * z.iter().map(|v| v.abs()).sum::<f64>(),
            Objective::Linear { r } => phi = (0..d).map(|i| r[i] * z[i]).sum(),
        }
        let mut pen = 0.0;
        for row in 0..self.a.nrows() {
            let mut s = -self.u[row];
            for (j, zj) in z.iter().enumerate() {
                s += self.a[(row, j)] * zj;
            }
            pen += s * s;
        }
        phi + 0.5 * self.rho * pen
    }

    /// Box containing the minimizer, from strong convexity at the feasible
    /// point `z0 = 𝒫(0)`: `‖z* − z0‖ ≤ 2‖g0‖/μ` for any `g0 ∈ ∂F(z0)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.dim();
        let (lo, hi) = self.bounds();
        let z0: Vec<f64> = (0..d).map(|i| 0.0f64.clamp(lo[i], hi[i])).collect();
        let ata = self.a.transpose() * &self.a;
        let mut hess = &ata * self.rho;
        let mut g0 = vec![0.0; d];
        let resid: Vec<f64> = (0..self.a.nrows())
            .map(|row| (0..d).map(|j| self.a[(row, j)] * z0[j]).sum::<f64>() - self.u[row])
            .collect();
        for (j, g) in g0.iter_mut().enumerate() {
            *g = self.rho * (0..self.a.nrows()).map(|row| self.a[(row, j)] * resid[row]).sum::<f64>();
        }
        match &self.objective {
            Objective::Quadratic { p, r, .. } => {
                hess += p;
                for i in 0..d {
                    g0[i] += r[i] + (0..d).map(|j| p[(i, j)] * z0[j]).sum::<f64>();
                }
            }
            Objective::L1 { weight } => {
                for i in 0..d {
                    g0[i] += weight * z0[i].signum() * (z0[i] != 0.0) as i32 as f64;
                }
            }
            Objective::Linear { r } => {
                for i in 0..d {
                    g0[i] += r[i];
                }
            }
        }
        let mu = hess.symmetric_eigenvalues().min();
        let radius = 2.0 * g0.iter().map(|g| g * g).sum::<f64>().sqrt() / mu + 1e-3;
        let blo = (0..d).map(|i| (z0[i] - radius).max(lo[i])).collect();
        let bhi = (0..d).map(|i| (z0[i] + radius).min(hi[i])).collect();
        (blo, bhi)
    }
}

fn grid_axis(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if hi <= lo {
        return vec![lo];
    }
    (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect()
}

/// Coarse-to-fine grid search down to spacing `1e-4`, then compass polish.
pub fn brute_force_minimize(q: &BruteQuery) -> (Vec<f64>, f64) {
    const POINTS: usize = 41;
    let d = q.dim();
    let (mut lo, mut hi) = q.bounding_box();
    let (set_lo, set_hi) = q.bounds();
    let mut best = lo.clone();
    let mut best_val = f64::INFINITY;
    loop {
        let axes: Vec<Vec<f64>> = (0..d).map(|i| grid_axis(lo[i], hi[i], POINTS)).collect();
        let mut idx = vec![0usize; d];
        loop {
            let z: Vec<f64> = (0..d).map(|i| axes[i][idx[i]]).collect();
            let v = q.eval(&z);
            if v < best_val {
                best_val = v;
                best = z;
            }
            let mut k = 0;
            while k < d {
                idx[k] += 1;
                if idx[k] < axes[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == d {
                break;
            }
        }
        let step = (0..d).map(|i| (hi[i] - lo[i]) / (POINTS - 1) as f64).fold(0.0, f64::max);
        if step <= 1e-4 {
            break;
        }
        for i in 0..d {
            lo[i] = (best[i] - 4.0 * step).max(set_lo[i]);
            hi[i] = (best[i] + 4.0 * step).min(set_hi[i]);
        }
    }
    // Compass search; trial points outside the set evaluate to +∞.
    let mut h = 1e-4;
    while h > 1e-13 {
        let mut improved = false;
        for i in 0..d {
            for sgn in [1.0, -1.0] {
                let mut z = best.clone();
                z[i] = (z[i] + sgn * h).clamp(set_lo[i], set_hi[i]);
                let v = q.eval(&z);
                if v < best_val {
                    best_val = v;
                    best = z;
                    improved = true;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    (best, best_val)
}

pub fn random_spd(rng: &mut InstanceRng, d: usize) -> Matrix {
    let g = Matrix::from_fn(d, d, |_, _| rng.normal());
    &g * g.transpose() + Matrix::identity(d, d) * 0.2
}

/// Random full-column-rank `rows × d` matrix.
pub fn random_full_rank(rng: &mut InstanceRng, rows: usize, d: usize) -> Matrix {
    loop {
        let a = Matrix::from_fn(rows, d, |_, _| rng.normal());
        let sv = a.singular_values();
        if sv.min() > 0.3 {
            return a;
        }
    }
}

fn random_box(rng: &mut InstanceRng, d: usize) -> FeasibleSet {
    let mut lo = Vector::zeros(d);
    let mut hi = Vector::zeros(d);
    for i in 0..d {
        let l = rng.normal();
        let w = rng.uniform_in(0.2, 2.0);
        let kind = rng.uniform();
        lo[i] = if kind < 0.15 { f64::NEG_INFINITY } else { l };
        hi[i] = if (0.15..0.3).contains(&kind) { f64::INFINITY } else { l + w };
    }
    FeasibleSet::Box { lo, hi }
}

pub const PROX_FAMILIES: [&str; 7] = [
    "quadratic/free",
    "quadratic/box",
    "quadratic/nonnegative",
    "l1/free",
    "l1/nonnegative",
    "linear/box",
    "linear/nonnegative",
];

pub fn random_query(rng: &mut InstanceRng, family: &str) -> BruteQuery {
    let d = 1 + (rng.uniform() < 0.5) as usize;
    let rho = rng.uniform_in(0.5, 3.0);
    let (kind, set_kind) = family.split_once('/').unwrap();
    let set = match set_kind {
        "free" => FeasibleSet::Free,
        "nonnegative" => FeasibleSet::Nonnegative,
        _ => random_box(rng, d),
    };
    let (objective, a) = match kind {
        "quadratic" => {
            let rows = d + (rng.uniform() < 0.5) as usize;
            let p = random_spd(rng, d);
            let r = Vector::from_fn(d, |_, _| rng.normal());
            (Objective::Quadratic { p, r, t: rng.normal() }, random_full_rank(rng, rows, d))
        }
        "l1" => {
            let alpha = rng.uniform_in(0.5, 2.0);
            (Objective::L1 { weight: rng.uniform_in(0.0, 2.0) }, Matrix::identity(d, d) * alpha)
        }
        _ => {
            let rows = d + (rng.uniform() < 0.5) as usize;
            let r = Vector::from_fn(d, |_, _| rng.normal());
            (Objective::Linear { r }, random_full_rank(rng, rows, d))
        }
    };
    let u = Vector::from_fn(a.nrows(), |_, _| 2.0 * rng.normal());
    BruteQuery { objective, set, a, rho, u }
}

/// Random quadratic instance with `p, q ≤ 3` and block dimensions `≤ 4`.
pub fn random_instance(rng: &mut InstanceRng) -> InstanceBundle {
    let p = 1 + (rng.uniform() * 3.0) as usize;
    let q = 1 + (rng.uniform() * 3.0) as usize;
    let x: Vec<usize> = (0..p).map(|_| 1 + (rng.uniform() * 4.0) as usize).collect();
    let y: Vec<usize> = (0..q).map(|_| 1 + (rng.uniform() * 4.0) as usize).collect();
    let max_dim = *x.iter().chain(&y).max().unwrap();
    let total: usize = x.iter().chain(&y).sum();
    let n_hi = total.min(8);
    let n = max_dim + (rng.uniform() * (n_hi - max_dim + 1) as f64) as usize;
    let seed = rng.next_u64() >> 16;
    generate_with_retry(Family::Quadratic, &GenSpec::new(x, y, n.min(n_hi)), seed).expect("random instance")
}
