//! Exact solvers for the per-block subproblems.
//!
//! Every block update reduces to
//!
//! ```text
//! argmin_{z ∈ set}  objective(z) + (ρ/2)‖A z − u‖²
//! ```
//!
//! which is strongly convex because `A` has full column rank. Quadratic and
//! linear objectives become a bound-constrained QP with Hessian
//! `P + ρAᵀA`, solved by Cholesky when unconstrained and by active-set
//! enumeration otherwise. The ℓ1 objective requires `A = αI` and is solved by
//! soft thresholding.

use nalgebra::Cholesky;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::model::{scaled_identity_factor, FeasibleSet, Objective, BOX_DIM_CAP};

#[derive(Debug, Clone, Copy)]
pub struct ProxQuery<'a> {
    pub objective: &'a Objective,
    pub set: &'a FeasibleSet,
    pub matrix: &'a Matrix,
    pub rho: f64,
    pub target: &'a Vector,
}

impl<'a> ProxQuery<'a> {
    pub fn new(
        objective: &'a Objective,
        set: &'a FeasibleSet,
        matrix: &'a Matrix,
        rho: f64,
        target: &'a Vector,
    ) -> Self {
        Self { objective, set, matrix, rho, target }
    }

    /// `objective(z) + (ρ/2)‖A z − u‖²`
    pub fn value(&self, z: &Vector) -> f64 {
        let r = self.matrix * z - self.target;
        self.objective.value(z) + 0.5 * self.rho * r.norm_squared()
    }

    /// `ρAᵀ(Az − u)`
    pub fn penalty_gradient(&self, z: &Vector) -> Vector {
        self.matrix.transpose() * ((self.matrix * z - self.target) * self.rho)
    }

    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }
}

/// Minimizer together with the subgradient of `objective` that certifies it.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxSolution {
    pub z: Vector,
    pub subgradient: Vector,
}

/// Euclidean projection onto `set`.
pub fn project(set: &FeasibleSet, z: &Vector) -> Vector {
    match set {
        FeasibleSet::Free => z.clone(),
        FeasibleSet::Nonnegative => z.map(|v| v.max(0.0)),
        FeasibleSet::Box { lo, hi } => {
            Vector::from_iterator(z.len(), z.iter().zip(lo.iter().zip(hi.iter())).map(|(&v, (&l, &h))| v.clamp(l, h)))
        }
    }
}

pub fn prox_solve(query: &ProxQuery<'_>) -> Result<ProxSolution> {
    let dim = query.dim();
    if query.matrix.nrows() != query.target.len() {
        return Err(Error::DimensionMismatch(format!(
            "coupling matrix has {} rows but target has length {}",
            query.matrix.nrows(),
            query.target.len()
        )));
    }
    if !(query.rho > 0.0) {
        return Err(Error::UnsupportedCombination(format!("curvature weight must be positive, got {}", query.rho)));
    }
    match query.objective {
        Objective::L1 { weight } => solve_l1(query, *weight),
        Objective::Quadratic { p, r, .. } => {
            if p.nrows() != dim || r.len() != dim {
                return Err(Error::DimensionMismatch("quadratic data does not match block dimension".into()));
            }
            let hessian = p + query.matrix.transpose() * query.matrix * query.rho;
            let linear = r - query.matrix.transpose() * query.target * query.rho;
            let z = solve_bound_qp(&hessian, &linear, query.set, dim)?;
            let subgradient = p * &z + r;
            Ok(ProxSolution { z, subgradient })
        }
        Objective::Linear { r } => {
            if r.len() != dim {
                return Err(Error::DimensionMismatch("linear data does not match block dimension".into()));
            }
            let hessian = query.matrix.transpose() * query.matrix * query.rho;
            let linear = r - query.matrix.transpose() * query.target * query.rho;
            let z = solve_bound_qp(&hessian, &linear, query.set, dim)?;
            Ok(ProxSolution { z, subgradient: r.clone() })
        }
    }
}

/// `z − 𝒫[z − (g + ρAᵀ(Az − u))]` for the certifying subgradient `g`.
pub fn optimality_residual(query: &ProxQuery<'_>, solution: &ProxSolution) -> Vector {
    let step = &solution.subgradient + query.penalty_gradient(&solution.z);
    &solution.z - project(query.set, &(&solution.z - step))
}

fn solve_l1(query: &ProxQuery<'_>, weight: f64) -> Result<ProxSolution> {
    let alpha = scaled_identity_factor(query.matrix).ok_or_else(|| {
        Error::UnsupportedCombination("l1 objective requires a coupling matrix alpha*I with alpha > 0".into())
    })?;
    let nonneg = match query.set {
        FeasibleSet::Free => false,
        FeasibleSet::Nonnegative => true,
        FeasibleSet::Box { .. } => {
            return Err(Error::UnsupportedCombination("l1 objective over a box set".into()));
        }
    };
    let rho = query.rho;
    // In z-space the quadratic is (ρα²/2)‖z − u/α‖².
    let threshold = weight / (rho * alpha * alpha);
    let z = query.target.map(|u| {
        let center = u / alpha;
        let shrunk = center.signum() * (center.abs() - threshold).max(0.0);
        if nonneg {
            (center - threshold).max(0.0)
        } else {
            shrunk
        }
    });
    let subgradient = Vector::from_iterator(
        z.len(),
        z.iter().zip(query.target.iter()).map(|(&zi, &ui)| {
            if zi != 0.0 {
                weight * zi.signum()
            } else {
                (rho * alpha * ui).clamp(-weight, weight)
            }
        }),
    );
    Ok(ProxSolution { z, subgradient })
}

/// `argmin ½ zᵀ K z + gᵀ z` over the set.
fn solve_bound_qp(hessian: &Matrix, linear: &Vector, set: &FeasibleSet, dim: usize) -> Result<Vector> {
    match set {
        FeasibleSet::Free => {
            let chol = Cholesky::new(hessian.clone())
                .ok_or_else(|| Error::Unbounded("subproblem Hessian is not positive definite".into()))?;
            Ok(chol.solve(&(-linear)))
        }
        _ => {
            if dim > BOX_DIM_CAP {
                return Err(Error::UnsupportedCombination(format!(
                    "bound-constrained block of dimension {dim} exceeds the enumeration cap {BOX_DIM_CAP}"
                )));
            }
            if Cholesky::new(hessian.clone()).is_none() {
                return Err(Error::Unbounded("subproblem Hessian is not positive definite".into()));
            }
            let (lo, hi) = set.bounds(dim);
            Ok(enumerate_active_sets(hessian, linear, &lo, &hi))
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Bound {
    Free,
    Lower,
    Upper,
}

/// Enumerates the 3^dim free/lower/upper patterns in lexicographic order
/// and returns the first one whose reduced stationary point is primal and
/// dual feasible. If roundoff rejects every pattern, the least-violating
/// candidate is returned.
fn enumerate_active_sets(k: &Matrix, g: &Vector, lo: &Vector, hi: &Vector) -> Vector {
    let dim = g.len();
    let total = 3_usize.pow(dim as u32);
    let mut pattern = vec![Bound::Free; dim];
    let scale = 1.0 + k.amax() + g.amax();
    let mut best: Option<(f64, Vector)> = None;

    'patterns: for code in 0..total {
        let mut c = code;
        for slot in pattern.iter_mut().rev() {
            *slot = match c % 3 {
                0 => Bound::Free,
                1 => Bound::Lower,
                _ => Bound::Upper,
            };
            c /= 3;
        }
        let mut z = Vector::zeros(dim);
        for i in 0..dim {
            match pattern[i] {
                Bound::Lower if lo[i].is_finite() => z[i] = lo[i],
                Bound::Upper if hi[i].is_finite() => z[i] = hi[i],
                Bound::Free => {}
                _ => continue 'patterns,
            }
        }
        let free: Vec<usize> = (0..dim).filter(|&i| pattern[i] == Bound::Free).collect();
        if !free.is_empty() {
            let nf = free.len();
            let mut kff = Matrix::zeros(nf, nf);
            let mut rhs = Vector::zeros(nf);
            for (a, &i) in free.iter().enumerate() {
                for (b, &j) in free.iter().enumerate() {
                    kff[(a, b)] = k[(i, j)];
                }
                let mut v = -g[i];
                for j in 0..dim {
                    if pattern[j] != Bound::Free {
                        v -= k[(i, j)] * z[j];
                    }
                }
                rhs[a] = v;
            }
            let Some(chol) = Cholesky::new(kff) else { continue };
            let zf = chol.solve(&rhs);
            for (a, &i) in free.iter().enumerate() {
                z[i] = zf[a];
            }
        }
        let grad = k * &z + g;
        let tol = 1e-10 * scale * (1.0 + z.amax());
        let mut violation = 0.0_f64;
        for i in 0..dim {
            match pattern[i] {
                Bound::Free => {
                    violation = violation.max(lo[i] - z[i]).max(z[i] - hi[i]);
                }
                Bound::Lower => violation = violation.max(-grad[i]),
                Bound::Upper => violation = violation.max(grad[i]),
            }
        }
        let clipped = Vector::from_iterator(dim, (0..dim).map(|i| z[i].clamp(lo[i], hi[i])));
        if violation <= tol {
            return clipped;
        }
        if best.as_ref().is_none_or(|(v, _)| violation < *v) {
            best = Some((violation, clipped));
        }
    }
    best.map(|(_, z)| z).unwrap_or_else(|| Vector::zeros(dim))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(vals: &[f64]) -> Vector {
        Vector::from_row_slice(vals)
    }

    fn eye(n: usize) -> Matrix {
        Matrix::identity(n, n)
    }

    #[test]
    fn projections() {
        assert_eq!(project(&FeasibleSet::Free, &v(&[3.0, -2.0])), v(&[3.0, -2.0]));
        let bx = FeasibleSet::Box { lo: v(&[0.0, 0.0]), hi: v(&[1.0, 1.0]) };
        assert_eq!(project(&bx, &v(&[2.0, -0.5])), v(&[1.0, 0.0]));
        assert_eq!(project(&FeasibleSet::Nonnegative, &v(&[-1.0, 4.0])), v(&[0.0, 4.0]));
    }

    #[test]
    fn quadratic_free_closed_form() {
        let obj = Objective::Quadratic { p: eye(1) * 2.0, r: v(&[0.0]), t: 0.0 };
        let a = eye(1);
        let u = v(&[7.0]);
        let sol = prox_solve(&ProxQuery::new(&obj, &FeasibleSet::Free, &a, 1.5, &u)).unwrap();
        assert!((sol.z[0] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn first_x_step_of_scalar_instance() {
        let obj = Objective::Quadratic { p: eye(1) * 2.0, r: v(&[0.0]), t: 0.0 };
        let a = eye(1);
        let u = v(&[2.0 / 3.0]);
        let sol = prox_solve(&ProxQuery::new(&obj, &FeasibleSet::Free, &a, 1.5, &u)).unwrap();
        assert!((sol.z[0] - 2.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn soft_threshold() {
        let obj = Objective::L1 { weight: 1.0 };
        let a = eye(2);
        let u = v(&[1.2, -0.1]);
        let q = ProxQuery::new(&obj, &FeasibleSet::Free, &a, 2.0, &u);
        let sol = prox_solve(&q).unwrap();
        assert!((sol.z[0] - 0.7).abs() < 1e-15);
        assert_eq!(sol.z[1], 0.0);
        assert!(optimality_residual(&q, &sol).amax() < 1e-14);
    }

    #[test]
    fn box_qp_enumeration() {
        let obj = Objective::Quadratic { p: eye(2), r: v(&[0.0, 0.0]), t: 0.0 };
        let a = eye(2);
        let u = v(&[2.0, -3.0]);
        let bx = FeasibleSet::Box { lo: v(&[0.0, 0.0]), hi: v(&[1.0, 1.0]) };
        let q = ProxQuery::new(&obj, &bx, &a, 1.0, &u);
        let sol = prox_solve(&q).unwrap();
        assert!((&sol.z - v(&[1.0, 0.0])).amax() < 1e-14);
        assert!(optimality_residual(&q, &sol).amax() < 1e-14);
    }

    #[test]
    fn linear_over_nonnegative() {
        let obj = Objective::Linear { r: v(&[1.0, -1.0]) };
        let a = eye(2);
        let u = v(&[0.2, 0.2]);
        let q = ProxQuery::new(&obj, &FeasibleSet::Nonnegative, &a, 2.0, &u);
        let sol = prox_solve(&q).unwrap();
        // z = u − r/ρ clipped at zero
        assert!((sol.z - v(&[0.0, 0.7])).amax() < 1e-14);
    }

    #[test]
    fn unsupported_combinations() {
        let obj = Objective::L1 { weight: 1.0 };
        let a = Matrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        let u = v(&[1.0, 1.0]);
        let err = prox_solve(&ProxQuery::new(&obj, &FeasibleSet::Free, &a, 1.0, &u)).unwrap_err();
        assert!(matches!(err, Error::UnsupportedCombination(_)));
        let bx = FeasibleSet::Box { lo: v(&[0.0, 0.0]), hi: v(&[1.0, 1.0]) };
        let err = prox_solve(&ProxQuery::new(&obj, &bx, &eye(2), 1.0, &u)).unwrap_err();
        assert!(matches!(err, Error::UnsupportedCombination(_)));
    }
}
