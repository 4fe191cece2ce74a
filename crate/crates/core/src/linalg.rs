//! Dense linear-algebra helpers shared by the structural and diagnostic code.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Relative pivot floor for the positive-definiteness test: a pivot must
/// exceed `PD_PIVOT_RTOL * trace / N`.
pub const PD_PIVOT_RTOL: f64 = 1e-12;

pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

/// `‖M − Mᵀ‖_F / ‖M‖_F`, zero for the zero matrix.
pub fn relative_asymmetry(m: &Matrix) -> f64 {
    let scale = m.norm();
    if scale == 0.0 {
        return 0.0;
    }
    (m - m.transpose()).norm() / scale
}

/// Zero-shift Cholesky with a relative pivot floor.
///
/// Returns the lower factor when every pivot exceeds
/// `PD_PIVOT_RTOL * trace / N`, otherwise `None`.
pub fn cholesky_factor(m: &Matrix) -> Option<Matrix> {
    let n = m.nrows();
    if n != m.ncols() {
        return None;
    }
    if n == 0 {
        return Some(Matrix::zeros(0, 0));
    }
    let trace = m.trace();
    if !(trace > 0.0) {
        return None;
    }
    let floor = PD_PIVOT_RTOL * trace / n as f64;
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > floor) {
            return None;
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in (j + 1)..n {
            let mut v = m[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = v / djj;
        }
    }
    Some(l)
}

pub fn is_positive_definite(m: &Matrix) -> bool {
    cholesky_factor(m).is_some()
}

/// Eigenvalues of the symmetric part of `m`, ascending.
pub fn symmetric_eigenvalues(m: &Matrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let eig = SymmetricEigen::new(symmetrize(m));
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    vals
}

pub fn min_eigenvalue(m: &Matrix) -> f64 {
    symmetric_eigenvalues(m).first().copied().unwrap_or(f64::NAN)
}

pub fn max_eigenvalue(m: &Matrix) -> f64 {
    symmetric_eigenvalues(m).last().copied().unwrap_or(f64::NAN)
}

/// Largest singular value.
pub fn spectral_norm(m: &Matrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.singular_values().max()
}

/// Smallest and largest singular values.
pub fn singular_value_range(m: &Matrix) -> (f64, f64) {
    if m.nrows() == 0 || m.ncols() == 0 {
        return (0.0, 0.0);
    }
    let sv = m.singular_values();
    (sv.min(), sv.max())
}

/// Smallest eigenvalue of the symmetric-definite pencil `(a, b)`, i.e. the
/// largest `ξ` with `vᵀ a v ≥ ξ vᵀ b v` for all `v`. Both inputs are
/// symmetrized first. `None` when `b` is not positive definite.
pub fn min_generalized_eigenvalue(a: &Matrix, b: &Matrix) -> Option<f64> {
    let a = symmetrize(a);
    let b = symmetrize(b);
    let l = cholesky_factor(&b)?;
    let n = l.nrows();
    // C = L⁻¹ A L⁻ᵀ via two triangular solves.
    let mut y = a.clone();
    for col in 0..n {
        let mut c = y.column(col).into_owned();
        forward_substitute(&l, &mut c);
        y.set_column(col, &c);
    }
    let mut yt = y.transpose();
    for col in 0..n {
        let mut c = yt.column(col).into_owned();
        forward_substitute(&l, &mut c);
        yt.set_column(col, &c);
    }
    Some(min_eigenvalue(&yt))
}

fn forward_substitute(l: &Matrix, b: &mut Vector) {
    let n = l.nrows();
    for i in 0..n {
        let mut v = b[i];
        for k in 0..i {
            v -= l[(i, k)] * b[k];
        }
        b[i] = v / l[(i, i)];
    }
}

/// `vᵀ m v`.
pub fn quad_form(m: &Matrix, v: &Vector) -> f64 {
    v.dot(&(m * v))
}

/// Solve a square system by LU with a reciprocal-condition guard.
pub fn solve_dense(a: &Matrix, b: &Vector) -> Option<Vector> {
    let lu = a.clone().lu();
    let x = lu.solve(b)?;
    if x.iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}

/// 2-norm condition number estimate from the singular values.
pub fn condition_number(a: &Matrix) -> f64 {
    let (lo, hi) = singular_value_range(a);
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

pub fn inf_norm(v: &Vector) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_rejects_indefinite_and_semidefinite() {
        let pd = Matrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let psd = Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let ind = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(is_positive_definite(&pd));
        assert!(!is_positive_definite(&psd));
        assert!(!is_positive_definite(&ind));
        let l = cholesky_factor(&pd).unwrap();
        assert!((&l * l.transpose() - &pd).norm() < 1e-14);
    }

    #[test]
    fn generalized_eigenvalue_matches_scalar_ratio() {
        let a = Matrix::from_diagonal(&Vector::from_vec(vec![2.0, 9.0]));
        let b = Matrix::from_diagonal(&Vector::from_vec(vec![4.0, 3.0]));
        let xi = min_generalized_eigenvalue(&a, &b).unwrap();
        assert!((xi - 0.5).abs() < 1e-14);
    }
}
