//! Structural matrices of the prediction-correction reading of GS-ADMM.
//!
//! With `w = (x, y, λ)` stacked as `x₁ … x_p, y₁ … y_q, λ`:
//!
//! * `Q = diag(H_x, Q̃)` is the proximal matrix of the prediction step,
//! * `M` is the correction matrix, `w^{k+1} = wᵏ − M(wᵏ − w̃ᵏ)`,
//! * `G = Q + Qᵀ − MᵀQ` and `H = Q M⁻¹` are the matrices of the contraction
//!   inequality `‖w^{k+1} − w*‖²_H ≤ ‖wᵏ − w*‖²_H − ‖wᵏ − w̃ᵏ‖²_G`.
//!
//! All matrices are dense. The closed forms of `G` and `M⁻¹` are kept here as
//! independent cross-checks for the generic constructions.

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::model::{BlockProblem, SolverConfig};

/// Offsets of each block inside the stacked `w` vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub x_offsets: Vec<usize>,
    pub x_dims: Vec<usize>,
    pub y_offsets: Vec<usize>,
    pub y_dims: Vec<usize>,
    pub lambda_offset: usize,
    pub n: usize,
}

impl Layout {
    pub fn new(problem: &BlockProblem) -> Self {
        let x_dims = problem.x_dims();
        let y_dims = problem.y_dims();
        let mut off = 0;
        let x_offsets = x_dims
            .iter()
            .map(|d| {
                let o = off;
                off += d;
                o
            })
            .collect();
        let y_offsets = y_dims
            .iter()
            .map(|d| {
                let o = off;
                off += d;
                o
            })
            .collect();
        Self { x_offsets, x_dims, y_offsets, y_dims, lambda_offset: off, n: problem.n() }
    }

    pub fn x_total(&self) -> usize {
        self.x_dims.iter().sum()
    }

    pub fn y_total(&self) -> usize {
        self.y_dims.iter().sum()
    }

    pub fn total(&self) -> usize {
        self.lambda_offset + self.n
    }
}

/// `H_x = β [σ1 AᵢᵀAᵢ on the diagonal, −AᵢᵀA_l off it]`
pub fn build_hx(problem: &BlockProblem, beta: f64, sigma1: f64) -> Matrix {
    let layout = Layout::new(problem);
    let side = layout.x_total();
    let mut hx = Matrix::zeros(side, side);
    for (i, bi) in problem.x_blocks.iter().enumerate() {
        for (l, bl) in problem.x_blocks.iter().enumerate() {
            let coef = if i == l { sigma1 } else { -1.0 };
            let block = bi.matrix.transpose() * &bl.matrix * (coef * beta);
            hx.view_mut((layout.x_offsets[i], layout.x_offsets[l]), (layout.x_dims[i], layout.x_dims[l]))
                .copy_from(&block);
        }
    }
    hx
}

/// `Q̃` of side `Σdⱼ + n`: diagonal `(σ2+1)β BⱼᵀBⱼ`, last block column
/// `−τBⱼᵀ`, last block row `−Bⱼ`, corner `(1/β)I`.
pub fn build_q_tilde(problem: &BlockProblem, beta: f64, sigma2: f64, tau: f64) -> Matrix {
    let layout = Layout::new(problem);
    let ny = layout.y_total();
    let n = problem.n();
    let base = layout.x_total();
    let mut qt = Matrix::zeros(ny + n, ny + n);
    for (j, bj) in problem.y_blocks.iter().enumerate() {
        let o = layout.y_offsets[j] - base;
        let d = layout.y_dims[j];
        let bt = bj.matrix.transpose();
        qt.view_mut((o, o), (d, d)).copy_from(&(&bt * &bj.matrix * ((sigma2 + 1.0) * beta)));
        qt.view_mut((o, ny), (d, n)).copy_from(&(&bt * -tau));
        qt.view_mut((ny, o), (n, d)).copy_from(&(-&bj.matrix));
    }
    qt.view_mut((ny, ny), (n, n)).fill_with_identity();
    qt.view_mut((ny, ny), (n, n)).scale_mut(1.0 / beta);
    qt
}

/// `Q = diag(H_x, Q̃)`
pub fn build_q(hx: &Matrix, q_tilde: &Matrix) -> Matrix {
    let a = hx.nrows();
    let b = q_tilde.nrows();
    let mut q = Matrix::zeros(a + b, a + b);
    q.view_mut((0, 0), (a, a)).copy_from(hx);
    q.view_mut((a, a), (b, b)).copy_from(q_tilde);
    q
}

/// Identity except the last block row `[0 ⋯ 0, −sβB₁ ⋯ −sβB_q, (τ+s)I]`.
pub fn build_m(problem: &BlockProblem, beta: f64, tau: f64, s: f64) -> Matrix {
    let layout = Layout::new(problem);
    let side = layout.total();
    let n = problem.n();
    let mut m = Matrix::identity(side, side);
    for (j, bj) in problem.y_blocks.iter().enumerate() {
        m.view_mut((layout.lambda_offset, layout.y_offsets[j]), (n, layout.y_dims[j]))
            .copy_from(&(&bj.matrix * (-s * beta)));
    }
    let corner = layout.lambda_offset;
    for i in 0..n {
        m[(corner + i, corner + i)] = tau + s;
    }
    m
}

fn check_invertible(tau: f64, s: f64) -> Result<()> {
    if (tau + s).abs() <= 1e-14 {
        Err(Error::SingularM(tau + s))
    } else {
        Ok(())
    }
}

/// Dense inverse of `M` by LU.
pub fn invert_m(m: &Matrix) -> Result<Matrix> {
    m.clone().try_inverse().ok_or(Error::SingularM(f64::NAN))
}

/// Closed-form `M⁻¹`: identity except the last block row
/// `[(sβ/(τ+s))B₁ ⋯ (sβ/(τ+s))B_q, (1/(τ+s))I]`.
pub fn m_inverse_closed_form(problem: &BlockProblem, beta: f64, tau: f64, s: f64) -> Result<Matrix> {
    check_invertible(tau, s)?;
    let layout = Layout::new(problem);
    let n = problem.n();
    let mut inv = Matrix::identity(layout.total(), layout.total());
    let coef = s * beta / (tau + s);
    for (j, bj) in problem.y_blocks.iter().enumerate() {
        inv.view_mut((layout.lambda_offset, layout.y_offsets[j]), (n, layout.y_dims[j]))
            .copy_from(&(&bj.matrix * coef));
    }
    for i in 0..n {
        inv[(layout.lambda_offset + i, layout.lambda_offset + i)] = 1.0 / (tau + s);
    }
    Ok(inv)
}

/// `G = Q + Qᵀ − MᵀQ`
pub fn build_g(q: &Matrix, m: &Matrix) -> Matrix {
    q + q.transpose() - m.transpose() * q
}

/// `H = Q M⁻¹`, obtained by solving `Mᵀ X = Qᵀ` and transposing. Not
/// symmetrized.
pub fn build_h(q: &Matrix, m: &Matrix) -> Result<Matrix> {
    let lu = m.transpose().lu();
    let x = lu.solve(&q.transpose()).ok_or(Error::SingularM(f64::NAN))?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularM(f64::NAN));
    }
    Ok(x.transpose())
}

/// `G` assembled from its explicit block pattern: `H_x ⊕ G̃` with `G̃`
/// diagonal `(σ2+1−s)β BⱼᵀBⱼ`, off-diagonal `−sβ BⱼᵀB_l`, border
/// `(s−1)Bⱼᵀ`, corner `((2−τ−s)/β) I`.
pub fn g_closed_form(problem: &BlockProblem, config: &SolverConfig) -> Matrix {
    let SolverConfig { beta, tau, s, sigma1, sigma2, .. } = *config;
    let layout = Layout::new(problem);
    let side = layout.total();
    let nx = layout.x_total();
    let n = problem.n();
    let mut g = Matrix::zeros(side, side);
    g.view_mut((0, 0), (nx, nx)).copy_from(&build_hx(problem, beta, sigma1));
    for (j, bj) in problem.y_blocks.iter().enumerate() {
        for (l, bl) in problem.y_blocks.iter().enumerate() {
            let coef = if j == l { (sigma2 + 1.0 - s) * beta } else { -s * beta };
            g.view_mut((layout.y_offsets[j], layout.y_offsets[l]), (layout.y_dims[j], layout.y_dims[l]))
                .copy_from(&(bj.matrix.transpose() * &bl.matrix * coef));
        }
        let border = &bj.matrix * (s - 1.0);
        g.view_mut((layout.lambda_offset, layout.y_offsets[j]), (n, layout.y_dims[j]))
            .copy_from(&border);
        g.view_mut((layout.y_offsets[j], layout.lambda_offset), (layout.y_dims[j], n))
            .copy_from(&border.transpose());
    }
    for i in 0..n {
        g[(layout.lambda_offset + i, layout.lambda_offset + i)] = (2.0 - tau - s) / beta;
    }
    g
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralSummary {
    pub lambda_min_g: f64,
    pub lambda_min_h: f64,
    pub lambda_max_h: f64,
    pub lambda_max_mthm: f64,
    /// Smallest generalized eigenvalue of `(G, MᵀHM)`; `None` when `MᵀHM`
    /// is not positive definite.
    pub xi: Option<f64>,
    pub g_positive_definite: bool,
    pub h_positive_definite: bool,
}

#[derive(Debug, Clone)]
pub struct StructuralMatrices {
    pub layout: Layout,
    pub hx: Matrix,
    pub q_tilde: Matrix,
    pub q: Matrix,
    pub m: Matrix,
    pub g: Matrix,
    /// `H = QM⁻¹`, symmetrized.
    pub h: Matrix,
    /// Relative asymmetry of `H` before symmetrization.
    pub h_asymmetry: f64,
    /// `MᵀHM`, symmetrized.
    pub mthm: Matrix,
    pub spectral: SpectralSummary,
    pub beta: f64,
    pub tau: f64,
    pub s: f64,
}

impl StructuralMatrices {
    pub fn assemble(problem: &BlockProblem, config: &SolverConfig) -> Result<Self> {
        let SolverConfig { beta, tau, s, sigma1, sigma2, .. } = *config;
        check_invertible(tau, s)?;
        let hx = build_hx(problem, beta, sigma1);
        let q_tilde = build_q_tilde(problem, beta, sigma2, tau);
        let q = build_q(&hx, &q_tilde);
        let m = build_m(problem, beta, tau, s);
        let g = build_g(&q, &m);
        let h_raw = build_h(&q, &m).map_err(|_| Error::SingularM(tau + s))?;
        let h_asymmetry = linalg::relative_asymmetry(&h_raw);
        let h = linalg::symmetrize(&h_raw);
        let mthm = linalg::symmetrize(&(m.transpose() * &h * &m));
        let spectral = spectral_summary(&g, &h, &mthm);
        Ok(Self {
            layout: Layout::new(problem),
            hx,
            q_tilde,
            q,
            m,
            g,
            h,
            h_asymmetry,
            mthm,
            spectral,
            beta,
            tau,
            s,
        })
    }

    pub fn side(&self) -> usize {
        self.q.nrows()
    }

    pub fn in_region_d(&self) -> bool {
        crate::model::in_region_d(self.tau, self.s)
    }
}

pub fn spectral_summary(g: &Matrix, h: &Matrix, mthm: &Matrix) -> SpectralSummary {
    let h_eigs = linalg::symmetric_eigenvalues(h);
    SpectralSummary {
        lambda_min_g: linalg::min_eigenvalue(g),
        lambda_min_h: h_eigs.first().copied().unwrap_or(f64::NAN),
        lambda_max_h: h_eigs.last().copied().unwrap_or(f64::NAN),
        lambda_max_mthm: linalg::max_eigenvalue(mthm),
        xi: linalg::min_generalized_eigenvalue(g, mthm),
        g_positive_definite: linalg::is_positive_definite(&linalg::symmetrize(g)),
        h_positive_definite: linalg::is_positive_definite(h),
    }
}
