//! Convergence quantities computed from iterates and traces.
//!
//! Each check evaluates both sides of an inequality from independent data:
//! the iterates on one side and the structural matrices or rate constants on
//! the other. Tolerances are fixed constants in this module.

use crate::engine::{Prediction, Trace};
use crate::error::{Error, Result};
use crate::linalg::{self, Vector};
use crate::model::{BlockProblem, Iterate, SolverConfig, Subgradients};
use crate::oracles::project;
use crate::structure::StructuralMatrices;

/// Relative slack allowed in the contraction inequality.
pub const CONTRACTION_RTOL: f64 = 1e-8;
/// Relative per-step tolerance for the monotone decrease of `‖M(w − w̃)‖²_H`.
pub const MONOTONE_RTOL: f64 = 1e-12;
/// Relative tolerance on the `ξ`-scaled sublinear bound.
pub const XI_BOUND_RTOL: f64 = 1e-8;
/// Relative tolerance on the feasibility decomposition identity.
pub const FEASIBILITY_IDENTITY_RTOL: f64 = 1e-10;
/// Relative slack on the error-map bound and the `θ̂` bound.
pub const BOUND_RTOL: f64 = 1e-9;
/// Absolute floor, scaled by `1 + ‖w‖²`, below which squared residuals are
/// indistinguishable from roundoff.
pub const ROUNDOFF_FLOOR: f64 = 1e-24;
/// Minimum number of points in the linear-rate fit window.
pub const MIN_FIT_POINTS: usize = 20;

pub fn stack(blocks: &[Vector]) -> Vector {
    let len = blocks.iter().map(|b| b.len()).sum();
    let mut out = Vector::zeros(len);
    let mut off = 0;
    for b in blocks {
        out.rows_mut(off, b.len()).copy_from(b);
        off += b.len();
    }
    out
}

/// Block components `(d₁₁, …, d₁p, d₂₁, …, d₂q)` of the optimality offset:
///
/// ```text
/// d₁ᵢ = σ1β AᵢᵀAᵢ(x̃ᵢ − xᵢ) − β Aᵢᵀ Σ_{l≠i} A_l(x̃_l − x_l)
/// d₂ⱼ = (σ2+1)β BⱼᵀBⱼ(ỹⱼ − yⱼ) − τ Bⱼᵀ(λ̃ − λ)
/// ```
///
/// so that `Aᵢᵀλ̃ − d₁ᵢ ∈ ∂fᵢ(x̃ᵢ) + N_𝒳ᵢ(x̃ᵢ)` and likewise for the y blocks.
pub fn d_vector(problem: &BlockProblem, config: &SolverConfig, w: &Iterate, pred: &Prediction) -> Vec<Vector> {
    let beta = config.beta;
    let dx: Vec<Vector> = pred.x_tilde.iter().zip(&w.x).map(|(t, x)| t - x).collect();
    let adx: Vec<Vector> = problem.x_blocks.iter().zip(&dx).map(|(b, d)| &b.matrix * d).collect();
    let total: Vector = adx.iter().fold(Vector::zeros(problem.n()), |acc, v| acc + v);
    let dlambda = &pred.lambda_tilde - &w.lambda;
    let mut out = Vec::with_capacity(problem.p() + problem.q());
    for (i, block) in problem.x_blocks.iter().enumerate() {
        let others = &total - &adx[i];
        let inner = &adx[i] * (config.sigma1 * beta) - others * beta;
        out.push(block.matrix.transpose() * inner);
    }
    for (j, block) in problem.y_blocks.iter().enumerate() {
        let dy = &pred.y_tilde[j] - &w.y[j];
        let bt = block.matrix.transpose();
        out.push(&bt * (&block.matrix * dy) * ((config.sigma2 + 1.0) * beta) - &bt * &dlambda * config.tau);
    }
    out
}

/// `‖w − w*‖_H`, clamped at zero when `H` is indefinite.
pub fn h_distance(mats: &StructuralMatrices, w: &Iterate, w_star: &Iterate) -> f64 {
    let diff = w.stacked() - w_star.stacked();
    linalg::quad_form(&mats.h, &diff).max(0.0).sqrt()
}

/// `‖wᵏ − w*‖²_H − ‖w^{k+1} − w*‖²_H − ‖wᵏ − w̃ᵏ‖²_G`
pub fn contraction_slack(
    mats: &StructuralMatrices,
    w: &Iterate,
    w_next: &Iterate,
    w_tilde: &Iterate,
    w_star: &Iterate,
) -> f64 {
    let star = w_star.stacked();
    let before = w.stacked() - &star;
    let after = w_next.stacked() - &star;
    let gap = w.stacked() - w_tilde.stacked();
    linalg::quad_form(&mats.h, &before) - linalg::quad_form(&mats.h, &after) - linalg::quad_form(&mats.g, &gap)
}

fn require_region(mats: &StructuralMatrices) -> Result<()> {
    if mats.in_region_d() {
        Ok(())
    } else {
        Err(Error::RegionNotCertified { tau: mats.tau, s: mats.s })
    }
}

/// Contraction slack at iteration `k` of `trace`.
pub fn contraction_check(mats: &StructuralMatrices, trace: &Trace, k: usize, w_star: &Iterate) -> Result<f64> {
    require_region(mats)?;
    let rec = trace
        .records
        .get(k)
        .ok_or_else(|| Error::DimensionMismatch(format!("trace has no iteration {k}")))?;
    Ok(contraction_slack(mats, &rec.w, trace.next_iterate(k), &rec.prediction.as_iterate(), w_star))
}

/// Whether a contraction slack is within the numerical budget.
pub fn contraction_ok(mats: &StructuralMatrices, w: &Iterate, w_star: &Iterate, slack: f64) -> bool {
    let d = w.stacked() - w_star.stacked();
    slack >= -CONTRACTION_RTOL * (1.0 + linalg::quad_form(&mats.h, &d))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionReport {
    pub min_slack: f64,
    pub all_ok: bool,
}

pub fn contraction_report(mats: &StructuralMatrices, trace: &Trace, w_star: &Iterate) -> Result<ContractionReport> {
    require_region(mats)?;
    let mut min_slack = f64::INFINITY;
    let mut all_ok = true;
    for k in 0..trace.len() {
        let slack = contraction_check(mats, trace, k, w_star)?;
        min_slack = min_slack.min(slack);
        all_ok &= contraction_ok(mats, &trace.records[k].w, w_star, slack);
    }
    Ok(ContractionReport { min_slack, all_ok })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonergodicReport {
    pub monotone_ok: bool,
    pub xi_bound_ok: bool,
    /// `max_t (t+1)·‖M(wᵗ − w̃ᵗ)‖²_H`
    pub sublinear_envelope: f64,
    /// `max_t (t+1)·ξ·‖M(wᵗ − w̃ᵗ)‖²_H / ‖w⁰ − w*‖²_H`
    pub worst_xi_ratio: f64,
    pub xi: f64,
}

/// Monotone decrease of `‖M(wᵏ − w̃ᵏ)‖²_H` and the bound
/// `(t+1)·ξ·‖M(wᵗ − w̃ᵗ)‖²_H ≤ ‖w⁰ − w*‖²_H`.
///
/// The monotonicity tolerance is relative to the previous value, floored at
/// `MONOTONE_RTOL` times the first value so that roundoff after convergence
/// is not flagged.
pub fn nonergodic_check(mats: &StructuralMatrices, trace: &Trace, w_star: &Iterate) -> Result<NonergodicReport> {
    require_region(mats)?;
    let xi = mats.spectral.xi.ok_or(Error::RegionNotCertified { tau: mats.tau, s: mats.s })?;
    let values: Vec<f64> = trace.records.iter().map(|r| r.correction_residual).collect();
    let first = values.first().copied().unwrap_or(0.0);
    let mut monotone_ok = true;
    for pair in values.windows(2) {
        let scale = pair[0].max(MONOTONE_RTOL * first);
        if pair[1] - pair[0] > MONOTONE_RTOL * scale {
            monotone_ok = false;
        }
    }
    let d0 = trace.initial_iterate().stacked() - w_star.stacked();
    let initial = linalg::quad_form(&mats.h, &d0);
    let mut envelope = 0.0_f64;
    let mut xi_bound_ok = true;
    let mut worst = 0.0_f64;
    for (t, v) in values.iter().enumerate() {
        let scaled = (t as f64 + 1.0) * v;
        envelope = envelope.max(scaled);
        let lhs = xi * scaled;
        if lhs > initial * (1.0 + XI_BOUND_RTOL) + ROUNDOFF_FLOOR {
            xi_bound_ok = false;
        }
        if initial > 0.0 {
            worst = worst.max(lhs / initial);
        }
    }
    Ok(NonergodicReport { monotone_ok, xi_bound_ok, sublinear_envelope: envelope, worst_xi_ratio: worst, xi })
}

/// Norm-bound coefficient `θ̂` with `‖dᵏ‖² ≤ θ̂·‖wᵏ − w̃ᵏ‖²`: the sum over
/// the components of `d` of the squared spectral norms of their coefficient
/// blocks (Cauchy–Schwarz per component).
pub fn theta_hat(problem: &BlockProblem, config: &SolverConfig) -> f64 {
    let beta = config.beta;
    let mut theta = 0.0;
    for (i, bi) in problem.x_blocks.iter().enumerate() {
        for (l, bl) in problem.x_blocks.iter().enumerate() {
            let coef = if i == l { config.sigma1 * beta } else { -beta };
            theta += (linalg::spectral_norm(&(bi.matrix.transpose() * &bl.matrix)) * coef).powi(2);
        }
    }
    for bj in &problem.y_blocks {
        let bt = bj.matrix.transpose();
        theta += ((config.sigma2 + 1.0) * beta * linalg::spectral_norm(&(&bt * &bj.matrix))).powi(2);
        theta += (config.tau * linalg::spectral_norm(&bt)).powi(2);
    }
    theta
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointwiseReport {
    /// `max_t (t+1)·‖dᵗ‖²`
    pub sup_d: f64,
    /// `max_t (t+1)·‖𝒜x̃ᵗ + ℬỹᵗ − c‖²`
    pub sup_feasibility: f64,
    pub theta_hat: f64,
    pub theta_hat_ok: bool,
    /// `max_t ‖dᵗ‖² / ‖wᵗ − w̃ᵗ‖²`
    pub worst_theta_ratio: f64,
    pub feasibility_identity_ok: bool,
    pub max_feasibility_identity_error: f64,
}

pub fn pointwise_residual_check(problem: &BlockProblem, config: &SolverConfig, trace: &Trace) -> PointwiseReport {
    let theta = theta_hat(problem, config);
    let mut report = PointwiseReport {
        sup_d: 0.0,
        sup_feasibility: 0.0,
        theta_hat: theta,
        theta_hat_ok: true,
        worst_theta_ratio: 0.0,
        feasibility_identity_ok: true,
        max_feasibility_identity_error: 0.0,
    };
    for (t, rec) in trace.records.iter().enumerate() {
        let scale = t as f64 + 1.0;
        report.sup_d = report.sup_d.max(scale * rec.d_norm_sq);
        report.sup_feasibility = report.sup_feasibility.max(scale * rec.feasibility.powi(2));
        let gap = (rec.w.stacked() - rec.prediction.as_iterate().stacked()).norm_squared();
        let w_norm_sq = rec.w.stacked().norm_squared();
        if rec.d_norm_sq > theta * gap * (1.0 + BOUND_RTOL) + ROUNDOFF_FLOOR * (1.0 + w_norm_sq) {
            report.theta_hat_ok = false;
        }
        if gap > 0.0 {
            report.worst_theta_ratio = report.worst_theta_ratio.max(rec.d_norm_sq / gap);
        }
        let rel = rec.feasibility_identity_error / (1.0 + w_norm_sq.sqrt());
        report.max_feasibility_identity_error = report.max_feasibility_identity_error.max(rel);
        if rel > FEASIBILITY_IDENTITY_RTOL {
            report.feasibility_identity_ok = false;
        }
    }
    report
}

/// `e_ℳ(w, 1)` split into its block components.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorMap {
    pub x: Vec<Vector>,
    pub y: Vec<Vector>,
    pub lambda: Vector,
}

impl ErrorMap {
    pub fn stacked(&self) -> Vector {
        Iterate::new(self.x.clone(), self.y.clone(), self.lambda.clone()).stacked()
    }

    pub fn norm_squared(&self) -> f64 {
        self.x.iter().chain(self.y.iter()).map(|v| v.norm_squared()).sum::<f64>() + self.lambda.norm_squared()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }
}

/// `e_ℳ(w, 1)` with explicitly chosen subgradients.
pub fn error_map_residual_with(problem: &BlockProblem, w: &Iterate, sub: &Subgradients) -> ErrorMap {
    let comp = |blocks: &[crate::model::Block], v: &[Vector], g: &[Vector]| -> Vec<Vector> {
        blocks
            .iter()
            .zip(v.iter().zip(g))
            .map(|(b, (vi, gi))| {
                let step = gi - b.matrix.transpose() * &w.lambda;
                vi - project(&b.set, &(vi - step))
            })
            .collect()
    };
    ErrorMap {
        x: comp(&problem.x_blocks, &w.x, &sub.x),
        y: comp(&problem.y_blocks, &w.y, &sub.y),
        lambda: problem.constraint_residual(&w.x, &w.y),
    }
}

/// `e_ℳ(w, 1)` with the subgradient chosen per component to minimize the
/// residual, which realizes `dist(0, e_ℳ(w, 1))` for separable sets and
/// objectives. The component residual `zᵢ − clamp(zᵢ − (gᵢ − aᵢ))` is
/// nondecreasing in `gᵢ`, so the minimizer over `[gᵢ⁻, gᵢ⁺]` is an endpoint
/// unless the interval straddles a zero.
pub fn error_map_residual(problem: &BlockProblem, w: &Iterate) -> ErrorMap {
    let comp = |blocks: &[crate::model::Block], v: &[Vector]| -> Vec<Vector> {
        blocks
            .iter()
            .zip(v)
            .map(|(b, vi)| {
                let a = b.matrix.transpose() * &w.lambda;
                let (glo, ghi) = b.objective.subdifferential_bounds(vi);
                let (lo, hi) = b.set.bounds(vi.len());
                Vector::from_fn(vi.len(), |i, _| {
                    let e = |g: f64| vi[i] - (vi[i] - (g - a[i])).clamp(lo[i], hi[i]);
                    let e_lo = e(glo[i]);
                    if e_lo >= 0.0 {
                        return e_lo;
                    }
                    let e_hi = e(ghi[i]);
                    if e_hi <= 0.0 {
                        e_hi
                    } else {
                        0.0
                    }
                })
            })
            .collect()
    };
    ErrorMap {
        x: comp(&problem.x_blocks, &w.x),
        y: comp(&problem.y_blocks, &w.y),
        lambda: problem.constraint_residual(&w.x, &w.y),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateConstants {
    /// `λ_max(AᵢᵀAᵢ)`
    pub mu_tilde: Vec<f64>,
    /// `λ_max(BⱼᵀBⱼ)`
    pub nu_tilde: Vec<f64>,
    pub theta_bar: Vec<f64>,
    pub vartheta_bar: Vec<f64>,
    pub eta_bar: f64,
    pub delta: f64,
}

impl RateConstants {
    /// `max{δμ̃ᵢ, δν̃ⱼ, δ}`
    pub fn bound_numerator(&self) -> f64 {
        self.mu_tilde
            .iter()
            .chain(self.nu_tilde.iter())
            .fold(1.0_f64, |m, v| m.max(*v))
            * self.delta
    }
}

pub fn rate_constants(problem: &BlockProblem, config: &SolverConfig) -> RateConstants {
    let SolverConfig { beta, tau, s, sigma1, sigma2, .. } = *config;
    let p = problem.p() as f64;
    let q = problem.q() as f64;
    let lmax = |m: &crate::linalg::Matrix| linalg::max_eigenvalue(&(m.transpose() * m));
    let mu: Vec<f64> = problem.x_blocks.iter().map(|b| lmax(&b.matrix)).collect();
    let nu: Vec<f64> = problem.y_blocks.iter().map(|b| lmax(&b.matrix)).collect();
    let sum_mu: f64 = mu.iter().sum();
    let sum_nu: f64 = nu.iter().sum();
    let b2 = beta * beta;
    let sb2 = (s * beta).powi(2);
    let theta_bar: Vec<f64> = mu
        .iter()
        .map(|&m| 4.0 * p * (1.0 - sigma1).powi(2) * b2 * sum_mu + 4.0 * b2 * m)
        .collect();
    let vartheta_bar: Vec<f64> = nu
        .iter()
        .map(|&v| 4.0 * q * sb2 * sum_mu + 3.0 * q * sb2 * sum_nu + 3.0 * (sigma2 + 1.0).powi(2) * b2 * v + 2.0 * q)
        .collect();
    let eta_bar = 4.0 * (tau + s - 1.0).powi(2) * sum_mu + 3.0 * (s - 1.0).powi(2) * sum_nu + 2.0 / b2;
    let delta = theta_bar.iter().chain(vartheta_bar.iter()).fold(eta_bar, |m, v| m.max(*v));
    RateConstants { mu_tilde: mu, nu_tilde: nu, theta_bar, vartheta_bar, eta_bar, delta }
}

/// Per-iteration sides of the error-map bound
/// `‖e_ℳ(w^{k+1}, 1)‖² ≤ (max{δμ̃ᵢ, δν̃ⱼ, δ}/λ_min(G))·‖wᵏ − w̃ᵏ‖²_G`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBoundSample {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

pub fn error_bound_samples(
    problem: &BlockProblem,
    mats: &StructuralMatrices,
    trace: &Trace,
    constants: &RateConstants,
) -> Vec<ErrorBoundSample> {
    let factor = constants.bound_numerator() / mats.spectral.lambda_min_g;
    (0..trace.len())
        .map(|k| {
            let next = trace.next_iterate(k);
            let lhs = error_map_residual(problem, next).norm_squared();
            let rec = &trace.records[k];
            let gap = rec.w.stacked() - rec.prediction.as_iterate().stacked();
            let rhs = factor * linalg::quad_form(&mats.g, &gap);
            let floor = ROUNDOFF_FLOOR * (1.0 + next.stacked().norm_squared());
            ErrorBoundSample { lhs, rhs, ok: lhs <= rhs * (1.0 + BOUND_RTOL) + floor }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub sublinear_envelope: f64,
    pub xi: f64,
    pub xi_bound_ok: bool,
    pub monotone_ok: bool,
    pub error_bound_ok: bool,
    /// Largest observed `lhs / rhs` of the error-map bound.
    pub error_bound_worst_ratio: f64,
    /// Least-squares slope of `log ‖wᵏ − w*‖_H` over the fit window.
    pub linear_ratio_fit: f64,
    /// `exp(linear_ratio_fit)`
    pub r_hat: f64,
    pub envelope_constant: f64,
    pub envelope_ok: bool,
    pub fit_start: usize,
    pub fit_end: usize,
    pub initial_dist_h: f64,
    pub final_dist_h: f64,
}

/// Fits `r̂` from the tail `[t_conv/2, t_conv]` of the trace, where `t_conv`
/// is the first iteration whose composite residual is at most `10·tol`
/// (the last iteration if none is), and checks the envelope
/// `‖wᵏ − w*‖_H ≤ C·r̂ᵏ` with `C = 2‖w⁰ − w*‖_H / (1 − r̂)` over the window.
pub fn linear_rate_check(
    problem: &BlockProblem,
    config: &SolverConfig,
    mats: &StructuralMatrices,
    trace: &Trace,
    w_star: &Iterate,
    constants: &RateConstants,
) -> Result<RateReport> {
    require_region(mats)?;
    let nonergodic = nonergodic_check(mats, trace, w_star)?;
    let samples = error_bound_samples(problem, mats, trace, constants);
    let error_bound_ok = samples.iter().all(|s| s.ok);
    let error_bound_worst_ratio = samples
        .iter()
        .filter(|s| s.rhs > 0.0)
        .map(|s| s.lhs / s.rhs)
        .fold(0.0, f64::max);

    let dists: Vec<f64> = trace.records.iter().map(|r| h_distance(mats, &r.w, w_star)).collect();
    let final_dist_h = h_distance(mats, &trace.final_iterate, w_star);
    let (start, end) = fit_window(trace, config.tol)?;
    let slope = fit_log_slope(&dists, start, end)?;
    let r_hat = slope.exp();
    let initial = dists[0];
    let (envelope_constant, envelope_ok) = if r_hat < 1.0 {
        let c = 2.0 * initial / (1.0 - r_hat);
        let ok = (start..=end).all(|k| dists[k] <= c * r_hat.powi(k as i32) * (1.0 + 1e-12));
        (c, ok)
    } else {
        (f64::INFINITY, false)
    };
    Ok(RateReport {
        sublinear_envelope: nonergodic.sublinear_envelope,
        xi: nonergodic.xi,
        xi_bound_ok: nonergodic.xi_bound_ok,
        monotone_ok: nonergodic.monotone_ok,
        error_bound_ok,
        error_bound_worst_ratio,
        linear_ratio_fit: slope,
        r_hat,
        envelope_constant,
        envelope_ok,
        fit_start: start,
        fit_end: end,
        initial_dist_h: initial,
        final_dist_h,
    })
}

/// `[t_conv/2, t_conv]`, where `t_conv` is the first iteration whose
/// composite residual is at most `10·tol`, or the last one.
pub fn fit_window(trace: &Trace, tol: f64) -> Result<(usize, usize)> {
    if trace.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientTrace(trace.len()));
    }
    let t_conv = trace
        .records
        .iter()
        .position(|r| tol > 0.0 && r.composite_residual() <= 10.0 * tol)
        .unwrap_or(trace.len() - 1);
    Ok((t_conv / 2, t_conv))
}

/// Least-squares slope of `log dists[k]` over `k ∈ [start, end]`, skipping
/// zero entries.
pub fn fit_log_slope(dists: &[f64], start: usize, end: usize) -> Result<f64> {
    let points: Vec<(f64, f64)> = (start..=end.min(dists.len().saturating_sub(1)))
        .filter(|&k| dists[k] > 0.0 && dists[k].is_finite())
        .map(|k| (k as f64, dists[k].ln()))
        .collect();
    if points.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientTrace(points.len()));
    }
    Ok(least_squares_slope(&points))
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Solver;
    use crate::generators;

    fn v(x: f64) -> Vector {
        Vector::from_element(1, x)
    }

    #[test]
    fn d_vector_first_step() {
        let b = generators::qp1();
        let cfg = generators::golden_config(&b.problem);
        let solver = Solver::new(&b.problem, cfg.clone()).unwrap();
        let (_, rec) = solver.step(0, &Iterate::zeros(&b.problem)).unwrap();
        let d = d_vector(&b.problem, &cfg, &rec.w, &rec.prediction);
        assert!((d[0][0] - 1.0 / 7.0).abs() < 1e-15);
        assert!((d[1][0] - 9.0 / 49.0).abs() < 1e-15);
        assert!((rec.d_norm_sq - (1.0 / 49.0 + 81.0 / 2401.0)).abs() < 1e-15);
    }

    #[test]
    fn d_vector_vanishes_without_movement() {
        let b = generators::qp1();
        let cfg = generators::golden_config(&b.problem);
        let w = Iterate::new(vec![v(0.2)], vec![v(0.4)], v(0.6));
        let pred = Prediction {
            x_tilde: w.x.clone(),
            y_tilde: w.y.clone(),
            lambda_tilde: w.lambda.clone(),
            lambda_half: w.lambda.clone(),
        };
        assert!(d_vector(&b.problem, &cfg, &w, &pred).iter().all(|d| d.amax() == 0.0));
    }

    #[test]
    fn error_map_examples() {
        let b = generators::qp1();
        assert!(error_map_residual(&b.problem, &b.w_star).norm() < 1e-12);
        let perturbed = Iterate::new(vec![v(0.5)], vec![v(0.5)], v(1.1));
        let e = error_map_residual(&b.problem, &perturbed);
        assert!((e.x[0][0] + 0.1).abs() < 1e-15);
        let infeasible = Iterate::new(vec![v(0.8)], vec![v(0.5)], v(1.0));
        let e = error_map_residual(&b.problem, &infeasible);
        assert!((e.lambda[0] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn error_map_selection_for_l1_reaches_zero() {
        let b = generators::l1_scalar();
        let e = error_map_residual(&b.problem, &b.w_star);
        assert!(e.norm() < 1e-15);
        // The zero subgradient is suboptimal for an l1 block at zero when λ ≠ 0.
        let w = Iterate::new(vec![v(0.0)], vec![v(1.0)], v(0.5));
        let e = error_map_residual(&b.problem, &w);
        assert_eq!(e.x[0][0], 0.0);
        let sub = Subgradients { x: vec![v(0.0)], y: vec![v(0.0)] };
        let e_fixed = error_map_residual_with(&b.problem, &w, &sub);
        assert!(e_fixed.x[0][0].abs() > 0.4);
    }

    #[test]
    fn golden_rate_constants() {
        let b = generators::qp1();
        let cfg = generators::golden_config(&b.problem);
        let rc = rate_constants(&b.problem, &cfg);
        assert!((rc.theta_bar[0] - 5.0).abs() < 1e-12);
        assert!((rc.vartheta_bar[0] - 9.87).abs() < 1e-12);
        assert!((rc.eta_bar - 3.44).abs() < 1e-12);
        assert!((rc.delta - 9.87).abs() < 1e-12);
        let mut small = cfg.clone();
        small.beta = 1e-3;
        assert!(rate_constants(&b.problem, &small).eta_bar > 1e6);
    }

    #[test]
    fn contraction_gate_and_fixed_point() {
        let b = generators::qp1();
        let cfg = generators::golden_config(&b.problem);
        let solver = Solver::new(&b.problem, cfg.clone()).unwrap();
        let mut t_cfg = cfg.clone();
        t_cfg.max_iters = 3;
        let trace = Solver::new(&b.problem, t_cfg.clone()).unwrap().solve(Some(&b.w_star)).unwrap();
        for k in 0..trace.len() {
            let slack = contraction_check(solver.matrices(), &trace, k, &b.w_star).unwrap();
            assert!(slack.abs() < 1e-15);
        }
        let outside = StructuralMatrices::assemble(&b.problem, &cfg.with_steps(1.5, 0.3)).unwrap();
        assert!(matches!(
            contraction_check(&outside, &trace, 0, &b.w_star),
            Err(Error::RegionNotCertified { .. })
        ));
    }

    #[test]
    fn nonergodic_on_short_and_fixed_traces() {
        let b = generators::qp1();
        let mut cfg = generators::golden_config(&b.problem);
        cfg.max_iters = 1;
        cfg.tol = 0.0;
        let solver = Solver::new(&b.problem, cfg.clone()).unwrap();
        let trace = solver.solve(None).unwrap();
        let rep = nonergodic_check(solver.matrices(), &trace, &b.w_star).unwrap();
        assert!(rep.monotone_ok && rep.xi_bound_ok);

        cfg.max_iters = 10;
        let solver = Solver::new(&b.problem, cfg).unwrap();
        let trace = solver.solve(Some(&b.w_star)).unwrap();
        let rep = nonergodic_check(solver.matrices(), &trace, &b.w_star).unwrap();
        assert!(rep.sublinear_envelope < 1e-28);
    }

    #[test]
    fn pointwise_constant_trace() {
        let b = generators::qp1();
        let mut cfg = generators::golden_config(&b.problem);
        cfg.max_iters = 0;
        let trace = Solver::new(&b.problem, cfg.clone()).unwrap().solve(None).unwrap();
        let rep = pointwise_residual_check(&b.problem, &cfg, &trace);
        assert_eq!(rep.sup_d, 0.0);
        assert_eq!(rep.sup_feasibility, 0.0);
    }

    #[test]
    fn slope_of_exact_geometric_sequence() {
        let d: Vec<f64> = (0..40).map(|k| 3.0 * 0.8f64.powi(k)).collect();
        assert!((fit_log_slope(&d, 0, 39).unwrap().exp() - 0.8).abs() < 1e-12);
        assert!(matches!(fit_log_slope(&d, 0, 10), Err(Error::InsufficientTrace(11))));
    }

    #[test]
    fn insufficient_trace_at_fixed_point() {
        let b = generators::qp1();
        let mut cfg = generators::golden_config(&b.problem);
        cfg.max_iters = 50;
        cfg.tol = 0.0;
        let solver = Solver::new(&b.problem, cfg.clone()).unwrap();
        let trace = solver.solve(Some(&b.w_star)).unwrap();
        let rc = rate_constants(&b.problem, &cfg);
        let res = linear_rate_check(&b.problem, &cfg, solver.matrices(), &trace, &b.w_star, &rc);
        assert!(matches!(res, Err(Error::InsufficientTrace(_))));
    }
}
