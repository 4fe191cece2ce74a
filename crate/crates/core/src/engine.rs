//! The GS-ADMM iteration.
//!
//! One step from `wᵏ = (xᵏ, yᵏ, λᵏ)`:
//!
//! ```text
//! xᵢ^{k+1}   = argmin_{xᵢ ∈ 𝒳ᵢ} L_β(x₁ᵏ, …, xᵢ, …, x_pᵏ, yᵏ, λᵏ) + (σ1β/2)‖Aᵢ(xᵢ − xᵢᵏ)‖²
//! λ^{k+1/2} = λᵏ − τβ(𝒜x^{k+1} + ℬyᵏ − c)
//! yⱼ^{k+1}   = argmin_{yⱼ ∈ 𝒴ⱼ} L_β(x^{k+1}, y₁ᵏ, …, yⱼ, …, y_qᵏ, λ^{k+1/2}) + (σ2β/2)‖Bⱼ(yⱼ − yⱼᵏ)‖²
//! λ^{k+1}   = λ^{k+1/2} − sβ(𝒜x^{k+1} + ℬy^{k+1} − c)
//! ```
//!
//! Blocks inside a group are updated Jacobi-style from the same snapshot.
//! Every step also materializes the predicted point `w̃ᵏ` and checks the
//! correction identity `w^{k+1} = wᵏ − M(wᵏ − w̃ᵏ)` against the assembled `M`.

use crate::diagnostics;
use crate::error::{Error, Result};
use crate::linalg::{self, Vector};
use crate::model::{validate_config, validate_problem, BlockProblem, Iterate, SolverConfig};
use crate::oracles::{prox_solve, ProxQuery};
use crate::structure::StructuralMatrices;

/// The predicted point `w̃ᵏ = (x^{k+1}, y^{k+1}, λ̃ᵏ)` plus `λ^{k+1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub x_tilde: Vec<Vector>,
    pub y_tilde: Vec<Vector>,
    pub lambda_tilde: Vector,
    pub lambda_half: Vector,
}

impl Prediction {
    pub fn as_iterate(&self) -> Iterate {
        Iterate::new(self.x_tilde.clone(), self.y_tilde.clone(), self.lambda_tilde.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub w: Iterate,
    pub prediction: Prediction,
    /// `‖𝒜x̃ + ℬỹ − c‖`
    pub feasibility: f64,
    pub feasibility_inf: f64,
    /// `‖M(wᵏ − w̃ᵏ)‖²_H`
    pub correction_residual: f64,
    /// `‖wᵏ − w̃ᵏ‖²_G`
    pub g_gap: f64,
    pub d_norm_sq: f64,
    pub d_inf: f64,
    /// `‖wᵏ − w*‖²_H − ‖w^{k+1} − w*‖²_H − ‖wᵏ − w̃ᵏ‖²_G`, when a reference
    /// solution is known and `(τ, s) ∈ 𝒟`.
    pub contraction_slack: Option<f64>,
    /// `‖w^{k+1} − (wᵏ − M(wᵏ − w̃ᵏ))‖`
    pub identity_error: f64,
    /// `‖λ^{k+1/2} − (λᵏ − τ(λᵏ − λ̃ᵏ))‖`
    pub half_step_error: f64,
    /// `‖(𝒜x̃ + ℬỹ − c) − ((λᵏ − λ̃ᵏ)/β − ℬ(yᵏ − ỹᵏ))‖`
    pub feasibility_identity_error: f64,
    /// `‖wᵏ − w*‖_H` when a reference solution is known.
    pub dist_h: Option<f64>,
}

impl IterationRecord {
    /// `max(‖dᵏ‖∞, ‖𝒜x̃ + ℬỹ − c‖∞)`
    pub fn composite_residual(&self) -> f64 {
        self.d_inf.max(self.feasibility_inf)
    }

    /// Identity-error budget `1e-10 · (1 + ‖wᵏ‖)`.
    pub fn identity_ok(&self) -> bool {
        self.identity_error <= 1e-10 * (1.0 + self.w.norm())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    IterationCap,
}

#[derive(Debug, Clone)]
pub struct Trace {
    pub records: Vec<IterationRecord>,
    pub final_iterate: Iterate,
    pub termination: Termination,
    /// Whether `(τ, s) ∈ 𝒟`, i.e. whether the G/H-norm quantities carry
    /// their convergence guarantees.
    pub certified: bool,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `w^{k+1}`, for `k < len()`.
    pub fn next_iterate(&self, k: usize) -> &Iterate {
        self.records.get(k + 1).map(|r| &r.w).unwrap_or(&self.final_iterate)
    }

    pub fn initial_iterate(&self) -> &Iterate {
        self.records.first().map(|r| &r.w).unwrap_or(&self.final_iterate)
    }

    pub fn max_identity_error_ratio(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.identity_error / (1.0 + r.w.norm()))
            .fold(0.0, f64::max)
    }
}

fn coupling_sum(blocks: &[crate::model::Block], v: &[Vector], n: usize) -> Vector {
    let mut acc = Vector::zeros(n);
    for (b, vi) in blocks.iter().zip(v) {
        acc += &b.matrix * vi;
    }
    acc
}

/// Jacobi sweep over the x group; every block reads the same `state`.
pub fn x_group_update(problem: &BlockProblem, config: &SolverConfig, state: &Iterate) -> Result<Vec<Vector>> {
    let n = problem.n();
    let ax = coupling_sum(&problem.x_blocks, &state.x, n);
    let by = coupling_sum(&problem.y_blocks, &state.y, n);
    let base = &problem.c - &by + &state.lambda / config.beta;
    let rho = (1.0 + config.sigma1) * config.beta;
    problem
        .x_blocks
        .iter()
        .zip(&state.x)
        .map(|(block, xi)| {
            let own = &block.matrix * xi;
            let v = &base - (&ax - &own);
            let u = (v + &own * config.sigma1) / (1.0 + config.sigma1);
            let q = ProxQuery::new(&block.objective, &block.set, &block.matrix, rho, &u);
            prox_solve(&q).map(|sol| sol.z)
        })
        .collect()
}

/// `λ^{k+1/2} = λᵏ − τβ(𝒜x^{k+1} + ℬyᵏ − c)`
pub fn half_dual_update(problem: &BlockProblem, config: &SolverConfig, state: &Iterate, x_new: &[Vector]) -> Vector {
    let r = problem.constraint_residual(x_new, &state.y);
    &state.lambda - r * (config.tau * config.beta)
}

/// Jacobi sweep over the y group with `x^{k+1}` and `λ^{k+1/2}`.
pub fn y_group_update(
    problem: &BlockProblem,
    config: &SolverConfig,
    state: &Iterate,
    x_new: &[Vector],
    lambda_half: &Vector,
) -> Result<Vec<Vector>> {
    let n = problem.n();
    let ax = coupling_sum(&problem.x_blocks, x_new, n);
    let by = coupling_sum(&problem.y_blocks, &state.y, n);
    let base = &problem.c - &ax + lambda_half / config.beta;
    let rho = (1.0 + config.sigma2) * config.beta;
    problem
        .y_blocks
        .iter()
        .zip(&state.y)
        .map(|(block, yj)| {
            let own = &block.matrix * yj;
            let v = &base - (&by - &own);
            let u = (v + &own * config.sigma2) / (1.0 + config.sigma2);
            let q = ProxQuery::new(&block.objective, &block.set, &block.matrix, rho, &u);
            prox_solve(&q).map(|sol| sol.z)
        })
        .collect()
}

/// `λ^{k+1} = λ^{k+1/2} − sβ(𝒜x^{k+1} + ℬy^{k+1} − c)`
pub fn full_dual_update(
    problem: &BlockProblem,
    config: &SolverConfig,
    lambda_half: &Vector,
    x_new: &[Vector],
    y_new: &[Vector],
) -> Vector {
    let r = problem.constraint_residual(x_new, y_new);
    lambda_half - r * (config.s * config.beta)
}

/// `λ̃ᵏ = λᵏ − β(𝒜x^{k+1} + ℬyᵏ − c)` with `x̃ = x^{k+1}`, `ỹ = y^{k+1}`.
pub fn predict(
    problem: &BlockProblem,
    state: &Iterate,
    x_new: &[Vector],
    y_new: &[Vector],
    lambda_half: &Vector,
    beta: f64,
) -> Prediction {
    let r = problem.constraint_residual(x_new, &state.y);
    Prediction {
        x_tilde: x_new.to_vec(),
        y_tilde: y_new.to_vec(),
        lambda_tilde: &state.lambda - r * beta,
        lambda_half: lambda_half.clone(),
    }
}

/// A validated problem/config pair with its structural matrices.
#[derive(Debug, Clone)]
pub struct Solver<'a> {
    problem: &'a BlockProblem,
    config: SolverConfig,
    mats: StructuralMatrices,
    reference: Option<Iterate>,
}

impl<'a> Solver<'a> {
    pub fn new(problem: &'a BlockProblem, config: SolverConfig) -> Result<Self> {
        validate_problem(problem).into_result()?;
        validate_config(&config, problem).into_result()?;
        let mats = StructuralMatrices::assemble(problem, &config)?;
        Ok(Self { problem, config, mats, reference: None })
    }

    /// Attach a known saddle point so records carry `dist_H` and the
    /// contraction slack.
    pub fn with_reference(mut self, w_star: Iterate) -> Result<Self> {
        self.problem.check_iterate(&w_star)?;
        self.reference = Some(w_star);
        Ok(self)
    }

    pub fn problem(&self) -> &BlockProblem {
        self.problem
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn matrices(&self) -> &StructuralMatrices {
        &self.mats
    }

    pub fn reference(&self) -> Option<&Iterate> {
        self.reference.as_ref()
    }

    pub fn certified(&self) -> bool {
        self.config.in_region_d()
    }

    pub fn step(&self, k: usize, state: &Iterate) -> Result<(Iterate, IterationRecord)> {
        let problem = self.problem;
        let cfg = &self.config;
        let x_new = x_group_update(problem, cfg, state)?;
        let lambda_half = half_dual_update(problem, cfg, state, &x_new);
        let y_new = y_group_update(problem, cfg, state, &x_new, &lambda_half)?;
        let lambda_new = full_dual_update(problem, cfg, &lambda_half, &x_new, &y_new);
        let prediction = predict(problem, state, &x_new, &y_new, &lambda_half, cfg.beta);
        let next = Iterate::new(x_new, y_new, lambda_new);
        if !next.is_finite() {
            return Err(Error::NonFiniteIterate(k));
        }

        let w_vec = state.stacked();
        let w_tilde = prediction.as_iterate();
        let gap = &w_vec - w_tilde.stacked();
        let corrected = &w_vec - &self.mats.m * &gap;
        let identity_error = (next.stacked() - corrected).norm();
        let m_gap = &self.mats.m * &gap;
        let correction_residual = linalg::quad_form(&self.mats.h, &m_gap);
        let g_gap = linalg::quad_form(&self.mats.g, &gap);

        let lambda_diff = &state.lambda - &prediction.lambda_tilde;
        let half_step_error = (&prediction.lambda_half - (&state.lambda - &lambda_diff * cfg.tau)).norm();
        let feas_vec = problem.constraint_residual(&prediction.x_tilde, &prediction.y_tilde);
        let y_gap: Vec<Vector> = state.y.iter().zip(&prediction.y_tilde).map(|(a, b)| a - b).collect();
        let decomposition = &lambda_diff / cfg.beta - problem.apply_b(&y_gap);
        let feasibility_identity_error = (&feas_vec - decomposition).norm();

        let d = diagnostics::d_vector(problem, cfg, state, &prediction);
        let d_stacked = diagnostics::stack(&d);

        let (dist_h, contraction_slack) = match &self.reference {
            Some(w_star) => {
                let dist = diagnostics::h_distance(&self.mats, state, w_star);
                let slack = if self.certified() {
                    Some(diagnostics::contraction_slack(&self.mats, state, &next, &w_tilde, w_star))
                } else {
                    None
                };
                (Some(dist), slack)
            }
            None => (None, None),
        };

        let record = IterationRecord {
            k,
            w: state.clone(),
            prediction,
            feasibility: feas_vec.norm(),
            feasibility_inf: linalg::inf_norm(&feas_vec),
            correction_residual,
            g_gap,
            d_norm_sq: d_stacked.norm_squared(),
            d_inf: linalg::inf_norm(&d_stacked),
            contraction_slack,
            identity_error,
            half_step_error,
            feasibility_identity_error,
            dist_h,
        };
        Ok((next, record))
    }

    /// Iterates from `w0` (zeros when `None`, projected onto the sets) until
    /// the composite residual drops to `tol` or `max_iters` is reached.
    pub fn solve(&self, w0: Option<&Iterate>) -> Result<Trace> {
        let mut state = match w0 {
            Some(w) => {
                self.problem.check_iterate(w)?;
                w.projected(self.problem)
            }
            None => Iterate::zeros(self.problem).projected(self.problem),
        };
        let mut records = Vec::with_capacity(self.config.max_iters.min(1 << 16));
        let mut termination = Termination::IterationCap;
        for k in 0..self.config.max_iters {
            let (next, record) = self.step(k, &state)?;
            let converged = self.config.tol > 0.0 && record.composite_residual() <= self.config.tol;
            records.push(record);
            state = next;
            if converged {
                termination = Termination::Converged;
                break;
            }
        }
        Ok(Trace { records, final_iterate: state, termination, certified: self.certified() })
    }
}

/// One GS-ADMM step; assembles the structural matrices on every call.
pub fn step(problem: &BlockProblem, config: &SolverConfig, state: &Iterate) -> Result<(Iterate, IterationRecord)> {
    Solver::new(problem, config.clone())?.step(0, state)
}

pub fn solve(problem: &BlockProblem, config: &SolverConfig, w0: Option<&Iterate>) -> Result<Trace> {
    Solver::new(problem, config.clone())?.solve(w0)
}
