//! Single runs with the full diagnostic report.

use std::fs;
use std::path::Path;

use super::output::{self, Report, TraceRow};
use super::{resolve_reference, Instance, ReferenceSource};
use crate::diagnostics::{self, ErrorBoundSample};
use crate::engine::{Solver, Termination, Trace};
use crate::error::Result;
use crate::model::{Iterate, RegionPolicy, SolverConfig};
use crate::structure::StructuralMatrices;

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub trace: Trace,
    pub matrices: StructuralMatrices,
    pub reference: Option<Iterate>,
    pub reference_source: ReferenceSource,
    pub rows: Vec<TraceRow>,
    pub report: Report,
}

impl RunOutcome {
    /// Whether every convergence check that applied to this run held.
    pub fn checks_passed(&self) -> bool {
        self.report
            .0
            .iter()
            .filter(|(k, _)| k.ends_with("_ok"))
            .all(|(_, v)| v.as_bool() != Some(false))
    }
}

pub fn run_instance(instance: &Instance, config: &SolverConfig) -> Result<RunOutcome> {
    let problem = &instance.problem;
    let (reference, reference_source) = resolve_reference(instance);
    let mut solver = Solver::new(problem, config.clone())?;
    if let Some(w) = &reference {
        solver = solver.with_reference(w.clone())?;
    }
    let trace = solver.solve(None)?;
    let mats = solver.matrices().clone();
    let constants = diagnostics::rate_constants(problem, config);
    let samples: Option<Vec<ErrorBoundSample>> = mats
        .spectral
        .g_positive_definite
        .then(|| diagnostics::error_bound_samples(problem, &mats, &trace, &constants));

    let rows = trace
        .records
        .iter()
        .enumerate()
        .map(|(k, r)| TraceRow {
            k: r.k,
            feasibility: r.feasibility,
            correction_residual: r.correction_residual,
            d_norm_sq: r.d_norm_sq,
            contraction_slack: r.contraction_slack,
            identity_error: r.identity_error,
            dist_h: r.dist_h,
            error_map_sq: samples.as_ref().map(|s| s[k].lhs),
            error_bound_rhs: samples.as_ref().map(|s| s[k].rhs),
        })
        .collect();

    let mut rep = Report::default();
    rep.text("instance", &instance.name);
    rep.int("p", problem.p() as i64);
    rep.int("q", problem.q() as i64);
    rep.int("n", problem.n() as i64);
    rep.num("config.beta", config.beta);
    rep.num("config.tau", config.tau);
    rep.num("config.s", config.s);
    rep.num("config.sigma1", config.sigma1);
    rep.num("config.sigma2", config.sigma2);
    rep.int("config.max_iters", config.max_iters as i64);
    rep.num("config.tol", config.tol);
    rep.text(
        "config.policy",
        match config.region_policy {
            RegionPolicy::RequireD => "D",
            RegionPolicy::AllowG => "G",
        },
    );
    rep.flag("region.in_D", crate::model::in_region_d(config.tau, config.s));
    rep.flag("region.in_G", crate::model::in_region_g(config.tau, config.s));
    rep.flag("certified", trace.certified);
    rep.text(
        "termination",
        match trace.termination {
            Termination::Converged => "converged",
            Termination::IterationCap => "iteration-cap",
        },
    );
    rep.int("iterations", trace.len() as i64);
    if let Some(last) = trace.records.last() {
        rep.num("final.composite_residual", last.composite_residual());
        rep.num("final.feasibility", last.feasibility);
    }
    rep.num("final.objective", problem.objective_value(&trace.final_iterate));
    rep.num("final.kkt_residual", diagnostics::error_map_residual(problem, &trace.final_iterate).norm());

    let sp = &mats.spectral;
    rep.num("spectral.lambda_min_G", sp.lambda_min_g);
    rep.num("spectral.lambda_min_H", sp.lambda_min_h);
    rep.num("spectral.lambda_max_H", sp.lambda_max_h);
    rep.num("spectral.lambda_max_MtHM", sp.lambda_max_mthm);
    rep.num("spectral.xi", sp.xi.unwrap_or(f64::NAN));
    rep.flag("spectral.G_positive_definite", sp.g_positive_definite);
    rep.flag("spectral.H_positive_definite", sp.h_positive_definite);
    rep.num("spectral.H_asymmetry", mats.h_asymmetry);

    let id_ratio = trace.max_identity_error_ratio();
    rep.num("identity.max_ratio", id_ratio);
    rep.flag("identity.check_ok", trace.records.iter().all(|r| r.identity_ok()));

    let pw = diagnostics::pointwise_residual_check(problem, config, &trace);
    rep.num("pointwise.sup_d", pw.sup_d);
    rep.num("pointwise.sup_feasibility", pw.sup_feasibility);
    rep.num("pointwise.theta_hat", pw.theta_hat);
    rep.num("pointwise.worst_theta_ratio", pw.worst_theta_ratio);
    rep.flag("pointwise.theta_hat_ok", pw.theta_hat_ok);
    rep.num("pointwise.max_feasibility_identity_error", pw.max_feasibility_identity_error);
    rep.flag("pointwise.feasibility_identity_ok", pw.feasibility_identity_ok);

    rep.num("constants.delta", constants.delta);
    rep.num("constants.eta_bar", constants.eta_bar);
    rep.num("constants.bound_numerator", constants.bound_numerator());
    if let Some(s) = &samples {
        rep.flag("error_bound.bound_ok", s.iter().all(|x| x.ok));
        let worst = s.iter().filter(|x| x.rhs > 0.0).map(|x| x.lhs / x.rhs).fold(0.0, f64::max);
        rep.num("error_bound.worst_ratio", worst);
    }

    rep.text("reference.source", reference_source.as_str());
    if let Some(w_star) = &reference {
        rep.num("reference.kkt_residual", diagnostics::error_map_residual(problem, w_star).norm());
        rep.num("final.dist_H", diagnostics::h_distance(&mats, &trace.final_iterate, w_star));
        if trace.certified {
            let c = diagnostics::contraction_report(&mats, &trace, w_star)?;
            rep.num("contraction.min_slack", c.min_slack);
            rep.flag("contraction.slack_ok", c.all_ok);
            let ne = diagnostics::nonergodic_check(&mats, &trace, w_star)?;
            rep.flag("nonergodic.monotone_ok", ne.monotone_ok);
            rep.flag("nonergodic.xi_bound_ok", ne.xi_bound_ok);
            rep.num("nonergodic.sublinear_envelope", ne.sublinear_envelope);
            rep.num("nonergodic.worst_xi_ratio", ne.worst_xi_ratio);
            match diagnostics::linear_rate_check(problem, config, &mats, &trace, w_star, &constants) {
                Ok(r) => {
                    rep.num("rate.r_hat", r.r_hat);
                    rep.num("rate.log_slope", r.linear_ratio_fit);
                    rep.num("rate.envelope_constant", r.envelope_constant);
                    rep.flag("rate.envelope_ok", r.envelope_ok);
                    rep.int("rate.fit_start", r.fit_start as i64);
                    rep.int("rate.fit_end", r.fit_end as i64);
                    rep.num("rate.initial_dist_H", r.initial_dist_h);
                }
                Err(e) => rep.text("rate.error", e.to_string()),
            }
        }
    }

    Ok(RunOutcome { trace, matrices: mats, reference, reference_source, rows, report: rep })
}

/// Writes `trace.csv` and `report.json`, plus the structural matrices as
/// `Q.csv`, `M.csv`, `G.csv`, `H.csv` when requested.
pub fn write_outcome(outcome: &RunOutcome, dir: &Path, export_matrices: bool) -> Result<()> {
    fs::create_dir_all(dir)?;
    output::write_trace(fs::File::create(dir.join("trace.csv"))?, &outcome.rows)?;
    outcome.report.write(&dir.join("report.json"))?;
    if export_matrices {
        let m = &outcome.matrices;
        for (name, mat) in [("Q", &m.q), ("M", &m.m), ("G", &m.g), ("H", &m.h)] {
            output::write_matrix(fs::File::create(dir.join(format!("{name}.csv")))?, mat)?;
        }
    }
    Ok(())
}
