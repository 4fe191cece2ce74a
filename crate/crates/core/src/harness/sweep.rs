//! `(τ, s)` grid sweeps producing region atlases.

use rayon::prelude::*;

use super::output::AtlasRow;
use super::{resolve_reference, Instance};
use crate::diagnostics;
use crate::engine::{Solver, Termination};
use crate::error::{Error, Result};
use crate::model::{in_region_d, in_region_g, Iterate, RegionPolicy, SolverConfig};
use crate::structure::StructuralMatrices;

/// `count` evenly spaced points from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Grid {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) || min > max || count == 0 || (count == 1 && min != max) {
            return Err(Error::Document(format!("invalid grid [{min}, {max}] with {count} points")));
        }
        Ok(Self { min, max, count })
    }

    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count).map(|i| if i + 1 == self.count { self.max } else { self.min + step * i as f64 }).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub tau: Grid,
    pub s: Grid,
    /// Run the solver at every point of `𝒢`; otherwise only structural
    /// quantities are computed.
    pub solve: bool,
}

/// One atlas row per grid point, τ-major, in grid order regardless of the
/// order in which points finish.
pub fn sweep(instance: &Instance, base: &SolverConfig, spec: &SweepSpec) -> Vec<AtlasRow> {
    let (reference, _) = resolve_reference(instance);
    let points: Vec<(f64, f64)> = spec
        .tau
        .points()
        .into_iter()
        .flat_map(|t| spec.s.points().into_iter().map(move |s| (t, s)))
        .collect();
    points
        .into_par_iter()
        .map(|(tau, s)| sweep_point(instance, base, tau, s, spec.solve, reference.as_ref()))
        .collect()
}

fn sweep_point(
    instance: &Instance,
    base: &SolverConfig,
    tau: f64,
    s: f64,
    solve: bool,
    reference: Option<&Iterate>,
) -> AtlasRow {
    let mut cfg = base.clone().with_steps(tau, s);
    cfg.region_policy = RegionPolicy::AllowG;
    let mut row = AtlasRow {
        tau,
        s,
        in_g: in_region_g(tau, s),
        in_d: in_region_d(tau, s),
        lambda_min_g: f64::NAN,
        lambda_min_h: f64::NAN,
        xi: None,
        iters_to_tol: -1,
        r_hat: -1.0,
        status: "ok".into(),
    };
    let mats = match StructuralMatrices::assemble(&instance.problem, &cfg) {
        Ok(m) => m,
        Err(e) => {
            row.status = sanitize(&e.to_string());
            return row;
        }
    };
    row.lambda_min_g = mats.spectral.lambda_min_g;
    row.lambda_min_h = mats.spectral.lambda_min_h;
    row.xi = mats.spectral.xi;
    if !solve {
        return row;
    }
    if !row.in_g {
        row.status = "not-run: outside G".into();
        return row;
    }
    let trace = match Solver::new(&instance.problem, cfg.clone()).and_then(|sv| sv.solve(None)) {
        Ok(t) => t,
        Err(e) => {
            row.status = sanitize(&e.to_string());
            return row;
        }
    };
    if trace.termination != Termination::Converged {
        row.status = "not-converged".into();
        return row;
    }
    row.iters_to_tol = trace.len() as i64;
    if let (Some(w_star), true) = (reference, mats.spectral.h_positive_definite) {
        let dists: Vec<f64> = trace.records.iter().map(|r| diagnostics::h_distance(&mats, &r.w, w_star)).collect();
        let fit = diagnostics::fit_window(&trace, cfg.tol).and_then(|(a, b)| diagnostics::fit_log_slope(&dists, a, b));
        match fit {
            Ok(slope) => row.r_hat = slope.exp(),
            Err(e) => row.status = sanitize(&e.to_string()),
        }
    }
    row
}

fn sanitize(msg: &str) -> String {
    msg.replace(['\n', ','], " ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    #[test]
    fn grid_points() {
        assert_eq!(Grid::new(-1.0, 1.0, 3).unwrap().points(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(Grid::new(0.5, 0.5, 1).unwrap().points(), vec![0.5]);
        assert!(Grid::new(1.0, 0.0, 3).is_err());
    }

    #[test]
    fn special_points() {
        let inst = Instance::from_bundle(&generators::qp1());
        let base = SolverConfig::for_problem(&inst.problem);
        let spec = SweepSpec {
            tau: Grid::new(0.9, 1.0, 2).unwrap(),
            s: Grid::new(0.9, 1.0, 2).unwrap(),
            solve: true,
        };
        let rows = sweep(&inst, &base, &spec);
        assert_eq!(rows.len(), 4);
        let r = &rows[0];
        assert!(r.in_d && r.in_g && r.lambda_min_g > 0.0 && r.iters_to_tol > 0);
        let r = &rows[3];
        assert!(!r.in_d && !r.in_g && r.iters_to_tol == -1);
    }
}
