//! One-shot structural validation of an instance and configuration.

use super::{resolve_reference, Instance};
use crate::diagnostics;
use crate::generators::KKT_RESIDUAL_TOL;
use crate::linalg::{self, Matrix};
use crate::model::{validate_config, validate_problem, SolverConfig};
use crate::structure::{self, StructuralMatrices};

const CLOSED_FORM_RTOL: f64 = 1e-10;
const GOLDEN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckItem {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckItem {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    (a - b).amax()
}

fn relative_diff(a: &Matrix, b: &Matrix) -> f64 {
    max_abs_diff(a, b) / (1.0 + a.amax())
}

/// Hand-derived matrices for the 1×1 fixture `A = B = [1]`, `β = 1`,
/// `σ1 = σ2 = 0.5`, `τ = 0.3`, `s = 0.4`.
pub fn golden_matrices() -> [(&'static str, Matrix); 4] {
    [
        ("Q_tilde", Matrix::from_row_slice(2, 2, &[1.5, -0.3, -1.0, 1.0])),
        ("M", Matrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, -0.4, 0.7])),
        ("G", Matrix::from_row_slice(3, 3, &[0.5, 0.0, 0.0, 0.0, 1.1, -0.6, 0.0, -0.6, 1.3])),
        (
            "H",
            Matrix::from_row_slice(3, 3, &[0.5, 0.0, 0.0, 0.0, 93.0 / 70.0, -3.0 / 7.0, 0.0, -3.0 / 7.0, 10.0 / 7.0]),
        ),
    ]
}

fn is_golden_fixture(instance: &Instance, cfg: &SolverConfig) -> bool {
    let p = &instance.problem;
    let unit = |m: &Matrix| m.shape() == (1, 1) && m[(0, 0)] == 1.0;
    p.p() == 1
        && p.q() == 1
        && p.n() == 1
        && unit(&p.x_blocks[0].matrix)
        && unit(&p.y_blocks[0].matrix)
        && (cfg.beta, cfg.sigma1, cfg.sigma2, cfg.tau, cfg.s) == (1.0, 0.5, 0.5, 0.3, 0.4)
}

pub fn check(instance: &Instance, cfg: &SolverConfig) -> Vec<CheckItem> {
    let problem = &instance.problem;
    let mut items = Vec::new();
    let pv = validate_problem(problem);
    items.push(CheckItem::new("problem.valid", pv.is_valid(), pv.to_string().trim().to_string()));
    if !pv.is_valid() {
        return items;
    }
    let cv = validate_config(cfg, problem);
    items.push(CheckItem::new("config.valid", cv.is_valid(), cv.to_string().trim().to_string()));

    let mats = match StructuralMatrices::assemble(problem, cfg) {
        Ok(m) => {
            items.push(CheckItem::new("M.invertible", true, format!("tau + s = {}", cfg.tau + cfg.s)));
            m
        }
        Err(e) => {
            items.push(CheckItem::new("M.invertible", false, e.to_string()));
            return items;
        }
    };
    let in_d = mats.in_region_d();

    match (structure::invert_m(&mats.m), structure::m_inverse_closed_form(problem, cfg.beta, cfg.tau, cfg.s)) {
        (Ok(numeric), Ok(closed)) => {
            let d = relative_diff(&numeric, &closed);
            items.push(CheckItem::new("M_inverse.closed_form", d <= CLOSED_FORM_RTOL, format!("relative difference {d:e}")));
        }
        (a, b) => items.push(CheckItem::new(
            "M_inverse.closed_form",
            false,
            format!("{:?} / {:?}", a.err(), b.err()),
        )),
    }
    let g_asym = linalg::relative_asymmetry(&mats.g);
    items.push(CheckItem::new("G.symmetric", g_asym <= 1e-12, format!("relative asymmetry {g_asym:e}")));
    let dg = relative_diff(&mats.g, &structure::g_closed_form(problem, cfg));
    items.push(CheckItem::new("G.closed_form", dg <= CLOSED_FORM_RTOL, format!("relative difference {dg:e}")));
    items.push(CheckItem::new(
        "H.symmetric",
        mats.h_asymmetry <= CLOSED_FORM_RTOL,
        format!("relative asymmetry {:e}", mats.h_asymmetry),
    ));
    let sp = &mats.spectral;
    let note = if in_d { "" } else { " (not required outside D)" };
    items.push(CheckItem::new(
        "G.positive_definite",
        sp.g_positive_definite || !in_d,
        format!("lambda_min(G) = {:e}{note}", sp.lambda_min_g),
    ));
    items.push(CheckItem::new(
        "H.positive_definite",
        sp.h_positive_definite || !in_d,
        format!("lambda_min(H) = {:e}{note}", sp.lambda_min_h),
    ));
    items.push(CheckItem::new(
        "xi.positive",
        sp.xi.is_some_and(|x| x > 0.0) || !in_d,
        format!("xi = {:?}{note}", sp.xi),
    ));

    if is_golden_fixture(instance, cfg) {
        let q_tilde = mats.q_tilde.clone();
        for (name, expect) in golden_matrices() {
            let got = match name {
                "Q_tilde" => &q_tilde,
                "M" => &mats.m,
                "G" => &mats.g,
                _ => &mats.h,
            };
            let d = max_abs_diff(got, &expect);
            items.push(CheckItem::new(&format!("golden.{name}"), d <= GOLDEN_TOL, format!("max abs difference {d:e}")));
        }
    }

    let (reference, source) = resolve_reference(instance);
    if let Some(w) = reference {
        let r = diagnostics::error_map_residual(problem, &w).norm();
        items.push(CheckItem::new(
            "reference.kkt_residual",
            r <= KKT_RESIDUAL_TOL,
            format!("{r:e} ({})", source.as_str()),
        ));
    } else if instance.reference.is_some() {
        items.push(CheckItem::new("reference.kkt_residual", false, "reference could not be evaluated"));
    }
    items
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    #[test]
    fn golden_fixture_passes() {
        let b = generators::qp1();
        let inst = Instance::from_bundle(&b);
        let items = check(&inst, &generators::golden_config(&b.problem));
        assert!(items.iter().all(|i| i.passed), "{items:?}");
        assert_eq!(items.iter().filter(|i| i.name.starts_with("golden.")).count(), 4);
    }

    #[test]
    fn singular_m_is_reported() {
        let b = generators::qp1();
        let inst = Instance::from_bundle(&b);
        let mut cfg = generators::golden_config(&b.problem).with_steps(0.3, -0.3);
        cfg.region_policy = crate::model::RegionPolicy::AllowG;
        let items = check(&inst, &cfg);
        let m = items.iter().find(|i| i.name == "M.invertible").unwrap();
        assert!(!m.passed && m.detail.contains("singular"));
    }
}
