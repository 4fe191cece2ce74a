//! Instance and configuration documents.
//!
//! Instances are JSON objects with explicit arrays. Matrices are lists of
//! rows. Finite floats use the shortest decimal that round-trips exactly.
//! Infinite box bounds are the strings `"inf"` and `"-inf"`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{InstanceBundle, SingletonCertificate};
use crate::linalg::{Matrix, Vector};
use crate::model::{Block, BlockProblem, FeasibleSet, Iterate, Objective, RegionPolicy, SolverConfig};

pub const FORMAT: &str = "gsadmm-instance";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Bound {
    Finite(f64),
    Infinite(Infinity),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
enum Infinity {
    #[serde(rename = "inf")]
    Positive,
    #[serde(rename = "-inf")]
    Negative,
}

impl From<f64> for Bound {
    fn from(v: f64) -> Self {
        if v == f64::INFINITY {
            Bound::Infinite(Infinity::Positive)
        } else if v == f64::NEG_INFINITY {
            Bound::Infinite(Infinity::Negative)
        } else {
            Bound::Finite(v)
        }
    }
}

impl From<Bound> for f64 {
    fn from(b: Bound) -> f64 {
        match b {
            Bound::Finite(v) => v,
            Bound::Infinite(Infinity::Positive) => f64::INFINITY,
            Bound::Infinite(Infinity::Negative) => f64::NEG_INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ObjectiveDoc {
    Quadratic { p: Vec<Vec<f64>>, r: Vec<f64>, t: f64 },
    L1 { weight: f64 },
    Linear { r: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum SetDoc {
    Free,
    Box { lo: Vec<Bound>, hi: Vec<Bound> },
    Nonnegative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockDoc {
    objective: ObjectiveDoc,
    matrix: Vec<Vec<f64>>,
    set: SetDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReferenceDoc {
    x: Vec<Vec<f64>>,
    y: Vec<Vec<f64>>,
    lambda: Vec<f64>,
    provenance: String,
    seed: u64,
    certificate: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    format: String,
    version: u32,
    name: String,
    x_blocks: Vec<BlockDoc>,
    y_blocks: Vec<BlockDoc>,
    c: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reference: Option<ReferenceDoc>,
}

/// Reference solution section of an instance document.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub w_star: Iterate,
    pub provenance: String,
    pub seed: u64,
    pub certificate: SingletonCertificate,
}

/// A parsed instance document.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: String,
    pub problem: BlockProblem,
    pub reference: Option<Reference>,
}

impl Instance {
    pub fn from_bundle(bundle: &InstanceBundle) -> Self {
        Instance {
            name: bundle.name.clone(),
            problem: bundle.problem.clone(),
            reference: Some(Reference {
                w_star: bundle.w_star.clone(),
                provenance: bundle.provenance.clone(),
                seed: bundle.seed,
                certificate: bundle.certificate,
            }),
        }
    }

    pub fn to_json(&self) -> String {
        let doc = InstanceDoc {
            format: FORMAT.into(),
            version: VERSION,
            name: self.name.clone(),
            x_blocks: self.problem.x_blocks.iter().map(block_doc).collect(),
            y_blocks: self.problem.y_blocks.iter().map(block_doc).collect(),
            c: self.problem.c.iter().copied().collect(),
            reference: self.reference.as_ref().map(|r| ReferenceDoc {
                x: r.w_star.x.iter().map(vec_doc).collect(),
                y: r.w_star.y.iter().map(vec_doc).collect(),
                lambda: vec_doc(&r.w_star.lambda),
                provenance: r.provenance.clone(),
                seed: r.seed,
                certificate: r.certificate.as_str().into(),
            }),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("instance documents serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: InstanceDoc = serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))?;
        if doc.format != FORMAT {
            return Err(Error::Document(format!("format tag {:?}, expected {FORMAT:?}", doc.format)));
        }
        if doc.version != VERSION {
            return Err(Error::Document(format!("unsupported version {}", doc.version)));
        }
        let x_blocks = doc.x_blocks.iter().enumerate().map(|(i, b)| parse_block(b, &format!("x_blocks[{i}]"))).collect::<Result<Vec<_>>>()?;
        let y_blocks = doc.y_blocks.iter().enumerate().map(|(j, b)| parse_block(b, &format!("y_blocks[{j}]"))).collect::<Result<Vec<_>>>()?;
        let n = doc.c.len();
        for (what, b) in x_blocks.iter().map(|b| ("x", b)).chain(y_blocks.iter().map(|b| ("y", b))) {
            if b.matrix.nrows() != n {
                return Err(Error::DimensionMismatch(format!(
                    "{what} block matrix has {} rows, c has length {n}",
                    b.matrix.nrows()
                )));
            }
        }
        let problem = BlockProblem::new(x_blocks, y_blocks, Vector::from_vec(doc.c));
        let reference = match doc.reference {
            None => None,
            Some(r) => {
                let w_star = Iterate::new(
                    r.x.into_iter().map(Vector::from_vec).collect(),
                    r.y.into_iter().map(Vector::from_vec).collect(),
                    Vector::from_vec(r.lambda),
                );
                problem.check_iterate(&w_star)?;
                let certificate = SingletonCertificate::parse(&r.certificate)
                    .ok_or_else(|| Error::Document(format!("unknown certificate {:?}", r.certificate)))?;
                Some(Reference { w_star, provenance: r.provenance, seed: r.seed, certificate })
            }
        };
        Ok(Instance { name: doc.name, problem, reference })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

fn vec_doc(v: &Vector) -> Vec<f64> {
    v.iter().copied().collect()
}

fn matrix_doc(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn block_doc(b: &Block) -> BlockDoc {
    let objective = match &b.objective {
        Objective::Quadratic { p, r, t } => ObjectiveDoc::Quadratic { p: matrix_doc(p), r: vec_doc(r), t: *t },
        Objective::L1 { weight } => ObjectiveDoc::L1 { weight: *weight },
        Objective::Linear { r } => ObjectiveDoc::Linear { r: vec_doc(r) },
    };
    let set = match &b.set {
        FeasibleSet::Free => SetDoc::Free,
        FeasibleSet::Nonnegative => SetDoc::Nonnegative,
        FeasibleSet::Box { lo, hi } => SetDoc::Box {
            lo: lo.iter().map(|&v| v.into()).collect(),
            hi: hi.iter().map(|&v| v.into()).collect(),
        },
    };
    BlockDoc { objective, matrix: matrix_doc(&b.matrix), set }
}

fn parse_matrix(rows: &[Vec<f64>], what: &str) -> Result<Matrix> {
    let ncols = rows.first().map_or(0, |r| r.len());
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
        return Err(Error::DimensionMismatch(format!(
            "{what}: row {i} has {} entries, row 0 has {ncols}",
            r.len()
        )));
    }
    Ok(Matrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

fn parse_block(doc: &BlockDoc, what: &str) -> Result<Block> {
    let matrix = parse_matrix(&doc.matrix, &format!("{what}.matrix"))?;
    let dim = matrix.ncols();
    let expect = |len: usize, field: &str| -> Result<()> {
        if len == dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!("{what}.{field} has length {len}, matrix has {dim} columns")))
        }
    };
    let objective = match &doc.objective {
        ObjectiveDoc::Quadratic { p, r, t } => {
            let p = parse_matrix(p, &format!("{what}.objective.p"))?;
            if p.nrows() != dim || p.ncols() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "{what}.objective.p is {}x{}, block dimension is {dim}",
                    p.nrows(),
                    p.ncols()
                )));
            }
            expect(r.len(), "objective.r")?;
            Objective::Quadratic { p, r: Vector::from_vec(r.clone()), t: *t }
        }
        ObjectiveDoc::L1 { weight } => Objective::L1 { weight: *weight },
        ObjectiveDoc::Linear { r } => {
            expect(r.len(), "objective.r")?;
            Objective::Linear { r: Vector::from_vec(r.clone()) }
        }
    };
    let set = match &doc.set {
        SetDoc::Free => FeasibleSet::Free,
        SetDoc::Nonnegative => FeasibleSet::Nonnegative,
        SetDoc::Box { lo, hi } => {
            expect(lo.len(), "set.lo")?;
            expect(hi.len(), "set.hi")?;
            FeasibleSet::Box {
                lo: Vector::from_iterator(dim, lo.iter().map(|&b| f64::from(b))),
                hi: Vector::from_iterator(dim, hi.iter().map(|&b| f64::from(b))),
            }
        }
    };
    Ok(Block::new(objective, matrix, set))
}

/// Solver settings read from `--config`; absent fields keep their defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDoc {
    pub beta: Option<f64>,
    pub tau: Option<f64>,
    pub s: Option<f64>,
    pub sigma1: Option<f64>,
    pub sigma2: Option<f64>,
    pub max_iters: Option<usize>,
    pub tol: Option<f64>,
    /// `"D"` or `"G"`.
    pub policy: Option<String>,
}

impl ConfigDoc {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Document(format!("{}: {e}", path.display())))
    }

    /// Overlays the set fields onto `cfg`; later documents win.
    pub fn apply(&self, cfg: &mut SolverConfig) -> Result<()> {
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { cfg.$f = v; } )* };
        }
        set!(beta, tau, s, sigma1, sigma2, max_iters, tol);
        if let Some(p) = &self.policy {
            cfg.region_policy = parse_policy(p)?;
        }
        Ok(())
    }
}

pub fn parse_policy(p: &str) -> Result<RegionPolicy> {
    match p {
        "D" | "d" => Ok(RegionPolicy::RequireD),
        "G" | "g" => Ok(RegionPolicy::AllowG),
        other => Err(Error::Document(format!("policy must be D or G, got {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    #[test]
    fn bundle_round_trip_is_exact() {
        for b in [generators::qp1(), generators::box_scalar(), generators::l1_scalar()] {
            let inst = Instance::from_bundle(&b);
            let text = inst.to_json();
            let back = Instance::from_json(&text).unwrap();
            assert_eq!(back, inst);
            assert_eq!(back.to_json(), text);
        }
    }

    #[test]
    fn infinite_bounds_round_trip() {
        let mut b = generators::box_scalar();
        b.problem.x_blocks[0].set = FeasibleSet::Box {
            lo: Vector::from_element(1, f64::NEG_INFINITY),
            hi: Vector::from_element(1, 0.3),
        };
        let text = Instance { name: "t".into(), problem: b.problem.clone(), reference: None }.to_json();
        assert!(text.contains("\"-inf\""));
        assert_eq!(Instance::from_json(&text).unwrap().problem, b.problem);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let text = Instance::from_bundle(&generators::qp1()).to_json();
        let bad = text.replacen("\"c\": [\n    1.0\n  ]", "\"c\": [\n    1.0,\n    2.0\n  ]", 1);
        assert_ne!(bad, text);
        assert!(matches!(Instance::from_json(&bad), Err(Error::DimensionMismatch(_))));
        let ragged = text.replacen("\"matrix\": [\n        [\n          1.0\n        ]", "\"matrix\": [\n        [\n          1.0, 2.0\n        ]", 1);
        assert_ne!(ragged, text);
        assert!(Instance::from_json(&ragged).is_err());
    }

    #[test]
    fn config_overlay() {
        let doc: ConfigDoc = serde_json::from_str(r#"{"tau": 0.2, "policy": "G"}"#).unwrap();
        let mut cfg = generators::golden_config(&generators::qp1().problem);
        doc.apply(&mut cfg).unwrap();
        assert_eq!(cfg.tau, 0.2);
        assert_eq!(cfg.s, 0.4);
        assert_eq!(cfg.region_policy, RegionPolicy::AllowG);
        assert!(serde_json::from_str::<ConfigDoc>(r#"{"tua": 1}"#).is_err());
    }
}
