//! JSON file formats for operators, POVMs, measurement families, designs,
//! and ensembles.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::designs::WeightedDesign;
use crate::info::Ensemble;
use crate::op::{CMat, CVec, HermitianOp, PureState, C64};
use crate::povm::{MeasurementFamily, Povm};
use crate::{Error, Result};

/// Operator file: `{"dim": d, "shape": [dA, dB] | null, "entries":
/// [[re, im], ...]}` with row-major entries. Parsing rejects non-Hermitian
/// data beyond tolerance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OperatorFile {
    pub dim: usize,
    #[serde(default)]
    pub shape: Option<(usize, usize)>,
    pub entries: Vec<(f64, f64)>,
}

impl OperatorFile {
    pub fn from_op(op: &HermitianOp) -> Self {
        let dim = op.dim();
        let mut entries = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                let v = op.matrix()[(r, c)];
                entries.push((v.re, v.im));
            }
        }
        Self {
            dim,
            shape: op.shape(),
            entries,
        }
    }

    pub fn into_op(self) -> Result<HermitianOp> {
        if self.entries.len() != self.dim * self.dim {
            return Err(Error::Parse(format!(
                "expected {} entries for dimension {}, got {}",
                self.dim * self.dim,
                self.dim,
                self.entries.len()
            )));
        }
        let mut mat = CMat::zeros(self.dim, self.dim);
        for (k, (re, im)) in self.entries.iter().enumerate() {
            mat[(k / self.dim, k % self.dim)] = C64::new(*re, *im);
        }
        HermitianOp::new(mat, self.shape)
    }
}

/// POVM file: `{"dim": d, "effects": [entries, ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PovmFile {
    pub dim: usize,
    pub effects: Vec<Vec<(f64, f64)>>,
}

impl PovmFile {
    pub fn from_povm(p: &Povm) -> Self {
        Self {
            dim: p.dim(),
            effects: p
                .effects()
                .iter()
                .map(|e| OperatorFile::from_op(e).entries)
                .collect(),
        }
    }

    pub fn into_povm(self) -> Result<Povm> {
        let effects = self
            .effects
            .into_iter()
            .map(|entries| {
                OperatorFile {
                    dim: self.dim,
                    shape: None,
                    entries,
                }
                .into_op()
            })
            .collect::<Result<Vec<_>>>()?;
        Povm::new(effects)
    }
}

/// One element of a family file: an inline POVM object or a path to one.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FamilyEntry {
    Path(String),
    Inline(PovmFile),
}

/// Design file: `{"dim": d, "t": t, "items": [{"weight": p, "vector":
/// [[re, im], ...]}, ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DesignFile {
    pub dim: usize,
    pub t: usize,
    pub items: Vec<DesignItemFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DesignItemFile {
    pub weight: f64,
    pub vector: Vec<(f64, f64)>,
}

impl DesignFile {
    pub fn from_design(d: &WeightedDesign) -> Self {
        Self {
            dim: d.dim(),
            t: d.order(),
            items: d
                .items()
                .iter()
                .map(|it| DesignItemFile {
                    weight: it.weight,
                    vector: it
                        .vector
                        .amplitudes()
                        .iter()
                        .map(|a| (a.re, a.im))
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn into_design(self) -> Result<WeightedDesign> {
        let items = self
            .items
            .into_iter()
            .map(|it| {
                if it.vector.len() != self.dim {
                    return Err(Error::Parse(format!(
                        "vector length {} does not match dimension {}",
                        it.vector.len(),
                        self.dim
                    )));
                }
                let mut amps = CVec::zeros(self.dim);
                for (i, (re, im)) in it.vector.iter().enumerate() {
                    amps[i] = C64::new(*re, *im);
                }
                Ok((it.weight, PureState::new(amps)?))
            })
            .collect::<Result<Vec<_>>>()?;
        WeightedDesign::from_vectors(items, self.t)
    }
}

/// Ensemble file: `{"items": [{"p": x, "state": entries}, ...]}`; state
/// dimensions are inferred from the entry counts.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnsembleFile {
    pub items: Vec<EnsembleItemFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnsembleItemFile {
    pub p: f64,
    pub state: Vec<(f64, f64)>,
    #[serde(default)]
    pub shape: Option<(usize, usize)>,
}

impl EnsembleFile {
    pub fn from_ensemble(e: &Ensemble) -> Self {
        Self {
            items: e
                .items()
                .iter()
                .map(|(p, rho)| EnsembleItemFile {
                    p: *p,
                    state: OperatorFile::from_op(rho).entries,
                    shape: rho.shape(),
                })
                .collect(),
        }
    }

    pub fn into_ensemble(self) -> Result<Ensemble> {
        let items = self
            .items
            .into_iter()
            .map(|it| {
                let dim = (it.state.len() as f64).sqrt().round() as usize;
                if dim * dim != it.state.len() {
                    return Err(Error::Parse(format!(
                        "state entry count {} is not a square",
                        it.state.len()
                    )));
                }
                let rho = OperatorFile {
                    dim,
                    shape: it.shape,
                    entries: it.state,
                }
                .into_op()?;
                Ok((it.p, rho))
            })
            .collect::<Result<Vec<_>>>()?;
        Ensemble::new(items)
    }
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn parse_operator(text: &str) -> Result<HermitianOp> {
    parse::<OperatorFile>(text)?.into_op()
}

pub fn parse_povm(text: &str) -> Result<Povm> {
    parse::<PovmFile>(text)?.into_povm()
}

pub fn parse_design(text: &str) -> Result<WeightedDesign> {
    parse::<DesignFile>(text)?.into_design()
}

pub fn parse_ensemble(text: &str) -> Result<Ensemble> {
    parse::<EnsembleFile>(text)?.into_ensemble()
}

/// Parse a family file: a JSON array whose elements are POVM objects or
/// file paths (resolved relative to `base`).
pub fn parse_family(text: &str, base: &Path, label: &str) -> Result<MeasurementFamily> {
    let entries: Vec<FamilyEntry> = parse(text)?;
    let povms = entries
        .into_iter()
        .map(|entry| match entry {
            FamilyEntry::Inline(file) => file.into_povm(),
            FamilyEntry::Path(rel) => {
                let path = base.join(rel);
                let text = std::fs::read_to_string(path)?;
                parse_povm(&text)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    MeasurementFamily::new(povms, label)
}

pub fn load_operator(path: &Path) -> Result<HermitianOp> {
    parse_operator(&std::fs::read_to_string(path)?)
}

pub fn load_povm(path: &Path) -> Result<Povm> {
    parse_povm(&std::fs::read_to_string(path)?)
}

pub fn load_design(path: &Path) -> Result<WeightedDesign> {
    parse_design(&std::fs::read_to_string(path)?)
}

pub fn load_ensemble(path: &Path) -> Result<Ensemble> {
    parse_ensemble(&std::fs::read_to_string(path)?)
}

pub fn load_family(path: &Path) -> Result<MeasurementFamily> {
    let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "family".into());
    parse_family(&std::fs::read_to_string(path)?, &base, &label)
}
