//! JSON input files: model (`spinpoint-model v1`) and state
//! (`spinpoint-state v1`).

use super::CliError;
use crate::boundary::{preset_delta, preset_delta_prime, preset_free, preset_offdiag, BoundaryPair, DeltaConvention};
use crate::linalg::CMatrix;
use crate::scalar::Cx;
use crate::space::{Dimension, Point};
use crate::spinspace::ModelSpec;
use crate::state::{GaussianPacket, GaussianTerm, Grid1};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MODEL_SCHEMA: &str = "spinpoint-model v1";
pub const STATE_SCHEMA: &str = "spinpoint-state v1";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// A coordinate given as a bare number (1D) or a list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coords {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl Coords {
    fn to_point(&self, dim: Dimension, what: &str) -> Result<Point<f64>, CliError> {
        let v = match self {
            Coords::Scalar(x) => vec![*x],
            Coords::Vector(v) => v.clone(),
        };
        match (dim, v.as_slice()) {
            (Dimension::One, [x]) => Ok(Point::line(*x)),
            (Dimension::Three, [x, y, z]) => Ok(Point::space(*x, *y, *z)),
            _ => Err(CliError::input(format!("{what} has {} components in dimension {}", v.len(), dim.value()))),
        }
    }

    fn to_vec3(&self, dim: Dimension, what: &str) -> Result<[f64; 3], CliError> {
        Ok(self.to_point(dim, what)?.coords())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    #[default]
    Stated,
    PaperLiteral,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum PresetSpec {
    Free,
    Delta {
        beta: Vec<[f64; 2]>,
        #[serde(default)]
        convention: Convention,
    },
    Offdiag {
        betahat: Vec<[f64; 2]>,
    },
    DeltaPrime {
        gamma: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub schema: String,
    pub dimension: usize,
    pub positions: Vec<Coords>,
    pub alpha: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<PresetSpec>,
    #[serde(default, rename = "A", skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default, rename = "B", skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<Vec<[f64; 2]>>>,
}

/// A parsed model and pair, with the digest of the file bytes.
pub struct LoadedModel {
    pub model: ModelSpec<f64>,
    pub pair: BoundaryPair<f64>,
    pub digest: String,
}

fn matrix(rows: &[Vec<[f64; 2]>], name: &str) -> Result<CMatrix<f64>, CliError> {
    let rows: Vec<Vec<Cx<f64>>> = rows.iter().map(|r| r.iter().map(|[re, im]| Cx::new(*re, *im)).collect()).collect();
    CMatrix::from_rows(rows).ok_or_else(|| CliError::input(format!("{name} has ragged rows")))
}

impl ModelFile {
    pub fn parse(bytes: &[u8]) -> Result<Self, CliError> {
        let f: ModelFile = serde_json::from_slice(bytes).map_err(|e| CliError::input(format!("model file: {e}")))?;
        if f.schema != MODEL_SCHEMA {
            return Err(CliError::input(format!("model file schema {:?}, expected {MODEL_SCHEMA:?}", f.schema)));
        }
        Ok(f)
    }

    pub fn build(&self, paper_literal: bool, cap: usize) -> Result<(ModelSpec<f64>, BoundaryPair<f64>), CliError> {
        let dim = Dimension::from_value(self.dimension)?;
        let positions = self
            .positions
            .iter()
            .enumerate()
            .map(|(j, c)| c.to_point(dim, &format!("position {j}")))
            .collect::<Result<Vec<_>, _>>()?;
        let model = ModelSpec::new(dim, positions, self.alpha.clone(), cap)?;
        let n = model.n();
        let pair = match (&self.preset, &self.a, &self.b) {
            (Some(p), None, None) => match p {
                PresetSpec::Free => preset_free(dim, n)?,
                PresetSpec::Delta { beta, convention } => {
                    let conv = if paper_literal || *convention == Convention::PaperLiteral {
                        DeltaConvention::PaperLiteral
                    } else {
                        DeltaConvention::Stated
                    };
                    preset_delta(dim, n, beta, conv)?
                }
                PresetSpec::Offdiag { betahat } => preset_offdiag(dim, n, betahat)?,
                PresetSpec::DeltaPrime { gamma } => preset_delta_prime(dim, n, gamma)?,
            },
            (None, Some(a), Some(b)) => BoundaryPair::new(dim, n, matrix(a, "A")?, matrix(b, "B")?)?,
            _ => return Err(CliError::input("model file needs either `preset` or both `A` and `B`")),
        };
        Ok((model, pair))
    }
}

pub fn load_model(bytes: &[u8], paper_literal: bool, cap: usize) -> Result<LoadedModel, CliError> {
    let (model, pair) = ModelFile::parse(bytes)?.build(paper_literal, cap)?;
    Ok(LoadedModel { model, pair, digest: sha256_hex(bytes) })
}

/// `A` and `B` as `[re, im]` rows.
pub fn matrix_rows(m: &CMatrix<f64>) -> Vec<Vec<[f64; 2]>> {
    (0..m.rows()).map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub channel: usize,
    pub center: Coords,
    pub momentum: Coords,
    pub width: f64,
    pub weight: [f64; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub schema: String,
    pub terms: Vec<TermSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
}

impl StateFile {
    pub fn parse(bytes: &[u8]) -> Result<Self, CliError> {
        let f: StateFile = serde_json::from_slice(bytes).map_err(|e| CliError::input(format!("state file: {e}")))?;
        if f.schema != STATE_SCHEMA {
            return Err(CliError::input(format!("state file schema {:?}, expected {STATE_SCHEMA:?}", f.schema)));
        }
        Ok(f)
    }

    pub fn packet(&self, model: &ModelSpec<f64>) -> Result<GaussianPacket<f64>, CliError> {
        let dim = model.dim();
        let mut channels = vec![Vec::new(); model.config_count()];
        for (i, t) in self.terms.iter().enumerate() {
            if t.channel >= channels.len() {
                return Err(CliError::input(format!("term {i}: channel {} of {}", t.channel, channels.len())));
            }
            let center = t.center.to_point(dim, &format!("term {i} center"))?;
            let k = t.momentum.to_vec3(dim, &format!("term {i} momentum"))?;
            let g = GaussianTerm::new(center, k, t.width, Cx::new(t.weight[0], t.weight[1]))?;
            channels[t.channel].push(g);
        }
        Ok(GaussianPacket::new(dim, channels)?)
    }

    pub fn grid(&self) -> Result<Option<Grid1<f64>>, CliError> {
        self.grid.map(|g| Grid1::spanning(g.start, g.end, g.points).map_err(CliError::from)).transpose()
    }
}
