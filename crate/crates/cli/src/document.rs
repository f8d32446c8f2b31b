//! Instance documents: one JSON format for frames, named operators and
//! optional duals.

use std::collections::BTreeMap;

use kgframe::payload::{operator_from_payload, operator_payload, OperatorPayload};
use kgframe::{AlgebraShape, DualConstruction, Frame64, GFrame, Operator64};
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, thiserror::Error)]
pub enum DocumentError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("at `{path}`: {message}")]
    Parse { path: String, message: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSpec {
    pub blocks: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemberDocument {
    pub codomain_rank: usize,
    /// `coeffs[i][j][block][row][col] = [re, im]`.
    pub coeffs: OperatorPayload,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateDocument {
    pub residual: f64,
    pub is_dual: bool,
    pub construction: DualConstruction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditioning_warning: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub version: String,
    pub algebra: AlgebraSpec,
    pub module_rank: usize,
    pub frame: Vec<MemberDocument>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub operators: BTreeMap<String, OperatorPayload>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual: Option<Vec<MemberDocument>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateDocument>,
}

/// A validated document.
#[derive(Debug, Clone)]
pub struct Instance {
    pub shape: AlgebraShape,
    pub frame: Frame64,
    pub operators: BTreeMap<String, Operator64>,
    pub dual: Option<Frame64>,
}

impl Instance {
    /// `operators.K`, checked to act on the module.
    pub fn k(&self) -> Option<&Operator64> {
        self.operators.get("K")
    }
}

fn members_doc(f: &Frame64) -> Vec<MemberDocument> {
    f.members()
        .iter()
        .map(|m| MemberDocument {
            codomain_rank: m.codomain_rank(),
            coeffs: operator_payload(m),
        })
        .collect()
}

fn decode_members(
    shape: &AlgebraShape,
    d: usize,
    members: &[MemberDocument],
    field: &str,
) -> Result<Frame64, DocumentError> {
    if members.is_empty() {
        return Err(DocumentError::Invalid(format!("{field}: at least one member is required")));
    }
    let ops = members
        .iter()
        .enumerate()
        .map(|(i, m)| {
            operator_from_payload(shape, &m.coeffs, d, m.codomain_rank, &format!("{field}[{i}].coeffs"))
                .map_err(|e| DocumentError::Invalid(e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    GFrame::new(ops).map_err(|e| DocumentError::Invalid(format!("{field}: {e}")))
}

impl InstanceDocument {
    pub fn parse(text: &str) -> Result<Self, DocumentError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| DocumentError::Parse {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })
    }

    pub fn read(path: &str) -> Result<Self, DocumentError> {
        let text = if path == "-" {
            let mut s = String::new();
            std::io::Read::read_to_string(&mut std::io::stdin(), &mut s)
                .map(|_| s)
        } else {
            std::fs::read_to_string(path)
        }
        .map_err(|source| DocumentError::Io {
            path: path.to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }

    pub fn encode(
        frame: &Frame64,
        operators: &BTreeMap<String, Operator64>,
        dual: Option<&Frame64>,
        certificate: Option<CertificateDocument>,
    ) -> Self {
        InstanceDocument {
            version: FORMAT_VERSION.to_string(),
            algebra: AlgebraSpec {
                blocks: frame.shape().block_dims().to_vec(),
            },
            module_rank: frame.domain_rank(),
            frame: members_doc(frame),
            operators: operators.iter().map(|(k, v)| (k.clone(), operator_payload(v))).collect(),
            dual: dual.map(members_doc),
            certificate,
        }
    }

    /// Validates every dimension before anything is computed.
    pub fn decode(&self) -> Result<Instance, DocumentError> {
        if self.version != FORMAT_VERSION {
            return Err(DocumentError::Invalid(format!(
                "version: unsupported format version `{}` (expected `{FORMAT_VERSION}`)",
                self.version
            )));
        }
        let shape = AlgebraShape::new(&self.algebra.blocks)
            .map_err(|e| DocumentError::Invalid(format!("algebra.blocks: {e}")))?;
        let d = self.module_rank;
        if d == 0 {
            return Err(DocumentError::Invalid("module_rank: must be positive".into()));
        }
        let frame = decode_members(&shape, d, &self.frame, "frame")?;

        let mut operators = BTreeMap::new();
        for (name, p) in &self.operators {
            let path = format!("operators.{name}");
            let rows = p.len();
            let cols = p.first().map_or(0, Vec::len);
            let op = operator_from_payload(&shape, p, rows, cols, &path)
                .map_err(|e| DocumentError::Invalid(e.to_string()))?;
            if name == "K" && (rows != d || cols != d) {
                return Err(DocumentError::Invalid(format!(
                    "{path}: K must map A^{d} to A^{d}, found A^{rows} -> A^{cols}"
                )));
            }
            operators.insert(name.clone(), op);
        }

        let dual = match &self.dual {
            None => None,
            Some(members) => {
                if members.len() != self.frame.len() {
                    return Err(DocumentError::Invalid(format!(
                        "dual: expected {} members to match the frame, found {}",
                        self.frame.len(),
                        members.len()
                    )));
                }
                for (i, (a, b)) in members.iter().zip(&self.frame).enumerate() {
                    if a.codomain_rank != b.codomain_rank {
                        return Err(DocumentError::Invalid(format!(
                            "dual[{i}].codomain_rank: {} does not match frame[{i}].codomain_rank {}",
                            a.codomain_rank, b.codomain_rank
                        )));
                    }
                }
                Some(decode_members(&shape, d, members, "dual")?)
            }
        };
        Ok(Instance {
            shape,
            frame,
            operators,
            dual,
        })
    }
}
