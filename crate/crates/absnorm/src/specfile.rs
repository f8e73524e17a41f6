//! JSON descriptions of norms and spaces, used by the command line tool and
//! the suite manifests. Kept separate from the core types so the library
//! structs stay serialization-agnostic.

use serde::{Deserialize, Serialize};

use crate::dual::dual;
use crate::norm2::{AbsoluteNorm, NormError};
use crate::space::{FiniteSpace, SpaceError};

/// An exponent that may be the word "inf".
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PValue {
    Number(f64),
    Word(String),
}

impl PValue {
    pub fn value(&self) -> Result<f64, SpecError> {
        match self {
            PValue::Number(p) => Ok(*p),
            PValue::Word(w) if w == "inf" => Ok(f64::INFINITY),
            PValue::Word(w) => Err(SpecError::BadP(w.clone())),
        }
    }
}

impl From<f64> for PValue {
    fn from(p: f64) -> Self {
        if p.is_infinite() {
            PValue::Word("inf".into())
        } else {
            PValue::Number(p)
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SpecError {
    #[error("unrecognised exponent {0:?} (use a number >= 1 or \"inf\")")]
    BadP(String),
    #[error("dual resolution must be at least 8, got {0}")]
    DualResolution(usize),
    #[error(transparent)]
    Norm(#[from] NormError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

fn default_dual_resolution() -> usize {
    4096
}

/// Serialisable description of a two-variable absolute norm.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum NormSpec {
    P {
        p: PValue,
    },
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
    Swap {
        inner: Box<NormSpec>,
    },
    Dual {
        inner: Box<NormSpec>,
        #[serde(default = "default_dual_resolution")]
        resolution: usize,
    },
}

impl NormSpec {
    pub fn p(p: f64) -> Self {
        NormSpec::P { p: p.into() }
    }

    pub fn to_norm(&self) -> Result<AbsoluteNorm, SpecError> {
        match self {
            NormSpec::P { p } => Ok(AbsoluteNorm::p_norm(p.value()?)?),
            NormSpec::Polygon { vertices } => Ok(AbsoluteNorm::polygonal(vertices.clone())?),
            NormSpec::Swap { inner } => Ok(inner.to_norm()?.swap()),
            NormSpec::Dual { inner, resolution } => {
                if *resolution < 8 {
                    return Err(SpecError::DualResolution(*resolution));
                }
                Ok(dual(&inner.to_norm()?, *resolution))
            }
        }
    }
}

/// Serialisable description of a finite-dimensional normed space.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum SpaceSpec {
    P {
        p: PValue,
        dim: usize,
    },
    Polyhedral {
        functionals: Vec<Vec<f64>>,
    },
    Fsum {
        left: Box<SpaceSpec>,
        right: Box<SpaceSpec>,
        #[serde(rename = "F")]
        f: NormSpec,
    },
}

impl SpaceSpec {
    pub fn p(p: f64, dim: usize) -> Self {
        SpaceSpec::P { p: p.into(), dim }
    }

    pub fn to_space(&self) -> Result<FiniteSpace, SpecError> {
        match self {
            SpaceSpec::P { p, dim } => Ok(FiniteSpace::p_space(p.value()?, *dim)?),
            SpaceSpec::Polyhedral { functionals } => {
                Ok(FiniteSpace::polyhedral(functionals.clone())?)
            }
            SpaceSpec::Fsum { left, right, f } => Ok(FiniteSpace::fsum(
                left.to_space()?,
                right.to_space()?,
                f.to_norm()?,
            )),
        }
    }
}
