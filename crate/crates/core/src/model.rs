use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::barycentric::BarycentricVariant;
use crate::drift_walk::DriftVariant;
use crate::error::WalkError;

/// Which process a run simulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    /// Drift walk, strictly lattice-valued product law.
    #[serde(rename = "lattice")]
    Lattice,
    /// Drift walk, four-outcome law taken symbol for symbol.
    #[serde(rename = "lattice-verbatim")]
    LatticeVerbatim,
    #[serde(rename = "barycentric")]
    Barycentric,
    #[serde(rename = "barycentric-sym")]
    BarycentricSym,
}

pub enum Process {
    Drift(DriftVariant),
    Barycentric(BarycentricVariant),
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::Lattice,
        ModelKind::LatticeVerbatim,
        ModelKind::Barycentric,
        ModelKind::BarycentricSym,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Lattice => "lattice",
            ModelKind::LatticeVerbatim => "lattice-verbatim",
            ModelKind::Barycentric => "barycentric",
            ModelKind::BarycentricSym => "barycentric-sym",
        }
    }

    pub fn process(self) -> Process {
        match self {
            ModelKind::Lattice => Process::Drift(DriftVariant::Lattice),
            ModelKind::LatticeVerbatim => Process::Drift(DriftVariant::Verbatim),
            ModelKind::Barycentric => Process::Barycentric(BarycentricVariant::Original),
            ModelKind::BarycentricSym => Process::Barycentric(BarycentricVariant::Symmetrized),
        }
    }

    pub fn is_drift(self) -> bool {
        matches!(self.process(), Process::Drift(_))
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = WalkError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelKind::ALL.into_iter().find(|m| m.as_str() == s).ok_or_else(|| {
            WalkError::Config(format!(
                "unknown model '{s}' (expected lattice, lattice-verbatim, barycentric or barycentric-sym)"
            ))
        })
    }
}
