use serde::{Deserialize, Serialize};

/// Numerical tolerances shared by every module.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Normalization and orthonormality of constructed objects.
    pub construction: f64,
    /// Ray equality, certification and identity checks.
    pub comparison: f64,
    /// Overlap targets and orthogonality in the exhaustive searches.
    pub search: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        construction: 1e-12,
        comparison: 1e-10,
        search: 1e-9,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
