use serde::{Deserialize, Serialize};

/// Numerical tolerances used by every predicate.
///
/// `psd` and `herm` are relative to `1 + norm` of the tested element, `rank`
/// is relative to the largest singular value (or eigenvalue) of the operator
/// being thresholded and `eq` bounds operator-level residuals relative to
/// `1 + norm` of the target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub psd: f64,
    pub herm: f64,
    pub rank: f64,
    pub eq: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        psd: 1e-9,
        herm: 1e-10,
        rank: 1e-10,
        eq: 1e-8,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
