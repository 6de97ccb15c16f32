//! Calibration tolerances, collected in one table.
//!
//! Exactness tolerances (rounding-level identities) do not depend on the
//! profile; calibration tolerances scale by 0.5 (strict) or 2 (relaxed).

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ToleranceProfile {
    Strict,
    #[default]
    Default,
    Relaxed,
}

impl ToleranceProfile {
    pub fn factor(self) -> f64 {
        match self {
            ToleranceProfile::Strict => 0.5,
            ToleranceProfile::Default => 1.0,
            ToleranceProfile::Relaxed => 2.0,
        }
    }
}

impl std::str::FromStr for ToleranceProfile {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "strict" => Ok(ToleranceProfile::Strict),
            "default" => Ok(ToleranceProfile::Default),
            "relaxed" => Ok(ToleranceProfile::Relaxed),
            other => Err(format!("unknown tolerance profile `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Discrete identities that hold up to rounding.
    pub exact: f64,
    /// Code paths that coincide algebraically but differ in operation order.
    pub collapse: f64,
    /// Volume-potential right-inverse and operator identities at n = 32.
    pub right_inverse: f64,
    /// Stacked-curl residuals (Maxwell, gauge transform).
    pub maxwell: f64,
    pub gauge: f64,
    /// Neumann manufactured-solution recovery.
    pub neumann_recovery: f64,
    /// Boundary integral equation residual with analytic data.
    pub bie: f64,
    /// Minimum error reduction when the resolution doubles.
    pub refinement_ratio: f64,
    /// Relative residual accepted by the conjugate and force-free prechecks.
    pub precondition: f64,
    /// Relative defect accepted in the Neumann compatibility integral.
    pub compatibility: f64,
    /// Plane-wave round trip of the metaharmonic conjugates at h = 1/16.
    pub conjugate_round_trip: f64,
}

impl Tolerances {
    pub fn new(profile: ToleranceProfile) -> Self {
        let f = profile.factor();
        Tolerances {
            exact: 1e-12,
            collapse: 1e-10,
            right_inverse: 0.05 * f,
            maxwell: 0.07 * f,
            gauge: 0.07 * f,
            neumann_recovery: 0.10 * f,
            bie: 0.05 * f,
            refinement_ratio: 1.5,
            precondition: 0.05 * f,
            compatibility: 0.05 * f,
            conjugate_round_trip: 0.01 * f,
        }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances::new(ToleranceProfile::Default)
    }
}
