//! Exact-arithmetic laboratory for the Davies–Rogers Hausdorff measure space.
//!
//! The crate builds the level graphs and their certificates, the growth
//! schedule `(M_n, N_n)` with its piecewise-linear gauge, the truncated
//! product space `Ω` with its ultrametric-like metric `ρ`, exact optimal
//! standard-set covers, null witnesses, slalom morphisms and the finite
//! metric-space machinery behind the Tukey reduction to the null ideal.
//!
//! Every reported value is an exact rational (`p/q`) unless it is explicitly
//! typed as a [`magnitude::LogMagnitude`] interval.

pub mod error;
pub mod exact;
pub mod graphs;
pub mod hausdorff;
pub mod magnitude;
pub mod schedule;
pub mod slalom;
pub mod space;
pub mod tukey_null;

pub use error::{Error, Result};
pub use exact::ExactScalar;

/// Three-valued outcome of a verification.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Indeterminate,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }

    /// Conjunction with indeterminate dominating pass but not fail.
    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
            (Verdict::Indeterminate, _) | (_, Verdict::Indeterminate) => Verdict::Indeterminate,
            _ => Verdict::Pass,
        }
    }
}
