//! A recorded inequality `lhs ≤ rhs · (1 + slack)`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    /// Which statement this instance tests, e.g. `"subadditivity: Σ J ≤ 4‖f‖"`.
    pub anchor: String,
    pub lhs: f64,
    pub rhs: f64,
    /// Relative slack allowed on the right-hand side.
    pub slack: f64,
    pub holds: bool,
}

impl Check {
    pub fn le(anchor: impl Into<String>, lhs: f64, rhs: f64, slack: f64) -> Self {
        let holds = lhs <= rhs * (1.0 + slack);
        Self { anchor: anchor.into(), lhs, rhs, slack, holds }
    }

    /// `|lhs - rhs| ≤ tol` (absolute), recorded with `slack = tol`.
    pub fn close(anchor: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let holds = (lhs - rhs).abs() <= tol;
        Self { anchor: anchor.into(), lhs, rhs, slack: tol, holds }
    }

    /// A boolean outcome with no numeric sides.
    pub fn flag(anchor: impl Into<String>, holds: bool) -> Self {
        let v = holds as u8 as f64;
        Self { anchor: anchor.into(), lhs: v, rhs: 1.0, slack: 0.0, holds }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slack_is_relative() {
        assert!(Check::le("a", 1.04, 1.0, 0.05).holds);
        assert!(!Check::le("a", 1.06, 1.0, 0.05).holds);
        assert!(Check::close("b", 1.0, 1.0 + 1e-10, 1e-9).holds);
    }
}
