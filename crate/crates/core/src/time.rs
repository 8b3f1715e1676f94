//! Extended nonnegative failure instants.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// A failure instant: a finite nonnegative real, or `INF` for a block that
/// never fails.
///
/// Stored as an `f64` whose value is never NaN and never negative; `INF` is
/// `f64::INFINITY`. That makes the type totally ordered with `INF` on top.
#[derive(Clone, Copy, PartialEq)]
pub struct ExtTime(f64);

impl ExtTime {
    /// The instant a block that always fails fails at.
    pub const ZERO: ExtTime = ExtTime(0.0);
    /// Never fails.
    pub const INF: ExtTime = ExtTime(f64::INFINITY);

    /// Builds a finite instant, rejecting negative, NaN and infinite input.
    pub fn finite(value: f64) -> Result<Self> {
        if value.is_nan() || value < 0.0 || value.is_infinite() {
            return Err(Error::Domain(format!(
                "failure time must be a finite nonnegative real, got {value}"
            )));
        }
        // normalise -0.0
        Ok(ExtTime(value + 0.0))
    }

    /// Like [`ExtTime::finite`] but maps `+inf` to [`ExtTime::INF`].
    pub fn from_f64(value: f64) -> Result<Self> {
        if value == f64::INFINITY {
            Ok(ExtTime::INF)
        } else {
            Self::finite(value)
        }
    }

    pub fn is_inf(self) -> bool {
        self.0.is_infinite()
    }

    pub fn is_finite(self) -> bool {
        !self.is_inf()
    }

    /// Raw value; `f64::INFINITY` for `INF`.
    pub fn as_f64(self) -> f64 {
        self.0
    }

    /// Shifts the instant by a finite nonnegative offset. `INF` stays `INF`.
    pub fn shifted(self, offset: f64) -> ExtTime {
        debug_assert!(offset >= 0.0 && offset.is_finite());
        ExtTime(self.0 + offset)
    }

    /// DRBD event membership: the block is still working at `t`.
    pub fn survives(self, t: f64) -> bool {
        self.0 > t
    }
}

impl Eq for ExtTime {}

impl PartialOrd for ExtTime {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtTime {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Debug for ExtTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for ExtTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_inf() {
            f.write_str("INF")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// `X · Y`: the earlier of two failures.
pub fn ext_min(a: ExtTime, b: ExtTime) -> ExtTime {
    a.min(b)
}

/// `X + Y`: the later of two failures.
pub fn ext_max(a: ExtTime, b: ExtTime) -> ExtTime {
    a.max(b)
}

/// `X ▷ Y`: `x` if it fails strictly after `y`, otherwise never.
pub fn after(x: ExtTime, y: ExtTime) -> ExtTime {
    if x > y {
        x
    } else {
        ExtTime::INF
    }
}

/// `X Δ Y`: `x` if both fail at the same instant, otherwise never.
pub fn simult(x: ExtTime, y: ExtTime) -> ExtTime {
    if x == y {
        x
    } else {
        ExtTime::INF
    }
}

/// `X ⊵ Y`: `x` if it fails no earlier than `y`, otherwise never.
pub fn incl_after(x: ExtTime, y: ExtTime) -> ExtTime {
    if x >= y {
        x
    } else {
        ExtTime::INF
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(v: f64) -> ExtTime {
        ExtTime::finite(v).unwrap()
    }

    #[test]
    fn min_max_with_inf_on_top() {
        assert_eq!(ext_min(t(3.0), t(5.0)), t(3.0));
        assert_eq!(ext_max(t(3.0), ExtTime::INF), ExtTime::INF);
        assert_eq!(ext_min(ExtTime::INF, ExtTime::INF), ExtTime::INF);
        assert!(t(1e300) < ExtTime::INF);
    }

    #[test]
    fn temporal_operators_piecewise() {
        assert_eq!(after(t(5.0), t(3.0)), t(5.0));
        assert_eq!(after(t(3.0), t(5.0)), ExtTime::INF);
        assert_eq!(after(t(4.0), t(4.0)), ExtTime::INF);
        assert_eq!(incl_after(t(4.0), t(4.0)), t(4.0));
        assert_eq!(simult(t(4.0), t(4.0)), t(4.0));
        assert_eq!(simult(t(4.0), t(4.5)), ExtTime::INF);
        assert_eq!(incl_after(t(3.0), t(4.0)), ExtTime::INF);
        assert_eq!(after(ExtTime::INF, t(2.0)), ExtTime::INF);
    }

    #[test]
    fn rejects_negative_and_nan() {
        assert!(ExtTime::finite(-1.0).is_err());
        assert!(ExtTime::finite(f64::NAN).is_err());
        assert!(ExtTime::finite(f64::INFINITY).is_err());
        assert_eq!(ExtTime::from_f64(f64::INFINITY).unwrap(), ExtTime::INF);
        assert_eq!(ExtTime::finite(-0.0).unwrap(), ExtTime::ZERO);
    }

    #[test]
    fn survival_event() {
        assert!(!ExtTime::ZERO.survives(0.0));
        assert!(ExtTime::INF.survives(1e308));
        assert!(t(2.0).survives(1.5));
        assert!(!t(2.0).survives(2.0));
    }
}
