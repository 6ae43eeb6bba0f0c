//! Extended nonnegative reals: a finite value or plus infinity.
//!
//! Radii of trivial groups are genuinely infinite and that outcome is tested,
//! so infinity is a tagged variant rather than a sentinel float.

use serde::ser::{Serialize, Serializer};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended {
    Finite(f64),
    Infinite,
}

impl Extended {
    pub fn is_finite(&self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            Extended::Finite(x) => Some(*x),
            Extended::Infinite => None,
        }
    }

    /// Finite value, panicking on infinity; for contexts where finiteness
    /// was already established.
    pub fn expect_finite(&self, msg: &str) -> f64 {
        self.finite().unwrap_or_else(|| panic!("{msg}"))
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(x) => write!(f, "{x}"),
            Extended::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Extended {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Extended::Finite(x) => serializer.serialize_f64(*x),
            Extended::Infinite => serializer.serialize_str("inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serializes_as_number_or_inf() {
        assert_eq!(serde_json::to_string(&Extended::Finite(2.5)).unwrap(), "2.5");
        assert_eq!(serde_json::to_string(&Extended::Infinite).unwrap(), "\"inf\"");
    }

    #[test]
    fn accessors() {
        assert!(Extended::Infinite.finite().is_none());
        assert_eq!(Extended::Finite(1.0).finite(), Some(1.0));
        assert!(!Extended::Infinite.is_finite());
    }
}
