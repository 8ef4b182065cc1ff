use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use serde::{Serialize, Serializer};

/// An element of the value group Z together with +infinity (the valuation of 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Val {
    Finite(i64),
    Infinite,
}

impl Serialize for Val {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Val::Finite(v) => serializer.serialize_i64(*v),
            Val::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl Val {
    pub fn is_infinite(self) -> bool {
        matches!(self, Val::Infinite)
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            Val::Finite(v) => Some(v),
            Val::Infinite => None,
        }
    }

    /// Unwrap a finite valuation; panics on infinity.
    pub fn expect_finite(self, what: &str) -> i64 {
        match self {
            Val::Finite(v) => v,
            Val::Infinite => panic!("expected finite valuation for {what}"),
        }
    }

    pub fn min(self, other: Val) -> Val {
        if self <= other {
            self
        } else {
            other
        }
    }
}

impl PartialOrd for Val {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Val {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Val::Infinite, Val::Infinite) => Ordering::Equal,
            (Val::Infinite, Val::Finite(_)) => Ordering::Greater,
            (Val::Finite(_), Val::Infinite) => Ordering::Less,
            (Val::Finite(a), Val::Finite(b)) => a.cmp(b),
        }
    }
}

impl Add for Val {
    type Output = Val;
    fn add(self, rhs: Val) -> Val {
        match (self, rhs) {
            (Val::Finite(a), Val::Finite(b)) => Val::Finite(a + b),
            _ => Val::Infinite,
        }
    }
}

impl Add<i64> for Val {
    type Output = Val;
    fn add(self, rhs: i64) -> Val {
        match self {
            Val::Finite(a) => Val::Finite(a + rhs),
            Val::Infinite => Val::Infinite,
        }
    }
}

impl From<i64> for Val {
    fn from(v: i64) -> Val {
        Val::Finite(v)
    }
}

impl fmt::Display for Val {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Val::Finite(v) => write!(f, "{v}"),
            Val::Infinite => write!(f, "inf"),
        }
    }
}
