//! Exact arithmetic in a discretely valued henselian field K with value group Z.
//!
//! Two base kinds are supported: the p-adic rationals Q_p (uniformizer p) and
//! the Laurent field F_p((t)) (uniformizer t). Elements are exact — rational
//! numbers for Q_p, rational functions in t for the Laurent case — and carry
//! their exact valuation. Finite-precision π-adic expansions are derived views,
//! never the source of truth.
//!
//! Both kinds additionally support an unramified extension of residue degree
//! m <= 6 (residue field F_{p^m}); the value group stays Z. For the p-adic
//! kind an extension element is a polynomial of degree < m in a generator w
//! with rational coefficients, reduced modulo a fixed monic integral lift of
//! the residue-field modulus. This realizes the unramified base changes the
//! construction occasionally needs without any general extension machinery.

mod elem;
pub mod residue;
mod tpoly;
mod val;

pub use elem::{Expansion, KElem};
pub use residue::{ResidueElem, ResidueField, MAX_RESIDUE_DEGREE};
pub use tpoly::TPoly;
pub use val::Val;

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The two supported base-field kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldKind {
    /// Q_p with uniformizer π = p.
    PadicRationals,
    /// F_q((t)) with uniformizer π = t.
    LaurentSeries,
}

/// Plain descriptor of a field: kind, residue characteristic, residue degree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub kind: FieldKind,
    /// Residue characteristic p (prime).
    pub p: u64,
    /// Residue degree m (1 for the plain base fields).
    pub residue_degree: u32,
}

impl FieldSpec {
    pub fn uniformizer_symbol(&self) -> &'static str {
        match self.kind {
            FieldKind::PadicRationals => "p",
            FieldKind::LaurentSeries => "t",
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FieldKind::PadicRationals => write!(f, "Qp:{}", self.p)?,
            FieldKind::LaurentSeries => write!(f, "Fpt:{}", self.p)?,
        }
        if self.residue_degree > 1 {
            write!(f, " (unramified, residue degree {})", self.residue_degree)?;
        }
        Ok(())
    }
}

pub(crate) struct FieldData {
    pub(crate) spec: FieldSpec,
    pub(crate) residue: ResidueField,
    /// For the p-adic kind with m >= 2: monic integral lift of the residue
    /// modulus, coefficients lifted to {0, ..., p-1}. Length m + 1.
    pub(crate) ext_modulus: Option<Vec<BigInt>>,
}

/// A constructed field: cheap to clone, carries the residue field tables.
#[derive(Clone)]
pub struct Field(pub(crate) Arc<FieldData>);

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.spec)
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.spec)
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.spec == other.0.spec
    }
}
impl Eq for Field {}

impl Field {
    /// Q_p.
    pub fn padic(p: u64) -> Result<Field> {
        Field::with_residue_degree(FieldKind::PadicRationals, p, 1)
    }

    /// F_p((t)).
    pub fn laurent(p: u64) -> Result<Field> {
        Field::with_residue_degree(FieldKind::LaurentSeries, p, 1)
    }

    /// The unramified extension of residue degree m (m <= 6).
    pub fn with_residue_degree(kind: FieldKind, p: u64, m: u32) -> Result<Field> {
        let residue = ResidueField::extension(p, m)?;
        let ext_modulus = if kind == FieldKind::PadicRationals && m >= 2 {
            Some(residue.modulus().iter().map(|&c| BigInt::from(c)).collect())
        } else {
            None
        };
        Ok(Field(Arc::new(FieldData {
            spec: FieldSpec {
                kind,
                p,
                residue_degree: m,
            },
            residue,
            ext_modulus,
        })))
    }

    /// The unramified extension of this field with residue degree m.
    pub fn unramified_extension(&self, m: u32) -> Result<Field> {
        if m % self.residue_degree() != 0 {
            return Err(Error::InvalidField(format!(
                "residue degree {m} is not a multiple of the base degree {}",
                self.residue_degree()
            )));
        }
        Field::with_residue_degree(self.kind(), self.char(), m)
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.0.spec
    }

    pub fn kind(&self) -> FieldKind {
        self.0.spec.kind
    }

    /// Residue characteristic.
    pub fn char(&self) -> u64 {
        self.0.spec.p
    }

    pub fn residue_degree(&self) -> u32 {
        self.0.spec.residue_degree
    }

    pub fn residue_field(&self) -> &ResidueField {
        &self.0.residue
    }

    /// Characteristic of the field itself (0 for Q_p, p for Laurent).
    pub fn field_char(&self) -> u64 {
        match self.kind() {
            FieldKind::PadicRationals => 0,
            FieldKind::LaurentSeries => self.char(),
        }
    }

    pub fn zero(&self) -> KElem {
        KElem::zero(self)
    }

    pub fn one(&self) -> KElem {
        KElem::from_i64(self, 1)
    }

    /// π^k.
    pub fn uniformizer_pow(&self, k: i64) -> KElem {
        KElem::uniformizer_pow(self, k)
    }

    pub fn uniformizer(&self) -> KElem {
        self.uniformizer_pow(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_construction() {
        assert!(Field::padic(3).is_ok());
        assert!(Field::padic(4).is_err());
        assert!(Field::laurent(5).is_ok());
        let l = Field::with_residue_degree(FieldKind::PadicRationals, 3, 2).unwrap();
        assert_eq!(l.residue_field().order(), 9);
        assert!(l.0.ext_modulus.is_some());
    }
}
