//! Exact-arithmetic engine for deciding whether a cubic polynomial map over a
//! discretely valued non-Archimedean field admits a weak Néron model, computing
//! its reduction type and blowup trace, and constructing higher-degree maps
//! whose Julia dynamics escape the fixed-point criterion.
//!
//! Layers, bottom up:
//! - [`kfield`]: exact elements of Q_p or F_q((t)) with exact valuations,
//!   residue fields F_{p^m}, and finite-precision π-adic views.
//! - [`respoly`]: polynomial algebra over K and over the residue field.
//! - [`newton`]: Newton polygons, Hensel lifting, and the K-rational root finder.
//! - [`dynamics`]: fixed/periodic points, multipliers, affine conjugation.
//! - [`wnm`]: the decision engine with its two cross-checked criteria and the
//!   blowup model trace.
//! - [`counterex`]: degree >= 4 maps with non-repelling fixed points and
//!   non-empty Julia dynamics, with certified subshift witnesses.
//! - [`parse`]: the element/polynomial literal grammar used by the CLI.

pub mod counterex;
pub mod dynamics;
pub mod error;
pub mod kfield;
pub mod newton;
pub mod parse;
pub mod respoly;
pub mod wnm;

pub use error::{Error, Result};
pub use kfield::{Expansion, Field, FieldKind, FieldSpec, KElem, ResidueElem, ResidueField, Val};
