//! Field elements: exact kernels with cached valuations and optional
//! finite-precision tags for Hensel approximants.
//!
//! An element is either exact (its kernel IS the value) or approximate: the
//! kernel agrees with the represented value modulo π^N for a stated precision
//! N. Valuation reads on approximate elements are only trusted strictly below
//! the precision horizon; arithmetic propagates precision pessimistically.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::kfield::residue::ResidueElem;
use crate::kfield::tpoly::TPoly;
use crate::kfield::val::Val;
use crate::kfield::{Field, FieldKind};

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Kernel {
    /// Q_p: a rational number.
    Rat(BigRational),
    /// Unramified extension of Q_p: polynomial in the generator w, degree < m,
    /// rational coefficients, reduced modulo the integral lift of the residue
    /// modulus. Length always m.
    RatExt(Vec<BigRational>),
    /// F_q((t)): a rational function num/den, gcd-reduced, den monic nonzero.
    Laurent { num: TPoly, den: TPoly },
}

/// An element of K. Immutable after construction; all operations are pure.
#[derive(Clone)]
pub struct KElem {
    field: Field,
    kernel: Kernel,
    val: Val,
    /// None = exact. Some(N): kernel agrees with the value modulo π^N.
    precision: Option<i64>,
}

/// A truncated π-adic expansion: digits d_start, ..., d_{end-1} with
/// x ≡ Σ d_i π^i (mod π^end). Empty for 0 or when end <= v(x).
#[derive(Clone, Debug, PartialEq)]
pub struct Expansion {
    pub start: i64,
    pub digits: Vec<ResidueElem>,
}

impl fmt::Debug for KElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kernel_string())?;
        if let Some(n) = self.precision {
            write!(f, " (mod pi^{n})")?;
        }
        Ok(())
    }
}

impl fmt::Display for KElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kernel_string())
    }
}

impl PartialEq for KElem {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field
            && self.kernel == other.kernel
            && self.precision == other.precision
    }
}

impl KElem {
    // ---- constructors ----

    fn from_kernel(field: &Field, kernel: Kernel, precision: Option<i64>) -> KElem {
        let val = kernel_val(field, &kernel);
        KElem {
            field: field.clone(),
            kernel,
            val,
            precision,
        }
    }

    pub fn zero(field: &Field) -> KElem {
        let kernel = match field.kind() {
            FieldKind::PadicRationals => {
                if field.residue_degree() == 1 {
                    Kernel::Rat(BigRational::zero())
                } else {
                    Kernel::RatExt(vec![
                        BigRational::zero();
                        field.residue_degree() as usize
                    ])
                }
            }
            FieldKind::LaurentSeries => Kernel::Laurent {
                num: TPoly::zero(field.residue_field()),
                den: TPoly::one(field.residue_field()),
            },
        };
        KElem::from_kernel(field, kernel, None)
    }

    pub fn from_i64(field: &Field, n: i64) -> KElem {
        KElem::from_bigint(field, BigInt::from(n))
    }

    pub fn from_bigint(field: &Field, n: BigInt) -> KElem {
        match field.kind() {
            FieldKind::PadicRationals => {
                let r = BigRational::from(n);
                if field.residue_degree() == 1 {
                    KElem::from_kernel(field, Kernel::Rat(r), None)
                } else {
                    let mut c = vec![BigRational::zero(); field.residue_degree() as usize];
                    c[0] = r;
                    KElem::from_kernel(field, Kernel::RatExt(c), None)
                }
            }
            FieldKind::LaurentSeries => {
                // embed through the prime subfield of the residue field
                let p = BigInt::from(field.char());
                let rep = n.mod_floor(&p);
                let re = field
                    .residue_field()
                    .from_u64(rep.try_into().expect("residue fits in u64"));
                KElem::from_kernel(
                    field,
                    Kernel::Laurent {
                        num: TPoly::constant(re),
                        den: TPoly::one(field.residue_field()),
                    },
                    None,
                )
            }
        }
    }

    /// Exact rational a/b. For Laurent fields the denominator must be a unit
    /// modulo p.
    pub fn from_ratio(field: &Field, num: BigInt, den: BigInt) -> Result<KElem> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        match field.kind() {
            FieldKind::PadicRationals => {
                let r = BigRational::new(num, den);
                if field.residue_degree() == 1 {
                    Ok(KElem::from_kernel(field, Kernel::Rat(r), None))
                } else {
                    let mut c = vec![BigRational::zero(); field.residue_degree() as usize];
                    c[0] = r;
                    Ok(KElem::from_kernel(field, Kernel::RatExt(c), None))
                }
            }
            FieldKind::LaurentSeries => {
                let a = KElem::from_bigint(field, num);
                let b = KElem::from_bigint(field, den);
                a.div(&b)
            }
        }
    }

    pub fn from_ratio_i64(field: &Field, num: i64, den: i64) -> Result<KElem> {
        KElem::from_ratio(field, BigInt::from(num), BigInt::from(den))
    }

    /// π^k.
    pub fn uniformizer_pow(field: &Field, k: i64) -> KElem {
        match field.kind() {
            FieldKind::PadicRationals => {
                let p = BigInt::from(field.char());
                let r = if k >= 0 {
                    BigRational::from(p.pow(k as u32))
                } else {
                    BigRational::new(BigInt::one(), p.pow((-k) as u32))
                };
                if field.residue_degree() == 1 {
                    KElem::from_kernel(field, Kernel::Rat(r), None)
                } else {
                    let mut c = vec![BigRational::zero(); field.residue_degree() as usize];
                    c[0] = r;
                    KElem::from_kernel(field, Kernel::RatExt(c), None)
                }
            }
            FieldKind::LaurentSeries => {
                let rf = field.residue_field();
                let (num, den) = if k >= 0 {
                    (TPoly::t_pow(rf, k as usize), TPoly::one(rf))
                } else {
                    (TPoly::one(rf), TPoly::t_pow(rf, (-k) as usize))
                };
                KElem::from_kernel(field, Kernel::Laurent { num, den }, None)
            }
        }
    }

    /// Lift a residue element to an integral representative.
    pub fn from_residue(field: &Field, re: &ResidueElem) -> KElem {
        debug_assert!(re.field() == field.residue_field());
        match field.kind() {
            FieldKind::PadicRationals => {
                if field.residue_degree() == 1 {
                    KElem::from_bigint(field, BigInt::from(re.coeffs()[0]))
                } else {
                    let c = re
                        .coeffs()
                        .iter()
                        .map(|&x| BigRational::from(BigInt::from(x)))
                        .collect();
                    KElem::from_kernel(field, Kernel::RatExt(c), None)
                }
            }
            FieldKind::LaurentSeries => KElem::from_kernel(
                field,
                Kernel::Laurent {
                    num: TPoly::constant(re.clone()),
                    den: TPoly::one(field.residue_field()),
                },
                None,
            ),
        }
    }

    /// The generator w of an unramified p-adic extension (residue degree >= 2).
    pub fn ext_generator(field: &Field) -> Result<KElem> {
        match field.kind() {
            FieldKind::PadicRationals if field.residue_degree() >= 2 => {
                let mut c = vec![BigRational::zero(); field.residue_degree() as usize];
                c[1] = BigRational::one();
                Ok(KElem::from_kernel(field, Kernel::RatExt(c), None))
            }
            FieldKind::LaurentSeries if field.residue_degree() >= 2 => {
                Ok(KElem::from_residue(field, &field.residue_field().gen()))
            }
            _ => Err(Error::InvalidField(
                "the base field has no extension generator".into(),
            )),
        }
    }

    /// Tag an exact kernel as an approximation valid modulo π^n.
    pub fn with_precision(&self, n: i64) -> KElem {
        let mut out = self.clone();
        out.precision = Some(match self.precision {
            Some(m) => m.min(n),
            None => n,
        });
        out
    }

    /// Strip the approximation tag (asserting the kernel as exact).
    pub(crate) fn assume_exact(&self) -> KElem {
        let mut out = self.clone();
        out.precision = None;
        out
    }

    // ---- basic queries ----

    pub fn field(&self) -> &Field {
        &self.field
    }

    /// Exact valuation of the kernel.
    pub fn val(&self) -> Val {
        self.val
    }

    pub fn precision(&self) -> Option<i64> {
        self.precision
    }

    pub fn is_exact(&self) -> bool {
        self.precision.is_none()
    }

    /// True when the element is exactly the zero of K (exact kernel 0).
    pub fn is_exactly_zero(&self) -> bool {
        self.is_exact() && self.val.is_infinite()
    }

    /// Kernel is 0, i.e. the value vanishes to the known precision.
    pub fn kernel_is_zero(&self) -> bool {
        self.val.is_infinite()
    }

    /// The valuation with its certification status: exact elements always
    /// certify; approximate ones only below the precision horizon.
    pub fn certified_val(&self) -> Result<Val> {
        match self.precision {
            None => Ok(self.val),
            Some(n) => match self.val {
                Val::Finite(v) if v < n => Ok(Val::Finite(v)),
                _ => Err(Error::UncertifiedValuation),
            },
        }
    }

    /// A guaranteed lower bound for the valuation of the represented value.
    pub fn val_lower_bound(&self) -> Val {
        match self.precision {
            None => self.val,
            Some(n) => self.val.min(Val::Finite(n)),
        }
    }

    // ---- arithmetic ----

    fn check_field(&self, other: &KElem) {
        assert!(
            self.field == other.field,
            "kfield: elements of different fields combined"
        );
    }

    pub fn add(&self, other: &KElem) -> KElem {
        self.check_field(other);
        let kernel = kernel_add(&self.field, &self.kernel, &other.kernel);
        let precision = min_prec(self.precision, other.precision);
        KElem::from_kernel(&self.field, kernel, precision)
    }

    pub fn sub(&self, other: &KElem) -> KElem {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> KElem {
        let kernel = kernel_neg(&self.field, &self.kernel);
        KElem {
            field: self.field.clone(),
            kernel,
            val: self.val,
            precision: self.precision,
        }
    }

    pub fn mul(&self, other: &KElem) -> KElem {
        self.check_field(other);
        let kernel = kernel_mul(&self.field, &self.kernel, &other.kernel);
        // error(xy) = x e_y + y e_x + e_x e_y
        let precision = match (self.precision, other.precision) {
            (None, None) => None,
            _ => {
                let na = self.precision.map_or(Val::Infinite, Val::Finite);
                let nb = other.precision.map_or(Val::Infinite, Val::Finite);
                let va = self.val.min(na);
                let vb = other.val.min(nb);
                let bound = (va + nb).min(vb + na);
                bound.finite()
            }
        };
        KElem::from_kernel(&self.field, kernel, precision)
    }

    pub fn inv(&self) -> Result<KElem> {
        if self.kernel_is_zero() {
            return if self.is_exact() {
                Err(Error::DivisionByZero)
            } else {
                Err(Error::UncertifiedValuation)
            };
        }
        if let Some(n) = self.precision {
            // need a certified valuation to control 1/x
            let v = self.val.expect_finite("inverse of nonzero kernel");
            if v >= n {
                return Err(Error::UncertifiedValuation);
            }
        }
        let kernel = kernel_inv(&self.field, &self.kernel)?;
        let precision = self.precision.map(|n| {
            let v = self.val.expect_finite("inverse");
            n - 2 * v
        });
        Ok(KElem::from_kernel(&self.field, kernel, precision))
    }

    pub fn div(&self, other: &KElem) -> Result<KElem> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow(&self, e: i64) -> Result<KElem> {
        if e < 0 {
            return self.inv()?.pow(-e);
        }
        let mut acc = KElem::from_i64(&self.field, 1);
        let mut base = self.clone();
        let mut e = e as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        Ok(acc)
    }

    /// Multiply by π^k (exact dilation).
    pub fn shift(&self, k: i64) -> KElem {
        if k == 0 {
            return self.clone();
        }
        let pi = KElem::uniformizer_pow(&self.field, k);
        let mut out = self.mul(&pi);
        // shifting by an exact power only translates the precision window
        out.precision = self.precision.map(|n| n + k);
        out
    }

    // ---- residues and expansions ----

    /// Image in the residue field. Requires v(x) >= 0.
    pub fn residue(&self) -> Result<ResidueElem> {
        if let Some(n) = self.precision {
            if n < 1 {
                return Err(Error::UncertifiedValuation);
            }
        }
        match self.val {
            Val::Finite(v) if v < 0 => return Err(Error::NegativeValuation(v)),
            Val::Infinite => return Ok(self.field.residue_field().zero()),
            _ => {}
        }
        let digits = self.unit_digits(1)?;
        if self.val > Val::Finite(0) {
            return Ok(self.field.residue_field().zero());
        }
        Ok(digits
            .into_iter()
            .next()
            .unwrap_or_else(|| self.field.residue_field().zero()))
    }

    /// Truncated π-adic expansion: digits d_{v(x)}, ..., d_{N-1} with
    /// x ≡ Σ d_i π^i (mod π^N). Empty when x = 0 or N <= v(x).
    pub fn expand(&self, n: i64) -> Result<Expansion> {
        if let Some(prec) = self.precision {
            if n > prec {
                return Err(Error::UncertifiedValuation);
            }
        }
        let v = match self.val {
            Val::Infinite => {
                return Ok(Expansion {
                    start: 0,
                    digits: vec![],
                })
            }
            Val::Finite(v) => v,
        };
        if n <= v {
            return Ok(Expansion {
                start: v,
                digits: vec![],
            });
        }
        let count = (n - v) as usize;
        let digits = self.unit_digits(count)?;
        Ok(Expansion { start: v, digits })
    }

    /// First `count` digits of the unit part x π^{-v(x)}. x must be nonzero.
    fn unit_digits(&self, count: usize) -> Result<Vec<ResidueElem>> {
        let v = self.val.expect_finite("digits of zero");
        let rf = self.field.residue_field().clone();
        match &self.kernel {
            Kernel::Rat(r) => {
                let p = BigInt::from(self.field.char());
                let modulus = p.pow(count as u32);
                let (num, den) = strip_p(r, &self.field.char(), v);
                let rep = (num * mod_inverse(&den, &modulus)?).mod_floor(&modulus);
                Ok(base_p_digits(&rep, &p, count)
                    .into_iter()
                    .map(|d| rf.from_u64(d))
                    .collect())
            }
            Kernel::RatExt(coords) => {
                let p = BigInt::from(self.field.char());
                let modulus = p.pow(count as u32);
                let mut reps = Vec::with_capacity(coords.len());
                for c in coords {
                    if c.is_zero() {
                        reps.push(vec![0u64; count]);
                        continue;
                    }
                    let (num, den) = strip_p_to(c, &self.field.char(), v);
                    let rep = (num * mod_inverse(&den, &modulus)?).mod_floor(&modulus);
                    reps.push(base_p_digits(&rep, &p, count));
                }
                Ok((0..count)
                    .map(|j| {
                        let coeffs: Vec<u64> = reps.iter().map(|r| r[j]).collect();
                        rf.from_coeffs(&coeffs)
                    })
                    .collect())
            }
            Kernel::Laurent { num, den } => {
                let a = num.ord().expect("nonzero numerator");
                let b = den.ord().unwrap_or(0);
                debug_assert_eq!(a as i64 - b as i64, v);
                // shift away t powers, divide as power series
                let nu = TPoly::from_coeffs(&rf, num.coeffs[a..].to_vec());
                let de = TPoly::from_coeffs(&rf, den.coeffs[b..].to_vec());
                let inv = de.series_inv(count)?;
                let series = nu.mul(&inv).truncate(count);
                Ok((0..count).map(|i| series.coeff(i)).collect())
            }
        }
    }

    /// Canonical exact representative of the kernel modulo π^N, for elements
    /// with v >= 0: an integer (mod p^N), an integral coordinate vector, or a
    /// polynomial in t of degree < N.
    pub(crate) fn rep_mod(&self, n: i64) -> Result<KElem> {
        assert!(n > 0);
        if self.val >= Val::Finite(n) || self.val.is_infinite() {
            return Ok(KElem::zero(&self.field));
        }
        let v = self.val.expect_finite("rep_mod");
        if v < 0 {
            return Err(Error::NegativeValuation(v));
        }
        let digits = self.expandable_digits(n)?;
        Ok(digits)
    }

    fn expandable_digits(&self, n: i64) -> Result<KElem> {
        let rf = self.field.residue_field().clone();
        let v = self.val.expect_finite("rep digits");
        match &self.kernel {
            Kernel::Rat(r) => {
                let p = BigInt::from(self.field.char());
                let modulus = p.pow(n as u32);
                let den = r.denom().clone();
                let rep = (r.numer() * mod_inverse(&den, &modulus)?).mod_floor(&modulus);
                Ok(KElem::from_kernel(
                    &self.field,
                    Kernel::Rat(BigRational::from(rep)),
                    None,
                ))
            }
            Kernel::RatExt(coords) => {
                let p = BigInt::from(self.field.char());
                let modulus = p.pow(n as u32);
                let reps = coords
                    .iter()
                    .map(|c| {
                        if c.is_zero() {
                            Ok(BigRational::zero())
                        } else {
                            let rep = (c.numer() * mod_inverse(c.denom(), &modulus)?)
                                .mod_floor(&modulus);
                            Ok(BigRational::from(rep))
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(KElem::from_kernel(&self.field, Kernel::RatExt(reps), None))
            }
            Kernel::Laurent { .. } => {
                let count = (n - v) as usize;
                let unit = self.unit_digits(count)?;
                let mut coeffs = vec![rf.zero(); v as usize];
                coeffs.extend(unit);
                let num = TPoly::from_coeffs(&rf, coeffs);
                Ok(KElem::from_kernel(
                    &self.field,
                    Kernel::Laurent {
                        num,
                        den: TPoly::one(&rf),
                    },
                    None,
                ))
            }
        }
    }

    /// Replace the kernel by its canonical representative modulo π^N and cap
    /// the precision at N. Controls kernel growth in iterative refinements.
    pub fn compress(&self, n: i64) -> KElem {
        let new_prec = Some(match self.precision {
            Some(m) => m.min(n),
            None => n,
        });
        let np = new_prec.unwrap();
        if self.val >= Val::Finite(np) || self.val.is_infinite() {
            let mut z = KElem::zero(&self.field);
            z.precision = new_prec;
            return z;
        }
        let v = self.val.expect_finite("compress");
        let result = if v >= 0 {
            self.assume_exact().rep_mod(np)
        } else {
            self.assume_exact()
                .shift(-v)
                .rep_mod(np - v)
                .map(|r| r.shift(v))
        };
        match result {
            Ok(mut r) => {
                r.precision = new_prec;
                r
            }
            Err(_) => self.clone(),
        }
    }

    // ---- ordering & formatting ----

    /// Deterministic total order for report output: valuation ascending
    /// (infinite last), then digit-lexicographic, exact before approximate.
    pub fn canonical_cmp(&self, other: &KElem) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match self.val.cmp(&other.val) {
            Ordering::Equal => {}
            o => return o,
        }
        if let (Val::Finite(v), Val::Finite(_)) = (self.val, other.val) {
            let cap = 48i64;
            let horizon = [self.precision, other.precision]
                .iter()
                .flatten()
                .copied()
                .min()
                .unwrap_or(v + cap)
                .min(v + cap);
            if horizon > v {
                let da = self.expand(horizon);
                let db = other.expand(horizon);
                if let (Ok(da), Ok(db)) = (da, db) {
                    for (a, b) in da.digits.iter().zip(db.digits.iter()) {
                        match a.coeffs().cmp(b.coeffs()) {
                            Ordering::Equal => {}
                            o => return o,
                        }
                    }
                }
            }
        }
        match (self.precision, other.precision) {
            (None, Some(_)) => Ordering::Less,
            (Some(_), None) => Ordering::Greater,
            _ => format!("{:?}", self.kernel).cmp(&format!("{:?}", other.kernel)),
        }
    }

    /// Attempt to reconstruct a small exact rational from an approximate
    /// element of Q_p known modulo π^N (lattice reduction on (p^N, rep)).
    /// Returns None for other kernel kinds, exact elements, or when no small
    /// candidate exists; any candidate must still be verified by the caller.
    pub fn rational_reconstruct(&self) -> Option<KElem> {
        let n = self.precision?;
        if !matches!(self.kernel, Kernel::Rat(_)) || self.kernel_is_zero() {
            return None;
        }
        let v = self.val.finite()?;
        let digits = n - v;
        if digits < 8 {
            return None;
        }
        // unit part modulo p^(digits)
        let unit = self.assume_exact().shift(-v);
        let p = BigInt::from(self.field.char());
        let modulus = p.pow(digits as u32);
        let rep = match unit.rep_mod(digits) {
            Ok(r) => match &r.kernel {
                Kernel::Rat(x) => x.numer().clone(),
                _ => return None,
            },
            Err(_) => return None,
        };
        let (num, den) = rational_reconstruct_int(&rep, &modulus)?;
        if den.is_zero() || vp_check_unit(&den, self.field.char()).is_none() {
            return None;
        }
        let cand = BigRational::new(num, den);
        let out = KElem::from_kernel(&self.field, Kernel::Rat(cand), None).shift(v);
        Some(out)
    }

    /// d/dt of an exact Laurent kernel; None for other kinds. The kernel of
    /// this derivation on F_q(t) is exactly the subfield of p-th powers.
    pub fn derivative_t(&self) -> Option<KElem> {
        let (num, den, field) = self.laurent_parts()?;
        let nt = num.derivative_t();
        let dt = den.derivative_t();
        // (n/d)' = (n' d - n d') / d^2
        let new_num = nt.mul(&den).sub(&num.mul(&dt));
        let new_den = den.mul(&den);
        Some(KElem::from_laurent_parts(&field, new_num, new_den))
    }

    /// p-th root of an exact Laurent kernel when it is a p-th power in F_q(t).
    pub fn pth_root_kernel(&self) -> Option<KElem> {
        let (num, den, field) = self.laurent_parts()?;
        if num.is_zero() {
            return Some(KElem::zero(&field));
        }
        let rn = num.pth_root()?;
        let rd = den.pth_root()?;
        Some(KElem::from_laurent_parts(&field, rn, rd))
    }

    /// Laurent kernel pieces (numerator, denominator); None for other kinds
    /// or approximate elements.
    pub(crate) fn laurent_parts(&self) -> Option<(TPoly, TPoly, Field)> {
        if !self.is_exact() {
            return None;
        }
        match &self.kernel {
            Kernel::Laurent { num, den } => {
                Some((num.clone(), den.clone(), self.field.clone()))
            }
            _ => None,
        }
    }

    pub(crate) fn from_laurent_parts(field: &Field, num: TPoly, den: TPoly) -> KElem {
        let kernel = laurent_reduced(field, num, den);
        KElem::from_kernel(field, kernel, None)
    }

    pub fn kernel_string(&self) -> String {
        match &self.kernel {
            Kernel::Rat(r) => {
                if r.denom().is_one() {
                    format!("{}", r.numer())
                } else {
                    format!("{}/{}", r.numer(), r.denom())
                }
            }
            Kernel::RatExt(coords) => {
                let mut parts = vec![];
                for (i, c) in coords.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    let cs = if c.denom().is_one() {
                        format!("{}", c.numer())
                    } else {
                        format!("{}/{}", c.numer(), c.denom())
                    };
                    parts.push(match i {
                        0 => cs,
                        1 => format!("{cs}*w"),
                        _ => format!("{cs}*w^{i}"),
                    });
                }
                if parts.is_empty() {
                    "0".into()
                } else {
                    parts.join(" + ")
                }
            }
            Kernel::Laurent { num, den } => {
                let fmt_poly = |p: &TPoly| -> String {
                    if p.is_zero() {
                        return "0".into();
                    }
                    let mut parts = vec![];
                    for (i, c) in p.coeffs.iter().enumerate() {
                        if c.is_zero() {
                            continue;
                        }
                        let cs = format!("{c}");
                        let cs = if cs.contains('+') {
                            format!("({cs})")
                        } else {
                            cs
                        };
                        parts.push(match i {
                            0 => cs,
                            1 if cs == "1" => "t".into(),
                            1 => format!("{cs}*t"),
                            _ if cs == "1" => format!("t^{i}"),
                            _ => format!("{cs}*t^{i}"),
                        });
                    }
                    parts.join(" + ")
                };
                if den.degree() == Some(0) && den.coeff(0).is_one() {
                    fmt_poly(num)
                } else {
                    format!("({})/({})", fmt_poly(num), fmt_poly(den))
                }
            }
        }
    }
}

impl Serialize for KElem {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("KElem", 2)?;
        s.serialize_field("kernel", &self.kernel_string())?;
        match self.val {
            Val::Finite(v) => s.serialize_field("val", &v)?,
            Val::Infinite => s.serialize_field("val", "inf")?,
        }
        s.end()
    }
}

// ---- kernel helpers ----

fn kernel_val(field: &Field, kernel: &Kernel) -> Val {
    match kernel {
        Kernel::Rat(r) => {
            if r.is_zero() {
                Val::Infinite
            } else {
                let p = field.char();
                Val::Finite(vp_bigint(r.numer(), p) - vp_bigint(r.denom(), p))
            }
        }
        Kernel::RatExt(coords) => {
            let p = field.char();
            coords
                .iter()
                .filter(|c| !c.is_zero())
                .map(|c| Val::Finite(vp_bigint(c.numer(), p) - vp_bigint(c.denom(), p)))
                .min()
                .unwrap_or(Val::Infinite)
        }
        Kernel::Laurent { num, den } => match num.ord() {
            None => Val::Infinite,
            Some(a) => Val::Finite(a as i64 - den.ord().unwrap_or(0) as i64),
        },
    }
}

fn vp_bigint(n: &BigInt, p: u64) -> i64 {
    debug_assert!(!n.is_zero());
    let p = BigInt::from(p);
    let mut v = 0i64;
    let mut cur = n.abs();
    // block-division to cut the number of bignum divisions for large v
    let block = p.pow(16);
    loop {
        let (q, r) = cur.div_rem(&block);
        if r.is_zero() {
            v += 16;
            cur = q;
        } else {
            break;
        }
    }
    loop {
        let (q, r) = cur.div_rem(&p);
        if r.is_zero() {
            v += 1;
            cur = q;
        } else {
            break;
        }
    }
    v
}

fn kernel_neg(field: &Field, k: &Kernel) -> Kernel {
    match k {
        Kernel::Rat(r) => Kernel::Rat(-r.clone()),
        Kernel::RatExt(c) => Kernel::RatExt(c.iter().map(|x| -x.clone()).collect()),
        Kernel::Laurent { num, den } => {
            let _ = field;
            Kernel::Laurent {
                num: num.neg(),
                den: den.clone(),
            }
        }
    }
}

fn kernel_add(field: &Field, a: &Kernel, b: &Kernel) -> Kernel {
    match (a, b) {
        (Kernel::Rat(x), Kernel::Rat(y)) => Kernel::Rat(x + y),
        (Kernel::RatExt(x), Kernel::RatExt(y)) => {
            Kernel::RatExt(x.iter().zip(y).map(|(u, v)| u + v).collect())
        }
        (Kernel::Laurent { num: n1, den: d1 }, Kernel::Laurent { num: n2, den: d2 }) => {
            let num = n1.mul(d2).add(&n2.mul(d1));
            let den = d1.mul(d2);
            laurent_reduced(field, num, den)
        }
        _ => unreachable!("mismatched kernels"),
    }
}

fn kernel_mul(field: &Field, a: &Kernel, b: &Kernel) -> Kernel {
    match (a, b) {
        (Kernel::Rat(x), Kernel::Rat(y)) => Kernel::Rat(x * y),
        (Kernel::RatExt(x), Kernel::RatExt(y)) => {
            let h = field.0.ext_modulus.as_ref().expect("extension modulus");
            Kernel::RatExt(qext_mul(x, y, h))
        }
        (Kernel::Laurent { num: n1, den: d1 }, Kernel::Laurent { num: n2, den: d2 }) => {
            laurent_reduced(field, n1.mul(n2), d1.mul(d2))
        }
        _ => unreachable!("mismatched kernels"),
    }
}

fn kernel_inv(field: &Field, k: &Kernel) -> Result<Kernel> {
    match k {
        Kernel::Rat(r) => {
            if r.is_zero() {
                Err(Error::DivisionByZero)
            } else {
                Ok(Kernel::Rat(r.recip()))
            }
        }
        Kernel::RatExt(c) => {
            let h = field.0.ext_modulus.as_ref().expect("extension modulus");
            qext_inv(c, h).map(Kernel::RatExt)
        }
        Kernel::Laurent { num, den } => {
            if num.is_zero() {
                Err(Error::DivisionByZero)
            } else {
                Ok(laurent_reduced(field, den.clone(), num.clone()))
            }
        }
    }
}

fn laurent_reduced(field: &Field, num: TPoly, den: TPoly) -> Kernel {
    debug_assert!(!den.is_zero());
    let g = num.gcd(&den);
    let (num, den) = if g.degree().map_or(false, |d| d > 0) {
        let (n, r) = num.divrem(&g).expect("gcd divides");
        debug_assert!(r.is_zero());
        let (d, r) = den.divrem(&g).expect("gcd divides");
        debug_assert!(r.is_zero());
        (n, d)
    } else {
        (num, den)
    };
    let _ = field;
    // normalize denominator monic
    let lead = den.coeff(den.degree().unwrap());
    if lead.is_one() {
        Kernel::Laurent { num, den }
    } else {
        let inv = lead.inv().expect("leading coefficient nonzero");
        Kernel::Laurent {
            num: num.scale(&inv),
            den: den.scale(&inv),
        }
    }
}

// ---- Q[w]/(H) arithmetic for unramified p-adic extensions ----

fn qext_mul(a: &[BigRational], b: &[BigRational], h: &[BigInt]) -> Vec<BigRational> {
    let m = a.len();
    let mut prod = vec![BigRational::zero(); 2 * m - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if y.is_zero() {
                continue;
            }
            prod[i + j] += x * y;
        }
    }
    qext_reduce(prod, h, m)
}

fn qext_reduce(mut v: Vec<BigRational>, h: &[BigInt], m: usize) -> Vec<BigRational> {
    // h is monic of degree m
    for d in (m..v.len()).rev() {
        if v[d].is_zero() {
            continue;
        }
        let c = v[d].clone();
        v[d] = BigRational::zero();
        for i in 0..m {
            let hi = BigRational::from(h[i].clone());
            v[d - m + i] -= &c * hi;
        }
    }
    v.truncate(m);
    v.resize(m, BigRational::zero());
    v
}

/// Inverse in Q[w]/(H) by the extended Euclidean algorithm. H is irreducible
/// over Q (it is irreducible modulo p), so any nonzero element is invertible.
fn qext_inv(a: &[BigRational], h: &[BigInt]) -> Result<Vec<BigRational>> {
    let m = a.len();
    if a.iter().all(|c| c.is_zero()) {
        return Err(Error::DivisionByZero);
    }
    // polynomials as Vec<BigRational>, ascending, trimmed
    let trim = |v: &mut Vec<BigRational>| {
        while v.last().map_or(false, |c| c.is_zero()) {
            v.pop();
        }
    };
    let mut r0: Vec<BigRational> = h.iter().map(|c| BigRational::from(c.clone())).collect();
    let mut r1: Vec<BigRational> = a.to_vec();
    trim(&mut r1);
    let mut s0: Vec<BigRational> = vec![];
    let mut s1: Vec<BigRational> = vec![BigRational::one()];
    while !r1.is_empty() {
        // divide r0 by r1
        let mut rem = r0.clone();
        let mut quot: Vec<BigRational> = vec![BigRational::zero(); rem.len().saturating_sub(r1.len()) + 1];
        let d1 = r1.len() - 1;
        let lead = r1[d1].clone();
        while rem.len() >= r1.len() && !rem.is_empty() {
            let dr = rem.len() - 1;
            let c = &rem[dr] / &lead;
            let k = dr - d1;
            quot[k] = c.clone();
            for i in 0..=d1 {
                let t = &c * &r1[i];
                rem[k + i] -= t;
            }
            trim(&mut rem);
        }
        trim(&mut quot);
        // s_{k+1} = s_{k-1} - q s_k
        let mut s2 = s0.clone();
        let need = quot.len() + s1.len();
        s2.resize(s2.len().max(need.saturating_sub(1)).max(s1.len()), BigRational::zero());
        for (i, q) in quot.iter().enumerate() {
            if q.is_zero() {
                continue;
            }
            for (j, s) in s1.iter().enumerate() {
                let t = q * s;
                s2[i + j] -= t;
            }
        }
        trim(&mut s2);
        r0 = r1;
        r1 = rem;
        s0 = s1;
        s1 = s2;
    }
    // r0 is the gcd: a nonzero constant since H is irreducible
    if r0.len() != 1 {
        return Err(Error::InternalInconsistency(
            "extension modulus is not irreducible over Q".into(),
        ));
    }
    let c = r0[0].recip();
    let mut out: Vec<BigRational> = s0.iter().map(|s| s * &c).collect();
    out.resize(m, BigRational::zero());
    Ok(out)
}

fn min_prec(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (None, None) => None,
        (Some(x), None) | (None, Some(x)) => Some(x),
        (Some(x), Some(y)) => Some(x.min(y)),
    }
}

/// Write r = p^v * num/den with num, den coprime to p; returns (num, den).
fn strip_p(r: &BigRational, p: &u64, v: i64) -> (BigInt, BigInt) {
    strip_p_to(r, p, v)
}

/// Like strip_p but shifts by a given valuation v (coordinates of extension
/// elements share the global v, so individual coordinates keep p factors).
fn strip_p_to(r: &BigRational, p: &u64, v: i64) -> (BigInt, BigInt) {
    let pb = BigInt::from(*p);
    let mut num = r.numer().clone();
    let mut den = r.denom().clone();
    let mut shift = -v;
    // clear all p's from den, moving them to the shift
    loop {
        let (q, rem) = den.div_rem(&pb);
        if rem.is_zero() {
            den = q;
            shift -= 1;
        } else {
            break;
        }
    }
    // apply shift to num
    if shift >= 0 {
        num *= pb.pow(shift as u32);
    } else {
        // num must be divisible by p^(-shift)
        let d = pb.pow((-shift) as u32);
        let (q, rem) = num.div_rem(&d);
        debug_assert!(rem.is_zero(), "valuation bookkeeping broken");
        num = q;
    }
    (num, den)
}

fn base_p_digits(n: &BigInt, p: &BigInt, count: usize) -> Vec<u64> {
    let mut digits = Vec::with_capacity(count);
    let mut cur = n.clone();
    for _ in 0..count {
        let (q, r) = cur.div_rem(p);
        digits.push(r.try_into().expect("digit fits in u64"));
        cur = q;
    }
    digits
}

fn mod_inverse(a: &BigInt, modulus: &BigInt) -> Result<BigInt> {
    let e = a.extended_gcd(modulus);
    if !e.gcd.is_one() {
        return Err(Error::DivisionByZero);
    }
    Ok(e.x.mod_floor(modulus))
}

/// Half-gcd rational reconstruction: find n/d with n ≡ r d (mod m),
/// |n|, |d| <= sqrt(m/2). Returns None when no candidate surfaces.
fn rational_reconstruct_int(r: &BigInt, m: &BigInt) -> Option<(BigInt, BigInt)> {
    let bound = m.sqrt() / BigInt::from(2);
    let (mut r0, mut r1) = (m.clone(), r.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        if r1.is_zero() {
            return None;
        }
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        r0 = r1;
        r1 = r2;
        t0 = t1;
        t1 = t2;
    }
    if t1.is_zero() || t1.abs() > bound {
        return None;
    }
    if t1.is_negative() {
        Some((-r1, -t1))
    } else {
        Some((r1, t1))
    }
}

fn vp_check_unit(n: &BigInt, p: u64) -> Option<()> {
    let p = BigInt::from(p);
    if (n % p).is_zero() {
        None
    } else {
        Some(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kfield::Field;

    fn q3() -> Field {
        Field::padic(3).unwrap()
    }

    #[test]
    fn valuation_examples() {
        let f = q3();
        // p^2 -> 2
        assert_eq!(f.uniformizer_pow(2).val(), Val::Finite(2));
        // 0 -> inf
        assert_eq!(f.zero().val(), Val::Infinite);
        // 9/2 in Q_3 -> 2
        let x = KElem::from_ratio_i64(&f, 9, 2).unwrap();
        assert_eq!(x.val(), Val::Finite(2));
    }

    #[test]
    fn residue_examples() {
        let f = q3();
        assert_eq!(
            KElem::from_i64(&f, 7).residue().unwrap(),
            f.residue_field().from_u64(1)
        );
        assert_eq!(
            KElem::from_i64(&f, 3).residue().unwrap(),
            f.residue_field().from_u64(0)
        );
        // 5/7 in Q_3: 5 * 7^{-1} = 2 * 1 = 2
        let x = KElem::from_ratio_i64(&f, 5, 7).unwrap();
        assert_eq!(x.residue().unwrap(), f.residue_field().from_u64(2));
        // negative valuation errors
        let y = KElem::from_ratio_i64(&f, 1, 3).unwrap();
        assert!(matches!(y.residue(), Err(Error::NegativeValuation(-1))));
    }

    #[test]
    fn arithmetic_examples() {
        let f = q3();
        let one = f.one();
        let p = f.uniformizer();
        // (1 + p)(1 - p) = 1 - p^2
        let lhs = one.add(&p).mul(&one.sub(&p));
        let rhs = one.sub(&p.mul(&p));
        assert_eq!(lhs, rhs);
        // x/x = 1
        let x = KElem::from_ratio_i64(&f, 22, 7).unwrap();
        assert_eq!(x.div(&x).unwrap(), one);
        // v(3 + 9) = 1 (ultrametric equality case)
        let s = KElem::from_i64(&f, 3).add(&KElem::from_i64(&f, 9));
        assert_eq!(s.val(), Val::Finite(1));
    }

    #[test]
    fn expansion_geometric_series() {
        // 1/(1-3) = -1/2 = 1 + 3 + 9 + 27 + ... in Q_3
        let f = q3();
        let x = KElem::from_ratio_i64(&f, 1, -2).unwrap();
        let e = x.expand(4).unwrap();
        assert_eq!(e.start, 0);
        let one = f.residue_field().from_u64(1);
        assert_eq!(e.digits, vec![one.clone(), one.clone(), one.clone(), one]);
        // oracle: -1/2 mod 81 is 40 = 1 + 3 + 9 + 27
        let digits_value: i64 = e
            .digits
            .iter()
            .enumerate()
            .map(|(i, d)| (d.as_u64().unwrap() as i64) * 3i64.pow(i as u32))
            .sum();
        assert_eq!(digits_value, 40);
        assert_eq!((40 * -2i64).rem_euclid(81), 1); // 40 ≡ -1/2 (mod 81)
    }

    #[test]
    fn expansion_edge_cases() {
        let f = q3();
        // x = p^2, N = 1: precision below the valuation, empty expansion
        let x = f.uniformizer_pow(2);
        let e = x.expand(1).unwrap();
        assert!(e.digits.is_empty());
        // x = 0
        let e = f.zero().expand(10).unwrap();
        assert!(e.digits.is_empty());
        // negative valuation start
        let y = KElem::from_ratio_i64(&f, 1, 3).unwrap();
        let e = y.expand(2).unwrap();
        assert_eq!(e.start, -1);
        assert_eq!(e.digits.len(), 3);
    }

    #[test]
    fn laurent_arithmetic() {
        let f = Field::laurent(3).unwrap();
        let t = f.uniformizer();
        let one = f.one();
        // 1/(1-t) has valuation 0; its digits are all 1
        let x = one.div(&one.sub(&t)).unwrap();
        let e = x.expand(5).unwrap();
        assert_eq!(e.start, 0);
        assert!(e.digits.iter().all(|d| d.is_one()));
        // v(t^-2 * (1+t)) = -2
        let y = f.uniformizer_pow(-2).mul(&one.add(&t));
        assert_eq!(y.val(), Val::Finite(-2));
        assert_eq!(y.mul(&y.inv().unwrap()), one);
    }

    #[test]
    fn unramified_extension_arithmetic() {
        let f = Field::with_residue_degree(FieldKind::PadicRationals, 3, 2).unwrap();
        let w = KElem::ext_generator(&f).unwrap();
        // w satisfies the lifted modulus: check w is a unit with residue = gen
        assert_eq!(w.val(), Val::Finite(0));
        assert_eq!(w.residue().unwrap(), f.residue_field().gen());
        let x = w.add(&f.one());
        let y = x.inv().unwrap();
        assert_eq!(x.mul(&y), f.one());
        // valuation = min coordinate valuation
        let z = w.mul(&f.uniformizer_pow(3)).add(&f.uniformizer_pow(5));
        assert_eq!(z.val(), Val::Finite(3));
    }

    #[test]
    fn precision_propagation() {
        let f = q3();
        let a = KElem::from_i64(&f, 10).with_precision(4); // 10 + O(3^4)
        let b = KElem::from_i64(&f, 3).with_precision(6); // 3 + O(3^6)
        let s = a.add(&b);
        assert_eq!(s.precision(), Some(4));
        let m = a.mul(&b);
        // v(a)=0, v(b)=1: error bound min(0+6, 1+4) = 5
        assert_eq!(m.precision(), Some(5));
        assert!(a.certified_val().is_ok());
        let tiny = f.uniformizer_pow(5).with_precision(4);
        assert!(tiny.certified_val().is_err());
        // inverse shifts precision by -2v
        let u = KElem::from_i64(&f, 6).with_precision(5);
        let ui = u.inv().unwrap();
        assert_eq!(ui.precision(), Some(3));
        assert_eq!(ui.val(), Val::Finite(-1));
    }

    #[test]
    fn compress_keeps_value_mod_pi_n() {
        let f = q3();
        let x = KElem::from_ratio_i64(&f, 22, 7).unwrap();
        let c = x.compress(8);
        assert_eq!(c.precision(), Some(8));
        let diff = x.sub(&c.assume_exact());
        assert!(diff.val() >= Val::Finite(8));
        // negative valuation element
        let y = KElem::from_ratio_i64(&f, 5, 9).unwrap();
        let c = y.compress(6);
        let diff = y.sub(&c.assume_exact());
        assert!(diff.val() >= Val::Finite(6));
        assert_eq!(c.val(), Val::Finite(-2));
    }

    #[test]
    fn ultrametric_property_random() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let f = q3();
        for _ in 0..2000 {
            let a = KElem::from_ratio_i64(&f, rng.gen_range(-500..500), rng.gen_range(1..300))
                .unwrap();
            let b = KElem::from_ratio_i64(&f, rng.gen_range(-500..500), rng.gen_range(1..300))
                .unwrap();
            let s = a.add(&b);
            assert!(s.val() >= a.val().min(b.val()));
            if a.val() != b.val() {
                assert_eq!(s.val(), a.val().min(b.val()));
            }
            if !a.kernel_is_zero() && !b.kernel_is_zero() {
                assert_eq!(a.mul(&b).val(), a.val() + b.val());
            }
        }
    }
}
