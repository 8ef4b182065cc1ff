//! Finite residue fields k = F_{p^m}.
//!
//! m = 1 uses direct modular arithmetic. For 2 <= m <= 6 the field is backed
//! by log/antilog tables over a generator, built once at construction; the
//! defining modulus is an irreducible monic polynomial of degree m over F_p
//! found deterministically. Elements are coefficient vectors in the basis
//! 1, g, ..., g^{m-1} where g is the class of x modulo the defining polynomial.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Largest table-backed field size p^m.
const TABLE_BOUND: u64 = 1 << 20;

/// Maximal supported residue extension degree.
pub const MAX_RESIDUE_DEGREE: u32 = 6;

#[derive(Debug)]
struct Tables {
    /// log[packed] = discrete log of the element, undefined at 0.
    log: Vec<u32>,
    /// antilog[k] = packed representation of g_star^k, k in 0..q-1.
    antilog: Vec<u32>,
}

#[derive(Debug)]
struct RfData {
    p: u64,
    m: u32,
    /// Monic defining polynomial of degree m, coefficients in F_p
    /// (modulus[i] is the coefficient of x^i; modulus[m] = 1).
    /// For m = 1 this is x itself, i.e. [0, 1].
    modulus: Vec<u64>,
    tables: Option<Tables>,
}

/// The residue field k = F_{p^m} of a discretely valued field.
#[derive(Clone)]
pub struct ResidueField(Arc<RfData>);

impl fmt::Debug for ResidueField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{}", self.0.p, self.0.m)
    }
}

impl PartialEq for ResidueField {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.p == other.0.p && self.0.m == other.0.m && self.0.modulus == other.0.modulus)
    }
}
impl Eq for ResidueField {}

impl ResidueField {
    /// The prime field F_p.
    pub fn prime(p: u64) -> Result<ResidueField> {
        ResidueField::extension(p, 1)
    }

    /// F_{p^m}. The defining modulus is chosen deterministically, so two
    /// constructions with the same (p, m) are interchangeable.
    pub fn extension(p: u64, m: u32) -> Result<ResidueField> {
        if p < 2 || !is_prime_u64(p) {
            return Err(Error::InvalidField(format!("{p} is not prime")));
        }
        if m == 0 || m > MAX_RESIDUE_DEGREE {
            return Err(Error::ResidueFieldTooLarge { p, m });
        }
        if m == 1 {
            return Ok(ResidueField(Arc::new(RfData {
                p,
                m: 1,
                modulus: vec![0, 1],
                tables: None,
            })));
        }
        let q = checked_pow(p, m).filter(|&q| q <= TABLE_BOUND);
        let q = match q {
            Some(q) => q,
            None => return Err(Error::ResidueFieldTooLarge { p, m }),
        };
        let modulus = find_irreducible(p, m);
        let tables = build_tables(p, m, q, &modulus);
        Ok(ResidueField(Arc::new(RfData {
            p,
            m,
            modulus,
            tables: Some(tables),
        })))
    }

    pub fn char(&self) -> u64 {
        self.0.p
    }

    pub fn degree(&self) -> u32 {
        self.0.m
    }

    /// Field size q = p^m.
    pub fn order(&self) -> u64 {
        self.0.p.pow(self.0.m)
    }

    /// Coefficients of the defining polynomial (degree m, monic).
    pub fn modulus(&self) -> &[u64] {
        &self.0.modulus
    }

    pub fn zero(&self) -> ResidueElem {
        ResidueElem {
            rf: self.clone(),
            c: vec![0; self.0.m as usize],
        }
    }

    pub fn one(&self) -> ResidueElem {
        self.from_u64(1)
    }

    /// Embed an integer into the prime subfield.
    pub fn from_u64(&self, n: u64) -> ResidueElem {
        let mut c = vec![0; self.0.m as usize];
        c[0] = n % self.0.p;
        ResidueElem {
            rf: self.clone(),
            c,
        }
    }

    pub fn from_i64(&self, n: i64) -> ResidueElem {
        let p = self.0.p as i64;
        self.from_u64(n.rem_euclid(p) as u64)
    }

    /// Element with the given coefficient vector (basis 1, g, ..., g^{m-1}).
    pub fn from_coeffs(&self, coeffs: &[u64]) -> ResidueElem {
        let mut c = vec![0; self.0.m as usize];
        for (i, &x) in coeffs.iter().enumerate().take(self.0.m as usize) {
            c[i] = x % self.0.p;
        }
        ResidueElem {
            rf: self.clone(),
            c,
        }
    }

    /// The class of x modulo the defining polynomial (a generator of the
    /// extension over F_p; not necessarily a multiplicative generator).
    pub fn gen(&self) -> ResidueElem {
        if self.0.m == 1 {
            return self.zero();
        }
        let mut c = vec![0; self.0.m as usize];
        c[1] = 1;
        ResidueElem {
            rf: self.clone(),
            c,
        }
    }

    /// Iterate over all q field elements. Intended for exhaustive residue
    /// root scans on table-backed fields; panics if q is above the table bound.
    pub fn iter_elems(&self) -> impl Iterator<Item = ResidueElem> + '_ {
        let q = self.order();
        assert!(
            q <= TABLE_BOUND,
            "exhaustive iteration requested on a field beyond the table bound"
        );
        (0..q).map(move |idx| self.unpack(idx))
    }

    fn pack(&self, c: &[u64]) -> u64 {
        let mut idx = 0u64;
        for &x in c.iter().rev() {
            idx = idx * self.0.p + x;
        }
        idx
    }

    fn unpack(&self, mut idx: u64) -> ResidueElem {
        let m = self.0.m as usize;
        let mut c = vec![0; m];
        for slot in c.iter_mut() {
            *slot = idx % self.0.p;
            idx /= self.0.p;
        }
        ResidueElem {
            rf: self.clone(),
            c,
        }
    }
}

/// An element of the residue field.
#[derive(Clone)]
pub struct ResidueElem {
    rf: ResidueField,
    c: Vec<u64>,
}

impl fmt::Debug for ResidueElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for ResidueElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rf.degree() == 1 {
            return write!(f, "{}", self.c[0]);
        }
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &x) in self.c.iter().enumerate() {
            if x == 0 {
                continue;
            }
            if !first {
                write!(f, "+")?;
            }
            first = false;
            match i {
                0 => write!(f, "{x}")?,
                1 if x == 1 => write!(f, "w")?,
                1 => write!(f, "{x}*w")?,
                _ if x == 1 => write!(f, "w^{i}")?,
                _ => write!(f, "{x}*w^{i}")?,
            }
        }
        Ok(())
    }
}

impl PartialEq for ResidueElem {
    fn eq(&self, other: &Self) -> bool {
        self.rf == other.rf && self.c == other.c
    }
}
impl Eq for ResidueElem {}

impl std::hash::Hash for ResidueElem {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.c.hash(state);
    }
}

impl ResidueElem {
    pub fn field(&self) -> &ResidueField {
        &self.rf
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&x| x == 0)
    }

    pub fn is_one(&self) -> bool {
        self.c[0] == 1 && self.c[1..].iter().all(|&x| x == 0)
    }

    /// Coefficient vector in the basis 1, g, ..., g^{m-1}.
    pub fn coeffs(&self) -> &[u64] {
        &self.c
    }

    /// The value as an integer for prime fields.
    pub fn as_u64(&self) -> Option<u64> {
        if self.rf.degree() == 1 {
            Some(self.c[0])
        } else if self.c[1..].iter().all(|&x| x == 0) {
            Some(self.c[0])
        } else {
            None
        }
    }

    pub fn add(&self, other: &ResidueElem) -> ResidueElem {
        debug_assert!(self.rf == other.rf);
        let p = self.rf.char();
        let c = self
            .c
            .iter()
            .zip(&other.c)
            .map(|(&a, &b)| (a + b) % p)
            .collect();
        ResidueElem {
            rf: self.rf.clone(),
            c,
        }
    }

    pub fn sub(&self, other: &ResidueElem) -> ResidueElem {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> ResidueElem {
        let p = self.rf.char();
        let c = self.c.iter().map(|&a| (p - a) % p).collect();
        ResidueElem {
            rf: self.rf.clone(),
            c,
        }
    }

    pub fn mul(&self, other: &ResidueElem) -> ResidueElem {
        debug_assert!(self.rf == other.rf);
        let data = &self.rf.0;
        if data.m == 1 {
            let p = data.p as u128;
            let v = (self.c[0] as u128 * other.c[0] as u128 % p) as u64;
            return ResidueElem {
                rf: self.rf.clone(),
                c: vec![v],
            };
        }
        if self.is_zero() || other.is_zero() {
            return self.rf.zero();
        }
        let t = data.tables.as_ref().expect("extension fields carry tables");
        let q1 = self.rf.order() - 1;
        let la = t.log[self.rf.pack(&self.c) as usize] as u64;
        let lb = t.log[self.rf.pack(&other.c) as usize] as u64;
        let idx = t.antilog[((la + lb) % q1) as usize];
        self.rf.unpack(idx as u64)
    }

    pub fn inv(&self) -> Result<ResidueElem> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let data = &self.rf.0;
        if data.m == 1 {
            let v = mod_inverse(self.c[0], data.p);
            return Ok(ResidueElem {
                rf: self.rf.clone(),
                c: vec![v],
            });
        }
        let t = data.tables.as_ref().unwrap();
        let q1 = self.rf.order() - 1;
        let la = t.log[self.rf.pack(&self.c) as usize] as u64;
        let idx = t.antilog[((q1 - la) % q1) as usize];
        Ok(self.rf.unpack(idx as u64))
    }

    pub fn div(&self, other: &ResidueElem) -> Result<ResidueElem> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow(&self, e: u64) -> ResidueElem {
        let mut result = self.rf.one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        result
    }

    /// Frobenius x -> x^p.
    pub fn frobenius(&self) -> ResidueElem {
        self.pow(self.rf.char())
    }

    /// The unique p-th root (the Frobenius is a bijection on finite fields).
    pub fn pth_root(&self) -> ResidueElem {
        let m = self.rf.degree();
        let mut r = self.clone();
        for _ in 0..m.saturating_sub(1) {
            r = r.frobenius();
        }
        // x^(p^m) = x, so x^(p^(m-1)) is the p-th root.
        debug_assert!(r.pow(self.rf.char()) == *self);
        r
    }
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    // extended Euclid on i128 to dodge overflow for large p
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (p as i128, a as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    debug_assert!(r == 1, "inverse of non-unit");
    t.rem_euclid(p as i128) as u64
}

fn checked_pow(p: u64, m: u32) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..m {
        acc = acc.checked_mul(p)?;
    }
    Some(acc)
}

pub(crate) fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for small in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == small {
            return true;
        }
        if n % small == 0 {
            return false;
        }
    }
    // deterministic Miller-Rabin for u64
    let d = (n - 1) >> (n - 1).trailing_zeros();
    let s = (n - 1).trailing_zeros();
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod_u64(a % n, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mul_mod_u64(a: u64, b: u64, n: u64) -> u64 {
    (a as u128 * b as u128 % n as u128) as u64
}

fn pow_mod_u64(mut a: u64, mut e: u64, n: u64) -> u64 {
    let mut acc = 1u64;
    a %= n;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod_u64(acc, a, n);
        }
        a = mul_mod_u64(a, a, n);
        e >>= 1;
    }
    acc
}

// ---- F_p[x] helpers on u64 coefficient vectors (ascending degree) ----

fn fp_trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn fp_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + mul_mod_u64(x, y, p)) % p;
        }
    }
    fp_trim(&mut out);
    out
}

fn fp_rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut r: Vec<u64> = a.to_vec();
    fp_trim(&mut r);
    let dm = m.len() - 1;
    let lead_inv = mod_inverse(m[dm], p);
    while r.len() > dm {
        let k = r.len() - 1 - dm;
        let c = mul_mod_u64(*r.last().unwrap(), lead_inv, p);
        for i in 0..=dm {
            let idx = k + i;
            r[idx] = (r[idx] + p - mul_mod_u64(c, m[i], p) % p) % p;
        }
        fp_trim(&mut r);
    }
    r
}

fn fp_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    fp_trim(&mut a);
    fp_trim(&mut b);
    while !b.is_empty() {
        let r = fp_rem(&a, &b, p);
        a = b;
        b = r;
    }
    if let Some(&lc) = a.last() {
        let inv = mod_inverse(lc, p);
        for x in a.iter_mut() {
            *x = mul_mod_u64(*x, inv, p);
        }
    }
    a
}

/// x^(p^k) mod m, by repeated p-power.
fn fp_xq_pow(modulus: &[u64], p: u64, k: u32) -> Vec<u64> {
    let mut x = vec![0u64, 1];
    x = fp_rem(&x, modulus, p);
    for _ in 0..k {
        // raise to the p-th power
        let mut acc = vec![1u64];
        let mut base = x.clone();
        let mut e = p;
        while e > 0 {
            if e & 1 == 1 {
                acc = fp_rem(&fp_mul(&acc, &base, p), modulus, p);
            }
            base = fp_rem(&fp_mul(&base, &base, p), modulus, p);
            e >>= 1;
        }
        x = acc;
    }
    x
}

/// Rabin irreducibility test for a monic degree-m polynomial over F_p.
fn fp_is_irreducible(h: &[u64], p: u64, m: u32) -> bool {
    // x^(p^m) == x mod h
    let mut xpm = fp_xq_pow(h, p, m);
    // subtract x
    if xpm.len() < 2 {
        xpm.resize(2, 0);
    }
    xpm[1] = (xpm[1] + p - 1) % p;
    fp_trim(&mut xpm);
    if !xpm.is_empty() {
        return false;
    }
    // for each prime l | m: gcd(x^(p^(m/l)) - x, h) == 1
    let mut mm = m;
    let mut primes = vec![];
    let mut l = 2;
    while l * l <= mm {
        if mm % l == 0 {
            primes.push(l);
            while mm % l == 0 {
                mm /= l;
            }
        }
        l += 1;
    }
    if mm > 1 {
        primes.push(mm);
    }
    for l in primes {
        let mut xp = fp_xq_pow(h, p, m / l);
        if xp.len() < 2 {
            xp.resize(2, 0);
        }
        xp[1] = (xp[1] + p - 1) % p;
        fp_trim(&mut xp);
        let g = fp_gcd(&xp, h, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

/// Deterministic search for a monic irreducible polynomial of degree m over F_p:
/// enumerate constant-first coefficient vectors in lexicographic order.
fn find_irreducible(p: u64, m: u32) -> Vec<u64> {
    let m = m as usize;
    let mut coeffs = vec![0u64; m + 1];
    coeffs[m] = 1;
    loop {
        // skip constant term 0 (divisible by x)
        if coeffs[0] != 0 && fp_is_irreducible(&coeffs, p, m as u32) {
            return coeffs;
        }
        // increment the lower coefficients as a base-p counter
        let mut i = 0;
        loop {
            coeffs[i] += 1;
            if coeffs[i] < p {
                break;
            }
            coeffs[i] = 0;
            i += 1;
            assert!(i < m, "no irreducible polynomial found (impossible)");
        }
    }
}

fn build_tables(p: u64, m: u32, q: u64, modulus: &[u64]) -> Tables {
    let md = m as usize;
    let pack = |c: &[u64]| -> u64 {
        let mut idx = 0u64;
        for &x in c.iter().rev() {
            idx = idx * p + x;
        }
        idx
    };
    // multiply two packed elements directly via polynomial arithmetic mod modulus
    let unpack = |mut idx: u64| -> Vec<u64> {
        let mut c = vec![0u64; md];
        for slot in c.iter_mut() {
            *slot = idx % p;
            idx /= p;
        }
        c
    };
    let mul = |a: u64, b: u64| -> u64 {
        let prod = fp_mul(&unpack(a), &unpack(b), p);
        let mut r = fp_rem(&prod, modulus, p);
        r.resize(md, 0);
        pack(&r)
    };

    // factor q-1
    let mut factors = vec![];
    let mut n = q - 1;
    let mut f = 2;
    while f * f <= n {
        if n % f == 0 {
            factors.push(f);
            while n % f == 0 {
                n /= f;
            }
        }
        f += 1;
    }
    if n > 1 {
        factors.push(n);
    }

    // find a multiplicative generator
    let order = q - 1;
    let pow = |mut a: u64, mut e: u64| -> u64 {
        let mut acc = pack(&{
            let mut one = vec![0u64; md];
            one[0] = 1;
            one
        });
        while e > 0 {
            if e & 1 == 1 {
                acc = mul(acc, a);
            }
            a = mul(a, a);
            e >>= 1;
        }
        acc
    };
    let one_packed = 1u64; // packed representation of the constant 1
    let mut gen_packed = 0;
    for cand in 2..q {
        let mut ok = true;
        for &l in &factors {
            if pow(cand, order / l) == one_packed {
                ok = false;
                break;
            }
        }
        if ok {
            gen_packed = cand;
            break;
        }
    }
    assert!(gen_packed != 0, "no generator found (impossible)");

    let mut antilog = vec![0u32; order as usize];
    let mut log = vec![0u32; q as usize];
    let mut cur = one_packed;
    for k in 0..order {
        antilog[k as usize] = cur as u32;
        log[cur as usize] = k as u32;
        cur = mul(cur, gen_packed);
    }
    debug_assert!(cur == one_packed);
    Tables { log, antilog }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_arithmetic() {
        let f3 = ResidueField::prime(3).unwrap();
        let a = f3.from_u64(2);
        let b = f3.from_u64(2);
        assert_eq!(a.mul(&b), f3.from_u64(1));
        assert_eq!(a.add(&b), f3.from_u64(1));
        assert_eq!(a.inv().unwrap(), f3.from_u64(2));
        assert!(f3.zero().inv().is_err());
    }

    #[test]
    fn extension_field_axioms() {
        for (p, m) in [(3u64, 2u32), (2, 3), (5, 2), (3, 3), (7, 2)] {
            let f = ResidueField::extension(p, m).unwrap();
            let q = f.order();
            // multiplicative group order
            let g = f.gen();
            assert!(g.pow(q - 1).is_one());
            // distributivity spot check over all small elements
            let elems: Vec<_> = f.iter_elems().take(25).collect();
            for a in &elems {
                for b in &elems {
                    let left = a.add(b).mul(&g);
                    let right = a.mul(&g).add(&b.mul(&g));
                    assert_eq!(left, right);
                }
            }
            // inverses
            for a in f.iter_elems() {
                if !a.is_zero() {
                    assert!(a.mul(&a.inv().unwrap()).is_one());
                }
            }
        }
    }

    #[test]
    fn frobenius_and_pth_root() {
        let f9 = ResidueField::extension(3, 2).unwrap();
        for a in f9.iter_elems() {
            let r = a.pth_root();
            assert_eq!(r.pow(3), a);
        }
        // i exists in F_9: some x with x^2 = -1
        let found = f9.iter_elems().any(|x| x.mul(&x) == f9.from_i64(-1));
        assert!(found);
    }

    #[test]
    fn no_sqrt_minus_one_in_f3_and_f7() {
        for p in [3u64, 7] {
            let f = ResidueField::prime(p).unwrap();
            let found = f.iter_elems().any(|x| x.mul(&x) == f.from_i64(-1));
            assert!(!found, "-1 must not be a square mod {p}");
        }
    }

    #[test]
    fn large_prime_field() {
        let f = ResidueField::prime(1_000_003).unwrap();
        let a = f.from_u64(999_999);
        let inv = a.inv().unwrap();
        assert!(a.mul(&inv).is_one());
    }
}
