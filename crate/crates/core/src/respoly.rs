//! Polynomial algebra over K and over the residue field: reduction of
//! polynomials, residue root finding, squarefree parts, resultants.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kfield::{Field, FieldKind, KElem, ResidueElem, ResidueField};

/// Degree cap for all K-polynomial root operations.
pub const DEGREE_CAP: usize = 20;

/// Residue fields up to this size are root-scanned exhaustively; larger prime
/// fields use Frobenius splitting with Cantor–Zassenhaus.
const SCAN_BOUND: u64 = 4096;

/// Dense polynomial over K, coefficients ascending, leading coefficient
/// nonzero (kernel-nonzero for approximate data).
#[derive(Clone, Debug, PartialEq)]
pub struct KPoly {
    field: Field,
    coeffs: Vec<KElem>,
}

impl KPoly {
    pub fn new(field: &Field, mut coeffs: Vec<KElem>) -> KPoly {
        while coeffs.last().map_or(false, |c| c.kernel_is_zero()) {
            coeffs.pop();
        }
        KPoly {
            field: field.clone(),
            coeffs,
        }
    }

    pub fn zero(field: &Field) -> KPoly {
        KPoly {
            field: field.clone(),
            coeffs: vec![],
        }
    }

    pub fn one(field: &Field) -> KPoly {
        KPoly::constant(field.one())
    }

    pub fn constant(c: KElem) -> KPoly {
        let field = c.field().clone();
        KPoly::new(&field, vec![c])
    }

    /// Build from integer coefficients, constant first.
    pub fn from_i64(field: &Field, coeffs: &[i64]) -> KPoly {
        KPoly::new(
            field,
            coeffs.iter().map(|&c| KElem::from_i64(field, c)).collect(),
        )
    }

    /// The monomial z.
    pub fn var(field: &Field) -> KPoly {
        KPoly::new(field, vec![field.zero(), field.one()])
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.is_zero() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn coeff(&self, i: usize) -> KElem {
        self.coeffs
            .get(i)
            .cloned()
            .unwrap_or_else(|| self.field.zero())
    }

    pub fn coeffs(&self) -> &[KElem] {
        &self.coeffs
    }

    pub fn leading(&self) -> KElem {
        self.coeffs
            .last()
            .cloned()
            .unwrap_or_else(|| self.field.zero())
    }

    pub fn is_exact(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_exact())
    }

    pub fn add(&self, other: &KPoly) -> KPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i).add(&other.coeff(i))).collect();
        KPoly::new(&self.field, coeffs)
    }

    pub fn sub(&self, other: &KPoly) -> KPoly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> KPoly {
        KPoly::new(&self.field, self.coeffs.iter().map(|c| c.neg()).collect())
    }

    pub fn mul(&self, other: &KPoly) -> KPoly {
        if self.is_zero() || other.is_zero() {
            return KPoly::zero(&self.field);
        }
        let mut out = vec![self.field.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.kernel_is_zero() && a.is_exact() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        KPoly::new(&self.field, out)
    }

    pub fn scale(&self, c: &KElem) -> KPoly {
        KPoly::new(&self.field, self.coeffs.iter().map(|a| a.mul(c)).collect())
    }

    pub fn evaluate(&self, x: &KElem) -> KElem {
        let mut acc = self.field.zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(c);
        }
        acc
    }

    /// Formal derivative in z.
    pub fn derivative(&self) -> KPoly {
        if self.coeffs.len() <= 1 {
            return KPoly::zero(&self.field);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c.mul(&KElem::from_i64(&self.field, i as i64)))
            .collect();
        KPoly::new(&self.field, coeffs)
    }

    /// Substitute another polynomial: self(g(z)).
    pub fn compose(&self, g: &KPoly) -> KPoly {
        let mut acc = KPoly::zero(&self.field);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(g).add(&KPoly::constant(c.clone()));
        }
        acc
    }

    /// Taylor shift: f(z + a).
    pub fn shift(&self, a: &KElem) -> KPoly {
        let mut c = self.coeffs.clone();
        let d = c.len();
        if d == 0 {
            return self.clone();
        }
        for i in 0..d {
            for j in (i..d - 1).rev() {
                let t = c[j + 1].mul(a);
                c[j] = c[j].add(&t);
            }
        }
        KPoly::new(&self.field, c)
    }

    /// Argument dilation: f(a z).
    pub fn dilate_arg(&self, a: &KElem) -> KPoly {
        let mut pow = self.field.one();
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                let out = c.mul(&pow);
                pow = pow.mul(a);
                out
            })
            .collect();
        KPoly::new(&self.field, coeffs)
    }

    /// f(π^k z), exact.
    pub fn dilate_arg_pi(&self, k: i64) -> KPoly {
        self.dilate_arg(&KElem::uniformizer_pow(&self.field, k))
    }

    /// Minimal coefficient valuation over the nonzero coefficients.
    pub fn content_val(&self) -> Option<i64> {
        self.coeffs.iter().filter_map(|c| c.val().finite()).min()
    }

    /// Divide out the content: returns (π^{-m} f, m) with m = min_i v(c_i),
    /// so the result is integral with at least one unit coefficient.
    pub fn normalize_content(&self) -> Result<(KPoly, i64)> {
        if self.is_zero() {
            return Err(Error::InternalInconsistency(
                "content of the zero polynomial".into(),
            ));
        }
        let m = self.content_val().ok_or(Error::UncertifiedValuation)?;
        Ok((self.dilate_coeffs_pi(-m), m))
    }

    /// Multiply every coefficient by π^k.
    pub fn dilate_coeffs_pi(&self, k: i64) -> KPoly {
        let pi = KElem::uniformizer_pow(&self.field, k);
        self.scale(&pi)
    }

    pub fn monic(&self) -> Result<KPoly> {
        match self.degree() {
            None => Ok(self.clone()),
            Some(d) => {
                let inv = self.coeffs[d].inv()?;
                Ok(self.scale(&inv))
            }
        }
    }

    /// Quotient and remainder over the kernel field.
    pub fn divrem(&self, d: &KPoly) -> Result<(KPoly, KPoly)> {
        let dd = match d.degree() {
            None => return Err(Error::DivisionByZero),
            Some(x) => x,
        };
        let lead_inv = d.coeffs[dd].inv()?;
        let mut rem = self.coeffs.clone();
        let n = rem.len();
        if n <= dd {
            return Ok((KPoly::zero(&self.field), self.clone()));
        }
        let mut quot = vec![self.field.zero(); n - dd];
        for k in (0..n - dd).rev() {
            let c = rem[k + dd].mul(&lead_inv);
            if !(c.kernel_is_zero() && c.is_exact()) {
                for i in 0..=dd {
                    let t = c.mul(&d.coeffs[i]);
                    rem[k + i] = rem[k + i].sub(&t);
                }
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        Ok((KPoly::new(&self.field, quot), KPoly::new(&self.field, rem)))
    }

    /// Exact division; errors if the remainder is nonzero.
    pub fn div_exact(&self, d: &KPoly) -> Result<KPoly> {
        let (q, r) = self.divrem(d)?;
        if !r.is_zero() {
            return Err(Error::InternalInconsistency(
                "expected exact polynomial division".into(),
            ));
        }
        Ok(q)
    }

    /// Monic gcd over the kernel field. Exact coefficients required.
    pub fn gcd(&self, other: &KPoly) -> Result<KPoly> {
        if !self.is_exact() || !other.is_exact() {
            return Err(Error::ApproximateInput);
        }
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let bm = b.monic()?;
            let (_, r) = a.divrem(&bm)?;
            a = bm;
            b = r;
        }
        if a.is_zero() {
            Ok(a)
        } else {
            a.monic()
        }
    }

    /// Resultant of two polynomials over the kernel field.
    pub fn resultant(&self, other: &KPoly) -> Result<KElem> {
        fn go(f: &KPoly, g: &KPoly) -> Result<KElem> {
            let field = f.field().clone();
            let df = match f.degree() {
                None => return Ok(field.zero()),
                Some(d) => d,
            };
            let dg = match g.degree() {
                None => return Ok(field.zero()),
                Some(d) => d,
            };
            if dg == 0 {
                return g.coeffs[0].pow(df as i64);
            }
            if df == 0 {
                return f.coeffs[0].pow(dg as i64);
            }
            let (_, r) = f.divrem(g)?;
            if r.is_zero() {
                return Ok(field.zero());
            }
            let dr = r.degree().unwrap();
            let sign_flip = (df * dg) % 2 == 1;
            let lc = g.leading().pow((df - dr) as i64)?;
            let sub = go(g, &r)?;
            let mut out = lc.mul(&sub);
            if sign_flip {
                out = out.neg();
            }
            Ok(out)
        }
        if !self.is_exact() || !other.is_exact() {
            return Err(Error::ApproximateInput);
        }
        go(self, other)
    }

    /// Discriminant.
    pub fn discriminant(&self) -> Result<KElem> {
        let d = match self.degree() {
            None | Some(0) => return Ok(self.field.zero()),
            Some(d) => d,
        };
        let res = self.resultant(&self.derivative())?;
        let lead_inv = self.leading().inv()?;
        let mut out = res.mul(&lead_inv);
        if (d * (d - 1) / 2) % 2 == 1 {
            out = out.neg();
        }
        Ok(out)
    }

    /// Coefficientwise reduction to the residue field. All coefficients must
    /// have v >= 0; the degree may drop.
    pub fn reduce_poly(&self) -> Result<ResPoly> {
        let rf = self.field.residue_field().clone();
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.residue())
            .collect::<Result<Vec<_>>>()?;
        Ok(ResPoly::new(&rf, coeffs))
    }

    /// Product of the distinct irreducible factors over K (monic).
    ///
    /// Over characteristic-zero kernels this is f / gcd(f, f'). Over F_q(t)
    /// the usual formula misses factors with multiplicity divisible by p and
    /// keeps inseparable ones; the recursion below handles both, using the
    /// t-derivation to separate coefficientwise p-th-power factors.
    pub fn squarefree_part(&self) -> Result<KPoly> {
        if !self.is_exact() {
            return Err(Error::ApproximateInput);
        }
        if self.degree().map_or(true, |d| d == 0) {
            return self.monic();
        }
        match self.field.kind() {
            FieldKind::PadicRationals => {
                let g = self.gcd(&self.derivative())?;
                if g.degree() == Some(0) {
                    self.monic()
                } else {
                    self.div_exact(&g)?.monic()
                }
            }
            FieldKind::LaurentSeries => self.squarefree_char_p()?.monic(),
        }
    }

    fn squarefree_char_p(&self) -> Result<KPoly> {
        let f = self.monic()?;
        if f.degree().map_or(true, |d| d == 0) {
            return Ok(KPoly::one(&self.field));
        }
        let fp = f.derivative();
        if fp.is_zero() {
            return f.squarefree_pp();
        }
        let a = f.gcd(&fp)?;
        if a.degree() == Some(0) {
            return Ok(f);
        }
        let w = f.div_exact(&a)?.monic()?;
        // strip the factors of w out of a entirely; what remains lies in F[z^p]
        let mut b = a;
        loop {
            let g = b.gcd(&w)?;
            if g.degree() == Some(0) {
                break;
            }
            b = b.div_exact(&g)?;
        }
        if b.degree() == Some(0) {
            return Ok(w);
        }
        Ok(w.mul(&b.squarefree_pp()?))
    }

    /// Distinct-factor product of a monic polynomial lying in F[z^p].
    fn squarefree_pp(&self) -> Result<KPoly> {
        let p = self.field.char() as usize;
        let h = self.unsubstitute_p()?;
        let hs = h.squarefree_char_p()?;
        // Factors of hs whose coefficients are all p-th powers in F pull out a
        // p-th root after substituting z^p back; the rest stay irreducible.
        // The two kinds separate as gcd(hs, d/dt hs): the p-th-power subfield
        // of F_q(t) is exactly the kernel of the t-derivation.
        let ht = hs.derivative_t();
        let v = if ht.is_zero() {
            hs.clone()
        } else {
            hs.gcd(&ht)?
        };
        let w = hs.div_exact(&v)?;
        let v_sub = v.substitute_zp(p);
        let rooted = v_sub.pth_root_poly().ok_or_else(|| {
            Error::InternalInconsistency("expected a coefficientwise p-th power".into())
        })?;
        Ok(rooted.mul(&w.substitute_zp(p)))
    }

    /// Inverse substitution: self = h(z^p) -> h.
    fn unsubstitute_p(&self) -> Result<KPoly> {
        let p = self.field.char() as usize;
        let mut out = vec![];
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.kernel_is_zero() {
                continue;
            }
            if i % p != 0 {
                return Err(Error::InternalInconsistency(
                    "polynomial is not in F[z^p]".into(),
                ));
            }
            let k = i / p;
            if out.len() <= k {
                out.resize(k + 1, self.field.zero());
            }
            out[k] = c.clone();
        }
        Ok(KPoly::new(&self.field, out))
    }

    /// Substitute z^p for z.
    fn substitute_zp(&self, p: usize) -> KPoly {
        let mut out = vec![];
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.kernel_is_zero() {
                continue;
            }
            let k = i * p;
            if out.len() <= k {
                out.resize(k + 1, self.field.zero());
            }
            out[k] = c.clone();
        }
        KPoly::new(&self.field, out)
    }

    /// Coefficientwise derivation d/dt (Laurent kernels only).
    fn derivative_t(&self) -> KPoly {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.derivative_t().expect("Laurent kernel"))
            .collect();
        KPoly::new(&self.field, coeffs)
    }

    /// Coefficientwise p-th root combined with exponent division, when the
    /// polynomial is an exact p-th power of a K-polynomial.
    fn pth_root_poly(&self) -> Option<KPoly> {
        let p = self.field.char() as usize;
        let mut out = vec![];
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.kernel_is_zero() {
                continue;
            }
            if i % p != 0 {
                return None;
            }
            let r = c.pth_root_kernel()?;
            let k = i / p;
            if out.len() <= k {
                out.resize(k + 1, self.field.zero());
            }
            out[k] = r;
        }
        Some(KPoly::new(&self.field, out))
    }

    /// Compress every coefficient modulo π^n (see [`KElem::compress`]).
    pub fn compress(&self, n: i64) -> KPoly {
        KPoly::new(
            &self.field,
            self.coeffs.iter().map(|c| c.compress(n)).collect(),
        )
    }

    /// Human-readable form with variable `z`.
    pub fn to_poly_string(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts = vec![];
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.kernel_is_zero() && c.is_exact() {
                continue;
            }
            let cs = c.kernel_string();
            let cs = if cs.contains(' ') || (cs.contains('/') && i > 0) {
                format!("({cs})")
            } else {
                cs
            };
            parts.push(match i {
                0 => cs,
                1 if cs == "1" => "z".into(),
                1 => format!("{cs}*z"),
                _ if cs == "1" => format!("z^{i}"),
                _ => format!("{cs}*z^{i}"),
            });
        }
        parts.join(" + ")
    }
}

// ---- residue polynomials ----

/// Dense polynomial over the residue field, trimmed.
#[derive(Clone, Debug, PartialEq)]
pub struct ResPoly {
    rf: ResidueField,
    coeffs: Vec<ResidueElem>,
}

impl ResPoly {
    pub fn new(rf: &ResidueField, mut coeffs: Vec<ResidueElem>) -> ResPoly {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        ResPoly {
            rf: rf.clone(),
            coeffs,
        }
    }

    pub fn field(&self) -> &ResidueField {
        &self.rf
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.is_zero() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn coeff(&self, i: usize) -> ResidueElem {
        self.coeffs
            .get(i)
            .cloned()
            .unwrap_or_else(|| self.rf.zero())
    }

    pub fn coeffs(&self) -> &[ResidueElem] {
        &self.coeffs
    }

    pub fn leading(&self) -> ResidueElem {
        self.coeffs
            .last()
            .cloned()
            .unwrap_or_else(|| self.rf.zero())
    }

    pub fn evaluate(&self, x: &ResidueElem) -> ResidueElem {
        let mut acc = self.rf.zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(c);
        }
        acc
    }

    pub fn derivative(&self) -> ResPoly {
        if self.coeffs.len() <= 1 {
            return ResPoly::new(&self.rf, vec![]);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c.mul(&self.rf.from_u64(i as u64)))
            .collect();
        ResPoly::new(&self.rf, coeffs)
    }

    pub fn mul(&self, other: &ResPoly) -> ResPoly {
        if self.is_zero() || other.is_zero() {
            return ResPoly::new(&self.rf, vec![]);
        }
        let mut out = vec![self.rf.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        ResPoly::new(&self.rf, out)
    }

    /// Deflate by a linear factor (z - r); returns None if r is not a root.
    pub fn deflate(&self, r: &ResidueElem) -> Option<ResPoly> {
        if self.is_zero() {
            return None;
        }
        let d = self.degree().unwrap();
        let mut q = vec![self.rf.zero(); d];
        let mut acc = self.rf.zero();
        for i in (0..=d).rev() {
            acc = acc.mul(r).add(&self.coeffs[i]);
            if i > 0 {
                q[i - 1] = acc.clone();
            }
        }
        if acc.is_zero() {
            Some(ResPoly::new(&self.rf, q))
        } else {
            None
        }
    }

    fn divrem(&self, d: &ResPoly) -> (ResPoly, ResPoly) {
        let dd = d.degree().expect("nonzero divisor");
        let lead_inv = d.coeffs[dd].inv().expect("leading nonzero");
        let mut rem = self.coeffs.clone();
        let n = rem.len();
        if n <= dd {
            return (ResPoly::new(&self.rf, vec![]), self.clone());
        }
        let mut quot = vec![self.rf.zero(); n - dd];
        for k in (0..n - dd).rev() {
            let c = rem[k + dd].mul(&lead_inv);
            if !c.is_zero() {
                for i in 0..=dd {
                    rem[k + i] = rem[k + i].sub(&c.mul(&d.coeffs[i]));
                }
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        (ResPoly::new(&self.rf, quot), ResPoly::new(&self.rf, rem))
    }

    pub fn gcd(&self, other: &ResPoly) -> ResPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.divrem(&b);
            a = b;
            b = r;
        }
        if let Some(d) = a.degree() {
            let inv = a.coeffs[d].inv().unwrap();
            let rf = a.rf.clone();
            a = ResPoly::new(&rf, a.coeffs.iter().map(|c| c.mul(&inv)).collect());
        }
        a
    }

    /// All roots in the residue field with multiplicities.
    ///
    /// Fields up to the table bound are scanned exhaustively; larger prime
    /// fields split the linear part off with x^p - x and refine by
    /// Cantor–Zassenhaus (same results, just viable for large p).
    pub fn residue_roots(&self) -> Vec<(ResidueElem, usize)> {
        if self.is_zero() {
            return vec![];
        }
        let q = self.rf.order();
        let roots: Vec<ResidueElem> = if q <= SCAN_BOUND {
            self.rf
                .iter_elems()
                .filter(|x| self.evaluate(x).is_zero())
                .collect()
        } else {
            self.large_prime_roots()
        };
        roots
            .into_iter()
            .map(|r| {
                let mut mult = 0;
                let mut cur = self.clone();
                while let Some(next) = cur.deflate(&r) {
                    mult += 1;
                    cur = next;
                }
                (r, mult)
            })
            .collect()
    }

    /// Roots over a large prime field: gcd with x^p - x, then CZ splitting.
    fn large_prime_roots(&self) -> Vec<ResidueElem> {
        let p = self.rf.char();
        let xp = self.pow_x_mod(p);
        let mut diff = xp.coeffs.clone();
        if diff.len() < 2 {
            diff.resize(2, self.rf.zero());
        }
        diff[1] = diff[1].sub(&self.rf.one());
        let diff = ResPoly::new(&self.rf, diff);
        let linear_part = self.gcd(&diff);
        let mut roots = vec![];
        let mut stack = vec![linear_part];
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        while let Some(g) = stack.pop() {
            match g.degree() {
                None | Some(0) => {}
                Some(1) => {
                    let r = g.coeffs[0].neg().div(&g.coeffs[1]).unwrap();
                    roots.push(r);
                }
                Some(gd) => loop {
                    let a = self.rf.from_u64(rng.gen_range(0..p));
                    let shifted = g.shift_res(&a);
                    let h = shifted.pow_x_half_mod(p);
                    let mut hm = h.coeffs.clone();
                    if hm.is_empty() {
                        hm.push(self.rf.zero());
                    }
                    hm[0] = hm[0].sub(&self.rf.one());
                    let hm = ResPoly::new(&self.rf, hm);
                    let d = shifted.gcd(&hm);
                    if let Some(dd) = d.degree() {
                        if dd > 0 && dd < gd {
                            let d_back = d.shift_res(&a.neg());
                            let (q2, _) = g.divrem(&d_back);
                            stack.push(d_back);
                            stack.push(q2);
                            break;
                        }
                    }
                },
            }
        }
        roots
    }

    /// x^e mod self, by square and multiply.
    fn pow_x_mod(&self, e: u64) -> ResPoly {
        let x = ResPoly::new(&self.rf, vec![self.rf.zero(), self.rf.one()]);
        self.pow_mod(&x, e)
    }

    /// x^((p-1)/2) mod self.
    fn pow_x_half_mod(&self, p: u64) -> ResPoly {
        let x = ResPoly::new(&self.rf, vec![self.rf.zero(), self.rf.one()]);
        self.pow_mod(&x, (p - 1) / 2)
    }

    fn pow_mod(&self, base: &ResPoly, mut e: u64) -> ResPoly {
        let mut acc = ResPoly::new(&self.rf, vec![self.rf.one()]);
        let mut b = {
            let (_, r) = base.divrem(self);
            r
        };
        while e > 0 {
            if e & 1 == 1 {
                let (_, r) = acc.mul(&b).divrem(self);
                acc = r;
            }
            let (_, r) = b.mul(&b).divrem(self);
            b = r;
            e >>= 1;
        }
        acc
    }

    fn shift_res(&self, a: &ResidueElem) -> ResPoly {
        let mut c = self.coeffs.clone();
        let d = c.len();
        if d == 0 {
            return self.clone();
        }
        for i in 0..d {
            for j in (i..d - 1).rev() {
                let t = c[j + 1].mul(a);
                c[j] = c[j].add(&t);
            }
        }
        ResPoly::new(&self.rf, c)
    }

    /// If this cubic is u (z - a)^3, return the triple root a; otherwise None.
    ///
    /// Closed forms keep everything inside F_p: for p != 3 the candidate is
    /// -a1/(3u); for p = 3 it is the unique cube root of -a3/u (Frobenius).
    /// The candidate is always verified by expansion.
    pub fn cubic_triple_root(&self) -> Option<ResidueElem> {
        if self.degree() != Some(3) {
            return None;
        }
        let u = self.coeff(3);
        let p = self.rf.char();
        let candidate = if p != 3 {
            let three_u = u.mul(&self.rf.from_u64(3));
            self.coeff(2).neg().div(&three_u).ok()?
        } else {
            // (z - a)^3 = z^3 - a^3 in char 3
            let ratio = self.coeff(0).neg().div(&u).ok()?;
            ratio.pth_root()
        };
        // verify u (z - a)^3 == self
        let a = &candidate;
        let a2 = a.mul(a);
        let a3 = a2.mul(a);
        let three = self.rf.from_u64(3);
        let expect = [
            u.mul(&a3.neg()),
            u.mul(&three.mul(&a2)),
            u.mul(&three.mul(a).neg()),
            u.clone(),
        ];
        for (i, e) in expect.iter().enumerate() {
            if self.coeff(i) != *e {
                return None;
            }
        }
        Some(candidate)
    }
}

impl std::fmt::Display for ResPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut parts = vec![];
        for (i, c) in self.coeffs.iter().enumerate().rev() {
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
                1 if cs == "1" => "z".into(),
                1 => format!("{cs}*z"),
                _ if cs == "1" => format!("z^{i}"),
                _ => format!("{cs}*z^{i}"),
            });
        }
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kfield::Field;

    fn q3() -> Field {
        Field::padic(3).unwrap()
    }

    fn poly(f: &Field, coeffs: &[i64]) -> KPoly {
        KPoly::from_i64(f, coeffs)
    }

    #[test]
    fn normalize_content_examples() {
        let f = q3();
        // 3z^3 + 9 -> (z^3 + 3, 1)
        let p = poly(&f, &[9, 0, 0, 3]);
        let (n, m) = p.normalize_content().unwrap();
        assert_eq!(m, 1);
        assert_eq!(n, poly(&f, &[3, 0, 0, 1]));
        // z^3 + z already unit content
        let p = poly(&f, &[0, 1, 0, 1]);
        let (n, m) = p.normalize_content().unwrap();
        assert_eq!(m, 0);
        assert_eq!(n, p);
        // (1/9)z^2 + (1/3)z -> m = -2, z^2 + 3z
        let c1 = KElem::from_ratio_i64(&f, 1, 3).unwrap();
        let c2 = KElem::from_ratio_i64(&f, 1, 9).unwrap();
        let p = KPoly::new(&f, vec![f.zero(), c1, c2]);
        let (n, m) = p.normalize_content().unwrap();
        assert_eq!(m, -2);
        assert_eq!(n, poly(&f, &[0, 3, 1]));
    }

    #[test]
    fn reduce_poly_examples() {
        let f = q3();
        // z^3 + 3z + 9 -> z^3 over F_3
        let p = poly(&f, &[9, 3, 0, 1]);
        let r = p.reduce_poly().unwrap();
        assert_eq!(format!("{r}"), "z^3");
        // z^3 - 3z + 3 reduces to z^3 (the shape that appears with p = 3)
        let p = poly(&f, &[3, -3, 0, 1]);
        assert_eq!(format!("{}", p.reduce_poly().unwrap()), "z^3");
        // negative valuation errors
        let bad = KPoly::new(&f, vec![KElem::from_ratio_i64(&f, 1, 3).unwrap()]);
        assert!(bad.reduce_poly().is_err());
    }

    #[test]
    fn residue_roots_examples() {
        let f = q3();
        let rf = f.residue_field().clone();
        // z^3 over F_3 -> {(0, 3)}
        let r = poly(&f, &[0, 0, 0, 1]).reduce_poly().unwrap();
        assert_eq!(r.residue_roots(), vec![(rf.from_u64(0), 3)]);
        // z^2 + z over F_3 -> roots 0 and 2
        let r = poly(&f, &[0, 1, 1]).reduce_poly().unwrap();
        let mut roots = r.residue_roots();
        roots.sort_by_key(|(r, _)| r.coeffs().to_vec());
        assert_eq!(roots, vec![(rf.from_u64(0), 1), (rf.from_u64(2), 1)]);
        // z^3 + 2 = (z + 2)^3 over F_3: triple root 1
        let r = poly(&f, &[2, 0, 0, 1]).reduce_poly().unwrap();
        assert_eq!(r.residue_roots(), vec![(rf.from_u64(1), 3)]);
        assert_eq!(r.cubic_triple_root(), Some(rf.from_u64(1)));
    }

    #[test]
    fn cubic_triple_root_closed_forms() {
        // p = 5: 3(z-2)^3 = 3z^3 - 18z^2 + 36z - 24 ≡ 3z^3 + 2z^2 + z + 1 mod 5
        let f5 = Field::padic(5).unwrap();
        let rf = f5.residue_field().clone();
        let p = poly(&f5, &[1, 1, 2, 3]).reduce_poly().unwrap();
        assert_eq!(p.cubic_triple_root(), Some(rf.from_u64(2)));
        // not a triple root
        let q = poly(&f5, &[0, 1, 0, 1]).reduce_poly().unwrap();
        assert_eq!(q.cubic_triple_root(), None);
    }

    #[test]
    fn large_prime_residue_roots() {
        let f = Field::padic(1_000_003).unwrap();
        // (z-7)(z-11)
        let p = poly(&f, &[77, -18, 1]);
        let r = p.reduce_poly().unwrap();
        let mut roots: Vec<u64> = r
            .residue_roots()
            .into_iter()
            .map(|(r, m)| {
                assert_eq!(m, 1);
                r.as_u64().unwrap()
            })
            .collect();
        roots.sort();
        assert_eq!(roots, vec![7, 11]);
    }

    #[test]
    fn squarefree_part_char_zero() {
        let f = q3();
        // (z-1)^2 z -> z(z-1) up to unit
        let p = poly(&f, &[0, 1, -2, 1]);
        let s = p.squarefree_part().unwrap();
        assert_eq!(s, poly(&f, &[0, -1, 1]).monic().unwrap());
        // z^3 + z already squarefree
        let p = poly(&f, &[0, 1, 0, 1]);
        assert_eq!(p.squarefree_part().unwrap(), p);
        // divides f and is coprime to its derivative
        let p = poly(&f, &[0, 0, 1, 2, 1]); // z^2 (z+1)^2
        let s = p.squarefree_part().unwrap();
        let (_, r) = p.divrem(&s).unwrap();
        assert!(r.is_zero());
        assert_eq!(s.gcd(&s.derivative()).unwrap().degree(), Some(0));
    }

    #[test]
    fn squarefree_part_char_p() {
        let f = Field::laurent(3).unwrap();
        let t = f.uniformizer();
        let z = KPoly::var(&f);
        // (z - t)^3 = z^3 - t^3: distinct-factor product is z - t
        let zt = z.sub(&KPoly::constant(t.clone()));
        let cube = zt.mul(&zt).mul(&zt);
        assert!(cube.derivative().is_zero());
        let s = cube.squarefree_part().unwrap();
        assert_eq!(s, zt.monic().unwrap());
        // z^3 - t is irreducible and inseparable: squarefree part is itself
        let insep = z.mul(&z).mul(&z).sub(&KPoly::constant(t.clone()));
        let s = insep.squarefree_part().unwrap();
        assert_eq!(s, insep);
        // mixed: (z^3 - t)(z - 1)^3 -> (z^3 - t)(z - 1)
        let z1 = z.sub(&KPoly::one(&f));
        let mixed = insep.mul(&z1).mul(&z1).mul(&z1);
        let s = mixed.squarefree_part().unwrap();
        let expect = insep.mul(&z1).monic().unwrap();
        assert_eq!(s, expect);
    }

    #[test]
    fn reduce_is_multiplicative() {
        use rand::{Rng, SeedableRng};
        let f = q3();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let a = poly(
                &f,
                &(0..4).map(|_| rng.gen_range(0..40)).collect::<Vec<_>>(),
            );
            let b = poly(
                &f,
                &(0..3).map(|_| rng.gen_range(0..40)).collect::<Vec<_>>(),
            );
            if a.is_zero() || b.is_zero() {
                continue;
            }
            let lhs = a.mul(&b).reduce_poly().unwrap();
            let rhs = a.reduce_poly().unwrap().mul(&b.reduce_poly().unwrap());
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn discriminant_of_depressed_cubic() {
        // disc(z^3 + az + b) = -4a^3 - 27b^2
        let f = q3();
        for (a, b) in [(1i64, 1i64), (-2, 5), (0, 7), (4, -3)] {
            let p = poly(&f, &[b, a, 0, 1]);
            let d = p.discriminant().unwrap();
            let expect = KElem::from_i64(&f, -4 * a * a * a - 27 * b * b);
            assert_eq!(d, expect);
        }
    }

    #[test]
    fn divrem_and_gcd() {
        let f = q3();
        let a = poly(&f, &[2, 0, 1]).mul(&poly(&f, &[1, 1])); // (z^2+2)(z+1)
        let b = poly(&f, &[1, 1]);
        let (q, r) = a.divrem(&b).unwrap();
        assert!(r.is_zero());
        assert_eq!(q, poly(&f, &[2, 0, 1]));
        let g = a.gcd(&b).unwrap();
        assert_eq!(g, poly(&f, &[1, 1]));
    }

    #[test]
    fn taylor_shift_and_dilation() {
        let f = q3();
        let p = poly(&f, &[1, 2, 1]); // (z+1)^2
        let s = p.shift(&KElem::from_i64(&f, -1));
        assert_eq!(s, poly(&f, &[0, 0, 1]));
        let d = p.dilate_arg_pi(1); // (3z+1)^2 = 9z^2 + 6z + 1
        assert_eq!(d, poly(&f, &[1, 6, 9]));
    }
}
