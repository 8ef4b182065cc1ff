//! Polynomials in t over a residue field: the building block of the exact
//! Laurent-series kernel (rational functions in t).

use crate::error::{Error, Result};
use crate::kfield::residue::{ResidueElem, ResidueField};

/// Dense polynomial in t, ascending coefficients, trimmed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TPoly {
    pub rf: ResidueField,
    pub coeffs: Vec<ResidueElem>,
}

impl TPoly {
    pub fn zero(rf: &ResidueField) -> TPoly {
        TPoly {
            rf: rf.clone(),
            coeffs: vec![],
        }
    }

    pub fn one(rf: &ResidueField) -> TPoly {
        TPoly {
            rf: rf.clone(),
            coeffs: vec![rf.one()],
        }
    }

    pub fn constant(c: ResidueElem) -> TPoly {
        let rf = c.field().clone();
        let mut p = TPoly {
            rf,
            coeffs: vec![c],
        };
        p.trim();
        p
    }

    pub fn from_coeffs(rf: &ResidueField, coeffs: Vec<ResidueElem>) -> TPoly {
        let mut p = TPoly {
            rf: rf.clone(),
            coeffs,
        };
        p.trim();
        p
    }

    /// t^k.
    pub fn t_pow(rf: &ResidueField, k: usize) -> TPoly {
        let mut coeffs = vec![rf.zero(); k + 1];
        coeffs[k] = rf.one();
        TPoly {
            rf: rf.clone(),
            coeffs,
        }
    }

    fn trim(&mut self) {
        while self.coeffs.last().map_or(false, |c| c.is_zero()) {
            self.coeffs.pop();
        }
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

    /// t-adic order: index of the lowest nonzero coefficient.
    pub fn ord(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn coeff(&self, i: usize) -> ResidueElem {
        self.coeffs.get(i).cloned().unwrap_or_else(|| self.rf.zero())
    }

    pub fn add(&self, other: &TPoly) -> TPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i).add(&other.coeff(i))).collect();
        TPoly::from_coeffs(&self.rf, coeffs)
    }

    pub fn sub(&self, other: &TPoly) -> TPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i).sub(&other.coeff(i))).collect();
        TPoly::from_coeffs(&self.rf, coeffs)
    }

    pub fn neg(&self) -> TPoly {
        TPoly::from_coeffs(&self.rf, self.coeffs.iter().map(|c| c.neg()).collect())
    }

    pub fn mul(&self, other: &TPoly) -> TPoly {
        if self.is_zero() || other.is_zero() {
            return TPoly::zero(&self.rf);
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
        TPoly::from_coeffs(&self.rf, out)
    }

    pub fn scale(&self, c: &ResidueElem) -> TPoly {
        TPoly::from_coeffs(&self.rf, self.coeffs.iter().map(|a| a.mul(c)).collect())
    }

    /// Quotient and remainder; divisor must be nonzero.
    pub fn divrem(&self, d: &TPoly) -> Result<(TPoly, TPoly)> {
        if d.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let dd = d.degree().unwrap();
        let lead_inv = d.coeffs[dd].inv()?;
        let mut rem = self.clone();
        let mut quot = vec![self.rf.zero(); self.coeffs.len().saturating_sub(dd)];
        while let Some(rd) = rem.degree() {
            if rd < dd {
                break;
            }
            let c = rem.coeffs[rd].mul(&lead_inv);
            let k = rd - dd;
            quot[k] = quot[k].add(&c);
            for i in 0..=dd {
                let v = rem.coeff(k + i).sub(&c.mul(&d.coeffs[i]));
                if k + i < rem.coeffs.len() {
                    rem.coeffs[k + i] = v;
                } else if !v.is_zero() {
                    rem.coeffs.resize(k + i + 1, self.rf.zero());
                    rem.coeffs[k + i] = v;
                }
            }
            rem.trim();
        }
        Ok((TPoly::from_coeffs(&self.rf, quot), rem))
    }

    /// Monic gcd.
    pub fn gcd(&self, other: &TPoly) -> TPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.divrem(&b).expect("divisor nonzero");
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn monic(&self) -> TPoly {
        match self.degree() {
            None => self.clone(),
            Some(d) => {
                let inv = self.coeffs[d].inv().expect("leading coefficient nonzero");
                self.scale(&inv)
            }
        }
    }

    /// Truncated power-series inverse of a unit (constant coefficient nonzero),
    /// to order n (n coefficients).
    pub fn series_inv(&self, n: usize) -> Result<TPoly> {
        let c0 = self.coeff(0);
        if c0.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let c0i = c0.inv()?;
        let mut inv = vec![self.rf.zero(); n];
        if n == 0 {
            return Ok(TPoly::zero(&self.rf));
        }
        inv[0] = c0i.clone();
        for k in 1..n {
            // coefficient k of self*inv must be zero
            let mut acc = self.rf.zero();
            for j in 0..k {
                acc = acc.add(&self.coeff(k - j).mul(&inv[j]));
            }
            inv[k] = acc.neg().mul(&c0i);
        }
        Ok(TPoly::from_coeffs(&self.rf, inv))
    }

    /// Truncate to the first n coefficients.
    pub fn truncate(&self, n: usize) -> TPoly {
        TPoly::from_coeffs(
            &self.rf,
            self.coeffs.iter().take(n).cloned().collect(),
        )
    }

    /// Formal derivative d/dt.
    pub fn derivative_t(&self) -> TPoly {
        if self.coeffs.len() <= 1 {
            return TPoly::zero(&self.rf);
        }
        let p = self.rf.char();
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| {
                let k = self.rf.from_u64((i as u64) % p);
                c.mul(&k)
            })
            .collect();
        TPoly::from_coeffs(&self.rf, coeffs)
    }

    /// Whether all exponents with nonzero coefficient are divisible by p;
    /// if so the polynomial is a p-th power (coefficient field is finite,
    /// so every scalar has a p-th root) and its p-th root is returned.
    pub fn pth_root(&self) -> Option<TPoly> {
        let p = self.rf.char() as usize;
        let mut out = vec![];
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if i % p != 0 {
                return None;
            }
            let k = i / p;
            if out.len() <= k {
                out.resize(k + 1, self.rf.zero());
            }
            out[k] = c.pth_root();
        }
        Some(TPoly::from_coeffs(&self.rf, out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3() -> ResidueField {
        ResidueField::prime(3).unwrap()
    }

    fn poly(coeffs: &[i64]) -> TPoly {
        let rf = f3();
        TPoly::from_coeffs(&rf, coeffs.iter().map(|&c| rf.from_i64(c)).collect())
    }

    #[test]
    fn divrem_roundtrip() {
        let a = poly(&[1, 0, 2, 1]);
        let b = poly(&[2, 1]);
        let (q, r) = a.divrem(&b).unwrap();
        assert_eq!(q.mul(&b).add(&r), a);
    }

    #[test]
    fn series_inverse() {
        // 1/(1 - t) = 1 + t + t^2 + ... over F_3
        let d = poly(&[1, -1]);
        let inv = d.series_inv(5).unwrap();
        for i in 0..5 {
            assert!(inv.coeff(i).is_one());
        }
        let prod = d.mul(&inv).truncate(5);
        assert_eq!(prod, poly(&[1]));
    }

    #[test]
    fn pth_root_of_cube() {
        // (1 + t)^3 = 1 + t^3 over F_3
        let c = poly(&[1, 0, 0, 1]);
        let r = c.pth_root().unwrap();
        assert_eq!(r, poly(&[1, 1]));
        assert!(poly(&[1, 1, 1]).pth_root().is_none());
    }
}
