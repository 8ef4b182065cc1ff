//! Dynamical layer: fixed and periodic points, multipliers, repelling
//! classification, affine conjugation.
//!
//! A point is repelling when its (cycle) multiplier has negative valuation.
//! Multiplier valuations of approximate roots are only reported once they sit
//! strictly below the precision horizon; otherwise the root is refined up the
//! precision ladder first. Points where the multiplier vanishes identically
//! are split off exactly beforehand (gcd with the derivative), so the
//! refinement loop always terminates.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::kfield::{Field, KElem, Val};
use crate::newton::{k_rational_roots, refine_root, HenselRoot, Precision};
use crate::respoly::{KPoly, DEGREE_CAP};

/// A polynomial self-map of P^1 of degree >= 2 (infinity is a superattracting
/// fixed point and never affects any verdict).
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMap {
    poly: KPoly,
}

impl PolyMap {
    pub fn new(poly: KPoly) -> Result<PolyMap> {
        match poly.degree() {
            Some(d) if d >= 2 => Ok(PolyMap { poly }),
            _ => Err(Error::InvalidField(
                "a polynomial map must have degree >= 2".into(),
            )),
        }
    }

    pub fn poly(&self) -> &KPoly {
        &self.poly
    }

    pub fn field(&self) -> &Field {
        self.poly.field()
    }

    pub fn degree(&self) -> usize {
        self.poly.degree().expect("degree >= 2")
    }

    pub fn evaluate(&self, x: &KElem) -> KElem {
        self.poly.evaluate(x)
    }

    /// The fixed-point polynomial g = φ(z) - z.
    pub fn fixed_point_poly(&self) -> KPoly {
        self.poly.sub(&KPoly::var(self.field()))
    }

    /// φ^q as a polynomial (degree d^q).
    pub fn iterate_poly(&self, q: u32) -> KPoly {
        assert!(q >= 1);
        let mut acc = self.poly.clone();
        for _ in 1..q {
            acc = self.poly.compose(&acc);
        }
        acc
    }
}

/// The affine map f(z) = a z + b, a != 0.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineConj {
    pub a: KElem,
    pub b: KElem,
}

impl AffineConj {
    pub fn new(a: KElem, b: KElem) -> Result<AffineConj> {
        if a.kernel_is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(AffineConj { a, b })
    }

    pub fn identity(field: &Field) -> AffineConj {
        AffineConj {
            a: field.one(),
            b: field.zero(),
        }
    }

    /// Pure translation z + b.
    pub fn translation(b: KElem) -> AffineConj {
        let field = b.field().clone();
        AffineConj { a: field.one(), b }
    }

    /// Pure dilation π^k z.
    pub fn dilation_pi(field: &Field, k: i64) -> AffineConj {
        AffineConj {
            a: KElem::uniformizer_pow(field, k),
            b: field.zero(),
        }
    }

    pub fn apply(&self, x: &KElem) -> KElem {
        self.a.mul(x).add(&self.b)
    }

    pub fn inverse(&self) -> Result<AffineConj> {
        let ai = self.a.inv()?;
        let b = ai.mul(&self.b).neg();
        Ok(AffineConj { a: ai, b })
    }

    /// Composition: (self ∘ other)(z) = self(other(z)).
    pub fn compose(&self, other: &AffineConj) -> AffineConj {
        AffineConj {
            a: self.a.mul(&other.a),
            b: self.a.mul(&other.b).add(&self.b),
        }
    }
}

impl Serialize for AffineConj {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("AffineConj", 2)?;
        s.serialize_field("a", &self.a)?;
        s.serialize_field("b", &self.b)?;
        s.end()
    }
}

/// Returns f ∘ φ ∘ f^{-1}, exactly; the degree is preserved.
pub fn conjugate(phi: &PolyMap, f: &AffineConj) -> Result<PolyMap> {
    let finv = f.inverse()?;
    // (f ∘ φ ∘ f^{-1})(z) = a φ(a^{-1} z - a^{-1} b) + b
    let inner = KPoly::new(
        phi.field(),
        vec![finv.b.clone(), finv.a.clone()],
    );
    let composed = phi.poly().compose(&inner);
    let out = composed.scale(&f.a).add(&KPoly::constant(f.b.clone()));
    PolyMap::new(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointClass {
    Repelling,
    NonRepelling,
}

/// A classified periodic point (period 1 = fixed).
#[derive(Debug, Clone)]
pub struct FixedPointReport {
    pub point: KElem,
    pub period: u32,
    /// The forward orbit of the point, length = period.
    pub cycle: Vec<KElem>,
    /// (φ^q)'(point) by the chain rule over the cycle.
    pub multiplier: KElem,
    pub multiplier_valuation: Val,
    /// Valuation reads below the precision horizon (always true for exact
    /// points).
    pub certified: bool,
    pub class: PointClass,
    /// Certified bound on v(φ^q(point) - point).
    pub residual_val: Val,
}

impl FixedPointReport {
    pub fn is_repelling(&self) -> bool {
        self.class == PointClass::Repelling
    }
}

impl Serialize for FixedPointReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("FixedPointReport", 5)?;
        s.serialize_field("point", &self.point)?;
        s.serialize_field("precision", &self.point.precision())?;
        match self.multiplier_valuation {
            Val::Finite(v) => s.serialize_field("multiplier_valuation", &v)?,
            Val::Infinite => s.serialize_field("multiplier_valuation", "inf")?,
        }
        s.serialize_field("class", &self.class)?;
        s.serialize_field("certified", &self.certified)?;
        s.end()
    }
}

/// All K-rational fixed points with certified multiplier classes. An empty
/// list for a cubic means the fixed-point equation is irreducible over K.
pub fn fixed_points(phi: &PolyMap, prec: &Precision) -> Result<Vec<FixedPointReport>> {
    periodic_points(phi, 1, prec)
}

/// The multiplier of a fixed point (q = 1) or the cycle multiplier
/// (φ^q)'(ρ) = Π φ'(φ^i(ρ)) of a q-periodic point.
pub fn multiplier(phi: &PolyMap, rho: &KElem, q: u32) -> KElem {
    let dphi = phi.poly().derivative();
    let mut acc = phi.field().one();
    let mut x = rho.clone();
    for _ in 0..q {
        acc = acc.mul(&dphi.evaluate(&x));
        x = phi.evaluate(&x);
    }
    acc
}

/// K-rational points of exact period q, classified by cycle multiplier.
/// Lower-period points are removed by exact division and a residual filter.
pub fn periodic_points(phi: &PolyMap, q: u32, prec: &Precision) -> Result<Vec<FixedPointReport>> {
    let d = phi.degree();
    let deg_q = d.checked_pow(q).filter(|&x| x <= DEGREE_CAP);
    if deg_q.is_none() {
        return Err(Error::DegreeCapExceeded {
            degree: d.pow(q.min(8)),
            cap: DEGREE_CAP,
        });
    }
    if !phi.poly().is_exact() {
        return Err(Error::ApproximateInput);
    }
    let field = phi.field().clone();
    // Φ_q = φ^q(z) - z
    let big = phi.iterate_poly(q).sub(&KPoly::var(&field));
    // remove points of proper-divisor periods; within the degree cap the
    // proper divisors of q form a chain, so one division suffices
    let quotient = match largest_proper_divisor(q) {
        None => big,
        Some(qp) => {
            let lower = phi.iterate_poly(qp).sub(&KPoly::var(&field));
            big.div_exact(&lower)?
        }
    };
    if quotient.degree().map_or(true, |d| d == 0) {
        return Ok(vec![]);
    }
    let sf = quotient.squarefree_part()?;
    // split off cycles through critical points: their multiplier is exactly 0
    let dq = derivative_of_iterate(phi, q);
    let critical = sf.gcd(&dq)?;
    let (super_part, generic_part) = if critical.degree().map_or(false, |d| d >= 1) {
        (Some(critical.clone()), sf.div_exact(&critical)?)
    } else {
        (None, sf)
    };
    let mut out = vec![];
    if let Some(sp) = super_part {
        for root in k_rational_roots(&sp, prec)? {
            if let Some(report) = build_report(phi, q, &root, true, prec)? {
                out.push(report);
            }
        }
    }
    for root in k_rational_roots(&generic_part, prec)? {
        if let Some(report) = build_report(phi, q, &root, false, prec)? {
            out.push(report);
        }
    }
    out.sort_by(|a, b| a.point.canonical_cmp(&b.point));
    Ok(out)
}

/// (φ^q)' as a polynomial: Π φ'(φ^i(z)).
fn derivative_of_iterate(phi: &PolyMap, q: u32) -> KPoly {
    let dphi = phi.poly().derivative();
    let mut acc = dphi.clone();
    let mut iter = phi.poly().clone();
    for _ in 1..q {
        acc = acc.mul(&dphi.compose(&iter));
        iter = phi.poly().compose(&iter);
    }
    acc
}

fn largest_proper_divisor(q: u32) -> Option<u32> {
    (1..q).rev().find(|d| q % d == 0)
}

/// Classify one root of the period-q quotient. Returns None when the point
/// turns out to have a proper lower period (quotient multiplicities can leak
/// one through when a lower cycle is tangent to the identity).
fn build_report(
    phi: &PolyMap,
    q: u32,
    root: &HenselRoot,
    multiplier_is_zero: bool,
    prec: &Precision,
) -> Result<Option<FixedPointReport>> {
    let mut root = root.clone();
    // lower-period filter
    if q > 1 {
        for qp in 1..q {
            if q % qp != 0 {
                continue;
            }
            let lower_residual = phi
                .iterate_poly(qp)
                .sub(&KPoly::var(phi.field()))
                .evaluate(&root.value);
            match lower_residual.certified_val() {
                Ok(Val::Infinite) => return Ok(None),
                Ok(_) => {}
                Err(_) => {
                    // cannot separate from a lower cycle at this precision:
                    // refine once, then decide conservatively
                    let target = root
                        .value
                        .precision()
                        .map(|n| (n * 2).min(prec.max))
                        .unwrap_or(prec.start);
                    let original = full_period_poly(phi, q)?;
                    root = refine_root(&original, &root, target, prec)?;
                    let again = phi
                        .iterate_poly(qp)
                        .sub(&KPoly::var(phi.field()))
                        .evaluate(&root.value);
                    if again.certified_val().is_err() {
                        return Ok(None);
                    }
                    if again.certified_val()? == Val::Infinite {
                        return Ok(None);
                    }
                }
            }
        }
    }
    let field = phi.field().clone();
    let compress_at = root.value.precision();
    // orbit
    let mut cycle = vec![root.value.clone()];
    for _ in 1..q {
        let mut next = phi.evaluate(cycle.last().unwrap());
        if let Some(n) = compress_at {
            next = next.compress(n);
        }
        cycle.push(next);
    }
    if multiplier_is_zero {
        let mult = field.zero();
        return Ok(Some(FixedPointReport {
            point: root.value.clone(),
            period: q,
            cycle,
            multiplier: mult,
            multiplier_valuation: Val::Infinite,
            certified: true,
            class: PointClass::NonRepelling,
            residual_val: root.residual_val,
        }));
    }
    // certified multiplier valuation, refining up the ladder as needed
    let mut current = root;
    loop {
        let mult = multiplier(phi, &current.value, q);
        match mult.certified_val() {
            Ok(v) => {
                let class = if v < Val::Finite(0) {
                    PointClass::Repelling
                } else {
                    PointClass::NonRepelling
                };
                return Ok(Some(FixedPointReport {
                    point: current.value.clone(),
                    period: q,
                    cycle,
                    multiplier: mult.clone(),
                    multiplier_valuation: v,
                    certified: true,
                    class,
                    residual_val: current.residual_val,
                }));
            }
            Err(_) => {
                let cur_n = current
                    .value
                    .precision()
                    .expect("uncertified implies approximate");
                let target = cur_n * 2;
                if target > prec.max {
                    return Err(Error::PrecisionExhausted {
                        requested: target,
                        cap: prec.max,
                    });
                }
                let original = full_period_poly(phi, q)?;
                current = refine_root(&original, &current, target, prec)?;
            }
        }
    }
}

fn full_period_poly(phi: &PolyMap, q: u32) -> Result<KPoly> {
    Ok(phi.iterate_poly(q).sub(&KPoly::var(phi.field())))
}

/// First repelling cycle found scanning q = 1..q_max, or None.
pub fn find_repelling_periodic(
    phi: &PolyMap,
    q_max: u32,
    prec: &Precision,
) -> Result<Option<FixedPointReport>> {
    for q in 1..=q_max {
        let reports = periodic_points(phi, q, prec)?;
        if let Some(r) = reports.into_iter().find(|r| r.is_repelling()) {
            return Ok(Some(r));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kfield::Field;

    fn q3() -> Field {
        Field::padic(3).unwrap()
    }

    fn map(f: &Field, coeffs: &[i64]) -> PolyMap {
        PolyMap::new(KPoly::from_i64(f, coeffs)).unwrap()
    }

    #[test]
    fn conjugation_examples() {
        let f = q3();
        // φ = z^3, f = (a = π, b = 0): π (z/π)^3 = z^3/π^2
        let phi = map(&f, &[0, 0, 0, 1]);
        let conj = conjugate(&phi, &AffineConj::dilation_pi(&f, 1)).unwrap();
        let expect = KPoly::new(
            &f,
            vec![
                f.zero(),
                f.zero(),
                f.zero(),
                KElem::from_ratio_i64(&f, 1, 9).unwrap(),
            ],
        );
        assert_eq!(conj.poly(), &expect);
        // identity conjugation
        let id = AffineConj::identity(&f);
        let phi2 = map(&f, &[5, 1, 2, 3]);
        assert_eq!(conjugate(&phi2, &id).unwrap().poly(), phi2.poly());
        // §3.2 display: φ = (1/π^n)(u z^3 + a1 z^2 + a2 z + a3), dilation a = π^{-l}
        // -> (1/π^{n-2l})(u z^3 + π^{-l} a1 z^2 + π^{-2l} a2 z + π^{-3l} a3)
        let n = 4i64;
        let (u, a1, a2, a3) = (2i64, 9i64, 27i64, 81i64);
        let pn = KElem::uniformizer_pow(&f, -n);
        let phi3 = PolyMap::new(
            KPoly::from_i64(&f, &[a3, a2, a1, u]).scale(&pn),
        )
        .unwrap();
        let l = 1i64;
        let conj = conjugate(&phi3, &AffineConj::dilation_pi(&f, -l)).unwrap();
        let expect = KPoly::new(
            &f,
            vec![
                KElem::from_i64(&f, a3).shift(-3 * l - (n - 2 * l)),
                KElem::from_i64(&f, a2).shift(-2 * l - (n - 2 * l)),
                KElem::from_i64(&f, a1).shift(-l - (n - 2 * l)),
                KElem::from_i64(&f, u).shift(-(n - 2 * l)),
            ],
        );
        assert_eq!(conj.poly(), &expect);
    }

    #[test]
    fn conjugate_roundtrip() {
        let f = q3();
        let phi = map(&f, &[1, 2, 0, 5]);
        let a = KElem::from_ratio_i64(&f, 9, 2).unwrap();
        let b = KElem::from_i64(&f, 7);
        let c = AffineConj::new(a, b).unwrap();
        let there = conjugate(&phi, &c).unwrap();
        let back = conjugate(&there, &c.inverse().unwrap()).unwrap();
        assert_eq!(back.poly(), phi.poly());
    }

    #[test]
    fn fixed_points_of_z3_plus_z() {
        // only K-rational fixed point is 0, multiplier 1, non-repelling
        let f = q3();
        let phi = map(&f, &[0, 1, 0, 1]);
        let reports = fixed_points(&phi, &Precision::default()).unwrap();
        assert_eq!(reports.len(), 1);
        let r = &reports[0];
        assert!(r.point.is_exactly_zero());
        assert_eq!(r.multiplier, f.one());
        assert_eq!(r.multiplier_valuation, Val::Finite(0));
        assert_eq!(r.class, PointClass::NonRepelling);
    }

    #[test]
    fn fixed_points_with_repelling_example() {
        // φ = z + z^2 + 9 z^3 over Q_3: fixed points 0 (λ = 1) and -1/9
        // (λ = 10/9, v = -2, repelling)
        let f = q3();
        let phi = map(&f, &[0, 1, 1, 9]);
        let reports = fixed_points(&phi, &Precision::default()).unwrap();
        assert_eq!(reports.len(), 2);
        let repelling: Vec<_> = reports.iter().filter(|r| r.is_repelling()).collect();
        assert_eq!(repelling.len(), 1);
        let r = repelling[0];
        assert_eq!(r.multiplier_valuation, Val::Finite(-2));
        assert_eq!(r.point, KElem::from_ratio_i64(&f, -1, 9).unwrap());
        assert_eq!(
            r.multiplier,
            KElem::from_ratio_i64(&f, 10, 9).unwrap()
        );
    }

    #[test]
    fn no_fixed_points_eisenstein() {
        // φ = (1/3)(z^3 + 3): fixed-point polynomial has slope -1/3 only
        let f = q3();
        let third = KElem::from_ratio_i64(&f, 1, 3).unwrap();
        let phi = PolyMap::new(KPoly::from_i64(&f, &[3, 0, 0, 1]).scale(&third)).unwrap();
        let reports = fixed_points(&phi, &Precision::default()).unwrap();
        assert!(reports.is_empty());
    }

    #[test]
    fn multiplier_chain_rule_and_rotation() {
        let f = q3();
        let phi = map(&f, &[1, 2, 1, 1]);
        // artificial 2-cycle check on arbitrary points: chain rule contract
        let x = KElem::from_i64(&f, 2);
        let m = multiplier(&phi, &x, 2);
        let dphi = phi.poly().derivative();
        let expect = dphi.evaluate(&x).mul(&dphi.evaluate(&phi.evaluate(&x)));
        assert_eq!(m, expect);
    }

    #[test]
    fn superattracting_fixed_point() {
        // φ = z^3: fixed points 0 (multiplier 0), 1 and -1 (multiplier 3)
        let f = q3();
        let phi = map(&f, &[0, 0, 0, 1]);
        let reports = fixed_points(&phi, &Precision::default()).unwrap();
        assert_eq!(reports.len(), 3);
        let zero = reports
            .iter()
            .find(|r| r.point.is_exactly_zero())
            .unwrap();
        assert_eq!(zero.multiplier_valuation, Val::Infinite);
        assert_eq!(zero.class, PointClass::NonRepelling);
        for r in reports.iter().filter(|r| !r.point.is_exactly_zero()) {
            assert_eq!(r.multiplier_valuation, Val::Finite(1));
            assert_eq!(r.class, PointClass::NonRepelling);
        }
    }

    #[test]
    fn period_two_none_for_good_reduction() {
        // φ = z^3 + z: WNM exists, no repelling 2-cycles
        let f = q3();
        let phi = map(&f, &[0, 1, 0, 1]);
        let reports = periodic_points(&phi, 2, &Precision::default()).unwrap();
        assert!(reports.iter().all(|r| !r.is_repelling()));
        // q = 1 agrees with fixed_points
        let p1 = periodic_points(&phi, 1, &Precision::default()).unwrap();
        let fp = fixed_points(&phi, &Precision::default()).unwrap();
        assert_eq!(p1.len(), fp.len());
    }

    #[test]
    fn repelling_two_cycle_of_quartic_counterexample_shape() {
        // φ = z^2 (z-1)^2 / 25 + z over Q_5 admits a repelling 2-cycle
        let f5 = Field::padic(5).unwrap();
        let inv25 = KElem::from_ratio_i64(&f5, 1, 25).unwrap();
        // z^2 (z-1)^2 = z^4 - 2z^3 + z^2
        let num = KPoly::from_i64(&f5, &[0, 0, 1, -2, 1]);
        let phi = PolyMap::new(num.scale(&inv25).add(&KPoly::var(&f5))).unwrap();
        let reports = periodic_points(&phi, 2, &Precision::default()).unwrap();
        let repelling: Vec<_> = reports.iter().filter(|r| r.is_repelling()).collect();
        assert!(!repelling.is_empty());
        for r in &repelling {
            assert_eq!(r.multiplier_valuation, Val::Finite(-2));
            assert_eq!(r.period, 2);
        }
        // the scan finds it
        let w = find_repelling_periodic(&phi, 2, &Precision::default())
            .unwrap()
            .unwrap();
        assert_eq!(w.period, 2);
    }

    #[test]
    fn find_repelling_scan() {
        let f = q3();
        // repelling fixed point at q = 1
        let phi = map(&f, &[0, 1, 1, 9]);
        let w = find_repelling_periodic(&phi, 1, &Precision::default())
            .unwrap()
            .unwrap();
        assert_eq!(w.period, 1);
        assert_eq!(w.multiplier_valuation, Val::Finite(-2));
        // none for z^3 + z up to q = 2
        let phi = map(&f, &[0, 1, 0, 1]);
        assert!(find_repelling_periodic(&phi, 2, &Precision::default())
            .unwrap()
            .is_none());
    }

    #[test]
    fn conjugation_invariance_of_multiplier_valuations() {
        use rand::{Rng, SeedableRng};
        let f = q3();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let prec = Precision::default();
        for _ in 0..25 {
            let coeffs: Vec<i64> = (0..4)
                .map(|i| {
                    let c = rng.gen_range(-40i64..=40);
                    if i == 3 && c == 0 {
                        1
                    } else {
                        c
                    }
                })
                .collect();
            let phi = map(&f, &coeffs);
            let a = loop {
                let u = rng.gen_range(-20i64..=20);
                if u != 0 {
                    break KElem::from_i64(&f, u).mul(&f.uniformizer_pow(rng.gen_range(-2..=2)));
                }
            };
            let b = KElem::from_i64(&f, rng.gen_range(-20i64..=20));
            let c = AffineConj::new(a, b).unwrap();
            let psi = conjugate(&phi, &c).unwrap();
            let mut v1: Vec<Val> = fixed_points(&phi, &prec)
                .unwrap()
                .iter()
                .map(|r| r.multiplier_valuation)
                .collect();
            let mut v2: Vec<Val> = fixed_points(&psi, &prec)
                .unwrap()
                .iter()
                .map(|r| r.multiplier_valuation)
                .collect();
            v1.sort();
            v2.sort();
            assert_eq!(v1, v2, "map {coeffs:?}");
        }
    }
}
