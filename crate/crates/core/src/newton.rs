//! Newton polygons, Hensel lifting, and the K-rational root finder that
//! powers fixed/periodic point detection.
//!
//! The root finder walks the Newton polygon: for each integer slope -m it
//! rescales by π^m and descends residue disks, lifting simple residue roots
//! by Hensel and recursing on multiple ones with z = ζ + π w. Branch descent
//! is bounded by the discriminant valuation (distinct roots of a squarefree
//! polynomial separate within it), so the recursion cannot run away; a branch
//! that exhausts its budget without producing a simple residue root has no
//! K-rational point in it.

use num_rational::Rational64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kfield::{KElem, Val};
use crate::respoly::{KPoly, DEGREE_CAP};

/// Precision ladder: start at `start` valuation units, double up to `max`,
/// then fail loudly.
#[derive(Debug, Clone, Copy)]
pub struct Precision {
    pub start: i64,
    pub max: i64,
}

impl Default for Precision {
    fn default() -> Self {
        Precision {
            start: 64,
            max: 1024,
        }
    }
}

/// One segment of the lower hull: slope and horizontal length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Segment {
    /// Exact slope (Δv / Δi).
    #[serde(serialize_with = "serialize_slope")]
    pub slope: Rational64,
    pub length: usize,
}

fn serialize_slope<S: serde::Serializer>(
    s: &Rational64,
    ser: S,
) -> std::result::Result<S::Ok, S::Error> {
    ser.serialize_str(&format!("{}/{}", s.numer(), s.denom()))
}

/// Lower convex hull of the coefficient valuation points (i, v(c_i)).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NewtonPolygon {
    /// Hull vertices, left to right.
    pub vertices: Vec<(usize, i64)>,
    /// Segments between consecutive vertices; slopes strictly increase.
    pub segments: Vec<Segment>,
    /// Order of vanishing at 0 (index of the first nonzero coefficient).
    pub ord_zero: usize,
}

impl NewtonPolygon {
    /// The multiset of negated slopes with lengths equals the multiset of
    /// valuations of the nonzero roots in an algebraic closure.
    pub fn root_valuations(&self) -> Vec<(Rational64, usize)> {
        self.segments.iter().map(|s| (-s.slope, s.length)).collect()
    }
}

/// Lower hull of {(i, v(c_i)) : c_i != 0}. The polynomial must be nonzero.
pub fn newton_polygon(f: &KPoly) -> NewtonPolygon {
    assert!(!f.is_zero(), "newton polygon of the zero polynomial");
    let pts: Vec<(usize, i64)> = f
        .coeffs()
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.val().finite().map(|v| (i, v)))
        .collect();
    let ord_zero = pts.first().map(|&(i, _)| i).unwrap_or(0);
    // monotone chain, keeping the lower hull
    let mut hull: Vec<(usize, i64)> = vec![];
    for &(x, y) in &pts {
        while hull.len() >= 2 {
            let (x1, y1) = hull[hull.len() - 2];
            let (x2, y2) = hull[hull.len() - 1];
            // pop if (x2, y2) lies on or above the line (x1,y1)-(x,y)
            let lhs = (y2 - y1) as i128 * (x - x1) as i128;
            let rhs = (y - y1) as i128 * (x2 - x1) as i128;
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push((x, y));
    }
    let segments = hull
        .windows(2)
        .map(|w| {
            let (x1, y1) = w[0];
            let (x2, y2) = w[1];
            Segment {
                slope: Rational64::new(y2 - y1, (x2 - x1) as i64),
                length: x2 - x1,
            }
        })
        .collect();
    NewtonPolygon {
        vertices: hull,
        segments,
        ord_zero,
    }
}

/// A certified root: the approximant agrees with the true root modulo
/// π^(value.precision), and v(f(approximant)) >= residual_val.
#[derive(Debug, Clone)]
pub struct HenselRoot {
    pub value: KElem,
    pub residual_val: Val,
    /// v(f'(approximant)).
    pub derivative_val: Val,
}

impl HenselRoot {
    pub fn is_exact(&self) -> bool {
        self.value.is_exact()
    }
}

/// Newton iteration from a0 until v(f(root)) >= n, under the Hensel
/// hypothesis v(f(a0)) > 2 v(f'(a0)). Coefficients must be exact.
pub fn hensel_lift(f: &KPoly, a0: &KElem, n: i64, prec: &Precision) -> Result<HenselRoot> {
    if !f.is_exact() {
        return Err(Error::ApproximateInput);
    }
    if n > prec.max {
        return Err(Error::PrecisionExhausted {
            requested: n,
            cap: prec.max,
        });
    }
    let fp = f.derivative();
    let a0 = a0.assume_exact();
    let f_val = f.evaluate(&a0).val();
    let df_val = fp.evaluate(&a0).val();
    let hyp_ok = match (f_val, df_val) {
        (_, Val::Infinite) => false,
        (Val::Infinite, _) => true,
        (Val::Finite(a), Val::Finite(b)) => a > 2 * b,
    };
    if !hyp_ok {
        return Err(Error::HenselHypothesisFailed {
            f_val: f_val.to_string(),
            df_val: df_val.to_string(),
        });
    }
    newton_polish(f, &fp, &a0, n, prec)
}

/// Newton iteration with exact kernels compressed at a working modulus; the
/// final residual is certified by exact evaluation.
fn newton_polish(
    f: &KPoly,
    fp: &KPoly,
    start: &KElem,
    n: i64,
    prec: &Precision,
) -> Result<HenselRoot> {
    let mu = match fp.evaluate(start).val() {
        Val::Infinite => {
            return Err(Error::HenselHypothesisFailed {
                f_val: f.evaluate(start).val().to_string(),
                df_val: "inf".into(),
            })
        }
        Val::Finite(m) => m,
    };
    if f.evaluate(start).kernel_is_zero() {
        return Ok(HenselRoot {
            value: start.assume_exact(),
            residual_val: Val::Infinite,
            derivative_val: Val::Finite(mu),
        });
    }
    let root_floor = start.val().finite().unwrap_or(0).min(0);
    // working modulus: enough digits that compression never disturbs the
    // residual certification below
    let work = n + 2 * mu.abs() + 8 - root_floor;
    let mut x = start.assume_exact().compress(work).assume_exact();
    let mut last_residual = f.evaluate(&x).val();
    for _ in 0..64 {
        let fx = f.evaluate(&x);
        if fx.kernel_is_zero() {
            return Ok(HenselRoot {
                value: x,
                residual_val: Val::Infinite,
                derivative_val: Val::Finite(mu),
            });
        }
        let dfx = fp.evaluate(&x);
        let step = fx.div(&dfx)?;
        x = x.sub(&step).compress(work).assume_exact();
        let res = f.evaluate(&x).val();
        if res >= Val::Finite(n) {
            let mu_final = fp
                .evaluate(&x)
                .val()
                .expect_finite("derivative at certified root");
            let agreement = match res {
                Val::Infinite => {
                    return Ok(HenselRoot {
                        value: x,
                        residual_val: Val::Infinite,
                        derivative_val: Val::Finite(mu_final),
                    })
                }
                Val::Finite(r) => r - mu_final,
            };
            // small exact roots hide behind the canonical representative:
            // rational reconstruction recovers them when they exist
            if let Some(cand) = x.with_precision(agreement).rational_reconstruct() {
                if f.evaluate(&cand).kernel_is_zero() {
                    return Ok(HenselRoot {
                        value: cand,
                        residual_val: Val::Infinite,
                        derivative_val: Val::Finite(mu_final),
                    });
                }
            }
            return Ok(HenselRoot {
                value: x.with_precision(agreement),
                residual_val: res,
                derivative_val: Val::Finite(mu_final),
            });
        }
        if res <= last_residual {
            return Err(Error::HenselHypothesisFailed {
                f_val: res.to_string(),
                df_val: Val::Finite(mu).to_string(),
            });
        }
        last_residual = res;
    }
    Err(Error::PrecisionExhausted {
        requested: n,
        cap: prec.max,
    })
}

/// Re-certify a root of f to a higher residual target.
pub fn refine_root(f: &KPoly, root: &HenselRoot, n: i64, prec: &Precision) -> Result<HenselRoot> {
    if root.is_exact() || root.residual_val >= Val::Finite(n) {
        return Ok(root.clone());
    }
    if n > prec.max {
        return Err(Error::PrecisionExhausted {
            requested: n,
            cap: prec.max,
        });
    }
    let fp = f.derivative();
    newton_polish(f, &fp, &root.value, n, prec)
}

/// All roots of f lying in K, each Hensel-certified. The input must be
/// squarefree with exact coefficients and degree <= DEGREE_CAP.
pub fn k_rational_roots(f: &KPoly, prec: &Precision) -> Result<Vec<HenselRoot>> {
    if !f.is_exact() {
        return Err(Error::ApproximateInput);
    }
    let deg = match f.degree() {
        None | Some(0) => return Ok(vec![]),
        Some(d) => d,
    };
    if deg > DEGREE_CAP {
        return Err(Error::DegreeCapExceeded {
            degree: deg,
            cap: DEGREE_CAP,
        });
    }
    let field = f.field().clone();
    let mut work = f.clone();
    let mut raw_roots: Vec<KElem> = vec![];
    // factor out z if 0 is a root (squarefree input: multiplicity 1)
    if work.coeff(0).kernel_is_zero() {
        raw_roots.push(field.zero());
        work = work.div_exact(&KPoly::var(&field))?;
    }
    if work.degree().map_or(false, |d| d >= 1) {
        let budget = depth_budget(&work)?;
        let (normalized, _) = work.normalize_content()?;
        let polygon = newton_polygon(&normalized);
        for seg in &polygon.segments {
            let s = -seg.slope;
            if !s.is_integer() {
                continue;
            }
            let m = *s.numer();
            // roots of valuation m <-> unit roots of f(π^m y)
            let g = normalized.dilate_arg_pi(m);
            let (g, _) = g.normalize_content()?;
            let mut found = roots_in_unit_disk(&g, 0, budget, true, prec)?;
            for r in found.drain(..) {
                raw_roots.push(r.shift(m));
            }
        }
    }
    // polish every approximant against the original polynomial and dedup
    let mut out: Vec<HenselRoot> = vec![];
    let fp = f.derivative();
    for raw in raw_roots {
        let polished = if raw.is_exact() && f.evaluate(&raw).kernel_is_zero() {
            HenselRoot {
                value: raw.clone(),
                residual_val: Val::Infinite,
                derivative_val: fp.evaluate(&raw).val(),
            }
        } else {
            newton_polish(f, &fp, &raw, prec.start, prec)?
        };
        let dup = out.iter().any(|r| same_root(&r.value, &polished.value));
        if !dup {
            out.push(polished);
        }
    }
    out.sort_by(|a, b| a.value.canonical_cmp(&b.value));
    Ok(out)
}

fn same_root(a: &KElem, b: &KElem) -> bool {
    let horizon = [a.precision(), b.precision()]
        .iter()
        .flatten()
        .copied()
        .min();
    let d = a.sub(b).val();
    match horizon {
        None => d.is_infinite(),
        Some(h) => d >= Val::Finite(h),
    }
}

/// Roots y of g with v(y) >= 0 (g integral with unit content). When
/// `exclude_zero_residue` is set only unit roots are collected — the polygon
/// walk above has already dispatched higher-valuation roots to other segments.
fn roots_in_unit_disk(
    g: &KPoly,
    depth: i64,
    budget: i64,
    exclude_zero_residue: bool,
    prec: &Precision,
) -> Result<Vec<KElem>> {
    let field = g.field().clone();
    let reduced = g.reduce_poly()?;
    if reduced.degree().map_or(true, |d| d == 0) {
        return Ok(vec![]);
    }
    let mut out = vec![];
    for (zeta, mult) in reduced.residue_roots() {
        if exclude_zero_residue && zeta.is_zero() {
            continue;
        }
        let lift = KElem::from_residue(&field, &zeta);
        if mult == 1 {
            let root = hensel_lift(g, &lift, prec.start, prec)?;
            out.push(root.value);
        } else {
            if depth >= budget {
                // Past the separation bound a squarefree input cannot split
                // further: the branch holds no K-rational root.
                continue;
            }
            // descend: y = ζ + π w, collect integral w
            let h = g.shift(&lift).dilate_arg_pi(1);
            let (h, _) = h.normalize_content()?;
            let sub = roots_in_unit_disk(&h, depth + 1, budget, false, prec)?;
            for w in sub {
                out.push(lift.add(&w.shift(1)));
            }
        }
    }
    Ok(out)
}

/// Branch descent budget. Distinct roots of a squarefree separable
/// polynomial separate within v(disc); the inseparable squarefree case
/// (char p, zero discriminant) digs through kernel expansions instead, which
/// a size-based bound covers.
fn depth_budget(f: &KPoly) -> Result<i64> {
    let disc = f.discriminant()?;
    match disc.val() {
        Val::Finite(v) => Ok(2 + v.max(0)),
        Val::Infinite => {
            let size: i64 = f
                .coeffs()
                .iter()
                .map(|c| c.val().finite().map_or(0, |v| v.abs()) + kernel_size(c))
                .sum();
            Ok(8 + 2 * f.degree().unwrap_or(0) as i64 + 4 * size)
        }
    }
}

fn kernel_size(c: &KElem) -> i64 {
    // crude but finite: length of the kernel's printed form
    (c.kernel_string().len() / 2) as i64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kfield::Field;

    fn q3() -> Field {
        Field::padic(3).unwrap()
    }

    fn qp(p: u64) -> Field {
        Field::padic(p).unwrap()
    }

    fn poly(f: &Field, coeffs: &[i64]) -> KPoly {
        KPoly::from_i64(f, coeffs)
    }

    #[test]
    fn polygon_examples() {
        let f = qp(5);
        // z^3 - 5z + 5: points (0,1),(1,1),(3,0) -> single segment slope -1/3
        let p = poly(&f, &[5, -5, 0, 1]);
        let np = newton_polygon(&p);
        assert_eq!(np.segments.len(), 1);
        assert_eq!(np.segments[0].slope, Rational64::new(-1, 3));
        assert_eq!(np.segments[0].length, 3);
        // z^2 - 5z: points (1,1),(2,0): slope -1 length 1, ord_zero 1
        let p = poly(&f, &[0, -5, 1]);
        let np = newton_polygon(&p);
        assert_eq!(np.ord_zero, 1);
        assert_eq!(
            np.segments,
            vec![Segment {
                slope: Rational64::new(-1, 1),
                length: 1
            }]
        );
        // uz^3 + a3 with v(u) = 0, v(a3) = 3: one segment slope -1 length 3
        let p = poly(&f, &[125, 0, 0, 2]);
        let np = newton_polygon(&p);
        assert_eq!(
            np.segments,
            vec![Segment {
                slope: Rational64::new(-1, 1),
                length: 3
            }]
        );
    }

    #[test]
    fn polygon_lengths_sum() {
        let f = q3();
        let p = poly(&f, &[0, 0, 9, 1, 3]);
        let np = newton_polygon(&p);
        let total: usize = np.segments.iter().map(|s| s.length).sum();
        assert_eq!(total, p.degree().unwrap() - np.ord_zero);
    }

    #[test]
    fn hensel_square_root_of_seven() {
        // 7 is a square in Q_3 (7 ≡ 1 mod 3)
        let f = q3();
        let p = poly(&f, &[-7, 0, 1]);
        let root = hensel_lift(&p, &KElem::from_i64(&f, 1), 64, &Precision::default()).unwrap();
        assert!(root.residual_val >= Val::Finite(64));
        // oracle: the square of the approximant is 7 mod 3^64
        let sq = root.value.assume_exact().mul(&root.value.assume_exact());
        let diff = sq.sub(&KElem::from_i64(&f, 7));
        assert!(diff.val() >= Val::Finite(64));
        // refinement agrees modulo the previous precision
        let better = refine_root(
            &p,
            &root,
            200,
            &Precision {
                start: 64,
                max: 1024,
            },
        )
        .unwrap();
        let d = better.value.sub(&root.value);
        assert!(d.val() >= Val::Finite(root.value.precision().unwrap()));
    }

    #[test]
    fn hensel_hypothesis_failure() {
        // z^2 - 3 over Q_3 from a0 = 0: no K-rational root, slope -1/2
        let f = q3();
        let p = poly(&f, &[-3, 0, 1]);
        let r = hensel_lift(&p, &f.zero(), 64, &Precision::default());
        assert!(matches!(r, Err(Error::HenselHypothesisFailed { .. })));
    }

    #[test]
    fn hensel_epsilon_congruent_minus_one() {
        // h = x^2 + x + (λ-1) π^{2ν} with λ = 1: a0 = -1 lifts to ε = -1 exactly
        let f = q3();
        let h = poly(&f, &[0, 1, 1]);
        let r = hensel_lift(&h, &KElem::from_i64(&f, -1), 64, &Precision::default()).unwrap();
        assert!(r.residual_val.is_infinite());
        let e = r.value.expand(1).unwrap();
        assert_eq!(e.digits[0], f.residue_field().from_u64(2)); // -1 ≡ 2 mod 3
    }

    #[test]
    fn roots_of_split_polynomial() {
        // f = z(z-1)(z-3) over Q_3 -> {0, 1, 3}
        let f = q3();
        let p = poly(&f, &[0, 3, -4, 1]);
        let roots = k_rational_roots(&p, &Precision::default()).unwrap();
        assert_eq!(roots.len(), 3);
        let vals: Vec<Val> = roots.iter().map(|r| r.value.val()).collect();
        assert_eq!(vals, vec![Val::Finite(0), Val::Finite(1), Val::Infinite]);
    }

    #[test]
    fn no_roots_on_fractional_slope() {
        // z^3 - 3z + 3 over Q_3: Eisenstein, slope -1/3 -> no K-roots
        let f = q3();
        let p = poly(&f, &[3, -3, 0, 1]);
        let roots = k_rational_roots(&p, &Precision::default()).unwrap();
        assert!(roots.is_empty());
    }

    #[test]
    fn mixed_rational_and_irrational_roots() {
        // (z^2 - 7)(z - 1) over Q_3: three roots, two approximate
        let f = q3();
        let p = poly(&f, &[-7, 0, 1]).mul(&poly(&f, &[-1, 1]));
        let roots = k_rational_roots(&p, &Precision::default()).unwrap();
        assert_eq!(roots.len(), 3);
        let exact_count = roots.iter().filter(|r| r.is_exact()).count();
        assert!(exact_count >= 1);
        for r in &roots {
            let res = p.evaluate(&r.value.assume_exact()).val();
            assert!(res >= Val::Finite(60), "residual {res:?}");
        }
        // (z^2 - 3)(z - 1): only the rational root survives
        let p = poly(&f, &[-3, 0, 1]).mul(&poly(&f, &[-1, 1]));
        let roots = k_rational_roots(&p, &Precision::default()).unwrap();
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].value.val(), Val::Finite(0));
    }

    #[test]
    fn multiple_residue_root_descent() {
        // 17 is a square in Q_2 (17 ≡ 1 mod 8): z^2 - 17 needs disk descent
        let f = qp(2);
        let p = poly(&f, &[-17, 0, 1]);
        let roots = k_rational_roots(&p, &Precision::default()).unwrap();
        assert_eq!(roots.len(), 2);
        // 3 and 5 are not squares in Q_2
        for c in [3i64, 5] {
            let p = poly(&f, &[-c, 0, 1]);
            assert!(k_rational_roots(&p, &Precision::default())
                .unwrap()
                .is_empty());
        }
    }

    #[test]
    fn inseparable_laurent_branch_terminates() {
        let f = Field::laurent(3).unwrap();
        let z = KPoly::var(&f);
        let t = KPoly::constant(f.uniformizer());
        // z^3 - t: slope -1/3, no K-roots
        let p = z.mul(&z).mul(&z).sub(&t);
        assert!(k_rational_roots(&p, &Precision::default())
            .unwrap()
            .is_empty());
        // z^3 - t^3(1 + t): integer slope but the unit is not a cube
        let unit = KPoly::constant(f.one().add(&f.uniformizer()).mul(&f.uniformizer_pow(3)));
        let p = z.mul(&z).mul(&z).sub(&unit);
        assert!(k_rational_roots(&p, &Precision::default())
            .unwrap()
            .is_empty());
        // z^3 - (1+t)^3 has the K-root 1 + t; squarefree part is linear
        let c = f.one().add(&f.uniformizer());
        let cube = c.mul(&c).mul(&c);
        let p = z.mul(&z).mul(&z).sub(&KPoly::constant(cube));
        let p = p.squarefree_part().unwrap();
        let roots = k_rational_roots(&p, &Precision::default()).unwrap();
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].value.assume_exact(), c);
    }

    #[test]
    fn random_split_products_recovered() {
        use rand::{Rng, SeedableRng};
        let f = q3();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let prec = Precision::default();
        for _ in 0..60 {
            // random distinct rational roots with valuations in [-3, 3]
            let count = rng.gen_range(1..=4);
            let mut roots: Vec<KElem> = vec![];
            while roots.len() < count {
                let unit = loop {
                    let u = rng.gen_range(-20i64..=20);
                    if u % 3 != 0 && u != 0 {
                        break u;
                    }
                };
                let v = rng.gen_range(-3i64..=3);
                let r = KElem::from_i64(&f, unit).mul(&f.uniformizer_pow(v));
                if !roots.iter().any(|x| x == &r) {
                    roots.push(r);
                }
            }
            let mut p = KPoly::constant(KElem::from_i64(&f, 2)); // unit leading
            for r in &roots {
                p = p.mul(&KPoly::new(&f, vec![r.neg(), f.one()]));
            }
            let found = k_rational_roots(&p, &prec).unwrap();
            assert_eq!(found.len(), roots.len());
            for r in &roots {
                assert!(
                    found.iter().any(|x| {
                        let d = x.value.sub(r).val();
                        d >= Val::Finite(32)
                    }),
                    "missing root {r:?}"
                );
            }
            // polygon negated slopes match root valuations as multisets
            let np = newton_polygon(&p);
            let mut expect: Vec<Rational64> = roots
                .iter()
                .filter_map(|r| r.val().finite())
                .map(Rational64::from_integer)
                .collect();
            expect.sort();
            let mut got: Vec<Rational64> = vec![];
            for (s, len) in np.root_valuations() {
                for _ in 0..len {
                    got.push(s);
                }
            }
            got.sort();
            assert_eq!(expect, got);
        }
    }
}
