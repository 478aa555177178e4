//! Birkhoff-James orthogonality: decision rule, certificates and an
//! independent line-minimisation oracle.

use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{Functional, Vector};
use crate::scalar::{Field, Rational};
use crate::space::{lp_norm, LpSpace, PolyhedralSpace, Space};
use crate::support::{associated_cones, support_face, SupportFace};

/// Relative tolerance of the floating-point oracle on the achieved norm.
pub const ORACLE_TOLERANCE: f64 = 1e-7;
/// Relative width at which the ternary search stops.
pub const TERNARY_WIDTH: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub enum OrthoCertificate<S = Rational> {
    SingleFunctional { f: Functional<S>, value: S },
    ConvexPair { phi1: Functional<S>, phi2: Functional<S>, alpha: S },
}

/// A scalar with `||x + lambda_star y|| = achieved_norm < ||x||`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthoRefutation<S = Rational> {
    pub lambda_star: S,
    pub achieved_norm: S,
}

#[derive(Clone, Debug, PartialEq)]
pub enum OrthoVerdict<S = Rational> {
    Orthogonal(OrthoCertificate<S>),
    NotOrthogonal(OrthoRefutation<S>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrthoResult<S = Rational> {
    pub x: Vector<S>,
    pub y: Vector<S>,
    pub verdict: OrthoVerdict<S>,
    /// `min` and `max` of `f(y)` over `Ext J(x)`.
    pub value_range: (S, S),
}

impl<S: Field> OrthoResult<S> {
    pub fn is_orthogonal(&self) -> bool {
        matches!(self.verdict, OrthoVerdict::Orthogonal(_))
    }

    pub fn certificate(&self) -> Option<&OrthoCertificate<S>> {
        match &self.verdict {
            OrthoVerdict::Orthogonal(c) => Some(c),
            OrthoVerdict::NotOrthogonal(_) => None,
        }
    }

    pub fn refutation(&self) -> Option<&OrthoRefutation<S>> {
        match &self.verdict {
            OrthoVerdict::Orthogonal(_) => None,
            OrthoVerdict::NotOrthogonal(r) => Some(r),
        }
    }
}

/// Minimiser of `lambda -> ||x + lambda y||`.
#[derive(Clone, Debug, PartialEq)]
pub struct LineMinimum<S = Rational> {
    pub lambda: S,
    pub value: S,
}

/// Spaces that can minimise the norm along a line without using support
/// functionals.
pub trait LineSearch: Space {
    /// Minimises `||x + lambda y||` over `|lambda| <= 2 ||x|| / ||y||`.
    fn minimize_along(&self, x: &Vector<Self::S>, y: &Vector<Self::S>) -> LineMinimum<Self::S>;

    /// Whether the minimum certifies `x` orthogonal to `y`.
    fn oracle_accepts(&self, x: &Vector<Self::S>, min: &LineMinimum<Self::S>) -> bool;
}

fn better_lambda(candidate: &Rational, value: &Rational, best: &LineMinimum) -> bool {
    match value.cmp(&best.value) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => match candidate.abs().cmp(&best.lambda.abs()) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => candidate < &best.lambda,
        },
    }
}

/// Breakpoints of the upper envelope of the lines `a_k + lambda b_k`.
pub(crate) fn envelope_breakpoints(lines: &[(Rational, Rational)]) -> Vec<Rational> {
    let mut sorted: Vec<(Rational, Rational)> = lines.iter().map(|(a, b)| (b.clone(), a.clone())).collect();
    // Ascending slope; among equal slopes keep the largest intercept.
    sorted.sort();
    let mut dedup: Vec<(Rational, Rational)> = Vec::new();
    for (b, a) in sorted {
        if let Some(last) = dedup.last_mut() {
            if last.0 == b {
                *last = (b, a);
                continue;
            }
        }
        dedup.push((b, a));
    }
    let cross = |l1: &(Rational, Rational), l2: &(Rational, Rational)| -> Rational {
        (&l1.1 - &l2.1) / (&l2.0 - &l1.0)
    };
    let mut hull: Vec<(Rational, Rational)> = Vec::new();
    for line in dedup {
        while hull.len() >= 2 {
            let n = hull.len();
            if cross(&hull[n - 2], &line) <= cross(&hull[n - 2], &hull[n - 1]) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(line);
    }
    hull.windows(2).map(|w| cross(&w[0], &w[1])).collect()
}

impl PolyhedralSpace {
    fn lambda_bound(&self, x: &Vector, y: &Vector) -> Rational {
        Rational::from_i64(2) * self.norm(x) / self.norm(y)
    }

    /// Exact minimum by evaluating every candidate in `candidates` within the
    /// search interval, plus the endpoints and zero.
    pub(crate) fn minimize_over(&self, x: &Vector, y: &Vector, candidates: Vec<Rational>) -> LineMinimum {
        let bound = self.lambda_bound(x, y);
        let mut best = LineMinimum { lambda: Rational::zero(), value: self.norm(x) };
        let mut all = candidates;
        all.push(bound.clone());
        all.push(-bound.clone());
        for lambda in all {
            if lambda.abs() > bound {
                continue;
            }
            let value = self.norm(&x.axpy(&lambda, y));
            if better_lambda(&lambda, &value, &best) {
                best = LineMinimum { lambda, value };
            }
        }
        best
    }

    /// The same minimum computed from every pairwise crossing of the facet lines.
    pub fn minimize_along_all_pairs(&self, x: &Vector, y: &Vector) -> LineMinimum {
        let lines: Vec<(Rational, Rational)> = self.facets().iter().map(|f| (f.apply(x), f.apply(y))).collect();
        let mut crossings = Vec::new();
        for (i, l1) in lines.iter().enumerate() {
            for l2 in &lines[i + 1..] {
                if l1.1 != l2.1 {
                    crossings.push((&l1.0 - &l2.0) / (&l2.1 - &l1.1));
                }
            }
        }
        self.minimize_over(x, y, crossings)
    }
}

impl LineSearch for PolyhedralSpace {
    fn minimize_along(&self, x: &Vector, y: &Vector) -> LineMinimum {
        let lines: Vec<(Rational, Rational)> = self.facets().iter().map(|f| (f.apply(x), f.apply(y))).collect();
        self.minimize_over(x, y, envelope_breakpoints(&lines))
    }

    fn oracle_accepts(&self, x: &Vector, min: &LineMinimum) -> bool {
        min.value >= self.norm(x)
    }
}

impl LineSearch for LpSpace {
    fn minimize_along(&self, x: &Vector<f64>, y: &Vector<f64>) -> LineMinimum<f64> {
        let p = self.p_f64();
        let phi = |t: f64| lp_norm(x.axpy(&t, y).coords(), p);
        let bound = 2.0 * self.norm(x) / self.norm(y);
        let (mut lo, mut hi) = (-bound, bound);
        let stop = TERNARY_WIDTH * 2.0 * bound;
        while hi - lo > stop {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if phi(m1) <= phi(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let mid = 0.5 * (lo + hi);
        let (v_mid, v_zero) = (phi(mid), phi(0.0));
        if v_zero <= v_mid {
            LineMinimum { lambda: 0.0, value: v_zero }
        } else {
            LineMinimum { lambda: mid, value: v_mid }
        }
    }

    fn oracle_accepts(&self, x: &Vector<f64>, min: &LineMinimum<f64>) -> bool {
        min.value >= self.norm(x) * (1.0 - ORACLE_TOLERANCE)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult<S = Rational> {
    pub orthogonal: bool,
    pub minimum: LineMinimum<S>,
}

/// Decides `x ⊥ y` from the definition alone.
pub fn oracle_is_orthogonal<Sp: LineSearch>(space: &Sp, x: &Vector<Sp::S>, y: &Vector<Sp::S>) -> Result<OracleResult<Sp::S>> {
    check_dim(space.dim(), x.dim())?;
    check_dim(space.dim(), y.dim())?;
    if x.is_zero() || y.is_zero() {
        return Err(Error::ZeroVector);
    }
    let minimum = space.minimize_along(x, y);
    Ok(OracleResult { orthogonal: space.oracle_accepts(x, &minimum), minimum })
}

fn range<S: Field>(values: &[S]) -> (S, S) {
    let mut min = values[0].clone();
    let mut max = values[0].clone();
    for v in &values[1..] {
        if *v < min {
            min = v.clone();
        }
        if *v > max {
            max = v.clone();
        }
    }
    (min, max)
}

/// Decides `x ⊥ y` from `Ext J(x)`: orthogonal exactly when the values
/// `f(y)` straddle zero.
pub fn is_orthogonal<Sp: LineSearch>(space: &Sp, x: &Vector<Sp::S>, y: &Vector<Sp::S>) -> Result<OrthoResult<Sp::S>> {
    check_dim(space.dim(), y.dim())?;
    let face = support_face(space, x)?;
    Ok(decide_with_face(space, &face, y))
}

pub(crate) fn decide_with_face<Sp: LineSearch>(space: &Sp, face: &SupportFace<Sp::S>, y: &Vector<Sp::S>) -> OrthoResult<Sp::S> {
    let fs = &face.extreme_functionals;
    let values = face.values(y);
    let value_range = range(&values);
    let x = face.base_point.clone();
    let verdict = if let Some(k) = values.iter().position(|v| v.is_negligible()) {
        OrthoVerdict::Orthogonal(OrthoCertificate::SingleFunctional { f: fs[k].clone(), value: values[k].clone() })
    } else if value_range.0.sign_class() == Ordering::Less && value_range.1.sign_class() == Ordering::Greater {
        let neg = values.iter().position(|v| v.sign_class() == Ordering::Less).expect("negative value");
        let pos = values.iter().position(|v| v.sign_class() == Ordering::Greater).expect("positive value");
        let (v1, v2) = (values[neg].clone(), values[pos].clone());
        let alpha = v1.clone() / (v1 - v2);
        OrthoVerdict::Orthogonal(OrthoCertificate::ConvexPair { phi1: fs[neg].clone(), phi2: fs[pos].clone(), alpha })
    } else {
        let min = space.minimize_along(&x, y);
        OrthoVerdict::NotOrthogonal(OrthoRefutation { lambda_star: min.lambda, achieved_norm: min.value })
    };
    OrthoResult { x, y: y.clone(), verdict, value_range }
}

/// Witness of `y ∈ x⁺` or `y ∈ x⁻`.
#[derive(Clone, Debug, PartialEq)]
pub struct SideResult<S = Rational> {
    pub member: bool,
    pub witness: Functional<S>,
    pub value: S,
}

fn side<Sp: Space>(space: &Sp, x: &Vector<Sp::S>, y: &Vector<Sp::S>, plus: bool) -> Result<SideResult<Sp::S>> {
    check_dim(space.dim(), y.dim())?;
    let face = support_face(space, x)?;
    let values = face.values(y);
    let mut best = 0;
    for (k, v) in values.iter().enumerate() {
        if (plus && *v > values[best]) || (!plus && *v < values[best]) {
            best = k;
        }
    }
    let value = values[best].clone();
    let member = if plus { value.sign_class() != Ordering::Less } else { value.sign_class() != Ordering::Greater };
    Ok(SideResult { member, witness: face.extreme_functionals[best].clone(), value })
}

/// `y ∈ x⁺`, witnessed by the extreme support functional maximising `f(y)`.
pub fn in_x_plus<Sp: Space>(space: &Sp, x: &Vector<Sp::S>, y: &Vector<Sp::S>) -> Result<SideResult<Sp::S>> {
    side(space, x, y, true)
}

/// `y ∈ x⁻`, witnessed by the extreme support functional minimising `f(y)`.
pub fn in_x_minus<Sp: Space>(space: &Sp, x: &Vector<Sp::S>, y: &Vector<Sp::S>) -> Result<SideResult<Sp::S>> {
    side(space, x, y, false)
}

/// Re-checks a certificate from its defining equations.
pub fn verify_certificate<Sp: Space>(space: &Sp, x: &Vector<Sp::S>, y: &Vector<Sp::S>, cert: &OrthoCertificate<Sp::S>) -> bool {
    let norm = space.norm(x);
    let supports = |f: &Functional<Sp::S>| {
        (f.apply(x) - norm.clone()).is_negligible() && (space.dual_norm(f) - Sp::S::one()).is_negligible()
    };
    match cert {
        OrthoCertificate::SingleFunctional { f, .. } => supports(f) && f.apply(y).is_negligible(),
        OrthoCertificate::ConvexPair { phi1, phi2, alpha } => {
            let ext = space.extreme_support(x);
            let one = Sp::S::one();
            ext.contains(phi1)
                && ext.contains(phi2)
                && alpha.sign_class() != Ordering::Less
                && (one.clone() - alpha.clone()).sign_class() != Ordering::Less
                && ((one - alpha.clone()) * phi1.apply(y) + alpha.clone() * phi2.apply(y)).is_negligible()
        }
    }
}

pub fn verify_refutation<Sp: Space>(space: &Sp, x: &Vector<Sp::S>, y: &Vector<Sp::S>, r: &OrthoRefutation<Sp::S>) -> bool {
    let achieved = space.norm(&x.axpy(&r.lambda_star, y));
    (achieved.clone() - r.achieved_norm.clone()).is_negligible() && achieved < space.norm(x)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoverReport<S = Rational> {
    pub checked: usize,
    pub orthogonal: usize,
    pub mismatches: Vec<Vector<S>>,
}

/// Checks `x ⊥ y ⇔ y ∈ V for some V ∈ 𝒱(x)` on each sample.
pub fn ortho_set_cover<Sp: LineSearch>(space: &Sp, x: &Vector<Sp::S>, samples: &[Vector<Sp::S>]) -> Result<CoverReport<Sp::S>> {
    let face = support_face(space, x)?;
    let cones = associated_cones(space, x)?;
    let mut report = CoverReport { checked: 0, orthogonal: 0, mismatches: Vec::new() };
    for y in samples {
        check_dim(space.dim(), y.dim())?;
        let ortho = decide_with_face(space, &face, y).is_orthogonal();
        let mut covered = false;
        for c in &cones {
            if c.contains(y)? {
                covered = true;
                break;
            }
        }
        report.checked += 1;
        report.orthogonal += usize::from(ortho);
        if ortho != covered {
            report.mismatches.push(y.clone());
        }
    }
    Ok(report)
}

/// `[u, v]_p = (sum u_i v_i |v_i|^(p-2)) / ||v||_p^(p-2)`, zero when `v = 0`.
pub fn semi_inner_product_lp(u: &[f64], v: &[f64], p: f64) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::BadExponent(p.to_string()));
    }
    check_dim(u.len(), v.len())?;
    let nv = lp_norm(v, p);
    if nv == 0.0 {
        return Ok(0.0);
    }
    // Work with v / ||v|| so the powers stay in range.
    let s: f64 = u
        .iter()
        .zip(v)
        .filter(|(_, vi)| **vi != 0.0)
        .map(|(ui, vi)| {
            let w = vi / nv;
            ui * w * w.abs().powf(p - 2.0)
        })
        .sum();
    Ok(s * nv)
}

/// `u ⊥ v` in `l_p` by Giles' criterion `[v, u]_p = 0`.
pub fn giles_orthogonal(u: &[f64], v: &[f64], p: f64) -> Result<bool> {
    let scale = (lp_norm(u, p) * lp_norm(v, p)).max(f64::MIN_POSITIVE);
    Ok(semi_inner_product_lp(v, u, p)?.abs() / scale <= crate::scalar::FLOAT_TOLERANCE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn v(c: &[i64]) -> Vector {
        Vector::from_ints(c)
    }

    fn f(c: &[i64]) -> Functional {
        Functional::new(c.iter().map(|&a| int(a)).collect())
    }

    #[test]
    fn linf2_convex_pair() {
        let s = PolyhedralSpace::linf(2).unwrap();
        let r = is_orthogonal(&s, &v(&[1, 1]), &v(&[-1, 1])).unwrap();
        assert_eq!(
            r.certificate().unwrap(),
            &OrthoCertificate::ConvexPair { phi1: f(&[1, 0]), phi2: f(&[0, 1]), alpha: rat(1, 2) }
        );
        assert!(verify_certificate(&s, &v(&[1, 1]), &v(&[-1, 1]), r.certificate().unwrap()));
    }

    #[test]
    fn l1_3_single_functional() {
        let s = PolyhedralSpace::l1(3).unwrap();
        let r = is_orthogonal(&s, &v(&[1, 0, 0]), &v(&[2, 1, -1])).unwrap();
        assert_eq!(
            r.certificate().unwrap(),
            &OrthoCertificate::SingleFunctional { f: f(&[1, -1, 1]), value: int(0) }
        );
    }

    #[test]
    fn self_refutation() {
        let s = PolyhedralSpace::linf(2).unwrap();
        let r = is_orthogonal(&s, &v(&[1, 0]), &v(&[1, 0])).unwrap();
        assert_eq!(r.refutation().unwrap(), &OrthoRefutation { lambda_star: int(-1), achieved_norm: int(0) });
    }

    #[test]
    fn oracle_minimiser_on_image_point() {
        let s = PolyhedralSpace::linf(2).unwrap();
        let y = Vector::new(vec![rat(-1, 2), rat(1, 2)]);
        let r = oracle_is_orthogonal(&s, &v(&[0, 1]), &y).unwrap();
        assert!(!r.orthogonal);
        assert_eq!(r.minimum, LineMinimum { lambda: int(-1), value: rat(1, 2) });
        let flat = oracle_is_orthogonal(&s, &v(&[1, 1]), &v(&[-1, 1])).unwrap();
        assert!(flat.orthogonal);
        assert_eq!(flat.minimum, LineMinimum { lambda: int(0), value: int(1) });
    }

    #[test]
    fn envelope_matches_all_pairs() {
        let s = PolyhedralSpace::l1(3).unwrap();
        let x = v(&[3, -1, 2]);
        for y in [v(&[1, 2, -3]), v(&[0, 1, 0]), v(&[-5, 1, 1])] {
            assert_eq!(s.minimize_along(&x, &y), s.minimize_along_all_pairs(&x, &y));
        }
    }

    #[test]
    fn plus_minus_sides() {
        let s = PolyhedralSpace::linf(2).unwrap();
        let x = v(&[1, 1]);
        let y = v(&[1, -5]);
        let plus = in_x_plus(&s, &x, &y).unwrap();
        let minus = in_x_minus(&s, &x, &y).unwrap();
        assert!(plus.member && minus.member);
        assert_eq!(plus.witness, f(&[1, 0]));
        assert_eq!(minus.witness, f(&[0, 1]));
        assert!(!in_x_minus(&s, &x, &x).unwrap().member);
    }

    #[test]
    fn euclidean_oracle() {
        let s = LpSpace::new(2, int(2)).unwrap();
        let r = oracle_is_orthogonal(&s, &Vector::new(vec![1.0, 0.0]), &Vector::new(vec![0.0, 1.0])).unwrap();
        assert!(r.orthogonal);
    }

    #[test]
    fn semi_inner_product_identities() {
        let u = [0.3, -1.2, 2.0];
        let w = [1.5, 0.5, -0.25];
        let dot: f64 = u.iter().zip(&w).map(|(a, b)| a * b).sum();
        assert!((semi_inner_product_lp(&u, &w, 2.0).unwrap() - dot).abs() < 1e-12);
        for p in [1.5, 3.0, 5.0] {
            assert!(semi_inner_product_lp(&[0.7, -0.7], &[1.0, 1.0], p).unwrap().abs() < 1e-12);
            assert!(semi_inner_product_lp(&[1.0, -3.0, 2.0], &[1.0, 1.0, 1.0], p).unwrap().abs() < 1e-12);
        }
        assert!(semi_inner_product_lp(&u, &w, 1.0).is_err());
        assert_eq!(semi_inner_product_lp(&u, &[0.0; 3], 3.0).unwrap(), 0.0);
    }
}
