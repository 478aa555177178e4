//! Convex-combination and cone searches over a scalar field.
//!
//! Over the rationals these are exact linear programs. Over `f64` the only
//! faces that occur are singletons (smooth `l_p` norms), and the searches are
//! solved in closed form for that case.

use std::cmp::Ordering;

use num_traits::{One, Zero};

use crate::linalg::{common_kernel, nullspace, Functional, Vector};
use crate::lp::{find_nonzero_in_cone, LpProblem, LpOutcome, Relation};
use crate::scalar::{Field, Rational};

pub trait Searchable: Field {
    /// Weights `beta` in the simplex with `sum_k beta_k h_k(t) = 0` for every target `t`.
    fn convex_annihilator(hs: &[Functional<Self>], targets: &[Vector<Self>]) -> Option<Vec<Self>>;

    /// Some `z` in the span of `basis` with `h_k(z) >= 1` for every `k`.
    /// By Gordan's alternative this exists exactly when `convex_annihilator`
    /// fails on the same data.
    fn gordan_direction(hs: &[Functional<Self>], basis: &[Vector<Self>]) -> Option<Vector<Self>>;

    /// A non-zero point of `{y : ge(y) >= 0, eq(y) = 0}`.
    fn nonzero_in_cone(ge: &[Functional<Self>], eq: &[Functional<Self>], dim: usize) -> Option<Vector<Self>>;

    /// Normalises a direction for display (positive rescaling only).
    fn tidy(v: Vector<Self>) -> Vector<Self> {
        v
    }
}

impl Searchable for Rational {
    fn convex_annihilator(hs: &[Functional], targets: &[Vector]) -> Option<Vec<Rational>> {
        let k = hs.len();
        let mut lp = LpProblem::new(k);
        lp.add(vec![Rational::one(); k], Relation::Eq, Rational::one());
        for t in targets {
            lp.add(hs.iter().map(|h| h.apply(t)).collect(), Relation::Eq, Rational::zero());
        }
        match lp.solve() {
            LpOutcome::Feasible(beta) => Some(beta),
            LpOutcome::Infeasible => None,
        }
    }

    fn gordan_direction(hs: &[Functional], basis: &[Vector]) -> Option<Vector> {
        let m = basis.len();
        if m == 0 {
            return None;
        }
        let mut lp = LpProblem::free(m);
        for h in hs {
            lp.add(basis.iter().map(|b| h.apply(b)).collect(), Relation::Ge, Rational::one());
        }
        match lp.solve() {
            LpOutcome::Feasible(c) => Some(Vector::combination(basis, &c).primitive()),
            LpOutcome::Infeasible => None,
        }
    }

    fn nonzero_in_cone(ge: &[Functional], eq: &[Functional], dim: usize) -> Option<Vector> {
        find_nonzero_in_cone(ge, eq, dim)
    }

    fn tidy(v: Vector) -> Vector {
        v.primitive()
    }
}

impl Searchable for f64 {
    fn convex_annihilator(hs: &[Functional<f64>], targets: &[Vector<f64>]) -> Option<Vec<f64>> {
        for (k, h) in hs.iter().enumerate() {
            if targets.iter().all(|t| relative_zero(h, t)) {
                let mut beta = vec![0.0; hs.len()];
                beta[k] = 1.0;
                return Some(beta);
            }
        }
        None
    }

    fn gordan_direction(hs: &[Functional<f64>], basis: &[Vector<f64>]) -> Option<Vector<f64>> {
        let [h] = hs else { return None };
        let b = basis.iter().find(|b| !relative_zero(h, b))?;
        Some(b.scale(&(1.0 / h.apply(b))))
    }

    fn nonzero_in_cone(ge: &[Functional<f64>], eq: &[Functional<f64>], dim: usize) -> Option<Vector<f64>> {
        let sub = common_kernel(eq, dim);
        if sub.is_empty() {
            return None;
        }
        if ge.is_empty() {
            return sub.into_iter().next();
        }
        let all: Vec<Vec<f64>> = ge.iter().chain(eq).map(|f| f.coeffs().to_vec()).collect();
        if let Some(v) = nullspace(&all, dim).into_iter().next() {
            return Some(v);
        }
        let candidates = sub.iter().flat_map(|b| [b.clone(), b.neg()]);
        candidates
            .into_iter()
            .find(|c| ge.iter().all(|h| h.apply(c).sign_class() != Ordering::Less))
    }
}

/// `h(t) = 0`, exactly for rationals and relative to the size of `t` for floats.
pub fn annihilates<F: Field>(h: &Functional<F>, t: &Vector<F>) -> bool {
    if F::EXACT {
        return h.apply(t).is_zero();
    }
    let scale = t.coords().iter().fold(1.0f64, |m, c| m.max(c.to_f64().abs()));
    (h.apply(t).to_f64() / scale).is_negligible()
}

fn relative_zero(h: &Functional<f64>, t: &Vector<f64>) -> bool {
    let scale = t.coords().iter().fold(1.0f64, |m, c| m.max(c.abs()));
    (h.apply(t) / scale).is_negligible()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    fn f(c: &[i64]) -> Functional {
        Functional::new(c.iter().map(|&v| int(v)).collect())
    }

    #[test]
    fn gordan_alternative_is_exclusive() {
        let hs = vec![f(&[1, 1]), f(&[1, -1])];
        let targets = vec![Vector::from_ints(&[1, 0])];
        assert!(Rational::convex_annihilator(&hs, &targets).is_none());
        let z = Rational::gordan_direction(&hs, &targets).unwrap();
        assert!(hs.iter().all(|h| h.apply(&z) > int(0)));

        let targets = vec![Vector::from_ints(&[0, 1])];
        let beta = Rational::convex_annihilator(&hs, &targets).unwrap();
        assert_eq!(beta, vec![crate::scalar::rat(1, 2), crate::scalar::rat(1, 2)]);
        assert!(Rational::gordan_direction(&hs, &targets).is_none());
    }

    #[test]
    fn float_singleton_searches() {
        let h = vec![Functional::new(vec![1.0, 1.0])];
        let ok = vec![Vector::new(vec![1.0, -1.0])];
        assert_eq!(f64::convex_annihilator(&h, &ok), Some(vec![1.0]));
        let bad = vec![Vector::new(vec![1.0, 0.0])];
        let z = f64::gordan_direction(&h, &bad).unwrap();
        assert!((h[0].apply(&z) - 1.0).abs() < 1e-12);
        let ray = f64::nonzero_in_cone(&h, &[Functional::new(vec![1.0, -1.0])], 2).unwrap();
        assert!(h[0].apply(&ray) > 0.0);
    }
}
