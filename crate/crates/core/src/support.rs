//! Support functionals, smoothness order and associated cones.

use std::cmp::Ordering;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{common_kernel, functional_rank, Functional, Vector};
use crate::scalar::{Field, Rational};
use crate::space::Space;

/// `Ext J(x)` together with the order of smoothness of `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportFace<S = Rational> {
    pub base_point: Vector<S>,
    pub extreme_functionals: Vec<Functional<S>>,
    pub smoothness_order: usize,
}

impl<S: Field> SupportFace<S> {
    pub fn is_smooth(&self) -> bool {
        self.smoothness_order == 1
    }

    /// Values `f(y)` for every extreme functional, in list order.
    pub fn values(&self, y: &Vector<S>) -> Vec<S> {
        self.extreme_functionals.iter().map(|f| f.apply(y)).collect()
    }
}

pub(crate) fn nonzero_point<Sp: Space>(space: &Sp, x: &Vector<Sp::S>) -> Result<()> {
    check_dim(space.dim(), x.dim())?;
    if x.is_zero() {
        return Err(Error::ZeroVector);
    }
    Ok(())
}

pub fn support_face<Sp: Space>(space: &Sp, x: &Vector<Sp::S>) -> Result<SupportFace<Sp::S>> {
    nonzero_point(space, x)?;
    let extreme_functionals = space.extreme_support(x);
    let smoothness_order = functional_rank(&extreme_functionals);
    Ok(SupportFace { base_point: x.clone(), extreme_functionals, smoothness_order })
}

pub fn smoothness_order<Sp: Space>(space: &Sp, x: &Vector<Sp::S>) -> Result<usize> {
    Ok(support_face(space, x)?.smoothness_order)
}

/// `V_ij = {y : f_i(y) >= 0, f_j(y) <= 0}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AssociatedCone<S = Rational> {
    pub i_functional: Functional<S>,
    pub j_functional: Functional<S>,
}

impl<S: Field> AssociatedCone<S> {
    pub fn new(i_functional: Functional<S>, j_functional: Functional<S>) -> Self {
        AssociatedCone { i_functional, j_functional }
    }

    pub fn dim(&self) -> usize {
        self.i_functional.dim()
    }

    /// `V_ii` is the hyperplane `ker f_i`.
    pub fn is_kernel(&self) -> bool {
        self.i_functional == self.j_functional
    }

    pub fn contains(&self, y: &Vector<S>) -> Result<bool> {
        check_dim(self.dim(), y.dim())?;
        Ok(self.i_functional.apply(y).sign_class() != Ordering::Less
            && self.j_functional.apply(y).sign_class() != Ordering::Greater)
    }

    /// `V_ji`, which equals `-V_ij` as a set.
    pub fn reversed(&self) -> Self {
        AssociatedCone::new(self.j_functional.clone(), self.i_functional.clone())
    }

    /// Defining inequalities as `h(y) >= 0` rows and `h(y) = 0` rows.
    pub fn constraints(&self) -> (Vec<Functional<S>>, Vec<Functional<S>>) {
        if self.is_kernel() {
            (Vec::new(), vec![self.i_functional.clone()])
        } else {
            (vec![self.i_functional.clone(), self.j_functional.neg()], Vec::new())
        }
    }
}

impl AssociatedCone<Rational> {
    /// Generators whose non-negative combinations are exactly the cone. The
    /// lineality space is listed as `+b, -b` pairs.
    pub fn generators(&self) -> Vec<Vector> {
        let n = self.dim();
        let fi = &self.i_functional;
        let fj = &self.j_functional;
        let independent = functional_rank(&[fi.clone(), fj.clone()]) == 2;
        let lineality = if independent {
            common_kernel(&[fi.clone(), fj.clone()], n)
        } else {
            common_kernel(&[fi.clone()], n)
        };
        let mut gens: Vec<Vector> = Vec::new();
        for b in &lineality {
            let b = b.primitive();
            gens.push(b.neg());
            gens.push(b);
        }
        let solve = |a: &Rational, b: &Rational| -> Option<Vector> {
            let m = crate::linalg::Matrix::from_rows(vec![fi.coeffs().to_vec(), fj.coeffs().to_vec()]).ok()?;
            m.solve_any(&Vector::new(vec![a.clone(), b.clone()])).ok().flatten().map(|v| v.primitive())
        };
        let one = Rational::from_i64(1);
        let zero = Rational::from_i64(0);
        if independent {
            // u with f_i(u) = 1, f_j(u) = 0 and w with f_i(w) = 0, f_j(w) = -1.
            gens.extend(solve(&one, &zero));
            gens.extend(solve(&zero, &-one.clone()));
        } else if !self.is_kernel() {
            // f_j is a multiple of f_i; only the case f_j = -f_i is a half-space.
            let m = crate::linalg::Matrix::from_rows(vec![fi.coeffs().to_vec()]).expect("row");
            if let Ok(Some(u)) = m.solve_any(&Vector::new(vec![one])) {
                if fj.apply(&u) <= zero {
                    gens.push(u.primitive());
                }
            }
        }
        gens
    }
}

/// All `V_ij` over ordered pairs of `Ext J(x)`, including `i = j`, with
/// duplicates removed and sorted by `(f_i, f_j)`.
pub fn associated_cones<Sp: Space>(space: &Sp, x: &Vector<Sp::S>) -> Result<Vec<AssociatedCone<Sp::S>>> {
    let face = support_face(space, x)?;
    Ok(cones_of_face(&face))
}

pub fn cones_of_face<S: Field>(face: &SupportFace<S>) -> Vec<AssociatedCone<S>> {
    let mut cones: Vec<AssociatedCone<S>> = Vec::new();
    for fi in &face.extreme_functionals {
        for fj in &face.extreme_functionals {
            let c = AssociatedCone::new(fi.clone(), fj.clone());
            if !cones.contains(&c) {
                cones.push(c);
            }
        }
    }
    cones.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    cones
}

pub fn cone_contains<S: Field>(cone: &AssociatedCone<S>, y: &Vector<S>) -> Result<bool> {
    cone.contains(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;
    use crate::space::{LpSpace, PolyhedralSpace};

    fn f(c: &[i64]) -> Functional {
        Functional::new(c.iter().map(|&v| int(v)).collect())
    }

    #[test]
    fn linf2_corner() {
        let s = PolyhedralSpace::linf(2).unwrap();
        let face = support_face(&s, &Vector::from_ints(&[1, 1])).unwrap();
        assert_eq!(face.extreme_functionals, vec![f(&[0, 1]), f(&[1, 0])]);
        assert_eq!(face.smoothness_order, 2);
        assert_eq!(associated_cones(&s, &Vector::from_ints(&[1, 1])).unwrap().len(), 4);
    }

    #[test]
    fn l1_3_vertex() {
        let s = PolyhedralSpace::l1(3).unwrap();
        let face = support_face(&s, &Vector::from_ints(&[1, 0, 0])).unwrap();
        assert_eq!(
            face.extreme_functionals,
            vec![f(&[1, -1, -1]), f(&[1, -1, 1]), f(&[1, 1, -1]), f(&[1, 1, 1])]
        );
        assert_eq!(face.smoothness_order, 3);
        assert_eq!(associated_cones(&s, &Vector::from_ints(&[1, 0, 0])).unwrap().len(), 16);
    }

    #[test]
    fn smooth_points() {
        let s = PolyhedralSpace::linf(2).unwrap();
        let face = support_face(&s, &Vector::from_ints(&[2, 1])).unwrap();
        assert_eq!(face.extreme_functionals, vec![f(&[1, 0])]);
        assert!(face.is_smooth());
        assert_eq!(associated_cones(&s, &Vector::from_ints(&[2, 1])).unwrap().len(), 1);
        let lp = LpSpace::new(2, int(3)).unwrap();
        assert_eq!(smoothness_order(&lp, &Vector::new(vec![0.3, -2.0])).unwrap(), 1);
    }

    #[test]
    fn linf3_orders() {
        let s = PolyhedralSpace::linf(3).unwrap();
        assert_eq!(smoothness_order(&s, &Vector::from_ints(&[1, 1, 1])).unwrap(), 3);
        assert_eq!(smoothness_order(&s, &Vector::from_ints(&[1, 1, 0])).unwrap(), 2);
    }

    #[test]
    fn zero_rejected() {
        let s = PolyhedralSpace::linf(2).unwrap();
        assert_eq!(support_face(&s, &Vector::from_ints(&[0, 0])), Err(Error::ZeroVector));
    }

    #[test]
    fn cone_membership() {
        let v = AssociatedCone::new(f(&[1, 0]), f(&[0, 1]));
        assert!(v.contains(&Vector::from_ints(&[1, -1])).unwrap());
        assert!(!v.contains(&Vector::from_ints(&[1, 1])).unwrap());
        assert!(v.reversed().contains(&Vector::from_ints(&[-1, 1])).unwrap());
    }

    #[test]
    fn generators_lie_in_cone() {
        let v = AssociatedCone::new(f(&[1, 1, -1]), f(&[1, -1, 1]));
        let gens = v.generators();
        assert_eq!(gens.len(), 4);
        for g in &gens {
            assert!(v.contains(g).unwrap());
        }
        let k = AssociatedCone::new(f(&[0, 0, 1]), f(&[0, 0, 1]));
        for g in k.generators() {
            assert!(f(&[0, 0, 1]).apply(&g) == int(0));
        }
    }
}
