//! Finite-dimensional normed spaces.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{vector_rank, Functional, Matrix, Vector};
use crate::lp::{LpProblem, Optimum, Relation};
use crate::scalar::{format_rational, Field, Rational, Scalar};

/// What a decision procedure needs from a norm: the norm itself, its dual,
/// and the extreme points of `J(x)` in lexicographic order.
pub trait Space {
    type S: Field;

    fn dim(&self) -> usize;

    fn norm(&self, x: &Vector<Self::S>) -> Self::S;

    fn dual_norm(&self, f: &Functional<Self::S>) -> Self::S;

    /// `Ext J(x)` for non-zero `x`.
    fn extreme_support(&self, x: &Vector<Self::S>) -> Vec<Functional<Self::S>>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpaceKind {
    Linf,
    L1,
    Lp,
    Polyhedral,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolyKind {
    Linf,
    L1,
    General,
}

/// A norm whose unit ball is a centrally symmetric polytope, held in both
/// representations.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyhedralSpace {
    kind: PolyKind,
    dim: usize,
    vertices: Vec<Vector>,
    facets: Vec<Functional>,
}

impl PolyhedralSpace {
    pub fn linf(dim: usize) -> Result<Self> {
        min_dim(dim)?;
        let vertices = sign_vectors(dim).into_iter().map(Vector::new).collect();
        let mut facets = Vec::new();
        for i in 0..dim {
            facets.push(Functional::coordinate(dim, i));
            facets.push(Functional::coordinate(dim, i).neg());
        }
        Ok(Self::sorted(PolyKind::Linf, dim, vertices, facets))
    }

    pub fn l1(dim: usize) -> Result<Self> {
        min_dim(dim)?;
        let facets = sign_vectors(dim).into_iter().map(Functional::new).collect();
        let mut vertices = Vec::new();
        for i in 0..dim {
            vertices.push(Vector::basis(dim, i));
            vertices.push(Vector::basis(dim, i).neg());
        }
        Ok(Self::sorted(PolyKind::L1, dim, vertices, facets))
    }

    /// The ball `conv(points)`. Points that are not extreme are discarded.
    pub fn from_vertices(points: Vec<Vector>) -> Result<Self> {
        let dim = validate_family(&points)?;
        let facets: Vec<Functional> =
            polar(&points)?.into_iter().map(|v| v.as_functional()).collect();
        let duals: Vec<Vector> = facets.iter().map(Functional::as_vector).collect();
        let vertices = tight_rank_filter(&points, &duals, dim);
        Ok(Self::sorted(PolyKind::General, dim, vertices, facets))
    }

    /// The ball `{z : f(z) <= 1 for all f}`. Redundant inequalities are discarded.
    pub fn from_facets(functionals: Vec<Functional>) -> Result<Self> {
        let as_points: Vec<Vector> = functionals.iter().map(Functional::as_vector).collect();
        let dim = validate_family(&as_points)?;
        if functionals.iter().any(Functional::is_zero) {
            return Err(Error::DegenerateBall("zero facet functional".into()));
        }
        let vertices = polar(&as_points)?;
        let facets = tight_rank_filter(&as_points, &vertices, dim)
            .into_iter()
            .map(|v| v.as_functional())
            .collect();
        Ok(Self::sorted(PolyKind::General, dim, vertices, facets))
    }

    fn sorted(kind: PolyKind, dim: usize, mut vertices: Vec<Vector>, mut facets: Vec<Functional>) -> Self {
        vertices.sort();
        facets.sort();
        PolyhedralSpace { kind, dim, vertices, facets }
    }

    pub fn kind(&self) -> PolyKind {
        self.kind
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Functional] {
        &self.facets
    }

    /// The space whose unit ball is the polar of this one.
    pub fn dual(&self) -> PolyhedralSpace {
        let kind = match self.kind {
            PolyKind::Linf => PolyKind::L1,
            PolyKind::L1 => PolyKind::Linf,
            PolyKind::General => PolyKind::General,
        };
        Self::sorted(
            kind,
            self.dim,
            self.facets.iter().map(Functional::as_vector).collect(),
            self.vertices.iter().map(Vector::as_functional).collect(),
        )
    }

    pub fn label(&self) -> String {
        match self.kind {
            PolyKind::Linf => format!("linf{}", self.dim),
            PolyKind::L1 => format!("l1_{}", self.dim),
            PolyKind::General => format!("poly{}", self.dim),
        }
    }
}

impl Space for PolyhedralSpace {
    type S = Rational;

    fn dim(&self) -> usize {
        self.dim
    }

    fn norm(&self, x: &Vector) -> Rational {
        match self.kind {
            PolyKind::Linf => x.coords().iter().map(|c| c.abs()).max().unwrap_or_default(),
            PolyKind::L1 => x.coords().iter().map(|c| c.abs()).sum(),
            PolyKind::General => self.facets.iter().map(|f| f.apply(x)).max().unwrap_or_default(),
        }
    }

    fn dual_norm(&self, f: &Functional) -> Rational {
        match self.kind {
            PolyKind::Linf => f.coeffs().iter().map(|c| c.abs()).sum(),
            PolyKind::L1 => f.coeffs().iter().map(|c| c.abs()).max().unwrap_or_default(),
            PolyKind::General => self
                .vertices
                .iter()
                .map(|v| f.apply(v).abs())
                .max()
                .unwrap_or_default(),
        }
    }

    fn extreme_support(&self, x: &Vector) -> Vec<Functional> {
        let n = self.norm(x);
        self.facets.iter().filter(|f| f.apply(x) == n).cloned().collect()
    }
}

/// `l_p^n` for rational `1 < p < infinity`, evaluated in double precision.
#[derive(Clone, Debug, PartialEq)]
pub struct LpSpace {
    dim: usize,
    p: Rational,
    p_f: f64,
}

impl LpSpace {
    pub fn new(dim: usize, p: Rational) -> Result<Self> {
        min_dim(dim)?;
        if p <= Rational::one() {
            return Err(Error::BadExponent(format_rational(&p)));
        }
        let p_f = Field::to_f64(&p);
        Ok(LpSpace { dim, p, p_f })
    }

    pub fn p(&self) -> &Rational {
        &self.p
    }

    pub fn p_f64(&self) -> f64 {
        self.p_f
    }

    /// The conjugate exponent.
    pub fn q_f64(&self) -> f64 {
        self.p_f / (self.p_f - 1.0)
    }

    pub fn label(&self) -> String {
        format!("lp{}(p={})", self.dim, format_rational(&self.p))
    }
}

pub(crate) fn lp_norm(coords: &[f64], p: f64) -> f64 {
    let scale = coords.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    scale * coords.iter().map(|c| (c.abs() / scale).powf(p)).sum::<f64>().powf(1.0 / p)
}

impl Space for LpSpace {
    type S = f64;

    fn dim(&self) -> usize {
        self.dim
    }

    fn norm(&self, x: &Vector<f64>) -> f64 {
        lp_norm(x.coords(), self.p_f)
    }

    fn dual_norm(&self, f: &Functional<f64>) -> f64 {
        lp_norm(f.coeffs(), self.q_f64())
    }

    fn extreme_support(&self, x: &Vector<f64>) -> Vec<Functional<f64>> {
        let n = self.norm(x);
        let p = self.p_f;
        vec![Functional::new(
            x.coords()
                .iter()
                .map(|c| c.signum() * (c.abs() / n).powf(p - 1.0))
                .map(|c| if c == 0.0 { 0.0 } else { c })
                .collect(),
        )]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum NormedSpace {
    Polyhedral(PolyhedralSpace),
    Lp(LpSpace),
}

impl NormedSpace {
    pub fn dim(&self) -> usize {
        match self {
            NormedSpace::Polyhedral(s) => s.dim,
            NormedSpace::Lp(s) => s.dim,
        }
    }

    pub fn kind(&self) -> SpaceKind {
        match self {
            NormedSpace::Polyhedral(s) => match s.kind {
                PolyKind::Linf => SpaceKind::Linf,
                PolyKind::L1 => SpaceKind::L1,
                PolyKind::General => SpaceKind::Polyhedral,
            },
            NormedSpace::Lp(_) => SpaceKind::Lp,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, NormedSpace::Polyhedral(_))
    }

    pub fn as_polyhedral(&self) -> Result<&PolyhedralSpace> {
        match self {
            NormedSpace::Polyhedral(s) => Ok(s),
            NormedSpace::Lp(_) => Err(Error::NotPolyhedral),
        }
    }

    pub fn label(&self) -> String {
        match self {
            NormedSpace::Polyhedral(s) => s.label(),
            NormedSpace::Lp(s) => s.label(),
        }
    }

    pub fn norm(&self, x: &Vector) -> Result<Scalar> {
        check_dim(self.dim(), x.dim())?;
        Ok(match self {
            NormedSpace::Polyhedral(s) => Scalar::Exact(s.norm(x)),
            NormedSpace::Lp(s) => Scalar::Float(s.norm(&x.to_f64())),
        })
    }

    pub fn dual_norm(&self, f: &Functional) -> Result<Scalar> {
        check_dim(self.dim(), f.dim())?;
        Ok(match self {
            NormedSpace::Polyhedral(s) => Scalar::Exact(s.dual_norm(f)),
            NormedSpace::Lp(s) => Scalar::Float(s.dual_norm(&f.to_f64())),
        })
    }
}

impl From<PolyhedralSpace> for NormedSpace {
    fn from(s: PolyhedralSpace) -> Self {
        NormedSpace::Polyhedral(s)
    }
}

impl From<LpSpace> for NormedSpace {
    fn from(s: LpSpace) -> Self {
        NormedSpace::Lp(s)
    }
}

/// Builds and validates a space. Polyhedral balls take exactly one of
/// `vertices` or `facets`.
pub fn make_space(
    kind: SpaceKind,
    dim: usize,
    p: Option<Rational>,
    vertices: Option<Vec<Vector>>,
    facets: Option<Vec<Functional>>,
) -> Result<NormedSpace> {
    match kind {
        SpaceKind::Linf => Ok(PolyhedralSpace::linf(dim)?.into()),
        SpaceKind::L1 => Ok(PolyhedralSpace::l1(dim)?.into()),
        SpaceKind::Lp => {
            let p = p.ok_or_else(|| Error::BadExponent("missing".into()))?;
            Ok(LpSpace::new(dim, p)?.into())
        }
        SpaceKind::Polyhedral => {
            let space = match (vertices, facets) {
                (Some(v), None) => PolyhedralSpace::from_vertices(v)?,
                (None, Some(f)) => PolyhedralSpace::from_facets(f)?,
                _ => return Err(Error::Parse("supply exactly one of vertices or facets".into())),
            };
            check_dim(dim, space.dim)?;
            Ok(space.into())
        }
    }
}

fn min_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        Err(Error::DimensionTooSmall { required: 2, found: dim })
    } else {
        Ok(())
    }
}

fn sign_vectors(dim: usize) -> Vec<Vec<Rational>> {
    (0..1u32 << dim)
        .map(|mask| {
            (0..dim)
                .map(|i| if mask >> i & 1 == 1 { -Rational::one() } else { Rational::one() })
                .collect()
        })
        .collect()
}

fn validate_family(points: &[Vector]) -> Result<usize> {
    let dim = points.first().map(Vector::dim).ok_or_else(|| Error::DegenerateBall("empty".into()))?;
    min_dim(dim)?;
    for p in points {
        check_dim(dim, p.dim())?;
    }
    let set: BTreeSet<&Vector> = points.iter().filter(|p| !p.is_zero()).collect();
    let negated: BTreeSet<Vector> = set.iter().map(|p| p.neg()).collect();
    if set.len() != negated.len() || set.iter().any(|p| !negated.contains(*p)) {
        return Err(Error::AsymmetricBall);
    }
    if vector_rank(points) < dim {
        return Err(Error::DegenerateBall(format!("points span less than dimension {dim}")));
    }
    Ok(dim)
}

/// Vertices of `{f : f(p) <= 1 for all p}` for a symmetric spanning family.
///
/// Brute force over `dim`-subsets: each non-singular subset determines the
/// unique `f` equal to one on it; `f` is kept if it is feasible.
pub fn polar(points: &[Vector]) -> Result<Vec<Vector>> {
    let dim = validate_family(points)?;
    let candidates: Vec<&Vector> = {
        let set: BTreeSet<&Vector> = points.iter().filter(|p| !p.is_zero()).collect();
        set.into_iter().collect()
    };
    let ones = Vector::new(vec![Rational::one(); dim]);
    let mut found: BTreeSet<Vector> = BTreeSet::new();
    let mut subset: Vec<usize> = Vec::with_capacity(dim);
    fn recurse(
        start: usize,
        dim: usize,
        candidates: &[&Vector],
        subset: &mut Vec<usize>,
        ones: &Vector,
        found: &mut BTreeSet<Vector>,
    ) {
        if subset.len() == dim {
            let rows: Vec<Vec<Rational>> =
                subset.iter().map(|&i| candidates[i].coords().to_vec()).collect();
            let m = Matrix::from_rows(rows).expect("non-empty");
            if m.determinant().map_or(true, |d| d.is_zero()) {
                return;
            }
            if let Ok(Some(f)) = m.solve_any(ones) {
                let fun = f.as_functional();
                if candidates.iter().all(|p| fun.apply(p) <= Rational::one()) {
                    found.insert(f);
                }
            }
            return;
        }
        for i in start..candidates.len() {
            subset.push(i);
            // Prune early when the partial subset is already dependent.
            let partial: Vec<Vector> = subset.iter().map(|&k| candidates[k].clone()).collect();
            if vector_rank(&partial) == partial.len() {
                recurse(i + 1, dim, candidates, subset, ones, found);
            }
            subset.pop();
        }
    }
    recurse(0, dim, &candidates, &mut subset, &ones, &mut found);
    if found.is_empty() {
        return Err(Error::DegenerateBall("no polar vertices".into()));
    }
    Ok(found.into_iter().collect())
}

/// The members of `points` that are extreme in `conv(points)`, given the
/// vertices `duals` of the polar: `p` is extreme exactly when the polar
/// vertices tight at `p` span the dual space.
fn tight_rank_filter(points: &[Vector], duals: &[Vector], dim: usize) -> Vec<Vector> {
    let one = Rational::one();
    let set: BTreeSet<&Vector> = points.iter().filter(|p| !p.is_zero()).collect();
    set.into_iter()
        .filter(|p| {
            let tight: Vec<Vector> =
                duals.iter().filter(|d| d.as_functional().apply(p) == one).cloned().collect();
            vector_rank(&tight) == dim
        })
        .cloned()
        .collect()
}

pub fn dualize_vertices(vertices: &[Vector]) -> Result<Vec<Functional>> {
    Ok(polar(vertices)?.into_iter().map(|v| v.as_functional()).collect())
}

pub fn dualize_facets(facets: &[Functional]) -> Result<Vec<Vector>> {
    polar(&facets.iter().map(Functional::as_vector).collect::<Vec<_>>())
}

/// `min {t >= 0 : x in t * conv(points)}` by linear programming.
pub fn gauge_by_lp(points: &[Vector], x: &Vector) -> Option<Rational> {
    let m = points.len();
    // Variables: weights lambda_1..lambda_m >= 0; minimise their sum.
    let mut lp = LpProblem::new(m);
    for i in 0..x.dim() {
        lp.add(points.iter().map(|p| p.coords()[i].clone()).collect(), Relation::Eq, x.coords()[i].clone());
    }
    match lp.maximize(&vec![-Rational::one(); m]) {
        Optimum::Optimal { value, .. } => Some(-value),
        _ => None,
    }
}

/// Whether `x` lies in the convex hull of `points`.
pub fn in_hull(points: &[Vector], x: &Vector) -> bool {
    let mut lp = LpProblem::new(points.len());
    lp.add(vec![Rational::one(); points.len()], Relation::Eq, Rational::one());
    for i in 0..x.dim() {
        lp.add(points.iter().map(|p| p.coords()[i].clone()).collect(), Relation::Eq, x.coords()[i].clone());
    }
    lp.solve().is_feasible()
}

/// Whether `x` is an extreme point of `conv(points)`: it is in the hull and
/// not in the hull of the remaining points.
pub fn is_extreme_by_lp(points: &[Vector], x: &Vector) -> bool {
    let others: Vec<Vector> = points.iter().filter(|p| *p != x).cloned().collect();
    in_hull(points, x) && (others.is_empty() || !in_hull(&others, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn v(c: &[i64]) -> Vector {
        Vector::from_ints(c)
    }

    #[test]
    fn linf_square() {
        let s = PolyhedralSpace::linf(2).unwrap();
        assert_eq!(s.vertices().len(), 4);
        assert_eq!(s.facets().len(), 4);
        assert_eq!(s.norm(&v(&[2, 1])), int(2));
        assert_eq!(s.dual_norm(&Functional::new(vec![int(1), int(0)])), int(1));
    }

    #[test]
    fn l1_cube_dual() {
        let s = PolyhedralSpace::l1(3).unwrap();
        assert_eq!(s.vertices().len(), 6);
        assert_eq!(s.facets().len(), 8);
        assert_eq!(s.norm(&v(&[2, 1, -1])), int(4));
        assert_eq!(s.dual_norm(&Functional::new(vec![int(1), int(1), int(1)])), int(1));
    }

    #[test]
    fn asymmetric_ball_rejected() {
        let err = PolyhedralSpace::from_vertices(vec![v(&[1, 0]), v(&[0, 1])]).unwrap_err();
        assert_eq!(err, Error::AsymmetricBall);
    }

    #[test]
    fn degenerate_ball_rejected() {
        let err = PolyhedralSpace::from_vertices(vec![v(&[1, 1]), v(&[-1, -1])]).unwrap_err();
        assert!(matches!(err, Error::DegenerateBall(_)));
    }

    #[test]
    fn square_vertices_give_coordinate_facets() {
        let s = PolyhedralSpace::from_vertices(vec![v(&[1, 1]), v(&[1, -1]), v(&[-1, 1]), v(&[-1, -1])]).unwrap();
        assert_eq!(s.facets(), PolyhedralSpace::linf(2).unwrap().facets());
        assert_eq!(s.dual_norm(&Functional::new(vec![rat(1, 2), rat(1, 2)])), int(1));
    }

    #[test]
    fn coordinate_facets_give_cube() {
        let fs = vec![
            Functional::coordinate(3, 0),
            Functional::coordinate(3, 0).neg(),
            Functional::coordinate(3, 1),
            Functional::coordinate(3, 1).neg(),
            Functional::coordinate(3, 2),
            Functional::coordinate(3, 2).neg(),
        ];
        let s = PolyhedralSpace::from_facets(fs).unwrap();
        assert_eq!(s.vertices(), PolyhedralSpace::linf(3).unwrap().vertices());
    }

    #[test]
    fn non_extreme_points_dropped() {
        let h = rat(1, 2);
        let mut pts = vec![v(&[1, 0]), v(&[-1, 0]), v(&[0, 1]), v(&[0, -1])];
        for (a, b) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
            pts.push(Vector::new(vec![h.clone() * int(a), h.clone() * int(b)]));
        }
        let s = PolyhedralSpace::from_vertices(pts.clone()).unwrap();
        assert_eq!(s.vertices().len(), 4);
        for p in &pts {
            assert_eq!(s.vertices().contains(p), is_extreme_by_lp(&pts, p));
        }
    }

    #[test]
    fn lp_norm_and_support() {
        let s = LpSpace::new(2, int(3)).unwrap();
        let x = Vector::new(vec![1.0, 1.0]);
        assert!((s.norm(&x) - 2f64.powf(1.0 / 3.0)).abs() < 1e-12);
        let f = &s.extreme_support(&x)[0];
        assert!((f.apply(&x) - s.norm(&x)).abs() < 1e-12);
        assert!((s.dual_norm(f) - 1.0).abs() < 1e-12);
        assert!(matches!(LpSpace::new(2, int(1)), Err(Error::BadExponent(_))));
    }

    #[test]
    fn gauge_matches_norm_in_hexagon() {
        let s = PolyhedralSpace::from_vertices(vec![
            v(&[1, 0]), v(&[-1, 0]), v(&[1, 1]), v(&[-1, -1]), v(&[0, 1]), v(&[0, -1]),
        ])
        .unwrap();
        for x in [v(&[3, -2]), v(&[1, 5]), v(&[-2, -2])] {
            assert_eq!(gauge_by_lp(s.vertices(), &x).unwrap(), s.norm(&x));
        }
    }
}
