//! Isometry certificates from vertex data, the refined checks on `l_inf^n`
//! and `l_1^n`, K-set conditions and the `p != 2` operators that defeat
//! finite test sets.

use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{functional_rank, greedy_independent, vector_rank, Functional, Matrix, Vector};
use crate::ortho::{giles_orthogonal, oracle_is_orthogonal};
use crate::preserve::{preserves_at_point, preserves_wrt_kernel, KernelCheck};
use crate::sampling::{self, random_vector};
use crate::scalar::{Field, Rational};
use crate::space::{LpSpace, NormedSpace, PolyKind, PolyhedralSpace, Space};
use crate::support::support_face;

/// Number of random points on which a positive certificate is re-verified.
pub const REVERIFY_POINTS: usize = 1000;
/// Seed of those points.
pub const REVERIFY_SEED: u64 = 1_000;

#[derive(Clone, Debug, PartialEq)]
pub enum FailedCondition {
    /// `‖Tu‖` differs from the norm of the first vertex.
    EqualNorm { norm: Rational, expected: Rational },
    /// `T` sends every vertex to zero.
    ZeroImage,
    /// Fewer than `n` independent support functionals of `u` have preserved kernels.
    Kernel { f: Functional, violating_y: Option<Vector> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Counterexample {
    pub vertex: Vector,
    pub condition: FailedCondition,
}

#[derive(Clone, Debug, PartialEq)]
pub enum IsometryVerdict {
    Isometry,
    ScalarMultiple(Rational),
    Not(Counterexample),
}

impl IsometryVerdict {
    pub fn name(&self) -> &'static str {
        match self {
            IsometryVerdict::Isometry => "isometry",
            IsometryVerdict::ScalarMultiple(_) => "scalar_multiple",
            IsometryVerdict::Not(_) => "not",
        }
    }

    pub fn scale(&self) -> Option<Rational> {
        match self {
            IsometryVerdict::Isometry => Some(Rational::one()),
            IsometryVerdict::ScalarMultiple(c) => Some(c.clone()),
            IsometryVerdict::Not(_) => None,
        }
    }

    pub fn counterexample(&self) -> Option<&Counterexample> {
        match self {
            IsometryVerdict::Not(c) => Some(c),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VertexEvidence {
    pub vertex: Vector,
    pub image_norm: Rational,
    pub kernels: Vec<KernelCheck>,
    /// The independent support functionals whose kernels passed.
    pub selected: Vec<Functional>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IsometryCertificate {
    pub verdict: IsometryVerdict,
    pub evidence: Vec<VertexEvidence>,
    /// `T / c` permutes the vertices of the ball. Set for positive verdicts.
    pub permutes_vertices: Option<bool>,
    /// `‖Tx‖ = c ‖x‖` on the re-verification sample. Set for positive verdicts.
    pub reverified: Option<bool>,
}

impl IsometryCertificate {
    pub fn is_positive(&self) -> bool {
        !matches!(self.verdict, IsometryVerdict::Not(_))
    }
}

fn vertices_descending(space: &PolyhedralSpace) -> Vec<Vector> {
    let mut vs = space.vertices().to_vec();
    vs.reverse();
    vs
}

fn check_square(space: &PolyhedralSpace, t: &Matrix) -> Result<()> {
    check_dim(space.dim(), t.cols())?;
    check_dim(space.dim(), t.rows())
}

/// Equal vertex norms. Returns the common norm or the first disagreeing vertex.
fn equal_vertex_norms(space: &PolyhedralSpace, t: &Matrix, vertices: &[Vector]) -> Result<std::result::Result<Rational, Counterexample>> {
    let mut expected: Option<Rational> = None;
    for u in vertices {
        let norm = space.norm(&t.apply(u)?);
        match &expected {
            None => expected = Some(norm),
            Some(e) if *e != norm => {
                return Ok(Err(Counterexample {
                    vertex: u.clone(),
                    condition: FailedCondition::EqualNorm { norm, expected: e.clone() },
                }))
            }
            _ => {}
        }
    }
    let c = expected.unwrap_or_else(Rational::zero);
    if c.is_zero() {
        return Ok(Err(Counterexample { vertex: vertices[0].clone(), condition: FailedCondition::ZeroImage }));
    }
    Ok(Ok(c))
}

fn kernel_checks(space: &PolyhedralSpace, t: &Matrix, u: &Vector, fs: &[Functional]) -> Result<Vec<KernelCheck>> {
    let mut out = Vec::new();
    for f in fs {
        let r = preserves_wrt_kernel(space, space, t, u, f)?;
        out.push(KernelCheck {
            f: f.clone(),
            verdict: r.verdict,
            g: r.kernels.first().and_then(|k| k.g.clone()),
            violating_y: r.violation.map(|v| v.y),
        });
    }
    Ok(out)
}

fn positive_verdict(c: Rational) -> IsometryVerdict {
    if c.is_one() {
        IsometryVerdict::Isometry
    } else {
        IsometryVerdict::ScalarMultiple(c)
    }
}

fn finish(space: &PolyhedralSpace, t: &Matrix, verdict: IsometryVerdict, evidence: Vec<VertexEvidence>) -> Result<IsometryCertificate> {
    let (permutes_vertices, reverified) = match verdict.scale() {
        Some(c) => {
            let scaled = t.scale(&(Rational::one() / &c));
            let permutes = !t.determinant()?.is_zero()
                && space.vertices().iter().all(|v| scaled.apply(v).map_or(false, |w| space.vertices().contains(&w)));
            (Some(permutes), Some(reverify_scaled_isometry(space, t, &c, REVERIFY_POINTS, REVERIFY_SEED)?))
        }
        None => (None, None),
    };
    Ok(IsometryCertificate { verdict, evidence, permutes_vertices, reverified })
}

/// Decides whether `T` is a scalar multiple of an isometry of a polyhedral
/// space from its action on the vertices of the ball.
///
/// Condition (i) is equality of `‖Tu‖` over all vertices `u`. Condition (ii)
/// asks for `n` independent support functionals of each vertex whose kernels
/// are preserved. Kernels are tested one at a time, so the greedy pick over
/// the passing ones finds an independent family whenever one exists.
pub fn certify_isometry(space: &NormedSpace, t: &Matrix) -> Result<IsometryCertificate> {
    let space = space.as_polyhedral()?;
    check_square(space, t)?;
    let n = space.dim();
    let vertices = vertices_descending(space);
    let c = match equal_vertex_norms(space, t, &vertices)? {
        Ok(c) => c,
        Err(ce) => return finish(space, t, IsometryVerdict::Not(ce), Vec::new()),
    };
    let mut evidence = Vec::new();
    for u in &vertices {
        let ext = support_face(space, u)?.extreme_functionals;
        if functional_rank(&ext) < n {
            return Err(Error::InsufficientSmoothness(format!("vertex {u} has {} independent support functionals", functional_rank(&ext))));
        }
        let kernels = kernel_checks(space, t, u, &ext)?;
        let passing: Vec<Functional> = kernels.iter().filter(|k| k.verdict).map(|k| k.f.clone()).collect();
        let selected: Vec<Functional> = greedy_independent(&passing).into_iter().map(|i| passing[i].clone()).collect();
        let image_norm = space.norm(&t.apply(u)?);
        let failed = kernels.iter().find(|k| !k.verdict).cloned();
        let ok = selected.len() >= n;
        evidence.push(VertexEvidence { vertex: u.clone(), image_norm, kernels, selected });
        if !ok {
            let k = failed.expect("a failing kernel");
            let ce = Counterexample {
                vertex: u.clone(),
                condition: FailedCondition::Kernel { f: k.f, violating_y: k.violating_y },
            };
            return finish(space, t, IsometryVerdict::Not(ce), evidence);
        }
    }
    finish(space, t, positive_verdict(c), evidence)
}

/// The refined test on `l_inf^n` and `l_1^n`: at every vertex, the first `n`
/// independent extreme support functionals in lexicographic order must have
/// preserved kernels. Equal vertex norms are then a consequence and are
/// checked rather than assumed.
pub fn bkt_refined_check(space: &NormedSpace, t: &Matrix) -> Result<IsometryCertificate> {
    let space = match space {
        NormedSpace::Polyhedral(p) if matches!(p.kind(), PolyKind::Linf | PolyKind::L1) => p,
        other => return Err(Error::UnsupportedSpace(other.label())),
    };
    check_square(space, t)?;
    let vertices = vertices_descending(space);
    let mut evidence = Vec::new();
    for u in &vertices {
        let ext = support_face(space, u)?.extreme_functionals;
        let chosen: Vec<Functional> = greedy_independent(&ext).into_iter().map(|i| ext[i].clone()).collect();
        let kernels = kernel_checks(space, t, u, &chosen)?;
        let image_norm = space.norm(&t.apply(u)?);
        let failed = kernels.iter().find(|k| !k.verdict).cloned();
        evidence.push(VertexEvidence { vertex: u.clone(), image_norm, kernels, selected: chosen });
        if let Some(k) = failed {
            let ce = Counterexample {
                vertex: u.clone(),
                condition: FailedCondition::Kernel { f: k.f, violating_y: k.violating_y },
            };
            return finish(space, t, IsometryVerdict::Not(ce), evidence);
        }
    }
    let verdict = match equal_vertex_norms(space, t, &vertices)? {
        Ok(c) => positive_verdict(c),
        Err(ce) => IsometryVerdict::Not(ce),
    };
    finish(space, t, verdict, evidence)
}

/// `‖Tx‖ = c ‖x‖` exactly on the vertices and on `points` seeded random points.
pub fn reverify_scaled_isometry(space: &PolyhedralSpace, t: &Matrix, c: &Rational, points: usize, seed: u64) -> Result<bool> {
    let mut rng = sampling::rng(seed);
    for v in space.vertices() {
        if space.norm(&t.apply(v)?) != c * space.norm(v) {
            return Ok(false);
        }
    }
    for _ in 0..points {
        let x = random_vector(&mut rng, space.dim(), 20, 12);
        if space.norm(&t.apply(&x)?) != c * space.norm(&x) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KSetReading {
    /// `A1 ⊥ A2` when every `a ∈ A1`, `b ∈ A2` has `a ⊥ b`.
    Strong,
    /// `A1 ⊥ A2` when some `a ∈ A1`, `b ∈ A2` has `a ⊥ b`.
    Weak,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KSetQuery {
    pub size: usize,
    pub reading: KSetReading,
    pub lin_indep_n: bool,
    pub no_orthogonal_partition: bool,
    /// The first partition `(A1, A2)` (as indices) with `A1 ⊥ A2`.
    pub orthogonal_partition: Option<(Vec<usize>, Vec<usize>)>,
    pub partitions_checked: usize,
}

impl KSetQuery {
    pub fn both(&self) -> bool {
        self.lin_indep_n && self.no_orthogonal_partition
    }
}

fn partition_orthogonal(a1: &[&Vector<f64>], a2: &[&Vector<f64>], p: f64, reading: KSetReading) -> Result<bool> {
    let mut all = true;
    let mut any = false;
    for a in a1 {
        for b in a2 {
            let o = giles_orthogonal(a.coords(), b.coords(), p)?;
            all &= o;
            any |= o;
        }
    }
    Ok(match reading {
        KSetReading::Strong => all,
        KSetReading::Weak => any,
    })
}

/// The two K-set conditions for a finite set of unit vectors of `l_p^n`.
pub fn kset_conditions(space: &LpSpace, set: &[Vector<f64>], reading: KSetReading) -> Result<KSetQuery> {
    let p = space.p_f64();
    for a in set {
        check_dim(space.dim(), a.dim())?;
        if !(space.norm(a) - 1.0).is_negligible() {
            return Err(Error::NotUnitVectors);
        }
    }
    let m = set.len();
    let lin_indep_n = m == space.dim() && vector_rank(set) == m;
    let mut orthogonal_partition = None;
    let mut partitions_checked = 0;
    // Element 0 always sits in the first block; the mask places the rest.
    for mask in 0..(1u64 << m.saturating_sub(1)) {
        let first: Vec<usize> = std::iter::once(0).chain((1..m).filter(|i| mask >> (i - 1) & 1 == 0)).collect();
        let second: Vec<usize> = (1..m).filter(|i| mask >> (i - 1) & 1 == 1).collect();
        if second.is_empty() {
            continue;
        }
        partitions_checked += 1;
        let a: Vec<&Vector<f64>> = first.iter().map(|&i| &set[i]).collect();
        let b: Vec<&Vector<f64>> = second.iter().map(|&i| &set[i]).collect();
        if partition_orthogonal(&a, &b, p, reading)? {
            orthogonal_partition = Some((first, second));
            break;
        }
        if partition_orthogonal(&b, &a, p, reading)? {
            orthogonal_partition = Some((second, first));
            break;
        }
    }
    Ok(KSetQuery {
        size: m,
        reading,
        lin_indep_n,
        no_orthogonal_partition: orthogonal_partition.is_none(),
        orthogonal_partition,
        partitions_checked,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointCheck {
    pub point: Vector<f64>,
    /// Kernel-wise decision through the semi-inner product.
    pub preserved: bool,
    pub samples: usize,
    /// Sampled `y ∈ a^⊥` failing either Giles' test or the line-search oracle.
    pub sample_failures: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CounterexampleOperator {
    pub p: f64,
    pub n: usize,
    pub operator: Matrix<f64>,
    pub set: Vec<Vector<f64>>,
    pub checks: Vec<PointCheck>,
    /// Two unit vectors `(u, v)` with `‖Tu‖` and `‖Tv‖` differing by more than 0.01.
    pub distinct_norms: Option<(Vector<f64>, Vector<f64>, f64, f64)>,
    /// A point off the set at which orthogonality is not preserved.
    pub off_set_failure: Option<Vector<f64>>,
}

impl CounterexampleOperator {
    pub fn preserves_on_set(&self) -> bool {
        self.checks.iter().all(|c| c.preserved && c.sample_failures == 0)
    }

    pub fn not_isometry_multiple(&self) -> bool {
        self.distinct_norms.is_some()
    }
}

/// Kernel vectors of `a` sampled for the oracle cross-check of each point.
pub const KERNEL_SAMPLES: usize = 40;
const RATIO_GAP: f64 = 0.01;

/// The operator preserving orthogonality at every point of the finite set
/// `A` of `l_p^n` without being a multiple of an isometry, with its set and
/// the verification data.
pub fn counterexample_operator(p: &Rational, n: usize) -> Result<CounterexampleOperator> {
    let space = LpSpace::new(n, p.clone())?;
    if *p == Rational::from_i64(2) {
        return Err(Error::EuclideanExponent);
    }
    let pf = space.p_f64();
    let qf = space.q_f64();
    let d = 2f64.powf(1.0 / qf);
    let mut rows = vec![vec![0.0; n]; n];
    rows[0][0] = 1.0;
    rows[0][1] = 1.0;
    rows[1][0] = 1.0;
    rows[1][1] = -1.0;
    for (i, row) in rows.iter_mut().enumerate().skip(2) {
        row[i] = d;
    }
    let operator = Matrix::from_rows(rows)?;
    let ones = Vector::new(vec![1.0; n]);
    let set: Vec<Vector<f64>> = if n == 2 {
        let v = Vector::new(vec![1.0, 1.0]);
        vec![Vector::new(vec![1.0, 0.0]), v.scale(&(1.0 / space.norm(&v)))]
    } else {
        std::iter::once(ones.scale(&(1.0 / space.norm(&ones))))
            .chain((1..n).map(|i| Vector::basis(n, i)))
            .collect()
    };
    let mut rng = sampling::rng(sampling::DEFAULT_SEED);
    let mut checks = Vec::new();
    for a in &set {
        let preserved = preserves_at_point(&space, &space, &operator, a)?.verdict;
        let f = support_face(&space, a)?.extreme_functionals.remove(0);
        let basis = crate::linalg::common_kernel(std::slice::from_ref(&f), n);
        let ta = operator.apply(a)?;
        let mut failures = 0;
        for _ in 0..KERNEL_SAMPLES {
            let w: Vec<f64> = basis.iter().map(|_| rng.gen_range(-3.0..3.0)).collect();
            let y = Vector::combination(&basis, &w);
            if y.is_zero() {
                continue;
            }
            let ty = operator.apply(&y)?;
            let giles = giles_orthogonal(ta.coords(), ty.coords(), pf)?;
            let oracle = oracle_is_orthogonal(&space, &ta, &ty)?.orthogonal;
            failures += usize::from(!(giles && oracle));
        }
        checks.push(PointCheck { point: a.clone(), preserved, samples: KERNEL_SAMPLES, sample_failures: failures });
    }
    let mut candidates: Vec<Vector<f64>> = (0..n).map(|i| Vector::basis(n, i)).collect();
    candidates.push(ones.clone());
    candidates.extend(set.iter().cloned());
    let ratio = |v: &Vector<f64>| -> Result<f64> { Ok(space.norm(&operator.apply(v)?) / space.norm(v)) };
    let mut distinct_norms = None;
    'outer: for (i, u) in candidates.iter().enumerate() {
        for v in &candidates[i + 1..] {
            let (ru, rv) = (ratio(u)?, ratio(v)?);
            if (ru - rv).abs() > RATIO_GAP {
                let uu = u.scale(&(1.0 / space.norm(u)));
                let vv = v.scale(&(1.0 / space.norm(v)));
                distinct_norms = Some((uu, vv, ru, rv));
                break 'outer;
            }
        }
    }
    let mut off_set_failure = None;
    for _ in 0..200 {
        let x = Vector::new((0..n).map(|_| rng.gen_range(-2.0..2.0)).collect());
        if x.is_zero() {
            continue;
        }
        if !preserves_at_point(&space, &space, &operator, &x)?.verdict {
            off_set_failure = Some(x);
            break;
        }
    }
    Ok(CounterexampleOperator { p: pf, n, operator, set, checks, distinct_norms, off_set_failure })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::signed_permutations;
    use crate::scalar::{int, rat};

    fn m(rows: &[&[i64]]) -> Matrix {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&a| int(a)).collect()).collect()).unwrap()
    }

    fn linf(n: usize) -> NormedSpace {
        PolyhedralSpace::linf(n).unwrap().into()
    }

    fn l1(n: usize) -> NormedSpace {
        PolyhedralSpace::l1(n).unwrap().into()
    }

    #[test]
    fn signed_permutations_are_isometries() {
        for t in signed_permutations(3).iter().take(12) {
            let c = certify_isometry(&linf(3), t).unwrap();
            assert_eq!(c.verdict, IsometryVerdict::Isometry);
            assert_eq!(c.reverified, Some(true));
            assert_eq!(c.permutes_vertices, Some(true));
        }
        let t = signed_permutations(3)[5].scale(&int(2));
        assert_eq!(certify_isometry(&l1(3), &t).unwrap().verdict, IsometryVerdict::ScalarMultiple(int(2)));
        let t = signed_permutations(4)[17].scale(&rat(3, 7));
        assert_eq!(bkt_refined_check(&l1(4), &t).unwrap().verdict, IsometryVerdict::ScalarMultiple(rat(3, 7)));
    }

    #[test]
    fn plane_operator_fails_at_the_diagonal_vertex() {
        let t = Matrix::from_rows(vec![vec![rat(1, 2), rat(-1, 2)], vec![rat(1, 2), rat(1, 2)]]).unwrap();
        let c = certify_isometry(&linf(2), &t).unwrap();
        let ce = c.verdict.counterexample().unwrap();
        assert_eq!(ce.vertex, Vector::from_ints(&[1, 1]));
        assert!(matches!(ce.condition, FailedCondition::Kernel { .. }));
    }

    #[test]
    fn refined_check_failures() {
        let diag = m(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 2]]);
        assert!(!bkt_refined_check(&linf(3), &diag).unwrap().is_positive());
        let t = m(&[&[1, 1, 0], &[0, -1, 0], &[0, -1, -1]]);
        let c = bkt_refined_check(&l1(3), &t).unwrap();
        let ce = c.verdict.counterexample().unwrap();
        assert_eq!(ce.vertex, Vector::from_ints(&[1, 0, 0]));
        match &ce.condition {
            FailedCondition::Kernel { f, .. } => {
                assert_eq!(*f, Functional::new(vec![int(1), int(-1), int(1)]))
            }
            other => panic!("{other:?}"),
        }
        let lp: NormedSpace = LpSpace::new(2, int(3)).unwrap().into();
        assert!(matches!(bkt_refined_check(&lp, &diag), Err(Error::UnsupportedSpace(_))));
        assert_eq!(certify_isometry(&lp, &diag).unwrap_err(), Error::NotPolyhedral);
    }

    #[test]
    fn kset_examples() {
        let l2 = LpSpace::new(3, int(2)).unwrap();
        let e: Vec<Vector<f64>> = (0..3).map(|i| Vector::basis(3, i)).collect();
        let q = kset_conditions(&l2, &e, KSetReading::Strong).unwrap();
        assert!(q.lin_indep_n && !q.no_orthogonal_partition);

        for p in [rat(3, 2), int(3), int(5)] {
            let ce = counterexample_operator(&p, 2).unwrap();
            let space = LpSpace::new(2, p.clone()).unwrap();
            let q = kset_conditions(&space, &ce.set, KSetReading::Strong).unwrap();
            assert!(q.both());
        }
        let space = LpSpace::new(2, int(3)).unwrap();
        let bad = [Vector::new(vec![1.0, 1.0])];
        assert_eq!(kset_conditions(&space, &bad, KSetReading::Strong).unwrap_err(), Error::NotUnitVectors);
    }

    #[test]
    fn kset_readings_differ_in_higher_dimension() {
        let ce = counterexample_operator(&int(3), 3).unwrap();
        let space = LpSpace::new(3, int(3)).unwrap();
        assert!(kset_conditions(&space, &ce.set, KSetReading::Strong).unwrap().no_orthogonal_partition);
        assert!(!kset_conditions(&space, &ce.set, KSetReading::Weak).unwrap().no_orthogonal_partition);
    }

    #[test]
    fn counterexample_operators() {
        let ce = counterexample_operator(&int(3), 2).unwrap();
        assert_eq!(ce.operator.to_rows(), vec![vec![1.0, 1.0], vec![1.0, -1.0]]);
        assert!(ce.preserves_on_set());
        let (_, _, ru, rv) = ce.distinct_norms.unwrap();
        assert!((ru - rv).abs() > 0.01);
        assert!(ce.off_set_failure.is_some());
        let ce = counterexample_operator(&int(3), 4).unwrap();
        assert!(ce.preserves_on_set() && ce.not_isometry_multiple());
        assert!((ce.operator.get(3, 3) - 2f64.powf(2.0 / 3.0)).abs() < 1e-12);
        assert_eq!(counterexample_operator(&int(2), 3).unwrap_err(), Error::EuclideanExponent);
        assert!(matches!(counterexample_operator(&int(1), 3), Err(Error::BadExponent(_))));
    }
}
