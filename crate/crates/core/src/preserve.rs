//! Local, directional and subspace-wise preservation of Birkhoff-James
//! orthogonality by a linear operator.
//!
//! Every function takes the domain space, the codomain space and the matrix
//! separately. The generic versions run over any [`Searchable`] field; the
//! cone-sampling analyses are exact-only.

use std::cmp::Ordering;

use num_traits::{One, Zero};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{common_kernel, functional_rank, vector_rank, Functional, Matrix, Vector};
use crate::ortho::{decide_with_face, is_orthogonal, LineSearch, OrthoCertificate, OrthoRefutation};
use crate::sampling::{self, random_cone_member, random_convex_weights};
use crate::scalar::{Field, Rational};
use crate::search::{annihilates, Searchable};
use crate::space::{PolyhedralSpace, Space};
use crate::support::{cones_of_face, support_face, AssociatedCone, SupportFace};

/// Seed of the convex-combination spot checks in [`preserves_at_point`].
pub const SPOT_CHECK_SEED: u64 = 7;
const SPOT_CHECKS: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub enum Mode<S = Rational> {
    AtPoint,
    InDirection(Vector<S>),
    WrtKernel(Functional<S>),
    WrtSubspace(Vec<Vector<S>>),
    ExistsDirection,
}

impl<S> Mode<S> {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::AtPoint => "at_point",
            Mode::InDirection(_) => "in_direction",
            Mode::WrtKernel(_) => "wrt_kernel",
            Mode::WrtSubspace(_) => "wrt_subspace",
            Mode::ExistsDirection => "exists_direction",
        }
    }
}

/// A direction `y` with `x ⊥ y` but `Tx` not orthogonal to `Ty`.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation<S = Rational> {
    pub y: Vector<S>,
    pub ty: Vector<S>,
    pub refutation: OrthoRefutation<S>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Witness<S = Rational> {
    /// `Tx = 0`, which is orthogonal to everything.
    Vacuous,
    /// `Tx ⊥ Ty`.
    Direction { y: Vector<S>, certificate: OrthoCertificate<S> },
    /// `g ∈ J(Tx)`, the given convex combination of `Ext J(Tx)`, kills the image.
    Functional { g: Functional<S>, generators: Vec<Functional<S>>, weights: Vec<S> },
    /// Every kernel in `kernels` passed.
    Kernels,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelCheck<S = Rational> {
    pub f: Functional<S>,
    pub verdict: bool,
    pub g: Option<Functional<S>>,
    pub violating_y: Option<Vector<S>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PreservationReport<S = Rational> {
    pub mode: Mode<S>,
    pub verdict: bool,
    pub witness: Option<Witness<S>>,
    pub violation: Option<Violation<S>>,
    pub kernels: Vec<KernelCheck<S>>,
    /// The existence criterion phrased through `(Tx)⁺` and `(Tx)⁻`.
    pub criterion: Option<bool>,
    pub cone_pairs_checked: usize,
    pub witness_cones: Option<(AssociatedCone<S>, AssociatedCone<S>)>,
    pub spot_checks: usize,
    pub spot_check_failures: usize,
}

impl<S: Field> PreservationReport<S> {
    fn new(mode: Mode<S>, verdict: bool) -> Self {
        PreservationReport {
            mode,
            verdict,
            witness: None,
            violation: None,
            kernels: Vec::new(),
            criterion: None,
            cone_pairs_checked: 0,
            witness_cones: None,
            spot_checks: 0,
            spot_check_failures: 0,
        }
    }

    fn vacuous(mode: Mode<S>) -> Self {
        let mut r = Self::new(mode, true);
        r.witness = Some(Witness::Vacuous);
        r
    }

    pub fn criterion_agrees(&self) -> Option<bool> {
        self.criterion.map(|c| c == self.verdict)
    }
}

fn check_operator<F: Field>(dim_x: usize, dim_y: usize, t: &Matrix<F>) -> Result<()> {
    check_dim(dim_x, t.cols())?;
    check_dim(dim_y, t.rows())
}

fn violation<Y, F>(sy: &Y, tx: &Vector<F>, face_tx: &SupportFace<F>, t: &Matrix<F>, y: Vector<F>) -> Result<Option<Violation<F>>>
where
    Y: LineSearch<S = F>,
    F: Searchable,
{
    let ty = t.apply(&y)?;
    let _ = tx;
    let r = decide_with_face(sy, face_tx, &ty);
    Ok(r.refutation().cloned().map(|refutation| Violation { y, ty, refutation }))
}

/// `Tx ⊥ Ty` for a given `y ∈ x^⊥`.
pub fn preserves_in_direction<X, Y, F>(sx: &X, sy: &Y, t: &Matrix<F>, x: &Vector<F>, y: &Vector<F>) -> Result<PreservationReport<F>>
where
    X: LineSearch<S = F>,
    Y: LineSearch<S = F>,
    F: Searchable,
{
    check_operator(sx.dim(), sy.dim(), t)?;
    if !is_orthogonal(sx, x, y)?.is_orthogonal() {
        return Err(Error::NotOrthogonalInput);
    }
    let mode = Mode::InDirection(y.clone());
    let tx = t.apply(x)?;
    if tx.is_zero() {
        return Ok(PreservationReport::vacuous(mode));
    }
    let ty = t.apply(y)?;
    let r = is_orthogonal(sy, &tx, &ty)?;
    let mut report = PreservationReport::new(mode, r.is_orthogonal());
    match (r.certificate(), r.refutation()) {
        (Some(c), _) => report.witness = Some(Witness::Direction { y: y.clone(), certificate: c.clone() }),
        (_, Some(refutation)) => {
            report.violation = Some(Violation { y: y.clone(), ty, refutation: refutation.clone() })
        }
        _ => unreachable!(),
    }
    Ok(report)
}

struct Annihilator<F> {
    g: Functional<F>,
    weights: Vec<F>,
}

/// Some `g ∈ co(gs)` vanishing on every target: a single generator if one
/// works (first in list order), else a convex combination.
fn find_annihilator<F: Searchable>(gs: &[Functional<F>], targets: &[Vector<F>]) -> Option<Annihilator<F>> {
    if let Some(k) = gs.iter().position(|g| targets.iter().all(|t| annihilates(g, t))) {
        let mut weights = vec![F::zero(); gs.len()];
        weights[k] = F::one();
        return Some(Annihilator { g: gs[k].clone(), weights });
    }
    let weights = F::convex_annihilator(gs, targets)?;
    Some(Annihilator { g: Functional::combination(gs, &weights), weights })
}

fn kernel_check<Y, F>(sy: &Y, t: &Matrix<F>, tx: &Vector<F>, face_tx: &SupportFace<F>, basis: &[Vector<F>], f: Option<&Functional<F>>) -> Result<(KernelCheck<F>, Option<Annihilator<F>>, Option<Violation<F>>)>
where
    Y: LineSearch<S = F>,
    F: Searchable,
{
    let gs = &face_tx.extreme_functionals;
    let targets: Vec<Vector<F>> = basis.iter().map(|b| t.apply(b)).collect::<Result<_>>()?;
    let f = f.cloned().unwrap_or_else(|| Functional::zeros(t.cols()));
    if let Some(a) = find_annihilator(gs, &targets) {
        let check = KernelCheck { f, verdict: true, g: Some(a.g.clone()), violating_y: None };
        return Ok((check, Some(a), None));
    }
    let pulled: Vec<Functional<F>> = gs.iter().map(|g| t.pullback(g)).collect::<Result<_>>()?;
    let z = F::gordan_direction(&pulled, basis).map(F::tidy);
    let v = match &z {
        Some(z) => violation(sy, tx, face_tx, t, z.clone())?,
        None => None,
    };
    let check = KernelCheck { f, verdict: false, g: None, violating_y: z };
    Ok((check, None, v))
}

fn is_support_functional<X: Space>(sx: &X, x: &Vector<X::S>, f: &Functional<X::S>) -> bool {
    (f.apply(x) - sx.norm(x)).is_negligible() && (sx.dual_norm(f) - X::S::one()).is_negligible()
}

/// Preservation at `x` with respect to `ker f` for `f ∈ J(x)`.
pub fn preserves_wrt_kernel<X, Y, F>(sx: &X, sy: &Y, t: &Matrix<F>, x: &Vector<F>, f: &Functional<F>) -> Result<PreservationReport<F>>
where
    X: LineSearch<S = F>,
    Y: LineSearch<S = F>,
    F: Searchable,
{
    check_operator(sx.dim(), sy.dim(), t)?;
    check_dim(sx.dim(), f.dim())?;
    support_face(sx, x)?;
    if !is_support_functional(sx, x, f) {
        return Err(Error::NotSupportFunctional);
    }
    let mode = Mode::WrtKernel(f.clone());
    let tx = t.apply(x)?;
    if tx.is_zero() {
        return Ok(PreservationReport::vacuous(mode));
    }
    let face_tx = support_face(sy, &tx)?;
    let basis = common_kernel(std::slice::from_ref(f), sx.dim());
    let (check, ann, v) = kernel_check(sy, t, &tx, &face_tx, &basis, Some(f))?;
    let mut report = PreservationReport::new(mode, check.verdict);
    if let Some(a) = ann {
        report.witness = Some(Witness::Functional {
            g: a.g,
            generators: face_tx.extreme_functionals.clone(),
            weights: a.weights,
        });
    }
    report.violation = v;
    report.kernels.push(check);
    Ok(report)
}

/// Preservation at `x` in every direction, decided kernel by kernel over
/// `Ext J(x)` in lexicographic order.
pub fn preserves_at_point<X, Y, F>(sx: &X, sy: &Y, t: &Matrix<F>, x: &Vector<F>) -> Result<PreservationReport<F>>
where
    X: LineSearch<S = F>,
    Y: LineSearch<S = F>,
    F: Searchable,
{
    check_operator(sx.dim(), sy.dim(), t)?;
    let face_x = support_face(sx, x)?;
    let tx = t.apply(x)?;
    if tx.is_zero() {
        return Ok(PreservationReport::vacuous(Mode::AtPoint));
    }
    let face_tx = support_face(sy, &tx)?;
    let mut report = PreservationReport::new(Mode::AtPoint, true);
    for f in &face_x.extreme_functionals {
        let basis = common_kernel(std::slice::from_ref(f), sx.dim());
        let (check, _, v) = kernel_check(sy, t, &tx, &face_tx, &basis, Some(f))?;
        if !check.verdict {
            report.verdict = false;
            if report.violation.is_none() {
                report.violation = v;
            }
        }
        report.kernels.push(check);
    }
    if report.verdict {
        report.witness = Some(Witness::Kernels);
        let fs = &face_x.extreme_functionals;
        if fs.len() > 1 {
            let mut rng = sampling::rng(SPOT_CHECK_SEED);
            for _ in 0..SPOT_CHECKS {
                let w: Vec<F> = random_convex_weights(&mut rng, fs.len()).iter().map(F::from_rational).collect();
                let f = Functional::combination(fs, &w);
                let basis = common_kernel(std::slice::from_ref(&f), sx.dim());
                let (check, _, _) = kernel_check(sy, t, &tx, &face_tx, &basis, Some(&f))?;
                report.spot_checks += 1;
                report.spot_check_failures += usize::from(!check.verdict);
            }
        }
    }
    Ok(report)
}

/// Preservation at `x` on `span(basis)`, which must lie in `x^⊥`.
pub fn preserves_wrt_subspace<X, Y, F>(sx: &X, sy: &Y, t: &Matrix<F>, x: &Vector<F>, basis: &[Vector<F>]) -> Result<PreservationReport<F>>
where
    X: LineSearch<S = F>,
    Y: LineSearch<S = F>,
    F: Searchable,
{
    check_operator(sx.dim(), sy.dim(), t)?;
    let face_x = support_face(sx, x)?;
    for z in basis {
        check_dim(sx.dim(), z.dim())?;
        if !decide_with_face(sx, &face_x, z).is_orthogonal() {
            return Err(Error::SubspaceNotOrthogonal);
        }
    }
    let mode = Mode::WrtSubspace(basis.to_vec());
    if find_annihilator(&face_x.extreme_functionals, basis).is_none() {
        return Err(Error::SubspaceNotOrthogonal);
    }
    let tx = t.apply(x)?;
    if basis.is_empty() || tx.is_zero() {
        return Ok(PreservationReport::vacuous(mode));
    }
    let face_tx = support_face(sy, &tx)?;
    let (check, ann, v) = kernel_check(sy, t, &tx, &face_tx, basis, None)?;
    let mut report = PreservationReport::new(mode, check.verdict);
    if let Some(a) = ann {
        report.witness = Some(Witness::Functional {
            g: a.g,
            generators: face_tx.extreme_functionals.clone(),
            weights: a.weights,
        });
    }
    report.violation = v;
    Ok(report)
}

fn cone_rows<F: Field>(cone: &AssociatedCone<F>, t: Option<&Matrix<F>>) -> Result<(Vec<Functional<F>>, Vec<Functional<F>>)> {
    let (ge, eq) = cone.constraints();
    match t {
        None => Ok((ge, eq)),
        Some(t) => Ok((
            ge.iter().map(|h| t.pullback(h)).collect::<Result<_>>()?,
            eq.iter().map(|h| t.pullback(h)).collect::<Result<_>>()?,
        )),
    }
}

/// Whether some `y ∈ x^⊥ \ {0}` has `Tx ⊥ Ty`, decided over all pairs of
/// associated cones `V ∈ 𝒱(x)`, `W ∈ 𝒱(Tx)`.
pub fn exists_preserved_direction<X, Y, F>(sx: &X, sy: &Y, t: &Matrix<F>, x: &Vector<F>) -> Result<PreservationReport<F>>
where
    X: LineSearch<S = F>,
    Y: LineSearch<S = F>,
    F: Searchable,
{
    check_operator(sx.dim(), sy.dim(), t)?;
    let face_x = support_face(sx, x)?;
    let tx = t.apply(x)?;
    if tx.is_zero() {
        return Err(Error::ZeroImage);
    }
    let face_tx = support_face(sy, &tx)?;
    let cones_x = cones_of_face(&face_x);
    let cones_tx = cones_of_face(&face_tx);
    let n = sx.dim();
    let mut report = PreservationReport::new(Mode::ExistsDirection, false);
    'outer: for v in &cones_x {
        let (ge_v, eq_v) = cone_rows(v, None)?;
        for w in &cones_tx {
            let (ge_w, eq_w) = cone_rows(w, Some(t))?;
            report.cone_pairs_checked += 1;
            let ge: Vec<_> = ge_v.iter().chain(&ge_w).cloned().collect();
            let eq: Vec<_> = eq_v.iter().chain(&eq_w).cloned().collect();
            if let Some(y) = F::nonzero_in_cone(&ge, &eq, n) {
                let y = F::tidy(y);
                let ty = t.apply(&y)?;
                let r = decide_with_face(sy, &face_tx, &ty);
                if let Some(c) = r.certificate() {
                    report.verdict = true;
                    report.witness = Some(Witness::Direction { y, certificate: c.clone() });
                    report.witness_cones = Some((v.clone(), w.clone()));
                    break 'outer;
                }
            }
        }
    }
    report.criterion = Some(direction_criterion(&face_tx, &cones_x, t, n)?);
    Ok(report)
}

/// The `(Tx)⁺ / (Tx)⁻` criterion. Above dimension two: some `u, v ∈ x^⊥ \ {0}`
/// with `Tu ∈ (Tx)⁺`, `Tv ∈ (Tx)⁻`. In dimension two `u` and `v` must also
/// share an associated cone, so that the segment between them stays in
/// `x^⊥ \ {0}`.
fn direction_criterion<F: Searchable>(face_tx: &SupportFace<F>, cones_x: &[AssociatedCone<F>], t: &Matrix<F>, n: usize) -> Result<bool> {
    let pulled: Vec<Functional<F>> = face_tx.extreme_functionals.iter().map(|g| t.pullback(g)).collect::<Result<_>>()?;
    // Some non-zero u in the cone with h(u) >= 0 for one of the given rows.
    let reach = |cone: &AssociatedCone<F>, sign: Ordering| -> Result<bool> {
        let (ge, eq) = cone_rows(cone, None)?;
        for h in &pulled {
            let h = if sign == Ordering::Greater { h.clone() } else { h.neg() };
            let mut rows = ge.clone();
            rows.push(h);
            if F::nonzero_in_cone(&rows, &eq, n).is_some() {
                return Ok(true);
            }
        }
        Ok(false)
    };
    if n > 2 {
        let mut plus = false;
        let mut minus = false;
        for v in cones_x {
            plus = plus || reach(v, Ordering::Greater)?;
            minus = minus || reach(v, Ordering::Less)?;
        }
        return Ok(plus && minus);
    }
    for v in cones_x {
        if v.is_kernel() {
            // A line through 0: u and v must lie on one ray.
            let Some(w) = common_kernel(std::slice::from_ref(&v.i_functional), n).into_iter().next() else {
                continue;
            };
            for ray in [w.clone(), w.neg()] {
                let vals: Vec<F> = pulled.iter().map(|h| h.apply(&ray)).collect();
                let up = vals.iter().any(|a| a.sign_class() != Ordering::Less);
                let down = vals.iter().any(|a| a.sign_class() != Ordering::Greater);
                if up && down {
                    return Ok(true);
                }
            }
        } else if reach(v, Ordering::Greater)? && reach(v, Ordering::Less)? {
            return Ok(true);
        }
    }
    Ok(false)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Codim2Subspace<S = Rational> {
    pub basis: Vec<Vector<S>>,
    pub f: Functional<S>,
    pub g: Option<Functional<S>>,
}

/// A codimension-two subspace of `x^⊥` on which `T` preserves orthogonality:
/// `n - 2` vectors of `ker f ∩ ker (g ∘ T)` for the first `f ∈ Ext J(x)` and
/// `g ∈ Ext J(Tx)`.
pub fn find_codim2_subspace<X, Y, F>(sx: &X, sy: &Y, t: &Matrix<F>, x: &Vector<F>) -> Result<Codim2Subspace<F>>
where
    X: LineSearch<S = F>,
    Y: LineSearch<S = F>,
    F: Searchable,
{
    check_operator(sx.dim(), sy.dim(), t)?;
    let n = sx.dim();
    if n <= 2 {
        return Err(Error::DimensionTooSmall { required: 3, found: n });
    }
    let face_x = support_face(sx, x)?;
    let f = face_x.extreme_functionals[0].clone();
    let tx = t.apply(x)?;
    let (rows, g) = if tx.is_zero() {
        (vec![f.clone()], None)
    } else {
        let g = support_face(sy, &tx)?.extreme_functionals[0].clone();
        (vec![f.clone(), t.pullback(&g)?], Some(g))
    };
    let mut basis: Vec<Vector<F>> = common_kernel(&rows, n).into_iter().map(F::tidy).collect();
    basis.truncate(n - 2);
    Ok(Codim2Subspace { basis, f, g })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmoothnessReport {
    pub k: usize,
    pub p: usize,
    pub holds: bool,
}

fn check_kernel_hypothesis<X, Y, F>(sx: &X, sy: &Y, t: &Matrix<F>, x: &Vector<F>, kernels: &[Functional<F>]) -> Result<()>
where
    X: LineSearch<S = F>,
    Y: LineSearch<S = F>,
    F: Searchable,
{
    if functional_rank(kernels) != kernels.len() {
        return Err(Error::HypothesisViolated("kernel functionals are dependent".into()));
    }
    for f in kernels {
        match preserves_wrt_kernel(sx, sy, t, x, f) {
            Ok(r) if r.verdict => {}
            Ok(_) => return Err(Error::HypothesisViolated(format!("kernel {} is not preserved", f.coeffs().len()))),
            Err(Error::NotSupportFunctional) => {
                return Err(Error::HypothesisViolated("functional is not in J(x)".into()))
            }
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

/// If `T` preserves at `x` w.r.t. `k` independent kernels, `Tx` is at least
/// `k`-smooth.
pub fn smoothness_monotonicity_check<X, Y, F>(sx: &X, sy: &Y, t: &Matrix<F>, x: &Vector<F>, kernels: &[Functional<F>]) -> Result<SmoothnessReport>
where
    X: LineSearch<S = F>,
    Y: LineSearch<S = F>,
    F: Searchable,
{
    check_kernel_hypothesis(sx, sy, t, x, kernels)?;
    let tx = t.apply(x)?;
    if tx.is_zero() {
        return Err(Error::HypothesisViolated("Tx = 0".into()));
    }
    let k = kernels.len();
    let p = support_face(sy, &tx)?.smoothness_order;
    Ok(SmoothnessReport { k, p, holds: p >= k })
}

#[derive(Clone, Debug, PartialEq)]
pub struct BijectivityReport<S = Rational> {
    pub tx_zero: bool,
    pub determinant: S,
    pub holds: bool,
}

/// With `n` independent preserved kernels at `x`, either `Tx = 0` or `T` is
/// bijective.
pub fn bijectivity_check<X, Y, F>(sx: &X, sy: &Y, t: &Matrix<F>, x: &Vector<F>, kernels: &[Functional<F>]) -> Result<BijectivityReport<F>>
where
    X: LineSearch<S = F>,
    Y: LineSearch<S = F>,
    F: Searchable,
{
    check_dim(sx.dim(), sy.dim())?;
    if kernels.len() != sx.dim() {
        return Err(Error::HypothesisViolated(format!("need {} kernels, got {}", sx.dim(), kernels.len())));
    }
    check_kernel_hypothesis(sx, sy, t, x, kernels)?;
    let tx_zero = t.apply(x)?.is_zero();
    let determinant = t.determinant()?;
    let holds = tx_zero || !determinant.is_negligible();
    Ok(BijectivityReport { tx_zero, determinant, holds })
}

// Exact-only analyses below.

/// Whether `T(ker f) = ker g` exactly.
pub fn kernel_image_equals(t: &Matrix, f: &Functional, g: &Functional) -> Result<bool> {
    let basis = common_kernel(std::slice::from_ref(f), t.cols());
    let images: Vec<Vector> = basis.iter().map(|b| t.apply(b)).collect::<Result<_>>()?;
    Ok(images.iter().all(|v| g.apply(v).is_zero()) && vector_rank(&images) + 1 == t.rows() && !g.is_zero())
}

/// Whether `T(ker f) ⊂ ker g`.
pub fn kernel_image_within(t: &Matrix, f: &Functional, g: &Functional) -> Result<bool> {
    let basis = common_kernel(std::slice::from_ref(f), t.cols());
    for b in &basis {
        if !g.apply(&t.apply(b)?).is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConeImage {
    pub cone: AssociatedCone,
    pub samples: usize,
    pub all_in_perp: bool,
    /// Indices into `image_cones` of cones containing every sampled image.
    pub common_cones: Vec<usize>,
    /// Some `W` has every sampled image in `W ∪ -W`.
    pub sign_consistent: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelImage {
    pub f: Functional,
    /// `g ∈ Ext J(Tx)` with `T(ker f) ⊂ ker g`.
    pub into: Vec<Functional>,
    /// `g ∈ Ext J(Tx)` with `T(ker f) = ker g`.
    pub onto: Vec<Functional>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConeImageReport {
    pub image_cones: Vec<AssociatedCone>,
    pub per_cone: Vec<ConeImage>,
    pub kernels: Vec<KernelImage>,
    pub preserves_at_point: bool,
    /// `T(x^⊥) = (Tx)^⊥`, detected as: `T` invertible, `T` preserves at `x`
    /// and `T⁻¹` preserves at `Tx`.
    pub perp_onto: bool,
    /// Every cone maps into a single image cone. Asserted when `perp_onto`.
    pub single_cone: bool,
}

impl ConeImageReport {
    /// The containment claim holds whenever its hypothesis does.
    pub fn consistent(&self) -> bool {
        !self.perp_onto || self.single_cone
    }
}

/// Samples each `V ∈ 𝒱(x)` and classifies the images among `𝒱(Tx)`.
pub fn cone_image_analysis(sx: &PolyhedralSpace, sy: &PolyhedralSpace, t: &Matrix, x: &Vector, samples_per_cone: usize, seed: u64) -> Result<ConeImageReport> {
    check_operator(sx.dim(), sy.dim(), t)?;
    let face_x = support_face(sx, x)?;
    let tx = t.apply(x)?;
    if tx.is_zero() {
        return Err(Error::ZeroImage);
    }
    let face_tx = support_face(sy, &tx)?;
    let cones_x = cones_of_face(&face_x);
    let image_cones = cones_of_face(&face_tx);
    let mut rng = sampling::rng(seed);
    let mut per_cone = Vec::new();
    for v in &cones_x {
        let gens = v.generators();
        let mut samples: Vec<Vector> = gens.clone();
        while samples.len() < samples_per_cone.max(gens.len()) {
            samples.push(random_cone_member(&mut rng, &gens));
        }
        samples.retain(|s| !s.is_zero());
        let images: Vec<Vector> = samples.iter().map(|s| t.apply(s)).collect::<Result<_>>()?;
        let all_in_perp = images.iter().all(|ty| decide_with_face(sy, &face_tx, ty).is_orthogonal());
        let mut common_cones = Vec::new();
        let mut sign_consistent = false;
        for (k, w) in image_cones.iter().enumerate() {
            let rev = w.reversed();
            let mut inside = true;
            let mut signed = true;
            for ty in &images {
                let a = w.contains(ty)?;
                inside &= a;
                signed &= a || rev.contains(ty)?;
            }
            if inside {
                common_cones.push(k);
            }
            sign_consistent |= signed;
        }
        per_cone.push(ConeImage { cone: v.clone(), samples: samples.len(), all_in_perp, common_cones, sign_consistent });
    }
    let mut kernels = Vec::new();
    for f in &face_x.extreme_functionals {
        let mut into = Vec::new();
        let mut onto = Vec::new();
        for g in &face_tx.extreme_functionals {
            if kernel_image_within(t, f, g)? {
                into.push(g.clone());
            }
            if kernel_image_equals(t, f, g)? {
                onto.push(g.clone());
            }
        }
        kernels.push(KernelImage { f: f.clone(), into, onto });
    }
    let preserves = preserves_at_point(sx, sy, t, x)?.verdict;
    let perp_onto = preserves
        && t.is_square()
        && !t.determinant()?.is_zero()
        && preserves_at_point(sy, sx, &t.inverse()?, &tx)?.verdict;
    let single_cone = per_cone.iter().all(|c| !c.common_cones.is_empty());
    Ok(ConeImageReport { image_cones, per_cone, kernels, preserves_at_point: preserves, perp_onto, single_cone })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClosureReport {
    pub members: usize,
    pub pairs_checked: usize,
    /// Pairs `(y1, y2)` of members whose sum, scaling or midpoint left the set.
    pub failures: Vec<(Vector, Vector)>,
    /// `V ∩ -V ⊂ ker f_i ∩ ker f_j` on the members.
    pub pointed_part_ok: bool,
}

impl ClosureReport {
    pub fn closed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn in_d(sy: &PolyhedralSpace, face_tx: &SupportFace, t: &Matrix, cone: &AssociatedCone, y: &Vector) -> Result<bool> {
    Ok(cone.contains(y)? && decide_with_face(sy, face_tx, &t.apply(y)?).is_orthogonal())
}

/// Closure of `D = {y ∈ V : Tx ⊥ Ty}` under sums, non-negative scaling and
/// midpoints, tested on the given pairs. Pairs not inside `D` are skipped.
pub fn closure_check(sx: &PolyhedralSpace, sy: &PolyhedralSpace, t: &Matrix, x: &Vector, cone: &AssociatedCone, pairs: &[(Vector, Vector)], scale: &Rational) -> Result<ClosureReport> {
    check_operator(sx.dim(), sy.dim(), t)?;
    support_face(sx, x)?;
    let tx = t.apply(x)?;
    if tx.is_zero() {
        return Err(Error::ZeroImage);
    }
    let face_tx = support_face(sy, &tx)?;
    let half = Rational::from_i64(1) / Rational::from_i64(2);
    let mut report = ClosureReport { members: 0, pairs_checked: 0, failures: Vec::new(), pointed_part_ok: true };
    let rev = cone.reversed();
    for (y1, y2) in pairs {
        if !in_d(sy, &face_tx, t, cone, y1)? || !in_d(sy, &face_tx, t, cone, y2)? {
            continue;
        }
        report.members += 2;
        report.pairs_checked += 1;
        let sum = y1.add(y2);
        let ok = in_d(sy, &face_tx, t, cone, &sum)?
            && in_d(sy, &face_tx, t, cone, &y1.scale(scale))?
            && in_d(sy, &face_tx, t, cone, &sum.scale(&half))?;
        if !ok {
            report.failures.push((y1.clone(), y2.clone()));
        }
        for y in [y1, y2] {
            if rev.contains(y)? && !(cone.i_functional.apply(y).is_zero() && cone.j_functional.apply(y).is_zero()) {
                report.pointed_part_ok = false;
            }
        }
    }
    Ok(report)
}

/// Sampled closure test of `D` in the plane, for a non-smooth `x`.
pub fn normal_cone_check_2d(sx: &PolyhedralSpace, sy: &PolyhedralSpace, t: &Matrix, x: &Vector, cone: &AssociatedCone, pairs: usize, seed: u64) -> Result<ClosureReport> {
    if sx.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: sx.dim() });
    }
    if support_face(sx, x)?.is_smooth() {
        return Err(Error::SmoothPoint);
    }
    let tx = t.apply(x)?;
    if tx.is_zero() {
        return Err(Error::ZeroImage);
    }
    let face_tx = support_face(sy, &tx)?;
    let mut rng = sampling::rng(seed);
    let gens = cone.generators();
    let mut members: Vec<Vector> = Vec::new();
    for _ in 0..20 * pairs.max(1) {
        let y = random_cone_member(&mut rng, &gens);
        if !y.is_zero() && in_d(sy, &face_tx, t, cone, &y)? {
            members.push(y);
        }
        if members.len() >= pairs.max(2) {
            break;
        }
    }
    use rand::Rng;
    let mut sample_pairs = Vec::new();
    if !members.is_empty() {
        for _ in 0..pairs {
            let a = members[rng.gen_range(0..members.len())].clone();
            let b = members[rng.gen_range(0..members.len())].clone();
            sample_pairs.push((a, b));
        }
    }
    let scale = Rational::from_i64(rng.gen_range(0..=10)) / Rational::from_i64(rng.gen_range(1..=5));
    closure_check(sx, sy, t, x, cone, &sample_pairs, &scale)
}

#[derive(Clone, Debug, PartialEq)]
pub enum SegmentLocate {
    /// `g = (1 - t) g1 + t g2` vanishes on the subspace.
    Found { g: Functional, t: Rational },
    /// `v` is in the subspace and `g1(v)`, `g2(v)` share a strict sign.
    NotContained { v: Vector },
}

/// Finds the member of `co{g1, g2}` whose kernel contains `span(basis)`.
pub fn segment_kernel_locate(basis: &[Vector], g1: &Functional, g2: &Functional) -> Result<SegmentLocate> {
    check_dim(g1.dim(), g2.dim())?;
    if functional_rank(&[g1.clone(), g2.clone()]) < 2 {
        return Err(Error::DependentFunctionals);
    }
    let zero = Rational::zero();
    let one = Rational::from_i64(1);
    let (mut lo, mut hi) = (zero.clone(), one.clone());
    for v in basis {
        check_dim(g1.dim(), v.dim())?;
        let (a, b) = (g1.apply(v), g2.apply(v));
        if a.is_zero() && b.is_zero() {
            continue;
        }
        if a == b {
            lo = one.clone();
            hi = zero.clone();
            break;
        }
        let t = &a / (&a - &b);
        if t > lo {
            lo = t.clone();
        }
        if t < hi {
            hi = t;
        }
        if lo > hi {
            break;
        }
    }
    if lo == hi || (lo == zero && hi == one) {
        let t = lo;
        let g = Functional::combination(&[g1.clone(), g2.clone()], &[&one - &t, t.clone()]);
        if basis.iter().all(|v| g.apply(v).is_zero()) {
            return Ok(SegmentLocate::Found { g, t });
        }
    }
    let v = Rational::gordan_direction(&[g1.clone(), g2.clone()], basis).ok_or_else(|| {
        Error::HypothesisViolated("neither a kernel nor a separating vector was found".into())
    })?;
    Ok(SegmentLocate::NotContained { v })
}

#[derive(Clone, Debug, PartialEq)]
pub enum HullLocate {
    Found { g: Functional, weights: Vec<Rational> },
    /// No non-zero member of the hull vanishes on the subspace. `violating`
    /// is a subspace vector on which every generator is positive, when one exists.
    NotContained { violating: Option<Vector> },
}

/// Finds a non-zero `g ∈ co(gs)` with `span(basis) ⊂ ker g`.
pub fn hull_kernel_locate(basis: &[Vector], gs: &[Functional]) -> Result<HullLocate> {
    use crate::lp::{LpProblem, Optimum, Relation};
    let k = gs.len();
    let dim = gs.first().map_or(0, Functional::dim);
    let mut lp = LpProblem::new(k);
    lp.add(vec![Rational::from_i64(1); k], Relation::Eq, Rational::from_i64(1));
    for v in basis {
        lp.add(gs.iter().map(|g| g.apply(v)).collect(), Relation::Eq, Rational::zero());
    }
    for c in 0..dim {
        let column: Vec<Rational> = gs.iter().map(|g| g.coeffs()[c].clone()).collect();
        for sign in [1i64, -1] {
            let obj: Vec<Rational> = column.iter().map(|a| a * Rational::from_i64(sign)).collect();
            match lp.maximize(&obj) {
                Optimum::Optimal { point, value } if value > Rational::zero() => {
                    let g = Functional::combination(gs, &point);
                    return Ok(HullLocate::Found { g, weights: point });
                }
                Optimum::Unbounded => unreachable!("bounded simplex"),
                Optimum::Infeasible => {
                    return Ok(HullLocate::NotContained { violating: Rational::gordan_direction(gs, basis) })
                }
                _ => {}
            }
        }
    }
    Ok(HullLocate::NotContained { violating: None })
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

    fn m(rows: &[&[i64]]) -> Matrix {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&a| int(a)).collect()).collect()).unwrap()
    }

    fn plane_operator() -> Matrix {
        Matrix::from_rows(vec![vec![rat(1, 2), rat(-1, 2)], vec![rat(1, 2), rat(1, 2)]]).unwrap()
    }

    #[test]
    fn plane_operator_directions() {
        let s = PolyhedralSpace::linf(2).unwrap();
        let t = plane_operator();
        assert_eq!(t.apply(&v(&[1, 1])).unwrap(), v(&[0, 1]));
        assert!(preserves_in_direction(&s, &s, &t, &v(&[1, 1]), &v(&[-1, 1])).unwrap().verdict);
        let bad = preserves_in_direction(&s, &s, &t, &v(&[1, 1]), &v(&[0, 1])).unwrap();
        assert!(!bad.verdict);
        assert_eq!(bad.violation.unwrap().refutation.lambda_star, int(-1));
        let none = exists_preserved_direction(&s, &s, &t, &v(&[2, 1])).unwrap();
        assert!(!none.verdict);
        let some = exists_preserved_direction(&s, &s, &t, &v(&[1, 1])).unwrap();
        assert!(some.verdict);
        match some.witness.unwrap() {
            Witness::Direction { y, .. } => assert_eq!(y, v(&[-1, 1])),
            other => panic!("{other:?}"),
        }
        let at = preserves_at_point(&s, &s, &t, &v(&[1, 1])).unwrap();
        assert!(!at.verdict);
        assert_eq!(at.kernels[0].f, f(&[0, 1]));
        assert!(!at.kernels[0].verdict);
    }

    #[test]
    fn not_orthogonal_input_rejected() {
        let s = PolyhedralSpace::linf(2).unwrap();
        let r = preserves_in_direction(&s, &s, &Matrix::identity(2), &v(&[1, 0]), &v(&[1, 0]));
        assert_eq!(r.unwrap_err(), Error::NotOrthogonalInput);
    }

    #[test]
    fn two_dimensional_criterion_can_disagree_without_segment() {
        // T(x, y) = (3x - y, 4x - 2y) has no preserved direction at (1, 1).
        let s = PolyhedralSpace::linf(2).unwrap();
        let t = m(&[&[3, -1], &[4, -2]]);
        let r = exists_preserved_direction(&s, &s, &t, &v(&[1, 1])).unwrap();
        assert!(!r.verdict);
        assert_eq!(r.criterion_agrees(), Some(true));
        let tx = t.apply(&v(&[1, 1])).unwrap();
        let plus = crate::ortho::in_x_plus(&s, &tx, &t.apply(&v(&[1, 0])).unwrap()).unwrap();
        let minus = crate::ortho::in_x_minus(&s, &tx, &t.apply(&v(&[0, 1])).unwrap()).unwrap();
        assert!(plus.member && minus.member);
    }

    #[test]
    fn l1_3_kernels() {
        let s = PolyhedralSpace::l1(3).unwrap();
        let t = m(&[&[1, 1, 0], &[0, -1, 0], &[0, -1, -1]]);
        let x = v(&[1, 0, 0]);
        assert_eq!(t.apply(&v(&[2, 1, -1])).unwrap(), v(&[3, -1, 0]));
        for k in [f(&[1, 1, 1]), f(&[1, 1, -1]), f(&[1, -1, -1])] {
            assert!(preserves_wrt_kernel(&s, &s, &t, &x, &k).unwrap().verdict);
        }
        let at = preserves_at_point(&s, &s, &t, &x).unwrap();
        assert!(!at.verdict);
        assert_eq!(at.violation.unwrap().y, v(&[2, 1, -1]));
        assert_eq!(
            preserves_wrt_kernel(&s, &s, &t, &x, &f(&[0, 1, 0])).unwrap_err(),
            Error::NotSupportFunctional
        );
        let sub = find_codim2_subspace(&s, &s, &t, &x).unwrap();
        assert_eq!(sub.basis.len(), 1);
        assert!(preserves_wrt_subspace(&s, &s, &t, &x, &sub.basis).unwrap().verdict);
    }

    #[test]
    fn midpoint_subspaces() {
        let s = PolyhedralSpace::linf(3).unwrap();
        let t = m(&[&[1, -1, 1], &[1, 0, 0], &[0, -1, 2]]);
        let x = v(&[1, 1, 1]);
        let y1 = v(&[1, 0, 0]);
        let y2 = v(&[0, -1, 0]);
        assert!(preserves_wrt_subspace(&s, &s, &t, &x, &[y1.clone()]).unwrap().verdict);
        assert!(preserves_wrt_subspace(&s, &s, &t, &x, &[y2.clone()]).unwrap().verdict);
        let mid = y1.add(&y2).scale(&rat(1, 2));
        assert!(!preserves_wrt_subspace(&s, &s, &t, &x, &[mid]).unwrap().verdict);
        assert!(preserves_wrt_subspace(&s, &s, &t, &x, &[]).unwrap().verdict);
        let cone = AssociatedCone::new(f(&[1, 0, 0]), f(&[0, 1, 0]));
        let closure = closure_check(&s, &s, &t, &x, &cone, &[(y1, y2)], &int(1)).unwrap();
        assert!(!closure.closed());
    }

    #[test]
    fn non_bijective_kernels() {
        let s = PolyhedralSpace::linf(3).unwrap();
        let t = m(&[&[1, 0, 0], &[0, 1, 0], &[0, 1, 0]]);
        let x = v(&[1, 1, 1]);
        for k in [f(&[1, 0, 0]), f(&[0, 1, 0])] {
            assert!(preserves_wrt_kernel(&s, &s, &t, &x, &k).unwrap().verdict);
        }
        assert_eq!(t.determinant().unwrap(), int(0));
        let r = smoothness_monotonicity_check(&s, &s, &t, &x, &[f(&[1, 0, 0]), f(&[0, 1, 0])]).unwrap();
        assert_eq!((r.k, r.p), (2, 3));
    }

    #[test]
    fn converse_example_kernel_images() {
        let s = PolyhedralSpace::linf(3).unwrap();
        let t = m(&[&[1, 0, 0], &[0, 1, 0], &[0, 1, 1]]);
        let x = v(&[1, 1, 0]);
        assert!(kernel_image_equals(&t, &f(&[1, 0, 0]), &f(&[1, 0, 0])).unwrap());
        assert!(kernel_image_equals(&t, &f(&[0, 1, 0]), &f(&[0, 1, 0])).unwrap());
        let y = v(&[1, 1, -1]);
        assert!(!is_orthogonal(&s, &x, &y).unwrap().is_orthogonal());
        assert!(is_orthogonal(&s, &t.apply(&x).unwrap(), &t.apply(&y).unwrap()).unwrap().is_orthogonal());
        let report = cone_image_analysis(&s, &s, &t, &x, 20, 1).unwrap();
        assert!(!report.perp_onto);
    }

    #[test]
    fn segment_and_hull_locate() {
        let g1 = f(&[1, 0, 0]);
        let g2 = f(&[0, 1, 0]);
        match segment_kernel_locate(&[v(&[1, -1, 0])], &g1, &g2).unwrap() {
            SegmentLocate::Found { g, t } => {
                assert_eq!(t, rat(1, 2));
                assert_eq!(g, Functional::new(vec![rat(1, 2), rat(1, 2), int(0)]));
            }
            other => panic!("{other:?}"),
        }
        match segment_kernel_locate(&[v(&[0, 0, 1])], &g1, &g2).unwrap() {
            SegmentLocate::Found { t, .. } => assert_eq!(t, int(0)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            segment_kernel_locate(&[v(&[1, 1, 0])], &g1, &g2).unwrap(),
            SegmentLocate::NotContained { .. }
        ));
        assert_eq!(segment_kernel_locate(&[], &g1, &g1.neg()), Err(Error::DependentFunctionals));
        let kernel_f3 = [v(&[1, 0, 0]), v(&[0, 1, 0])];
        assert!(matches!(
            hull_kernel_locate(&kernel_f3, &[g1.clone(), g1.neg(), g2.clone()]).unwrap(),
            HullLocate::NotContained { .. }
        ));
    }
}
