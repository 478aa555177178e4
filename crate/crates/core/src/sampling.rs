//! Deterministic seeded generators of rational test data.

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{vector_rank, Matrix, Vector};
use crate::scalar::{int, rat, Rational};
use crate::space::PolyhedralSpace;

pub type SampleRng = ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 20_240_917;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `p / q` with `|p| <= max_num`, `1 <= q <= max_den`.
pub fn random_rational(rng: &mut SampleRng, max_num: i64, max_den: i64) -> Rational {
    rat(rng.gen_range(-max_num..=max_num), rng.gen_range(1..=max_den))
}

pub fn random_vector(rng: &mut SampleRng, dim: usize, max_num: i64, max_den: i64) -> Vector {
    Vector::new((0..dim).map(|_| random_rational(rng, max_num, max_den)).collect())
}

pub fn random_nonzero_vector(rng: &mut SampleRng, dim: usize, max_num: i64, max_den: i64) -> Vector {
    loop {
        let v = random_vector(rng, dim, max_num, max_den);
        if !v.is_zero() {
            return v;
        }
    }
}

pub fn random_vector_f64(rng: &mut SampleRng, dim: usize) -> Vector<f64> {
    Vector::new((0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
}

/// Integer combination of `generators` with coefficients in `[0, 10]`.
pub fn random_cone_member(rng: &mut SampleRng, generators: &[Vector]) -> Vector {
    let dim = generators.first().map_or(0, Vector::dim);
    let mut out = Vector::zeros(dim);
    for g in generators {
        out = out.axpy(&int(rng.gen_range(0..=10)), g);
    }
    out
}

/// Positive weights summing to one.
pub fn random_convex_weights(rng: &mut SampleRng, k: usize) -> Vec<Rational> {
    let raw: Vec<i64> = (0..k).map(|_| rng.gen_range(1..=10)).collect();
    let total: i64 = raw.iter().sum();
    raw.into_iter().map(|w| rat(w, total)).collect()
}

pub fn random_matrix(rng: &mut SampleRng, rows: usize, cols: usize, range: i64) -> Matrix {
    Matrix::from_rows(
        (0..rows)
            .map(|_| (0..cols).map(|_| int(rng.gen_range(-range..=range))).collect())
            .collect(),
    )
    .expect("non-empty")
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

fn signed_permutation(perm: &[usize], signs: u32) -> Matrix {
    let n = perm.len();
    let mut rows = vec![vec![Rational::zero(); n]; n];
    for (i, &j) in perm.iter().enumerate() {
        rows[i][j] = if signs >> i & 1 == 1 { -Rational::one() } else { Rational::one() };
    }
    Matrix::from_rows(rows).expect("square")
}

/// All `2^n n!` signed permutation matrices.
pub fn signed_permutations(n: usize) -> Vec<Matrix> {
    let mut out = Vec::new();
    for perm in permutations(n) {
        for signs in 0..1u32 << n {
            out.push(signed_permutation(&perm, signs));
        }
    }
    out
}

pub fn random_signed_permutation(rng: &mut SampleRng, n: usize) -> Matrix {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    signed_permutation(&perm, rng.gen_range(0..1u32 << n))
}

fn random_sign(rng: &mut SampleRng) -> Rational {
    if rng.gen_bool(0.5) {
        Rational::one()
    } else {
        -Rational::one()
    }
}

/// A point of `l_inf^n` with exactly `k` coordinates of maximal modulus.
pub fn k_smooth_linf(rng: &mut SampleRng, n: usize, k: usize) -> Vector {
    let top = int(rng.gen_range(1..=5));
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let mut coords = vec![Rational::zero(); n];
    for (pos, &i) in idx.iter().enumerate() {
        coords[i] = if pos < k {
            top.clone() * random_sign(rng)
        } else {
            // Strictly inside (-top, top).
            let d: i64 = rng.gen_range(2..=6);
            let num = rng.gen_range(-(d - 1)..=(d - 1));
            top.clone() * rat(num, d)
        };
    }
    Vector::new(coords)
}

/// A point of `l_1^n` supported on exactly `n - k + 1` coordinates.
pub fn k_smooth_l1(rng: &mut SampleRng, n: usize, k: usize) -> Vector {
    let support = n + 1 - k;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let mut coords = vec![Rational::zero(); n];
    for &i in idx.iter().take(support) {
        coords[i] = rat(rng.gen_range(1..=9), rng.gen_range(1..=4)) * random_sign(rng);
    }
    Vector::new(coords)
}

/// A random centrally symmetric polytope spanned by `pairs` point pairs.
pub fn random_polyhedral(rng: &mut SampleRng, dim: usize, pairs: usize) -> PolyhedralSpace {
    loop {
        let mut pts: Vec<Vector> = Vec::new();
        for _ in 0..pairs.max(dim) {
            let v = Vector::new((0..dim).map(|_| int(rng.gen_range(-3..=3))).collect());
            if v.is_zero() || pts.contains(&v) || pts.contains(&v.neg()) {
                continue;
            }
            pts.push(v.neg());
            pts.push(v);
        }
        if vector_rank(&pts) < dim {
            continue;
        }
        if let Ok(space) = PolyhedralSpace::from_vertices(pts) {
            return space;
        }
    }
}

pub fn pick<'a, T>(rng: &mut SampleRng, items: &'a [T]) -> &'a T {
    items.choose(rng).expect("non-empty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Space;
    use crate::support::smoothness_order;

    #[test]
    fn signed_permutation_count() {
        assert_eq!(signed_permutations(3).len(), 48);
    }

    #[test]
    fn smooth_generators_have_declared_order() {
        let mut r = rng(7);
        for n in 2..=5 {
            for k in 1..=n.min(3) {
                let linf = PolyhedralSpace::linf(n).unwrap();
                assert_eq!(smoothness_order(&linf, &k_smooth_linf(&mut r, n, k)).unwrap(), k);
                let l1 = PolyhedralSpace::l1(n).unwrap();
                assert_eq!(smoothness_order(&l1, &k_smooth_l1(&mut r, n, k)).unwrap(), k);
            }
        }
    }

    #[test]
    fn seeded_runs_repeat() {
        let a = random_vector(&mut rng(3), 4, 9, 9);
        let b = random_vector(&mut rng(3), 4, 9, 9);
        assert_eq!(a, b);
        let poly = random_polyhedral(&mut rng(11), 3, 5);
        assert_eq!(poly.dim(), 3);
    }
}
