//! Vectors, functionals and matrices over a [`Field`], with Gaussian
//! elimination (exact for rationals, partially pivoted for floats).

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{check_dim, Error, Result};
use crate::scalar::{format_rational, Field, Rational};

/// A point of the space.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Vector<S = Rational> {
    coords: Vec<S>,
}

/// A linear functional acting by `f(y) = sum coeffs_i * y_i`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Functional<S = Rational> {
    coeffs: Vec<S>,
}

fn dot<S: Field>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

impl<S: Field> Vector<S> {
    pub fn new(coords: Vec<S>) -> Self {
        Vector { coords }
    }

    pub fn zeros(dim: usize) -> Self {
        Vector { coords: vec![S::zero(); dim] }
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.coords[i] = S::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[S] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<S> {
        self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_negligible())
    }

    pub fn add(&self, other: &Self) -> Self {
        Vector::new(self.coords.iter().zip(&other.coords).map(|(a, b)| a.clone() + b.clone()).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        Vector::new(self.coords.iter().zip(&other.coords).map(|(a, b)| a.clone() - b.clone()).collect())
    }

    pub fn scale(&self, t: &S) -> Self {
        Vector::new(self.coords.iter().map(|a| a.clone() * t.clone()).collect())
    }

    pub fn neg(&self) -> Self {
        Vector::new(self.coords.iter().map(|a| -a.clone()).collect())
    }

    /// `self + t * dir`
    pub fn axpy(&self, t: &S, dir: &Self) -> Self {
        Vector::new(
            self.coords
                .iter()
                .zip(&dir.coords)
                .map(|(a, b)| a.clone() + t.clone() * b.clone())
                .collect(),
        )
    }

    pub fn to_f64(&self) -> Vector<f64> {
        Vector::new(self.coords.iter().map(|c| c.to_f64()).collect())
    }

    /// Reads the same coordinates as a functional.
    pub fn as_functional(&self) -> Functional<S> {
        Functional::new(self.coords.clone())
    }

    /// Linear combination `sum weights_i * vectors_i`.
    pub fn combination(vectors: &[Vector<S>], weights: &[S]) -> Vector<S> {
        let dim = vectors.first().map_or(0, Vector::dim);
        let mut out = Vector::zeros(dim);
        for (v, w) in vectors.iter().zip(weights) {
            out = out.axpy(w, v);
        }
        out
    }
}

impl Vector<Rational> {
    pub fn from_ints(values: &[i64]) -> Self {
        Vector::new(values.iter().map(|&v| Rational::from_integer(BigInt::from(v))).collect())
    }

    /// The positive multiple of `self` with coprime integer coordinates.
    pub fn primitive(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let lcm = self
            .coords
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = self
            .coords
            .iter()
            .map(|c| (c * Rational::from_integer(lcm.clone())).to_integer())
            .collect();
        let gcd = ints
            .iter()
            .fold(BigInt::zero(), |acc, c| acc.gcd(c));
        Vector::new(
            ints.into_iter()
                .map(|c| Rational::from_integer(c / &gcd))
                .collect(),
        )
    }
}

impl<S: Field> Functional<S> {
    pub fn new(coeffs: Vec<S>) -> Self {
        Functional { coeffs }
    }

    pub fn zeros(dim: usize) -> Self {
        Functional { coeffs: vec![S::zero(); dim] }
    }

    pub fn coordinate(dim: usize, i: usize) -> Self {
        let mut f = Self::zeros(dim);
        f.coeffs[i] = S::one();
        f
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn apply(&self, v: &Vector<S>) -> S {
        dot(&self.coeffs, &v.coords)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_negligible())
    }

    pub fn scale(&self, t: &S) -> Self {
        Functional::new(self.coeffs.iter().map(|a| a.clone() * t.clone()).collect())
    }

    pub fn neg(&self) -> Self {
        Functional::new(self.coeffs.iter().map(|a| -a.clone()).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Functional::new(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.clone() + b.clone()).collect())
    }

    pub fn as_vector(&self) -> Vector<S> {
        Vector::new(self.coeffs.clone())
    }

    pub fn to_f64(&self) -> Functional<f64> {
        Functional::new(self.coeffs.iter().map(|c| c.to_f64()).collect())
    }

    /// `sum weights_i * functionals_i`
    pub fn combination(functionals: &[Functional<S>], weights: &[S]) -> Functional<S> {
        let dim = functionals.first().map_or(0, Functional::dim);
        let mut out = Functional::zeros(dim);
        for (f, w) in functionals.iter().zip(weights) {
            out = out.add(&f.scale(w));
        }
        out
    }

    /// Whether `self = c * other` for some `c > 0`.
    pub fn positively_proportional(&self, other: &Self) -> bool {
        let Some(i) = other.coeffs.iter().position(|c| !c.is_negligible()) else {
            return self.is_zero();
        };
        let c = self.coeffs[i].clone() / other.coeffs[i].clone();
        c.sign_class() == std::cmp::Ordering::Greater
            && self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .all(|(a, b)| (a.clone() - c.clone() * b.clone()).is_negligible())
    }
}

fn write_floats(f: &mut fmt::Formatter<'_>, items: &[f64]) -> fmt::Result {
    let parts: Vec<String> = items.iter().map(|c| c.to_string()).collect();
    write!(f, "({})", parts.join(", "))
}

impl fmt::Display for Vector<Rational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(format_rational).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl fmt::Display for Functional<Rational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(format_rational).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl fmt::Display for Vector<f64> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_floats(f, &self.coords)
    }
}

/// Dense row-major matrix. A linear operator `X -> Y` is a `dim Y x dim X`
/// matrix; the spaces are passed alongside it to each decision procedure.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix<S = Rational> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

pub type LinearOperator<S = Rational> = Matrix<S>;

impl<S: Field> Matrix<S> {
    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if nrows == 0 || ncols == 0 {
            return Err(Error::Parse("empty matrix".into()));
        }
        let mut data = Vec::with_capacity(nrows * ncols);
        for r in rows {
            check_dim(ncols, r.len())?;
            data.extend(r);
        }
        Ok(Matrix { rows: nrows, cols: ncols, data })
    }

    /// Builds the matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vector<S>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vector::dim);
        let data = (0..rows)
            .map(|i| columns.iter().map(|c| c.coords()[i].clone()).collect())
            .collect();
        Self::from_rows(data)
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = S::one();
        }
        m
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<S>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn apply(&self, x: &Vector<S>) -> Result<Vector<S>> {
        check_dim(self.cols, x.dim())?;
        Ok(Vector::new((0..self.rows).map(|i| dot(self.row(i), x.coords())).collect()))
    }

    /// `self * other`, i.e. apply `other` first.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        check_dim(self.cols, other.rows)?;
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = S::zero();
                for k in 0..self.cols {
                    acc = acc + self.get(i, k).clone() * other.get(k, j).clone();
                }
                out.data[i * other.cols + j] = acc;
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        out
    }

    /// The functional `g o T` on the domain.
    pub fn pullback(&self, g: &Functional<S>) -> Result<Functional<S>> {
        check_dim(self.rows, g.dim())?;
        Ok(Functional::new(
            (0..self.cols)
                .map(|j| {
                    (0..self.rows).fold(S::zero(), |acc, i| acc + g.coeffs()[i].clone() * self.get(i, j).clone())
                })
                .collect(),
        ))
    }

    pub fn scale(&self, t: &S) -> Self {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a.clone() * t.clone()).collect() }
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a.to_f64()).collect() }
    }

    pub fn rank(&self) -> usize {
        RowEchelon::reduce(self.to_rows(), self.cols).pivots.len()
    }

    pub fn determinant(&self) -> Result<S> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch { expected: self.rows, found: self.cols });
        }
        let n = self.rows;
        let mut a = self.to_rows();
        let mut det = S::one();
        for col in 0..n {
            let Some(p) = choose_pivot(&a, col, col) else {
                return Ok(S::zero());
            };
            if p != col {
                a.swap(p, col);
                det = -det;
            }
            let pivot = a[col][col].clone();
            det = det * pivot.clone();
            for r in col + 1..n {
                if a[r][col].is_zero() {
                    continue;
                }
                let factor = a[r][col].clone() / pivot.clone();
                for c in col..n {
                    let v = a[col][c].clone() * factor.clone();
                    a[r][c] = a[r][c].clone() - v;
                }
            }
        }
        Ok(det)
    }

    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch { expected: self.rows, found: self.cols });
        }
        let n = self.rows;
        let augmented = (0..n)
            .map(|i| {
                let mut r = self.row(i).to_vec();
                r.extend((0..n).map(|j| if i == j { S::one() } else { S::zero() }));
                r
            })
            .collect();
        let ech = RowEchelon::reduce_limited(augmented, 2 * n, n);
        if ech.pivots.len() < n {
            return Err(Error::SingularOperator);
        }
        let rows = ech.rows.into_iter().take(n).map(|r| r[n..].to_vec()).collect();
        Self::from_rows(rows)
    }

    /// Basis of `{x : self * x = 0}`.
    pub fn nullspace(&self) -> Vec<Vector<S>> {
        nullspace(&self.to_rows(), self.cols)
    }

    /// Some solution of `self * x = b`, with free variables set to zero.
    pub fn solve_any(&self, b: &Vector<S>) -> Result<Option<Vector<S>>> {
        check_dim(self.rows, b.dim())?;
        let augmented = (0..self.rows)
            .map(|i| {
                let mut r = self.row(i).to_vec();
                r.push(b.coords()[i].clone());
                r
            })
            .collect();
        let ech = RowEchelon::reduce_limited(augmented, self.cols + 1, self.cols);
        for (r, row) in ech.rows.iter().enumerate() {
            if r >= ech.pivots.len() && !row[self.cols].is_negligible() {
                return Ok(None);
            }
        }
        let mut x = vec![S::zero(); self.cols];
        for (r, &c) in ech.pivots.iter().enumerate() {
            x[c] = ech.rows[r][self.cols].clone();
        }
        Ok(Some(Vector::new(x)))
    }
}

impl fmt::Display for Matrix<Rational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.rows)
            .map(|i| self.row(i).iter().map(format_rational).collect::<Vec<_>>().join(","))
            .collect();
        write!(f, "{}", rows.join(";"))
    }
}

fn choose_pivot<S: Field>(a: &[Vec<S>], col: usize, from: usize) -> Option<usize> {
    if S::EXACT {
        (from..a.len()).find(|&r| !a[r][col].is_zero())
    } else {
        let best = (from..a.len()).max_by(|&x, &y| {
            a[x][col]
                .abs()
                .partial_cmp(&a[y][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        (!a[best][col].is_negligible()).then_some(best)
    }
}

/// Reduced row echelon form.
pub(crate) struct RowEchelon<S> {
    pub rows: Vec<Vec<S>>,
    pub pivots: Vec<usize>,
}

impl<S: Field> RowEchelon<S> {
    pub fn reduce(rows: Vec<Vec<S>>, ncols: usize) -> Self {
        Self::reduce_limited(rows, ncols, ncols)
    }

    /// Pivots only among the first `pivot_cols` columns.
    pub fn reduce_limited(mut rows: Vec<Vec<S>>, ncols: usize, pivot_cols: usize) -> Self {
        let mut pivots = Vec::new();
        let mut r = 0;
        for col in 0..pivot_cols {
            if r == rows.len() {
                break;
            }
            let Some(p) = choose_pivot(&rows, col, r) else {
                if !S::EXACT {
                    for row in rows.iter_mut().skip(r) {
                        row[col] = S::zero();
                    }
                }
                continue;
            };
            rows.swap(p, r);
            let pivot = rows[r][col].clone();
            for c in 0..ncols {
                rows[r][c] = rows[r][c].clone() / pivot.clone();
            }
            for i in 0..rows.len() {
                if i == r || rows[i][col].is_zero() {
                    continue;
                }
                let factor = rows[i][col].clone();
                for c in 0..ncols {
                    let v = rows[r][c].clone() * factor.clone();
                    rows[i][c] = rows[i][c].clone() - v;
                }
            }
            pivots.push(col);
            r += 1;
        }
        RowEchelon { rows, pivots }
    }
}

pub(crate) fn nullspace<S: Field>(rows: &[Vec<S>], ncols: usize) -> Vec<Vector<S>> {
    let ech = RowEchelon::reduce(rows.to_vec(), ncols);
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|c| !ech.pivots.contains(c)) {
        let mut v = vec![S::zero(); ncols];
        v[free] = S::one();
        for (r, &pc) in ech.pivots.iter().enumerate() {
            v[pc] = -ech.rows[r][free].clone();
        }
        basis.push(Vector::new(v));
    }
    basis
}

/// Rank of a family of functionals.
pub fn functional_rank<S: Field>(fs: &[Functional<S>]) -> usize {
    let Some(first) = fs.first() else { return 0 };
    RowEchelon::reduce(fs.iter().map(|f| f.coeffs().to_vec()).collect(), first.dim())
        .pivots
        .len()
}

/// Rank of a family of vectors.
pub fn vector_rank<S: Field>(vs: &[Vector<S>]) -> usize {
    let Some(first) = vs.first() else { return 0 };
    RowEchelon::reduce(vs.iter().map(|v| v.coords().to_vec()).collect(), first.dim())
        .pivots
        .len()
}

/// Basis of the common kernel of the functionals, in a space of dimension `dim`.
pub fn common_kernel<S: Field>(fs: &[Functional<S>], dim: usize) -> Vec<Vector<S>> {
    if fs.is_empty() {
        return (0..dim).map(|i| Vector::basis(dim, i)).collect();
    }
    nullspace(&fs.iter().map(|f| f.coeffs().to_vec()).collect::<Vec<_>>(), dim)
}

/// Greedy scan keeping each functional that raises the rank.
pub fn greedy_independent<S: Field>(fs: &[Functional<S>]) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    let mut picked: Vec<Functional<S>> = Vec::new();
    for (i, f) in fs.iter().enumerate() {
        picked.push(f.clone());
        if functional_rank(&picked) == picked.len() {
            chosen.push(i);
        } else {
            picked.pop();
        }
    }
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn m(rows: &[&[i64]]) -> Matrix {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect()).unwrap()
    }

    #[test]
    fn identity_applies_trivially() {
        let x = Vector::from_ints(&[3, -4]);
        assert_eq!(Matrix::identity(2).apply(&x).unwrap(), x);
    }

    #[test]
    fn inverse_is_exact() {
        let t = Matrix::from_rows(vec![vec![rat(1, 2), rat(-1, 2)], vec![rat(1, 2), rat(1, 2)]]).unwrap();
        let inv = t.inverse().unwrap();
        assert_eq!(t.compose(&inv).unwrap(), Matrix::identity(2));
        assert_eq!(t.determinant().unwrap(), rat(1, 2));
    }

    #[test]
    fn singular_operator_is_rejected() {
        let t = m(&[&[1, 0, 0], &[0, 1, 0], &[0, 1, 0]]);
        assert_eq!(t.determinant().unwrap(), int(0));
        assert_eq!(t.inverse(), Err(Error::SingularOperator));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let t = m(&[&[1, 0], &[0, 1]]);
        assert!(matches!(t.apply(&Vector::from_ints(&[1, 2, 3])), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn nullspace_spans_kernel() {
        let t = m(&[&[1, -1, 1]]);
        let basis = t.nullspace();
        assert_eq!(basis.len(), 2);
        for b in &basis {
            assert!(t.apply(b).unwrap().is_zero());
        }
        assert_eq!(vector_rank(&basis), 2);
    }

    #[test]
    fn pullback_matches_composition() {
        let t = m(&[&[1, 1, 0], &[0, -1, 0], &[0, -1, -1]]);
        let g = Functional::new(vec![int(1), int(-1), int(1)]);
        let y = Vector::from_ints(&[2, 1, -1]);
        assert_eq!(t.pullback(&g).unwrap().apply(&y), g.apply(&t.apply(&y).unwrap()));
    }

    #[test]
    fn primitive_normalises_direction() {
        let v = Vector::new(vec![int(1), rat(1, 2), rat(-1, 2)]);
        assert_eq!(v.primitive(), Vector::from_ints(&[2, 1, -1]));
    }

    #[test]
    fn solve_any_detects_inconsistency() {
        let t = m(&[&[1, 1], &[2, 2]]);
        assert_eq!(t.solve_any(&Vector::from_ints(&[1, 3])).unwrap(), None);
        let sol = t.solve_any(&Vector::from_ints(&[1, 2])).unwrap().unwrap();
        assert_eq!(t.apply(&sol).unwrap(), Vector::from_ints(&[1, 2]));
    }

    #[test]
    fn float_rank_uses_tolerance() {
        let fs = vec![
            Functional::new(vec![1.0, 1.0]),
            Functional::new(vec![1.0, 1.0 + 1e-13]),
        ];
        assert_eq!(functional_rank(&fs), 1);
    }
}
