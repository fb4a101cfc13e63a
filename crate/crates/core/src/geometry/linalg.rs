//! Dense linear algebra over a [`Scalar`].

use std::fmt;
use std::ops::{Index, IndexMut};

use super::scalar::Scalar;
use crate::error::{GptError, Result};

/// A column vector.
pub type Vector<S> = Vec<S>;

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.clone() * y.clone()).sum()
}

pub fn add<S: Scalar>(a: &[S], b: &[S]) -> Vector<S> {
    a.iter().zip(b).map(|(x, y)| x.clone() + y.clone()).collect()
}

pub fn sub<S: Scalar>(a: &[S], b: &[S]) -> Vector<S> {
    a.iter().zip(b).map(|(x, y)| x.clone() - y.clone()).collect()
}

pub fn scale<S: Scalar>(c: &S, a: &[S]) -> Vector<S> {
    a.iter().map(|x| c.clone() * x.clone()).collect()
}

pub fn axpy<S: Scalar>(acc: &mut [S], c: &S, a: &[S]) {
    for (y, x) in acc.iter_mut().zip(a) {
        *y += c.clone() * x.clone();
    }
}

pub fn is_zero_vec<S: Scalar>(a: &[S]) -> bool {
    a.iter().all(Scalar::is_zero)
}

pub fn vec_eq<S: Scalar>(a: &[S], b: &[S]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x.clone() - y.clone()).is_zero())
}

/// Kronecker product of two vectors, first index major.
pub fn kron<S: Scalar>(a: &[S], b: &[S]) -> Vector<S> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x.clone() * y.clone());
        }
    }
    out
}

pub fn zeros<S: Scalar>(n: usize) -> Vector<S> {
    vec![S::zero(); n]
}

pub fn unit_vector<S: Scalar>(n: usize, i: usize) -> Vector<S> {
    let mut v = zeros(n);
    v[i] = S::one();
    v
}

/// If `a = c * b` for some `c >= 0`, returns `c`. Both vectors may be zero.
pub fn nonneg_multiple<S: Scalar>(a: &[S], b: &[S]) -> Option<S> {
    let pivot = b
        .iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .max_by(|(_, x), (_, y)| x.to_f64().abs().total_cmp(&y.to_f64().abs()))
        .map(|(i, _)| i);
    match pivot {
        None => is_zero_vec(a).then(S::zero),
        Some(k) => {
            let c = a[k].clone() / b[k].clone();
            if c.is_neg() {
                return None;
            }
            let ok = a
                .iter()
                .zip(b)
                .all(|(x, y)| (x.clone() - c.clone() * y.clone()).is_zero());
            ok.then_some(c)
        }
    }
}

/// Two nonzero vectors are the same ray iff each is a positive multiple of the other.
pub fn same_ray<S: Scalar>(a: &[S], b: &[S]) -> bool {
    matches!(nonneg_multiple(a, b), Some(c) if c.is_pos())
}

/// Row-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> fmt::Debug for Matrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                write!(f, "{:>8} ", format!("{}", self[(r, c)]))?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl<S> Index<(usize, usize)> for Matrix<S> {
    type Output = S;
    fn index(&self, (r, c): (usize, usize)) -> &S {
        &self.data[r * self.cols + c]
    }
}

impl<S> IndexMut<(usize, usize)> for Matrix<S> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut S {
        &mut self.data[r * self.cols + c]
    }
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vector<S>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(GptError::DimensionMismatch {
                expected: cols,
                got: bad.len(),
            });
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().cloned().collect(),
        })
    }

    /// Builds a `dim x n` matrix whose columns are the given vectors.
    pub fn from_cols(dim: usize, cols: &[Vector<S>]) -> Result<Self> {
        let mut m = Self::zeros(dim, cols.len());
        for (c, v) in cols.iter().enumerate() {
            if v.len() != dim {
                return Err(GptError::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
            for (r, x) in v.iter().enumerate() {
                m[(r, c)] = x.clone();
            }
        }
        Ok(m)
    }

    /// `a * b^T` for column vectors `a`, `b`.
    pub fn outer(a: &[S], b: &[S]) -> Self {
        let mut m = Self::zeros(a.len(), b.len());
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                m[(i, j)] = x.clone() * y.clone();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> Vector<S> {
        self.data[r * self.cols..(r + 1) * self.cols].to_vec()
    }

    pub fn col(&self, c: usize) -> Vector<S> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn row_vectors(&self) -> Vec<Vector<S>> {
        (0..self.rows).map(|r| self.row(r)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)].clone();
            }
        }
        t
    }

    pub fn apply(&self, v: &[S]) -> Vector<S> {
        assert_eq!(v.len(), self.cols, "matrix/vector dimension mismatch");
        (0..self.rows)
            .map(|r| dot(&self.data[r * self.cols..(r + 1) * self.cols], v))
            .collect()
    }

    /// `v^T * self`, i.e. the pullback of a row functional.
    pub fn apply_left(&self, v: &[S]) -> Vector<S> {
        assert_eq!(v.len(), self.rows, "matrix/vector dimension mismatch");
        (0..self.cols)
            .map(|c| (0..self.rows).map(|r| v[r].clone() * self[(r, c)].clone()).sum())
            .collect()
    }

    pub fn mul(&self, other: &Matrix<S>) -> Matrix<S> {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a.clone() * other[(k, j)].clone();
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix<S>) -> Matrix<S> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: add(&self.data, &other.data),
        }
    }

    pub fn sub(&self, other: &Matrix<S>) -> Matrix<S> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: sub(&self.data, &other.data),
        }
    }

    pub fn scaled(&self, c: &S) -> Matrix<S> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: scale(c, &self.data),
        }
    }

    pub fn kron(&self, other: &Matrix<S>) -> Matrix<S> {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = self[(i, j)].clone() * other[(k, l)].clone();
                    }
                }
            }
        }
        out
    }

    /// Entries in row-major order.
    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    pub fn from_flat(rows: usize, cols: usize, data: Vec<S>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(GptError::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn is_zero(&self) -> bool {
        is_zero_vec(&self.data)
    }

    pub fn approx_eq(&self, other: &Matrix<S>) -> bool {
        self.rows == other.rows && self.cols == other.cols && vec_eq(&self.data, &other.data)
    }

    /// Reduced row echelon form; returns the reduced matrix and its pivot columns.
    pub fn rref(&self) -> (Matrix<S>, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            // largest magnitude pivot; exact arithmetic only uses this as a choice
            let best = (row..m.rows)
                .filter(|&r| !m[(r, col)].is_zero())
                .max_by(|&a, &b| m[(a, col)].to_f64().abs().total_cmp(&m[(b, col)].to_f64().abs()));
            let Some(p) = best else {
                for r in row..m.rows {
                    m[(r, col)] = S::zero();
                }
                continue;
            };
            m.swap_rows(row, p);
            let inv = S::one() / m[(row, col)].clone();
            for c in col..m.cols {
                let v = m[(row, c)].clone() * inv.clone();
                m[(row, c)] = v;
            }
            for r in 0..m.rows {
                if r != row && !m[(r, col)].is_zero() {
                    let f = m[(r, col)].clone();
                    for c in col..m.cols {
                        let v = m[(r, c)].clone() - f.clone() * m[(row, c)].clone();
                        m[(r, c)] = v;
                    }
                }
                if r != row {
                    m[(r, col)] = S::zero();
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for c in 0..self.cols {
                self.data.swap(a * self.cols + c, b * self.cols + c);
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of `{x : self * x = 0}`.
    pub fn nullspace(&self) -> Vec<Vector<S>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = zeros(self.cols);
                v[f] = S::one();
                for (i, &p) in pivots.iter().enumerate() {
                    v[p] = -r[(i, f)].clone();
                }
                v
            })
            .collect()
    }

    /// One solution of `self * x = b`, or `None` if inconsistent.
    pub fn solve(&self, b: &[S]) -> Option<Vector<S>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = Self::zeros(self.rows, self.cols + 1);
        for r in 0..self.rows {
            for c in 0..self.cols {
                aug[(r, c)] = self[(r, c)].clone();
            }
            aug[(r, self.cols)] = b[r].clone();
        }
        let (red, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = zeros(self.cols);
        for (i, &p) in pivots.iter().enumerate() {
            x[p] = red[(i, self.cols)].clone();
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Matrix<S>> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                aug[(r, c)] = self[(r, c)].clone();
            }
            aug[(r, n + r)] = S::one();
        }
        let (red, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let mut inv = Self::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                inv[(r, c)] = red[(r, n + c)].clone();
            }
        }
        Some(inv)
    }
}

/// Rank of a family of vectors of length `dim`.
pub fn rank_of<S: Scalar>(dim: usize, vectors: &[Vector<S>]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    Matrix::from_cols(dim, vectors).map(|m| m.rank()).unwrap_or(0)
}

/// Indices of a maximal linearly independent subfamily, chosen greedily in order.
pub fn greedy_basis<S: Scalar>(dim: usize, vectors: &[Vector<S>]) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    let mut picked: Vec<Vector<S>> = Vec::new();
    for (i, v) in vectors.iter().enumerate() {
        picked.push(v.clone());
        if rank_of(dim, &picked) == picked.len() {
            chosen.push(i);
        } else {
            picked.pop();
        }
        if chosen.len() == dim {
            break;
        }
    }
    chosen
}

/// The unique linear map sending each `src[i]` to `dst[i]`, if the sources span
/// the domain and the assignment is consistent.
pub fn map_from_images<S: Scalar>(
    dim_in: usize,
    dim_out: usize,
    src: &[Vector<S>],
    dst: &[Vector<S>],
) -> Option<Matrix<S>> {
    let basis = greedy_basis(dim_in, src);
    if basis.len() < dim_in {
        return None;
    }
    let x = Matrix::from_cols(dim_in, &basis.iter().map(|&i| src[i].clone()).collect::<Vec<_>>()).ok()?;
    let y = Matrix::from_cols(dim_out, &basis.iter().map(|&i| dst[i].clone()).collect::<Vec<_>>()).ok()?;
    let t = y.mul(&x.inverse()?);
    src.iter().zip(dst).all(|(s, d)| vec_eq(&t.apply(s), d)).then_some(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::scalar::{Flt, Rat};

    fn r(v: i64) -> Rat {
        Rat::from_i64(v)
    }

    #[test]
    fn inverse_of_rational_matrix() {
        let m = Matrix::from_rows(&[vec![r(2), r(1)], vec![r(1), r(1)]]).unwrap();
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), Matrix::identity(2));
        let singular = Matrix::from_rows(&[vec![r(1), r(2)], vec![r(2), r(4)]]).unwrap();
        assert!(singular.inverse().is_none());
    }

    #[test]
    fn nullspace_spans_kernel() {
        let m = Matrix::from_rows(&[vec![r(1), r(1), r(0)], vec![r(0), r(0), r(1)]]).unwrap();
        let ns = m.nullspace();
        assert_eq!(ns.len(), 1);
        assert!(is_zero_vec(&m.apply(&ns[0])));
    }

    #[test]
    fn solve_detects_inconsistency() {
        let m = Matrix::from_rows(&[vec![r(1), r(1)], vec![r(2), r(2)]]).unwrap();
        assert!(m.solve(&[r(1), r(3)]).is_none());
        let x = m.solve(&[r(1), r(2)]).unwrap();
        assert_eq!(m.apply(&x), vec![r(1), r(2)]);
    }

    #[test]
    fn rank_in_float_mode_respects_tolerance() {
        let m = Matrix::from_rows(&[vec![Flt(1.0), Flt(2.0)], vec![Flt(2.0), Flt(4.0 + 1e-12)]]).unwrap();
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn nonneg_multiple_detects_direction() {
        let a = vec![r(2), r(4)];
        let b = vec![r(1), r(2)];
        assert_eq!(nonneg_multiple(&a, &b), Some(r(2)));
        assert_eq!(nonneg_multiple(&b, &[r(-1), r(-2)]), None);
        assert!(same_ray(&a, &b));
        assert_eq!(nonneg_multiple(&[r(0), r(0)], &b), Some(r(0)));
    }

    #[test]
    fn map_from_images_recovers_rotation() {
        let src = vec![vec![r(1), r(0)], vec![r(0), r(1)], vec![r(1), r(1)]];
        let dst = vec![vec![r(0), r(1)], vec![r(-1), r(0)], vec![r(-1), r(1)]];
        let t = map_from_images(2, 2, &src, &dst).unwrap();
        assert_eq!(t.apply(&[r(2), r(3)]), vec![r(-3), r(2)]);
        let bad = vec![vec![r(0), r(1)], vec![r(-1), r(0)], vec![r(5), r(5)]];
        assert!(map_from_images(2, 2, &src, &bad).is_none());
    }
}
