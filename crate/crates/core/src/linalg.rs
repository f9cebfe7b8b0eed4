//! Small dense matrices.
//!
//! Everything in this crate works with matrices of size at most ten or so
//! (structure tensors, ad maps, low-dimensional representations), so a plain
//! row-major `Vec` with O(n^3) kernels is all that is needed.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_traits::{Float, FromPrimitive, One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};

#[derive(Clone, PartialEq)]
pub struct Mat<E> {
    rows: usize,
    cols: usize,
    data: Vec<E>,
}

impl<E: Scalar> Mat<E> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![E::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = E::one();
        }
        m
    }

    /// Builds a matrix from row slices; panics on ragged input.
    pub fn from_rows<R: AsRef<[E]>>(rows: &[R]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.as_ref().len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            let row = row.as_ref();
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Mat {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> E) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn diag(entries: &[E]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[E] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<E> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, col: &[E]) {
        for (i, &x) in col.iter().enumerate() {
            self[(i, j)] = x;
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conjugate())
    }

    pub fn scale(&self, s: E) -> Self {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(E) -> E) -> Self {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn mul_vec(&self, v: &[E]) -> Vec<E> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                row.iter()
                    .zip(v)
                    .fold(E::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    /// `self * other - other * self`.
    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn frobenius_norm(&self) -> E::Real {
        self.data
            .iter()
            .map(|x| {
                let m = x.modulus();
                m * m
            })
            .sum::<E::Real>()
            .sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> E::Real {
        (0..self.cols)
            .map(|j| {
                (0..self.rows)
                    .map(|i| self[(i, j)].modulus())
                    .sum::<E::Real>()
            })
            .fold(E::Real::zero(), |a, b| a.max(b))
    }

    pub fn max_abs(&self) -> E::Real {
        self.data
            .iter()
            .map(|x| x.modulus())
            .fold(E::Real::zero(), |a, b| a.max(b))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite_value())
    }

    /// LU factorization with partial pivoting.
    pub fn lu(&self) -> Result<Lu<E>> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                got: self.cols,
            });
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pivot) =
                (k..n)
                    .map(|i| (i, a[(i, k)].modulus()))
                    .fold((k, E::Real::zero()), |best, cur| {
                        if cur.1 > best.1 {
                            cur
                        } else {
                            best
                        }
                    });
            if pivot == E::Real::zero() {
                return Err(Error::Singular);
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let d = a[(k, k)];
            for i in k + 1..n {
                let l = a[(i, k)] / d;
                a[(i, k)] = l;
                if !l.is_zero() {
                    for j in k + 1..n {
                        let u = a[(k, j)];
                        a[(i, j)] -= l * u;
                    }
                }
            }
        }
        Ok(Lu { lu: a, perm })
    }

    pub fn solve(&self, b: &[E]) -> Result<Vec<E>> {
        Ok(self.lu()?.solve(b))
    }

    pub fn inverse(&self) -> Result<Self> {
        let lu = self.lu()?;
        let n = self.rows;
        let mut inv = Self::zeros(n, n);
        let mut e = vec![E::zero(); n];
        for j in 0..n {
            e.iter_mut().for_each(|x| *x = E::zero());
            e[j] = E::one();
            inv.set_column(j, &lu.solve(&e));
        }
        Ok(inv)
    }

    /// 1-norm condition number; infinite for singular matrices.
    pub fn condition_number(&self) -> E::Real {
        match self.inverse() {
            Ok(inv) if inv.all_finite() => self.norm1() * inv.norm1(),
            _ => E::Real::infinity(),
        }
    }

    /// Matrix exponential.
    ///
    /// Nilpotent inputs (detected by `M^k = 0` for some `k <= n`) use the
    /// terminating series. Everything else is scaled so that the 1-norm is at
    /// most 1/4, expanded in a Taylor series to machine precision and squared
    /// back.
    pub fn expm(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                got: self.cols,
            });
        }
        if !self.all_finite() {
            return Err(Error::NonFinite("expm input"));
        }
        let n = self.rows;
        if let Some(series) = self.nilpotent_exp() {
            return Ok(series);
        }

        let quarter = <E::Real as Real>::lit(0.25);
        let norm = self.norm1();
        let mut squarings = 0i32;
        let mut scale = E::Real::one();
        while norm * scale > quarter {
            scale = scale * <E::Real as Real>::lit(0.5);
            squarings += 1;
        }
        let a = self.scale(E::from_real(scale));

        let eps = E::Real::epsilon();
        let mut sum = Self::identity(n);
        let mut term = Self::identity(n);
        for k in 1..40usize {
            term = &term * &a;
            term = term.scale(E::from_real(
                E::Real::one() / E::Real::from_usize(k).unwrap(),
            ));
            sum = &sum + &term;
            if term.norm1() <= eps * sum.norm1() * <E::Real as Real>::lit(1e-3) {
                break;
            }
        }
        for _ in 0..squarings {
            sum = &sum * &sum;
        }
        Ok(sum)
    }

    fn nilpotent_exp(&self) -> Option<Self> {
        let n = self.rows;
        let mut sum = Self::identity(n);
        let mut power = Self::identity(n);
        let mut factorial = E::Real::one();
        for k in 1..=n {
            power = &power * self;
            if power.is_zero() {
                return Some(sum);
            }
            factorial = factorial * E::Real::from_usize(k).unwrap();
            sum = &sum + &power.scale(E::from_real(E::Real::one() / factorial));
        }
        None
    }
}

/// Packed LU factors with the row permutation.
#[derive(Clone, Debug)]
pub struct Lu<E> {
    lu: Mat<E>,
    perm: Vec<usize>,
}

impl<E: Scalar> Lu<E> {
    pub fn solve(&self, b: &[E]) -> Vec<E> {
        let n = self.lu.rows;
        assert_eq!(b.len(), n);
        let mut x: Vec<E> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                let l = self.lu[(i, k)];
                let xk = x[k];
                x[i] -= l * xk;
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let u = self.lu[(i, k)];
                let xk = x[k];
                x[i] -= u * xk;
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }
}

impl<E> Index<(usize, usize)> for Mat<E> {
    type Output = E;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &E {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<E> IndexMut<(usize, usize)> for Mat<E> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut E {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<E: Scalar> Mul for &Mat<E> {
    type Output = Mat<E>;
    fn mul(self, rhs: &Mat<E>) -> Mat<E> {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl<E: Scalar> Mul for Mat<E> {
    type Output = Mat<E>;
    fn mul(self, rhs: Mat<E>) -> Mat<E> {
        &self * &rhs
    }
}

impl<E: Scalar> Add for &Mat<E> {
    type Output = Mat<E>;
    fn add(self, rhs: &Mat<E>) -> Mat<E> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }
}

impl<E: Scalar> Sub for &Mat<E> {
    type Output = Mat<E>;
    fn sub(self, rhs: &Mat<E>) -> Mat<E> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| a - b)
                .collect(),
        }
    }
}

impl<E: Scalar> Neg for &Mat<E> {
    type Output = Mat<E>;
    fn neg(self) -> Mat<E> {
        self.map(|x| -x)
    }
}

impl<E: fmt::Debug> fmt::Debug for Mat<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{:?} ", self[(i, j)])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}
