use std::fmt;
use std::ops::{Add, Index, Mul, Sub};

use num_complex::Complex64;

use super::LinalgError;

/// Dense square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    /// Builds a matrix from row-major entries, rejecting empty or non-finite input.
    pub fn new(dim: usize, data: Vec<Complex64>) -> Result<Self, LinalgError> {
        if dim == 0 {
            return Err(LinalgError::Empty);
        }
        if data.len() != dim * dim {
            return Err(LinalgError::Shape {
                dim,
                len: data.len(),
            });
        }
        if let Some(pos) = data
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(LinalgError::NonFinite {
                row: pos / dim,
                col: pos % dim,
            });
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self, LinalgError> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(LinalgError::Shape {
                    dim,
                    len: row.len() * dim,
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(dim, data)
    }

    /// Builds a matrix from separate real and imaginary parts.
    pub fn from_parts(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let dim = re.len();
        if im.len() != dim {
            return Err(LinalgError::Shape {
                dim,
                len: im.len() * dim,
            });
        }
        let mut data = Vec::with_capacity(dim * dim);
        for (r, i) in re.iter().zip(im) {
            if r.len() != dim || i.len() != dim {
                return Err(LinalgError::Shape {
                    dim,
                    len: r.len().max(i.len()) * dim,
                });
            }
            data.extend(r.iter().zip(i).map(|(&a, &b)| Complex64::new(a, b)));
        }
        Self::new(dim, data)
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let zeros: Vec<Vec<f64>> = rows.iter().map(|r| vec![0.0; r.len()]).collect();
        Self::from_parts(rows, &zeros)
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self, LinalgError> {
        let dim = diag.len();
        if dim == 0 {
            return Err(LinalgError::Empty);
        }
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for (i, &d) in diag.iter().enumerate() {
            data[i * dim + i] = Complex64::new(d, 0.0);
        }
        Self::new(dim, data)
    }

    /// The projector |v⟩⟨v| scaled by `weight`.
    pub fn weighted_projector(v: &[Complex64], weight: f64) -> Self {
        let dim = v.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.data[i * dim + j] = v[i] * v[j].conj() * weight;
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub(crate) fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.dim + col] = value;
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, row: usize) -> &[Complex64] {
        &self.data[row * self.dim..(row + 1) * self.dim]
    }

    pub fn column(&self, col: usize) -> Vec<Complex64> {
        (0..self.dim).map(|r| self.get(r, col)).collect()
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn real_parts(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|r| self.row(r).iter().map(|z| z.re).collect())
            .collect()
    }

    pub fn imag_parts(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|r| self.row(r).iter().map(|z| z.im).collect())
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry of |A − A†|.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.get(i, j) - self.get(j, i).conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// (A + A†)/2, which is Hermitian bit-for-bit.
    pub fn hermitian_part(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            out.data[i * n + i] = Complex64::new(self.get(i, i).re, 0.0);
            for j in (i + 1)..n {
                let z = (self.get(i, j) + self.get(j, i).conj()) * 0.5;
                out.data[i * n + j] = z;
                out.data[j * n + i] = z.conj();
            }
        }
        out
    }

    /// ⟨u|A|v⟩.
    pub fn sandwich(&self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        self.data
            .chunks(self.dim)
            .zip(u)
            .map(|(row, ui)| ui.conj() * row.iter().zip(v).map(|(a, vj)| a * vj).sum::<Complex64>())
            .sum()
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, LinalgError> {
        check_dims(self.dim, other.dim)?;
        Ok(self * other)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, LinalgError> {
        check_dims(self.dim, other.dim)?;
        Ok(self + other)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, LinalgError> {
        check_dims(self.dim, other.dim)?;
        Ok(self - other)
    }

    /// Frobenius norm of `self − other`.
    pub fn distance(&self, other: &Self) -> Result<f64, LinalgError> {
        Ok(self.try_sub(other)?.frobenius_norm())
    }
}

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<(), LinalgError> {
    if expected != found {
        return Err(LinalgError::DimMismatch { expected, found });
    }
    Ok(())
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    fn index(&self, (row, col): (usize, usize)) -> &Complex64 {
        &self.data[row * self.dim + col]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;

    /// Panics on dimension mismatch; use [`CMatrix::try_mul`] for checked products.
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        CMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        CMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.dim, self.dim)?;
        for r in 0..self.dim {
            write!(f, "  ")?;
            for z in self.row(r) {
                write!(f, "{:>+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// ⟨a|b⟩.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// tr(A·B) without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Result<Complex64, LinalgError> {
    check_dims(a.dim, b.dim)?;
    let n = a.dim;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a.data[i * n + k] * b.data[k * n + i];
        }
    }
    Ok(acc)
}
