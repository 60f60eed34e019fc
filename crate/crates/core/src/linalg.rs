//! Dense matrix kernels behind a swappable provider.
//!
//! Everything above this module obtains matrix multiplication, thin QR, thin
//! SVD and Hermitian eigendecompositions through [`DenseLinalg`]. The bundled
//! [`ReferenceLinalg`] is pure Rust (`matrixmultiply` for products, `nalgebra`
//! for factorizations). A faster provider can be installed per scalar type
//! with [`install_provider`] before the first factorization runs.

use std::any::{Any, TypeId};
use std::cell::Cell;
use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{OnceLock, RwLock};

use nalgebra::DMatrix;
use num_traits::{Float, Zero};

use crate::error::{Result, TensorError};
use crate::scalar::Scalar;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(TensorError::Shape(format!(
                "{} elements for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    pub fn view(&self) -> MatRef<'_, T> {
        MatRef {
            data: &self.data,
            rows: self.rows,
            cols: self.cols,
            rs: self.cols as isize,
            cs: 1,
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    /// Leading `cols` columns.
    pub fn take_cols(&self, cols: usize) -> Self {
        Self::from_fn(self.rows, cols, |r, c| self.get(r, c))
    }

    /// Leading `rows` rows.
    pub fn take_rows(&self, rows: usize) -> Self {
        Matrix {
            rows,
            cols: self.cols,
            data: self.data[..rows * self.cols].to_vec(),
        }
    }

    pub fn matmul(&self, other: &Matrix<T>) -> Matrix<T> {
        provider::<T>().gemm(self.view(), other.view())
    }

    /// Largest entry-wise deviation from `other`.
    pub fn max_abs_diff(&self, other: &Matrix<T>) -> T::Real {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (*a - *b).modulus())
            .fold(T::Real::zero(), Float::max)
    }

    fn to_nalgebra(&self) -> DMatrix<T> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    fn from_nalgebra(m: &DMatrix<T>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
    }
}

/// Borrowed strided matrix operand.
#[derive(Clone, Copy, Debug)]
pub struct MatRef<'a, T> {
    pub data: &'a [T],
    pub rows: usize,
    pub cols: usize,
    pub rs: isize,
    pub cs: isize,
}

impl<'a, T> MatRef<'a, T> {
    pub fn transpose(self) -> Self {
        MatRef {
            rows: self.cols,
            cols: self.rows,
            rs: self.cs,
            cs: self.rs,
            ..self
        }
    }
}

/// Thin SVD `A = U diag(s) Vt` with `s` sorted in descending order.
#[derive(Clone, Debug)]
pub struct Svd<T: Scalar> {
    pub u: Matrix<T>,
    pub s: Vec<T::Real>,
    pub vt: Matrix<T>,
}

/// Thin QR: `q` is `m x min(m,n)` with orthonormal columns.
#[derive(Clone, Debug)]
pub struct Qr<T> {
    pub q: Matrix<T>,
    pub r: Matrix<T>,
}

/// Hermitian eigendecomposition `A = V diag(values) V^H`, values descending.
#[derive(Clone, Debug)]
pub struct Eigh<T: Scalar> {
    pub values: Vec<T::Real>,
    pub vectors: Matrix<T>,
}

pub trait DenseLinalg<T: Scalar>: Send + Sync {
    fn gemm(&self, a: MatRef<'_, T>, b: MatRef<'_, T>) -> Matrix<T>;
    fn qr(&self, a: &Matrix<T>) -> Result<Qr<T>>;
    fn svd(&self, a: &Matrix<T>) -> Result<Svd<T>>;
    /// Only the lower triangle of `a` is referenced.
    fn eigh(&self, a: &Matrix<T>) -> Result<Eigh<T>>;
}

thread_local! {
    static MULTIPLY_ADDS: Cell<u64> = const { Cell::new(0) };
}

/// Scalar multiply-adds performed by `gemm` on this thread so far.
pub fn multiply_adds() -> u64 {
    MULTIPLY_ADDS.with(Cell::get)
}

/// The bundled portable provider.
#[derive(Clone, Copy, Debug, Default)]
pub struct ReferenceLinalg;

fn sort_desc<R: Float>(values: &[R]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap_or(std::cmp::Ordering::Equal));
    order
}

impl<T: Scalar> DenseLinalg<T> for ReferenceLinalg {
    fn gemm(&self, a: MatRef<'_, T>, b: MatRef<'_, T>) -> Matrix<T> {
        assert_eq!(a.cols, b.rows, "gemm inner dimensions differ");
        let mut c = Matrix::zeros(a.rows, b.cols);
        MULTIPLY_ADDS.with(|n| n.set(n.get() + (a.rows * a.cols * b.cols) as u64));
        T::gemm(
            a.rows,
            a.cols,
            b.cols,
            a.data,
            (a.rs, a.cs),
            b.data,
            (b.rs, b.cs),
            &mut c.data,
            (b.cols as isize, 1),
        );
        c
    }

    fn qr(&self, a: &Matrix<T>) -> Result<Qr<T>> {
        let k = a.rows.min(a.cols);
        if k == 0 {
            return Ok(Qr {
                q: Matrix::zeros(a.rows, 0),
                r: Matrix::zeros(0, a.cols),
            });
        }
        let qr = a.to_nalgebra().qr();
        Ok(Qr {
            q: Matrix::from_nalgebra(&qr.q()),
            r: Matrix::from_nalgebra(&qr.r()),
        })
    }

    fn svd(&self, a: &Matrix<T>) -> Result<Svd<T>> {
        let k = a.rows.min(a.cols);
        if k == 0 {
            return Ok(Svd {
                u: Matrix::zeros(a.rows, 0),
                s: Vec::new(),
                vt: Matrix::zeros(0, a.cols),
            });
        }
        let svd = a
            .to_nalgebra()
            .try_svd(true, true, T::Real::epsilon(), 0)
            .ok_or_else(|| TensorError::Linalg("SVD did not converge".into()))?;
        let (u, vt) = match (svd.u, svd.v_t) {
            (Some(u), Some(vt)) => (u, vt),
            _ => return Err(TensorError::Linalg("SVD factors missing".into())),
        };
        let s: Vec<T::Real> = svd.singular_values.iter().copied().collect();
        let order = sort_desc(&s);
        Ok(Svd {
            u: Matrix::from_fn(a.rows, k, |r, c| u[(r, order[c])]),
            s: order.iter().map(|&i| s[i]).collect(),
            vt: Matrix::from_fn(k, a.cols, |r, c| vt[(order[r], c)]),
        })
    }

    fn eigh(&self, a: &Matrix<T>) -> Result<Eigh<T>> {
        if a.rows != a.cols {
            return Err(TensorError::Shape("eigh needs a square matrix".into()));
        }
        let n = a.rows;
        if n == 0 {
            return Ok(Eigh {
                values: Vec::new(),
                vectors: Matrix::zeros(0, 0),
            });
        }
        let eig = a
            .to_nalgebra()
            .try_symmetric_eigen(T::Real::epsilon(), 0)
            .ok_or_else(|| TensorError::Linalg("eigendecomposition did not converge".into()))?;
        let vals: Vec<T::Real> = eig.eigenvalues.iter().copied().collect();
        let order = sort_desc(&vals);
        Ok(Eigh {
            values: order.iter().map(|&i| vals[i]).collect(),
            vectors: Matrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]),
        })
    }
}

static REFERENCE: ReferenceLinalg = ReferenceLinalg;
static INSTALLED: AtomicBool = AtomicBool::new(false);

type Registry = RwLock<HashMap<TypeId, Box<dyn Any + Send + Sync>>>;

fn registry() -> &'static Registry {
    static REG: OnceLock<Registry> = OnceLock::new();
    REG.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Installs the provider used for scalar type `T`. Returns false if one was
/// already installed for `T`.
pub fn install_provider<T: Scalar>(p: Box<dyn DenseLinalg<T>>) -> bool {
    let mut reg = registry().write().unwrap_or_else(|e| e.into_inner());
    let key = TypeId::of::<T>();
    if reg.contains_key(&key) {
        return false;
    }
    let leaked: &'static dyn DenseLinalg<T> = Box::leak(p);
    reg.insert(key, Box::new(leaked));
    INSTALLED.store(true, Ordering::Release);
    true
}

/// The active provider for `T`.
pub fn provider<T: Scalar>() -> &'static dyn DenseLinalg<T> {
    if INSTALLED.load(Ordering::Acquire) {
        let reg = registry().read().unwrap_or_else(|e| e.into_inner());
        if let Some(p) = reg
            .get(&TypeId::of::<T>())
            .and_then(|b| b.downcast_ref::<&'static dyn DenseLinalg<T>>())
        {
            return *p;
        }
    }
    &REFERENCE
}
