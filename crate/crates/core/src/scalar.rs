//! Element types.
//!
//! Every numerical kernel in this crate (permutation, contraction, block-sparse
//! bookkeeping, factorizations) is written once against [`Scalar`], which is
//! implemented for `f32`, `f64`, `Complex<f32>` and `Complex<f64>`. The
//! high-level [`ITensor`](crate::ITensor) picks between `f64` and
//! [`C64`](crate::C64) at run time and promotes on demand.

use std::fmt::{Debug, Display};

use matrixmultiply::CGemmOption;
use nalgebra::{ComplexField, RealField};
use num_complex::Complex;
use num_traits::{Float, FromPrimitive, ToPrimitive};

/// A field element usable in tensor storage.
pub trait Scalar:
    ComplexField<RealField = <Self as Scalar>::Real>
    + Copy
    + PartialEq
    + Default
    + Debug
    + Display
    + num_traits::Zero
    + num_traits::One
{
    /// The underlying real type (`Self` for real scalars).
    type Real: RealScalar;

    const IS_COMPLEX: bool;

    /// `C <- A B` for strided operands, `A` is `m x k`, `B` is `k x n`.
    ///
    /// Strides are element strides; `c` must be zeroed on entry.
    #[allow(clippy::too_many_arguments)]
    fn gemm(
        m: usize,
        k: usize,
        n: usize,
        a: &[Self],
        a_strides: (isize, isize),
        b: &[Self],
        b_strides: (isize, isize),
        c: &mut [Self],
        c_strides: (isize, isize),
    );

    fn from_parts(re: Self::Real, im: Self::Real) -> Self;

    /// Real and imaginary parts widened to `f64`.
    fn to_c64(self) -> Complex<f64>;

    /// Narrowing conversion; the imaginary part is dropped for real types.
    fn from_c64(z: Complex<f64>) -> Self;

    #[inline]
    fn conj(self) -> Self {
        self.conjugate()
    }

    #[inline]
    fn abs_sqr(self) -> Self::Real {
        self.modulus_squared()
    }
}

/// Real scalars: also an ordered field with the usual float operations.
pub trait RealScalar: Scalar<Real = Self> + RealField + Float + FromPrimitive + ToPrimitive + PartialOrd {}

impl RealScalar for f32 {}
impl RealScalar for f64 {}

fn check_extent(len: usize, rows: usize, cols: usize, rs: isize, cs: isize) {
    if rows == 0 || cols == 0 {
        return;
    }
    let last = (rows as isize - 1) * rs + (cols as isize - 1) * cs;
    assert!(
        rs >= 0 && cs >= 0 && (last as usize) < len,
        "gemm operand of {rows}x{cols} with strides ({rs},{cs}) exceeds buffer of {len}"
    );
}

macro_rules! impl_real {
    ($t:ty, $gemm:path) => {
        impl Scalar for $t {
            type Real = $t;
            const IS_COMPLEX: bool = false;

            fn gemm(
                m: usize,
                k: usize,
                n: usize,
                a: &[Self],
                (rsa, csa): (isize, isize),
                b: &[Self],
                (rsb, csb): (isize, isize),
                c: &mut [Self],
                (rsc, csc): (isize, isize),
            ) {
                check_extent(a.len(), m, k, rsa, csa);
                check_extent(b.len(), k, n, rsb, csb);
                check_extent(c.len(), m, n, rsc, csc);
                if m == 0 || n == 0 || k == 0 {
                    return;
                }
                // SAFETY: extents checked above; `c` does not alias `a` or `b`.
                unsafe {
                    $gemm(
                        m,
                        k,
                        n,
                        1.0,
                        a.as_ptr(),
                        rsa,
                        csa,
                        b.as_ptr(),
                        rsb,
                        csb,
                        0.0,
                        c.as_mut_ptr(),
                        rsc,
                        csc,
                    )
                }
            }

            #[inline]
            fn from_parts(re: Self, _im: Self) -> Self {
                re
            }

            #[inline]
            fn to_c64(self) -> Complex<f64> {
                Complex::new(self as f64, 0.0)
            }

            #[inline]
            fn from_c64(z: Complex<f64>) -> Self {
                z.re as $t
            }
        }
    };
}

impl_real!(f64, matrixmultiply::dgemm);
impl_real!(f32, matrixmultiply::sgemm);

macro_rules! impl_complex {
    ($t:ty, $gemm:path) => {
        impl Scalar for Complex<$t> {
            type Real = $t;
            const IS_COMPLEX: bool = true;

            fn gemm(
                m: usize,
                k: usize,
                n: usize,
                a: &[Self],
                (rsa, csa): (isize, isize),
                b: &[Self],
                (rsb, csb): (isize, isize),
                c: &mut [Self],
                (rsc, csc): (isize, isize),
            ) {
                check_extent(a.len(), m, k, rsa, csa);
                check_extent(b.len(), k, n, rsb, csb);
                check_extent(c.len(), m, n, rsc, csc);
                if m == 0 || n == 0 || k == 0 {
                    return;
                }
                // SAFETY: `Complex<T>` is `repr(C)` with the same layout as
                // `[T; 2]`; extents checked above.
                unsafe {
                    $gemm(
                        CGemmOption::Standard,
                        CGemmOption::Standard,
                        m,
                        k,
                        n,
                        [1.0, 0.0],
                        a.as_ptr().cast(),
                        rsa,
                        csa,
                        b.as_ptr().cast(),
                        rsb,
                        csb,
                        [0.0, 0.0],
                        c.as_mut_ptr().cast(),
                        rsc,
                        csc,
                    )
                }
            }

            #[inline]
            fn from_parts(re: $t, im: $t) -> Self {
                Complex::new(re, im)
            }

            #[inline]
            fn to_c64(self) -> Complex<f64> {
                Complex::new(self.re as f64, self.im as f64)
            }

            #[inline]
            fn from_c64(z: Complex<f64>) -> Self {
                Complex::new(z.re as $t, z.im as $t)
            }
        }
    };
}

impl_complex!(f64, matrixmultiply::zgemm);
impl_complex!(f32, matrixmultiply::cgemm);

#[cfg(test)]
mod tests {
    use super::*;

    fn naive<T: Scalar>(m: usize, k: usize, n: usize, a: &[T], b: &[T]) -> Vec<T> {
        let mut c = vec![T::zero(); m * n];
        for i in 0..m {
            for j in 0..n {
                let mut acc = T::zero();
                for l in 0..k {
                    acc += a[i * k + l] * b[l * n + j];
                }
                c[i * n + j] = acc;
            }
        }
        c
    }

    #[test]
    fn gemm_row_major_matches_loops() {
        let (m, k, n) = (3, 4, 5);
        let a: Vec<f64> = (0..m * k).map(|x| x as f64 * 0.5 - 1.0).collect();
        let b: Vec<f64> = (0..k * n).map(|x| (x as f64).sin()).collect();
        let mut c = vec![0.0; m * n];
        f64::gemm(
            m,
            k,
            n,
            &a,
            (k as isize, 1),
            &b,
            (n as isize, 1),
            &mut c,
            (n as isize, 1),
        );
        for (x, y) in c.iter().zip(naive(m, k, n, &a, &b)) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn complex_gemm_with_transposed_operand() {
        let (m, k, n) = (2, 3, 2);
        let a: Vec<Complex<f64>> = (0..m * k).map(|x| Complex::new(x as f64, 1.0 - x as f64)).collect();
        let b: Vec<Complex<f64>> = (0..k * n).map(|x| Complex::new(0.5 * x as f64, 2.0)).collect();
        // Store b transposed (n x k) and read it with swapped strides.
        let mut bt = vec![Complex::new(0.0, 0.0); k * n];
        for l in 0..k {
            for j in 0..n {
                bt[j * k + l] = b[l * n + j];
            }
        }
        let mut c = vec![Complex::new(0.0, 0.0); m * n];
        Complex::<f64>::gemm(
            m,
            k,
            n,
            &a,
            (k as isize, 1),
            &bt,
            (1, k as isize),
            &mut c,
            (n as isize, 1),
        );
        for (x, y) in c.iter().zip(naive(m, k, n, &a, &b)) {
            assert!((x - y).norm() < 1e-13);
        }
    }

    #[test]
    fn f32_is_a_scalar() {
        let mut c = [0.0f32; 1];
        f32::gemm(1, 2, 1, &[1.0, 2.0], (2, 1), &[3.0, 4.0], (1, 1), &mut c, (1, 1));
        assert_eq!(c[0], 11.0);
        assert_eq!((f32::IS_COMPLEX, Complex::<f32>::IS_COMPLEX), (false, true));
    }
}
