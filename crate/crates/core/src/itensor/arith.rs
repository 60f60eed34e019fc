use std::ops::{Add, Div, Mul, Neg, Sub};

use super::{diag_len, diag_to_blocks, to_dense_data, Data, ITensor, Storage};
use crate::dense::permutedims;
use crate::error::{Result, TensorError};
use crate::index::Index;
use crate::scalar::Scalar;
use crate::C64;

/// `a + s * b` for data over the same index set; `perm[d]` is the position in
/// `b` of `a`'s `d`-th index.
fn axpy_data<T: Scalar>(a: &Data<T>, ai: &[Index], s: T, b: &Data<T>, bi: &[Index], perm: &[usize]) -> Result<Data<T>> {
    let is_diag = |d: &Data<T>| matches!(d, Data::Diag(_) | Data::Uniform(_));
    Ok(match (a, b) {
        (Data::Uniform(x), Data::Uniform(y)) => Data::Uniform(*x + s * *y),
        (x, y) if is_diag(x) && is_diag(y) => {
            let n = diag_len(ai);
            Data::Diag(
                (0..n)
                    .map(|t| super::diag_at(x, t) + s * super::diag_at(y, t))
                    .collect(),
            )
        }
        (Data::Blocks(x, fx), Data::Blocks(y, fy)) => {
            let flux = match (fx, fy) {
                (Some(p), Some(q)) if p != q => {
                    return Err(TensorError::FluxViolation {
                        expected: p.to_string(),
                        found: q.to_string(),
                    })
                }
                (Some(p), _) => Some(p.clone()),
                (None, q) => q.clone(),
            };
            let mut out = x.clone();
            out.axpy(s, &y.permutedims(perm)?)?;
            Data::Blocks(out, flux)
        }
        (Data::Blocks(..), y) if is_diag(y) => {
            let (bs, f) = diag_to_blocks(y, bi)?;
            return axpy_data(a, ai, s, &Data::Blocks(bs, f), bi, perm);
        }
        (x, Data::Blocks(..)) if is_diag(x) => {
            let (bs, f) = diag_to_blocks(x, ai)?;
            return axpy_data(&Data::Blocks(bs, f), ai, s, b, bi, perm);
        }
        (Data::Blocks(..), _) | (_, Data::Blocks(..)) => {
            return Err(TensorError::MixedStorage(
                "dense plus block-sparse; densify one operand first".into(),
            ))
        }
        _ => {
            let mut out = to_dense_data(a, ai);
            let y = to_dense_data(b, bi);
            out.axpy(s, &*permutedims(&y, perm)?);
            Data::Dense(out)
        }
    })
}

impl ITensor {
    /// `self + s * other`; the index sets must agree up to order.
    pub fn axpy(&self, s: impl Into<C64>, other: &ITensor) -> Result<ITensor> {
        let s = s.into();
        if matches!(self.store, Storage::Combiner) || matches!(other.store, Storage::Combiner) {
            return Err(TensorError::Unsupported("adding combiners".into()));
        }
        let perm = other.perm_to(&self.inds)?;
        let store = match (&self.store, &other.store) {
            (Storage::Real(x), Storage::Real(y)) if s.im == 0.0 => {
                Storage::Real(axpy_data(x, &self.inds, s.re, y, &other.inds, &perm)?)
            }
            _ => {
                let x = self.to_complex();
                let y = other.to_complex();
                let (Storage::Complex(x), Storage::Complex(y)) = (&x.store, &y.store) else {
                    unreachable!("promoted above")
                };
                Storage::Complex(axpy_data(x, &self.inds, s, y, &other.inds, &perm)?)
            }
        };
        Ok(ITensor {
            inds: self.inds.clone(),
            store,
        })
    }

    pub fn try_add(&self, other: &ITensor) -> Result<ITensor> {
        self.axpy(1.0, other)
    }

    pub fn try_sub(&self, other: &ITensor) -> Result<ITensor> {
        self.axpy(-1.0, other)
    }

    pub fn scaled(&self, s: impl Into<C64>) -> ITensor {
        let mut t = self.clone();
        t.scale_mut(s);
        t
    }
}

/// Panics on mismatched index sets; see [`ITensor::axpy`].
impl Add for &ITensor {
    type Output = ITensor;

    fn add(self, rhs: &ITensor) -> ITensor {
        self.try_add(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Sub for &ITensor {
    type Output = ITensor;

    fn sub(self, rhs: &ITensor) -> ITensor {
        self.try_sub(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Add for ITensor {
    type Output = ITensor;

    fn add(self, rhs: ITensor) -> ITensor {
        &self + &rhs
    }
}

impl Sub for ITensor {
    type Output = ITensor;

    fn sub(self, rhs: ITensor) -> ITensor {
        &self - &rhs
    }
}

impl Neg for &ITensor {
    type Output = ITensor;

    fn neg(self) -> ITensor {
        self.scaled(-1.0)
    }
}

impl Neg for ITensor {
    type Output = ITensor;

    fn neg(mut self) -> ITensor {
        self.scale_mut(-1.0);
        self
    }
}

macro_rules! scalar_ops {
    ($($s:ty),*) => {$(
        impl Mul<$s> for &ITensor {
            type Output = ITensor;

            fn mul(self, s: $s) -> ITensor {
                self.scaled(s)
            }
        }

        impl Mul<$s> for ITensor {
            type Output = ITensor;

            fn mul(mut self, s: $s) -> ITensor {
                self.scale_mut(s);
                self
            }
        }

        impl Mul<&ITensor> for $s {
            type Output = ITensor;

            fn mul(self, t: &ITensor) -> ITensor {
                t.scaled(self)
            }
        }

        impl Mul<ITensor> for $s {
            type Output = ITensor;

            fn mul(self, t: ITensor) -> ITensor {
                t * self
            }
        }

        impl Div<$s> for &ITensor {
            type Output = ITensor;

            fn div(self, s: $s) -> ITensor {
                self.scaled(C64::from(1.0) / C64::from(s))
            }
        }

        impl Div<$s> for ITensor {
            type Output = ITensor;

            fn div(self, s: $s) -> ITensor {
                &self / s
            }
        }
    )*};
}

scalar_ops!(f64, C64);
