use tnkit_core::linalg::{provider, Matrix};
use tnkit_core::{ITensor, C64};

use crate::error::{MpsError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct LanczosParams {
    /// Krylov vectors kept before restarting from the current Ritz vector.
    pub krylov_dim: usize,
    /// Total matrix-vector products allowed.
    pub max_matvecs: usize,
    /// Stop when the Ritz residual is below `tol` times the spectral scale.
    pub tol: f64,
}

impl Default for LanczosParams {
    fn default() -> Self {
        LanczosParams {
            krylov_dim: 6,
            max_matvecs: 20,
            tol: 1e-14,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LanczosResult {
    pub value: f64,
    /// Normalized Ritz vector.
    pub vector: ITensor,
    pub matvecs: usize,
    pub residual: f64,
}

/// `<a|b>`.
pub fn dot(a: &ITensor, b: &ITensor) -> Result<C64> {
    Ok((&a.dag() * b).scalar()?)
}

/// Lowest Ritz pair of a Hermitian map by restarted Lanczos with full
/// reorthogonalization.
pub fn lanczos_ground<F>(mut map: F, x0: &ITensor, p: &LanczosParams) -> Result<LanczosResult>
where
    F: FnMut(&ITensor) -> Result<ITensor>,
{
    let n0 = x0.norm();
    if n0 == 0.0 || !n0.is_finite() {
        return Err(MpsError::ZeroVector);
    }
    let mut x = x0.scaled(1.0 / n0);
    let mut matvecs = 0;
    let mut value = f64::NAN;
    let mut residual = f64::INFINITY;
    let kdim = p.krylov_dim.max(2);
    while matvecs < p.max_matvecs.max(1) {
        let mut basis = vec![x.clone()];
        let (mut alpha, mut beta) = (Vec::new(), Vec::new());
        let mut done = false;
        let (theta, y) = loop {
            let v = basis.last().expect("basis is nonempty");
            let mut w = map(v)?;
            matvecs += 1;
            let a = dot(v, &w)?.re;
            alpha.push(a);
            for _ in 0..2 {
                for u in &basis {
                    let c = dot(u, &w)?;
                    w = w.axpy(-c, u)?;
                }
            }
            let b = w.norm();
            let (theta, y) = tridiag_lowest(&alpha, &beta)?;
            let scale = alpha
                .iter()
                .map(|a| a.abs())
                .fold(theta.abs(), f64::max)
                .max(f64::MIN_POSITIVE);
            residual = b * y.last().expect("nonempty Ritz vector").abs();
            if residual <= p.tol * scale || b <= 1e-14 * scale {
                done = true;
                break (theta, y);
            }
            if matvecs >= p.max_matvecs || basis.len() >= kdim {
                break (theta, y);
            }
            beta.push(b);
            basis.push(w.scaled(1.0 / b));
        };
        let mut nx = basis[0].scaled(y[0]);
        for (u, &c) in basis.iter().zip(&y).skip(1) {
            nx = nx.axpy(c, u)?;
        }
        let nn = nx.norm();
        if nn == 0.0 {
            return Err(MpsError::ZeroVector);
        }
        x = nx.scaled(1.0 / nn);
        value = theta;
        if done {
            break;
        }
    }
    Ok(LanczosResult {
        value,
        vector: x,
        matvecs,
        residual,
    })
}

/// Lowest eigenpair of the symmetric tridiagonal matrix with diagonal
/// `alpha` and off-diagonal `beta`.
fn tridiag_lowest(alpha: &[f64], beta: &[f64]) -> Result<(f64, Vec<f64>)> {
    let m = alpha.len();
    let t = Matrix::from_fn(m, m, |r, c| {
        if r == c {
            alpha[r]
        } else if r + 1 == c {
            beta[r]
        } else if c + 1 == r {
            beta[c]
        } else {
            0.0
        }
    });
    let e = provider::<f64>().eigh(&t)?;
    let k = (0..m)
        .min_by(|&a, &b| e.values[a].total_cmp(&e.values[b]))
        .expect("nonempty tridiagonal");
    Ok((e.values[k], (0..m).map(|r| e.vectors.get(r, k)).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use tnkit_core::Index;

    fn matmap(m: Vec<f64>, i: Index) -> impl FnMut(&ITensor) -> Result<ITensor> {
        move |x: &ITensor| {
            let d = i.dim();
            let v = x.to_array_real(std::slice::from_ref(&i)).unwrap();
            let out: Vec<f64> = (0..d)
                .map(|r| (0..d).map(|c| m[r * d + c] * v.data()[c]).sum())
                .collect();
            Ok(ITensor::from_vec(std::slice::from_ref(&i), out)?)
        }
    }

    #[test]
    fn identity_map() {
        let i = Index::new(5, "v").unwrap();
        let x = ITensor::from_vec(std::slice::from_ref(&i), vec![1.0, 2.0, 0.0, -1.0, 0.5]).unwrap();
        let r = lanczos_ground(|v: &ITensor| Ok(v.clone()), &x, &LanczosParams::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-14);
        assert!((r.vector.norm() - 1.0).abs() < 1e-14);
        assert_eq!(r.matvecs, 1);
    }

    #[test]
    fn two_by_two() {
        let i = Index::new(2, "v").unwrap();
        let x = ITensor::from_vec(std::slice::from_ref(&i), vec![0.3, 0.8]).unwrap();
        let r = lanczos_ground(matmap(vec![-1.0, 0.0, 0.0, 1.0], i), &x, &LanczosParams::default()).unwrap();
        assert!((r.value + 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_start_is_an_error() {
        let i = Index::new(2, "v").unwrap();
        let x = ITensor::new(&[i]).unwrap();
        assert!(matches!(
            lanczos_ground(|v: &ITensor| Ok(v.clone()), &x, &LanczosParams::default()),
            Err(MpsError::ZeroVector)
        ));
    }
}
