use tnkit_core::TruncParams;

use crate::error::{MpsError, Result};

/// Per-sweep schedules. A schedule shorter than `nsweep` repeats its last
/// value.
#[derive(Clone, Debug, PartialEq)]
pub struct Sweeps {
    pub nsweep: usize,
    pub maxdim: Vec<usize>,
    pub cutoff: Vec<f64>,
    pub mindim: Vec<usize>,
    /// Matrix-vector products allowed per local solve.
    pub maxiter: Vec<usize>,
    /// Krylov space size before a restart.
    pub krylov_dim: usize,
    /// Residual tolerance of the local solver.
    pub solver_tol: f64,
}

impl Sweeps {
    pub fn new(nsweep: usize) -> Self {
        Sweeps {
            nsweep,
            maxdim: vec![usize::MAX],
            cutoff: vec![0.0],
            mindim: vec![1],
            maxiter: vec![20],
            krylov_dim: 6,
            solver_tol: 1e-14,
        }
    }

    pub fn maxdim(mut self, v: &[usize]) -> Self {
        self.maxdim = v.to_vec();
        self
    }

    pub fn cutoff(mut self, v: &[f64]) -> Self {
        self.cutoff = v.to_vec();
        self
    }

    pub fn mindim(mut self, v: &[usize]) -> Self {
        self.mindim = v.to_vec();
        self
    }

    pub fn maxiter(mut self, v: &[usize]) -> Self {
        self.maxiter = v.to_vec();
        self
    }

    pub fn check(&self) -> Result<()> {
        let bad = |m: &str| Err(MpsError::BadSweeps(m.to_string()));
        if self.nsweep == 0 {
            return bad("nsweep must be positive");
        }
        if self.maxdim.is_empty() || self.cutoff.is_empty() || self.mindim.is_empty() || self.maxiter.is_empty() {
            return bad("schedules must be nonempty");
        }
        if self.maxdim.contains(&0) || self.mindim.contains(&0) || self.maxiter.contains(&0) {
            return bad("maxdim, mindim and maxiter must be positive");
        }
        if self.cutoff.iter().any(|c| c.is_nan() || *c < 0.0) {
            return bad("cutoffs must be non-negative");
        }
        if self.krylov_dim < 2 {
            return bad("Krylov dimension must be at least 2");
        }
        Ok(())
    }

    fn at<T: Copy>(v: &[T], sweep: usize) -> T {
        v[(sweep - 1).min(v.len() - 1)]
    }

    /// Truncation for 1-based `sweep`.
    pub fn trunc(&self, sweep: usize) -> TruncParams {
        let m = Self::at(&self.maxdim, sweep);
        TruncParams {
            cutoff: Self::at(&self.cutoff, sweep),
            maxdim: (m != usize::MAX).then_some(m),
            mindim: Self::at(&self.mindim, sweep),
        }
    }

    pub fn maxiter_at(&self, sweep: usize) -> usize {
        Self::at(&self.maxiter, sweep)
    }
}
