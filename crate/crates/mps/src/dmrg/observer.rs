use crate::mps::Mps;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    LeftToRight,
    RightToLeft,
}

/// State of a run after one local update.
#[derive(Clone, Copy, Debug)]
pub struct StepInfo<'a> {
    pub sweep: usize,
    pub bond: usize,
    pub direction: Direction,
    /// Lowest local eigenvalue, penalties included.
    pub energy: f64,
    pub truncerr: f64,
    pub psi: &'a Mps,
}

/// Callbacks invoked during a run. `measure` sees every local update;
/// `checkdone` is asked after each full sweep and stops the run by
/// returning true.
pub trait Observer {
    fn measure(&mut self, _step: &StepInfo<'_>) {}

    fn checkdone(&mut self, _step: &StepInfo<'_>) -> bool {
        false
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct NoObserver;

impl Observer for NoObserver {}

/// Stops once successive sweep energies differ by less than `tol`.
#[derive(Clone, Debug)]
pub struct EnergyObserver {
    pub tol: f64,
    pub energies: Vec<f64>,
}

impl EnergyObserver {
    pub fn new(tol: f64) -> Self {
        EnergyObserver {
            tol,
            energies: Vec::new(),
        }
    }
}

impl Observer for EnergyObserver {
    fn checkdone(&mut self, step: &StepInfo<'_>) -> bool {
        let done = self.energies.last().is_some_and(|e| (e - step.energy).abs() < self.tol);
        self.energies.push(step.energy);
        done
    }
}

/// Records a local observable at the orthogonality center after every
/// update.
#[derive(Clone, Debug)]
pub struct LocalObserver {
    pub op: String,
    /// `(sweep, center site, ⟨op⟩)`.
    pub values: Vec<(usize, usize, f64)>,
}

impl LocalObserver {
    pub fn new(op: &str) -> Self {
        LocalObserver {
            op: op.to_string(),
            values: Vec::new(),
        }
    }
}

impl Observer for LocalObserver {
    fn measure(&mut self, step: &StepInfo<'_>) {
        use crate::sitetypes::op;
        let psi = step.psi;
        let Some(c) = psi.ortho_center() else { return };
        let a = psi.get(c);
        let s = psi.siteind(c);
        let Ok(o) = op(&self.op, &s) else { return };
        let Ok(bra) = a.dag().prime_inds(std::slice::from_ref(&s)) else {
            return;
        };
        let Ok(v) = (&(&bra * &o) * a).scalar() else { return };
        self.values.push((step.sweep, c, v.re / a.norm().powi(2)));
    }
}
