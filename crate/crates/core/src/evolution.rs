//! Fixed-step RK4 integration of `dρ/dz = G · vec(ρ)` and the resulting
//! evolution records.

use std::io::Write;

use num_complex::Complex64;

use crate::density::{Basis, DensityMatrix};
use crate::error::{Error, Result};
use crate::generator::Generator;

/// Default integration step (cm).
pub const DEFAULT_DZ: f64 = 1e-3;
/// Default number of steps between snapshots (0.1 cm at the default step).
pub const DEFAULT_SAMPLE_EVERY: usize = 100;
/// Default horizon for steady-state runs (cm).
pub const STEADY_STATE_HORIZON: f64 = 100.0;
/// Trace drift that aborts an integration.
pub const TRACE_DRIFT_TOL: f64 = 1e-6;

/// Snapshots of a density matrix along `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionRecord {
    pub z_grid: Vec<f64>,
    pub snapshots: Vec<DensityMatrix>,
    /// Integration step actually used; `None` for Monte Carlo ensembles.
    pub step: Option<f64>,
    pub network_fingerprint: u64,
}

impl EvolutionRecord {
    pub fn len(&self) -> usize {
        self.z_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z_grid.is_empty()
    }

    pub fn basis(&self) -> Option<Basis> {
        self.snapshots.first().map(DensityMatrix::basis)
    }

    pub fn last(&self) -> Option<(f64, &DensityMatrix)> {
        self.z_grid.last().copied().zip(self.snapshots.last())
    }

    /// Snapshot whose `z` is closest to the requested value.
    pub fn at(&self, z: f64) -> Option<&DensityMatrix> {
        let (k, _) = self
            .z_grid
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - z).abs().total_cmp(&(b.1 - z).abs()))?;
        self.snapshots.get(k)
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &DensityMatrix)> {
        self.z_grid.iter().copied().zip(&self.snapshots)
    }

    /// One row per sample: `z`, then Re/Im of every element in basis-index
    /// order, with a `rho_a_b_re,rho_a_b_im,...` header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let Some(basis) = self.basis() else {
            return writeln!(out, "z");
        };
        let d = basis.size();
        let mut header = String::from("z");
        for a in 0..d {
            for b in 0..d {
                let label = basis.element_label(a, b);
                header.push_str(&format!(",{label}_re,{label}_im"));
            }
        }
        writeln!(out, "{header}")?;
        for (z, rho) in self.iter() {
            let mut line = format!("{z}");
            for a in 0..d {
                for b in 0..d {
                    let v = rho.get(a, b);
                    line.push_str(&format!(",{},{}", v.re, v.im));
                }
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// Integration grid: `steps` RK4 steps of size `h` covering `[0, z_max]`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct StepPlan {
    pub steps: usize,
    pub h: f64,
}

impl StepPlan {
    /// `dz` is shrunk (never grown) so that an integer number of steps lands
    /// exactly on `z_max`.
    pub fn new(z_max: f64, dz: f64) -> Result<Self> {
        if !(dz.is_finite() && dz > 0.0) {
            return Err(Error::InvalidParameter { name: "dz", reason: format!("must be positive, got {dz}") });
        }
        if !(z_max.is_finite() && z_max >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "z_max",
                reason: format!("must be non-negative, got {z_max}"),
            });
        }
        if z_max == 0.0 {
            return Ok(Self { steps: 0, h: dz });
        }
        let steps = (z_max / dz - 1e-9).ceil().max(1.0) as usize;
        Ok(Self { steps, h: z_max / steps as f64 })
    }
}

/// Reusable buffers for classical RK4 on a linear ODE.
pub(crate) struct Rk4 {
    k1: Vec<Complex64>,
    k2: Vec<Complex64>,
    k3: Vec<Complex64>,
    k4: Vec<Complex64>,
    tmp: Vec<Complex64>,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        let zero = vec![Complex64::new(0.0, 0.0); dim];
        Self { k1: zero.clone(), k2: zero.clone(), k3: zero.clone(), k4: zero.clone(), tmp: zero }
    }

    pub fn step(&mut self, gen: &Generator, v: &mut [Complex64], h: f64) {
        let half = 0.5 * h;
        gen.apply(v, &mut self.k1);
        for ((t, x), k) in self.tmp.iter_mut().zip(v.iter()).zip(&self.k1) {
            *t = x + k * half;
        }
        gen.apply(&self.tmp, &mut self.k2);
        for ((t, x), k) in self.tmp.iter_mut().zip(v.iter()).zip(&self.k2) {
            *t = x + k * half;
        }
        gen.apply(&self.tmp, &mut self.k3);
        for ((t, x), k) in self.tmp.iter_mut().zip(v.iter()).zip(&self.k3) {
            *t = x + k * h;
        }
        gen.apply(&self.tmp, &mut self.k4);
        let sixth = h / 6.0;
        for (i, x) in v.iter_mut().enumerate() {
            *x += (self.k1[i] + (self.k2[i] + self.k3[i]) * 2.0 + self.k4[i]) * sixth;
        }
    }
}

/// Integrates `rho0` out to `z_max`, sampling every `sample_every` steps
/// and always at `z_max`.
///
/// `after_step` may project the state after each step; `check` runs on
/// each sampled snapshot in addition to the density-matrix invariants.
pub(crate) fn integrate<P, C>(
    gen: &Generator,
    rho0: &DensityMatrix,
    z_max: f64,
    dz: f64,
    sample_every: usize,
    mut after_step: P,
    mut check: C,
) -> Result<EvolutionRecord>
where
    P: FnMut(&mut [Complex64]),
    C: FnMut(f64, &DensityMatrix) -> Result<()>,
{
    gen.check_basis(rho0)?;
    if sample_every == 0 {
        return Err(Error::InvalidParameter { name: "sample_every", reason: "must be at least 1".into() });
    }
    let plan = StepPlan::new(z_max, dz)?;
    let basis = rho0.basis();
    let mut v = rho0.to_row_major();
    let mut rk = Rk4::new(v.len());
    let mut record = EvolutionRecord {
        z_grid: Vec::with_capacity(plan.steps / sample_every + 2),
        snapshots: Vec::with_capacity(plan.steps / sample_every + 2),
        step: Some(plan.h),
        network_fingerprint: gen.network_fingerprint(),
    };

    let mut sample = |z: f64, v: &[Complex64], record: &mut EvolutionRecord| -> Result<()> {
        let rho = DensityMatrix::from_row_major(basis, v)?;
        rho.validate(TRACE_DRIFT_TOL, z)?;
        check(z, &rho)?;
        record.z_grid.push(z);
        record.snapshots.push(rho);
        Ok(())
    };

    sample(0.0, &v, &mut record)?;
    for k in 1..=plan.steps {
        rk.step(gen, &mut v, plan.h);
        after_step(&mut v);
        if k % sample_every == 0 || k == plan.steps {
            let z = if k == plan.steps { z_max } else { k as f64 * plan.h };
            sample(z, &v, &mut record)?;
        }
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_plan_lands_on_z_max() {
        let plan = StepPlan::new(12.0, 1e-3).unwrap();
        assert_eq!(plan.steps, 12_000);
        assert!((plan.h * plan.steps as f64 - 12.0).abs() < 1e-12);
        let odd = StepPlan::new(1.0, 0.3).unwrap();
        assert_eq!(odd.steps, 4);
        assert!(odd.h <= 0.3);
        assert_eq!(StepPlan::new(0.0, 0.1).unwrap().steps, 0);
        assert!(StepPlan::new(1.0, 0.0).is_err());
        assert!(StepPlan::new(-1.0, 0.1).is_err());
    }
}
