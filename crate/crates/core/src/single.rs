//! Single-particle dynamics: populations and coherences along `z`.

use crate::density::{BasisTag, DensityMatrix};
use crate::error::{Error, Result};
use crate::evolution::{integrate, EvolutionRecord};
use crate::generator::Generator;

/// Integrates the single-particle master equation with fixed-step RK4.
pub fn evolve_single(
    gen: &Generator,
    rho0: &DensityMatrix,
    z_max: f64,
    dz: f64,
    sample_every: usize,
) -> Result<EvolutionRecord> {
    if gen.basis().tag != BasisTag::Site {
        return Err(Error::BasisMismatch("evolve_single needs a single-particle generator".into()));
    }
    integrate(gen, rho0, z_max, dz, sample_every, |_| {}, |_, _| Ok(()))
}

/// Site populations `ρ_nn`.
pub fn populations(rho: &DensityMatrix) -> Result<Vec<f64>> {
    if rho.basis().tag != BasisTag::Site {
        return Err(Error::BasisMismatch("populations are defined on the site basis".into()));
    }
    Ok(rho.diagonal())
}

/// `|ρ_nm(z)|` for one pair `n < m`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceTrace {
    pub n: usize,
    pub m: usize,
    pub values: Vec<f64>,
}

/// Magnitudes of every off-diagonal element `n < m` along the record.
pub fn coherence_magnitudes(record: &EvolutionRecord) -> Result<Vec<CoherenceTrace>> {
    let Some(basis) = record.basis() else {
        return Ok(Vec::new());
    };
    if basis.tag != BasisTag::Site {
        return Err(Error::BasisMismatch("coherence magnitudes are defined on the site basis".into()));
    }
    let d = basis.size();
    let mut out = Vec::with_capacity(d * (d - 1) / 2);
    for n in 0..d {
        for m in n + 1..d {
            let values = record.snapshots.iter().map(|rho| rho.get(n, m).norm()).collect();
            out.push(CoherenceTrace { n, m, values });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::Basis;
    use crate::generator::{single_particle_generator, two_particle_generator};
    use crate::network::{Network, TrimerPreset};

    #[test]
    fn populations_of_basis_and_mixed_states() {
        let rho = DensityMatrix::site_state(3, 0).unwrap();
        assert_eq!(populations(&rho).unwrap(), vec![1.0, 0.0, 0.0]);
        let mixed = DensityMatrix::maximally_mixed(Basis::site(3));
        assert_eq!(populations(&mixed).unwrap(), vec![1.0 / 3.0; 3]);
        let pair = DensityMatrix::maximally_mixed(Basis::ordered_pair(3));
        assert!(populations(&pair).is_err());
    }

    #[test]
    fn trivial_generator_is_stationary() {
        let net = Network::new(vec![vec![0.0; 3]; 3], vec![0.5, 0.5, 0.5], vec![0.0; 3]).unwrap();
        let gen = single_particle_generator(&net);
        let s = (1.0_f64 / 3.0).sqrt();
        let psi = [num_complex::Complex64::new(s, 0.0), num_complex::Complex64::new(0.0, s), num_complex::Complex64::new(-s, 0.0)];
        let rho0 = DensityMatrix::pure(Basis::site(3), &psi).unwrap();
        let rec = evolve_single(&gen, &rho0, 2.0, 1e-2, 10).unwrap();
        for rho in &rec.snapshots {
            for (a, b) in rho.to_row_major().iter().zip(rho0.to_row_major()) {
                assert!((a - b).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn sampling_includes_endpoints() {
        let gen = single_particle_generator(&Network::trimer(TrimerPreset::Classical));
        let rho0 = DensityMatrix::site_state(3, 0).unwrap();
        let rec = evolve_single(&gen, &rho0, 1.05, 1e-2, 10).unwrap();
        assert_eq!(rec.z_grid.first(), Some(&0.0));
        assert_eq!(rec.z_grid.last(), Some(&1.05));
        assert_eq!(rec.len(), rec.snapshots.len());
        assert_eq!(coherence_magnitudes(&rec).unwrap().len(), 3);
    }

    #[test]
    fn rejects_mismatched_inputs() {
        let gen = single_particle_generator(&Network::trimer(TrimerPreset::Classical));
        let two = two_particle_generator(&Network::trimer(TrimerPreset::Classical));
        let rho0 = DensityMatrix::site_state(3, 0).unwrap();
        assert!(evolve_single(&two, &rho0, 1.0, 1e-2, 1).is_err());
        assert!(evolve_single(&gen, &rho0, 1.0, -1e-2, 1).is_err());
        let wrong = DensityMatrix::site_state(2, 0).unwrap();
        assert!(evolve_single(&gen, &wrong, 1.0, 1e-2, 1).is_err());
    }

    #[test]
    fn oversized_step_trips_invariant_check() {
        // RK4 is unstable at dz·|λ| ≫ 3, so the trace (or positivity) check must fire.
        let net = Network::trimer(TrimerPreset::Classical).with_dephasing_scale(50.0).unwrap();
        let gen = single_particle_generator(&net);
        let rho0 = DensityMatrix::site_state(3, 0).unwrap();
        let err = evolve_single(&gen, &rho0, 20.0, 0.5, 1).unwrap_err();
        assert!(matches!(err, Error::InvariantViolation { .. }), "{err:?}");
    }
}
