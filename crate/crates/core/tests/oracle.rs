mod common;

use common::{c, expm};
use dephasing::oracle::{sample_trajectory, DisorderRealization};
use dephasing::{
    ensemble_single, ensemble_two, evolve_single, sample_propagator, single_particle_generator, Complex64,
    DensityMatrix, EnsembleConfig, Network, NoiseModel, NoiseSpec, PureAmplitude, Statistics, TrimerPreset,
};

fn decoupled_pair(beta: [f64; 2], gamma: [f64; 2]) -> Network {
    Network::new(vec![vec![0.0; 2]; 2], beta.to_vec(), gamma.to_vec()).unwrap()
}

fn e(n: usize, site: usize) -> Vec<Complex64> {
    let mut v = vec![c(0.0); n];
    v[site] = c(1.0);
    v
}

#[test]
fn noiseless_propagator_is_the_matrix_exponential() {
    let net = Network::trimer(TrimerPreset::Noiseless);
    let h = net.hamiltonian().map(c);
    for model in [NoiseModel::PiecewiseConstantSegments, NoiseModel::WhiteNoiseWiener { step: 1e-3 }] {
        let noise = NoiseSpec::new(vec![0.0; 3], 0.5, model).unwrap();
        for (z, u) in sample_propagator(&net, &noise, 99, 6.0).unwrap() {
            let reference = expm(&(&h * Complex64::new(0.0, z)));
            let dev = (&u.matrix - reference).iter().map(|x| x.norm()).fold(0.0, f64::max);
            assert!(dev < 1e-8, "{model:?} z={z}: {dev:e}");
        }
    }
}

#[test]
fn twelve_segments_give_twelve_unitary_checkpoints() {
    let net = Network::trimer(TrimerPreset::Classical);
    let sigma = TrimerPreset::Classical.segment_sigma().to_vec();
    let noise = NoiseSpec::new(sigma, 1.0, NoiseModel::PiecewiseConstantSegments).unwrap();
    let checkpoints = sample_propagator(&net, &noise, 7, 12.0).unwrap();
    assert_eq!(checkpoints.len(), 12);
    for (k, (z, u)) in checkpoints.iter().enumerate() {
        assert_eq!(*z, (k + 1) as f64);
        assert!(u.unitarity_error() < 1e-9);
    }
    let r = DisorderRealization::sample(&noise, 7, 0, 12);
    assert_eq!(r.segment_energies.len(), 12);
    assert_eq!(r, DisorderRealization::sample(&noise, 7, 0, 12));
}

#[test]
fn single_site_amplitude_dephases_at_half_gamma() {
    let (beta, gamma) = (0.8, 1.5);
    let net = decoupled_pair([beta, 0.0], [gamma, 0.0]);
    let noise = NoiseSpec::matching(&net, 0.1, NoiseModel::PiecewiseConstantSegments).unwrap();
    let m = 10_000;
    let z_max = 2.0;
    let mut sums = vec![c(0.0); 20];
    for index in 0..m {
        for (k, (_, u)) in sample_trajectory(&net, &noise, 2024, index, z_max).unwrap().into_iter().enumerate() {
            sums[k] += u.matrix[(0, 0)];
        }
    }
    for (k, s) in sums.iter().enumerate() {
        let z = 0.1 * (k + 1) as f64;
        let mean = s / m as f64;
        let expected = Complex64::from_polar((-gamma * z / 2.0).exp(), beta * z);
        // per-trajectory spread is at most 1
        assert!((mean - expected).norm() < 4.0 / (m as f64).sqrt(), "z={z}: {mean} vs {expected}");
    }
}

#[test]
fn decoupled_dimer_coherence_decays_at_mean_rate() {
    let net = decoupled_pair([0.3, -0.2], [1.1, 0.7]);
    let noise = NoiseSpec::matching(&net, 0.1, NoiseModel::PiecewiseConstantSegments).unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let config = EnsembleConfig { trajectories: 10_000, seed: 11, parallel: true };
    let z_grid: Vec<f64> = (1..=15).map(|k| 0.1 * k as f64).collect();
    let ens = ensemble_single(&net, &noise, &[c(s), c(s)], config, &z_grid).unwrap();
    // least-squares slope of ln|ρ₁₂| against z through the known intercept ln ½
    let (mut num, mut den) = (0.0, 0.0);
    for (z, rho) in ens.record.iter() {
        let y = (2.0 * rho.get(0, 1).norm()).ln();
        num += z * y;
        den += z * z;
    }
    let fitted = -num / den;
    let expected = (1.1 + 0.7) / 2.0;
    assert!((fitted - expected).abs() < 0.05 * expected, "Γ = {fitted}, expected {expected}");
}

#[test]
fn parallel_and_serial_ensembles_are_bit_identical() {
    let net = Network::trimer(TrimerPreset::Quantum);
    let noise = NoiseSpec::matching(&net, 0.05, NoiseModel::PiecewiseConstantSegments).unwrap();
    let inputs = [PureAmplitude::pair(3, 0, 1, Statistics::Boson, 1.0)];
    let run = |parallel| {
        let config = EnsembleConfig { trajectories: 150, seed: 5, parallel };
        ensemble_two(&net, &noise, &inputs, config, &[1.0, 2.0]).unwrap()
    };
    let (a, b) = (run(true), run(false));
    assert_eq!(a.record.snapshots, b.record.snapshots);
    assert_eq!(a.max_std_error.to_bits(), b.max_std_error.to_bits());
    assert_eq!(run(false).record.snapshots, b.record.snapshots);
}

#[test]
fn single_trajectory_without_noise_stays_pure() {
    let net = Network::trimer(TrimerPreset::Classical);
    let noise = NoiseSpec::new(vec![0.0; 3], 1.0, NoiseModel::PiecewiseConstantSegments).unwrap();
    let config = EnsembleConfig { trajectories: 1, seed: 0, parallel: false };
    let ens = ensemble_single(&net, &noise, &e(3, 0), config, &[1.0, 5.0, 12.0]).unwrap();
    for (_, rho) in ens.record.iter() {
        assert!((rho.purity() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn fermion_ensemble_never_populates_a_shared_site() {
    let net = Network::trimer(TrimerPreset::Quantum);
    let noise = NoiseSpec::matching(&net, 0.1, NoiseModel::PiecewiseConstantSegments).unwrap();
    let config = EnsembleConfig { trajectories: 64, seed: 3, parallel: false };
    let inputs = [PureAmplitude::pair(3, 0, 2, Statistics::Fermion, 1.0)];
    let ens = ensemble_two(&net, &noise, &inputs, config, &[2.0, 6.0]).unwrap();
    for (_, rho) in ens.record.iter() {
        for p in 0..3 {
            assert_eq!(rho.get(p * 3 + p, p * 3 + p), c(0.0));
        }
    }
}

#[test]
fn mixed_inputs_keep_unit_trace() {
    let net = Network::trimer(TrimerPreset::Quantum);
    let noise = NoiseSpec::matching(&net, 0.1, NoiseModel::PiecewiseConstantSegments).unwrap();
    let config = EnsembleConfig { trajectories: 64, seed: 4, parallel: false };
    let correlated = [
        PureAmplitude::pair(3, 0, 0, Statistics::Boson, 0.5),
        PureAmplitude::pair(3, 1, 1, Statistics::Boson, 0.5),
    ];
    let distinguishable = [
        PureAmplitude::pair(3, 0, 1, Statistics::Distinguishable, 0.5),
        PureAmplitude::pair(3, 1, 0, Statistics::Distinguishable, 0.5),
    ];
    for inputs in [&correlated[..], &distinguishable[..]] {
        let ens = ensemble_two(&net, &noise, inputs, config, &[0.0, 3.0, 6.0]).unwrap();
        for (_, rho) in ens.record.iter() {
            assert!((rho.trace() - c(1.0)).norm() < 1e-12);
        }
        let sidecar = ens.sidecar();
        assert_eq!(sidecar["M"], 64);
        assert_eq!(sidecar["seed"], 4);
        assert_eq!(sidecar["model"]["kind"], "piecewise_constant_segments");
        assert!(sidecar["max_std_error"].as_f64().unwrap() > 0.0);
    }
}

#[test]
fn white_noise_backend_agrees_with_master_equation() {
    let net = Network::trimer(TrimerPreset::Classical);
    let noise = NoiseSpec::matching(&net, 0.01, NoiseModel::WhiteNoiseWiener { step: 1e-3 }).unwrap();
    let config = EnsembleConfig { trajectories: 1000, seed: 8, parallel: true };
    let ens = ensemble_single(&net, &noise, &e(3, 0), config, &[2.0, 4.0]).unwrap();
    let gen = single_particle_generator(&net);
    let theory = evolve_single(&gen, &DensityMatrix::site_state(3, 0).unwrap(), 4.0, 1e-3, 2000).unwrap();
    for (z, rho) in ens.record.iter() {
        let reference = theory.at(z).unwrap();
        let dev = rho
            .to_row_major()
            .iter()
            .zip(reference.to_row_major())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(dev < 0.05, "z={z}: {dev}");
    }
}

#[test]
fn oversized_euler_maruyama_step_is_rejected() {
    let net = Network::trimer(TrimerPreset::Classical);
    let noise = NoiseSpec::matching(&net, 0.1, NoiseModel::WhiteNoiseWiener { step: 0.1 }).unwrap();
    let config = EnsembleConfig { trajectories: 1, seed: 0, parallel: false };
    assert!(matches!(
        ensemble_single(&net, &noise, &e(3, 0), config, &[1.0]),
        Err(dephasing::Error::StepTooLarge(_))
    ));
}
