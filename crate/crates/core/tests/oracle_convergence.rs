//! The trajectory average approaches the master equation as the ensemble
//! grows, with the error shrinking roughly like 1/sqrt(M).

use dephasing::{
    ensemble_single, ensemble_two, evolve_single, evolve_two, single_particle_generator, two_particle_generator,
    Complex64, DensityMatrix, EnsembleConfig, EvolutionRecord, Network, NoiseModel, NoiseSpec, PureAmplitude,
    Statistics, TrimerPreset, TwoParticleState,
};

const GRID: [f64; 3] = [4.0, 8.0, 12.0];
const SIZES: [usize; 3] = [500, 2000, 8000];
// Short segments keep the segment model in its Markov limit, so the
// remaining bias sits well below the M = 8000 sampling error.
const SEGMENT: f64 = 0.01;

fn max_dev(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    a.to_row_major().iter().zip(b.to_row_major()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn worst(record: &EvolutionRecord, theory: &EvolutionRecord) -> f64 {
    GRID.iter().map(|&z| max_dev(record.at(z).unwrap(), theory.at(z).unwrap())).fold(0.0, f64::max)
}

fn noise(net: &Network) -> NoiseSpec {
    NoiseSpec::matching(net, SEGMENT, NoiseModel::PiecewiseConstantSegments).unwrap()
}

fn config(m: usize) -> EnsembleConfig {
    EnsembleConfig { trajectories: m, seed: 2024, parallel: true }
}

fn assert_shrinks(label: &str, devs: [f64; 3]) {
    eprintln!("{label}: {devs:.4?}");
    assert!(devs[0] > devs[1] && devs[1] > devs[2], "{label}: not decreasing {devs:?}");
    // 1/sqrt(M) predicts a factor 4 from M = 500 to 8000
    assert!(devs[0] / devs[2] > 2.0, "{label}: ratio {:.2}", devs[0] / devs[2]);
}

#[test]
fn single_particle_error_shrinks_with_ensemble_size() {
    for preset in [TrimerPreset::Classical, TrimerPreset::Quantum] {
        let net = Network::trimer(preset);
        let rho0 = DensityMatrix::site_state(3, 0).unwrap();
        let theory = evolve_single(&single_particle_generator(&net), &rho0, 12.0, 1e-3, 1000).unwrap();
        let psi = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
        let devs = SIZES.map(|m| worst(&ensemble_single(&net, &noise(&net), &psi, config(m), &GRID).unwrap().record, &theory));
        assert_shrinks(&format!("{preset:?} site 1"), devs);
    }
}

#[test]
fn two_particle_error_shrinks_with_ensemble_size() {
    let net = Network::trimer(TrimerPreset::Quantum);
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let cases: Vec<(&str, TwoParticleState, Vec<PureAmplitude>)> = vec![
        (
            "separable boson",
            TwoParticleState::separable_pair(&net, 0, 1, Statistics::Boson).unwrap(),
            vec![PureAmplitude::pair(3, 0, 1, Statistics::Boson, 1.0)],
        ),
        (
            "separable fermion",
            TwoParticleState::separable_pair(&net, 0, 1, Statistics::Fermion).unwrap(),
            vec![PureAmplitude::pair(3, 0, 1, Statistics::Fermion, 1.0)],
        ),
        (
            "entangled",
            TwoParticleState::entangled_nn(&net, 0, 1, Statistics::Boson).unwrap(),
            vec![PureAmplitude::superposition(3, &[((0, 0), h), ((1, 1), h)], Statistics::Boson, 1.0)],
        ),
        (
            "classically correlated",
            TwoParticleState::classically_correlated_mix(&net, 0, 1, Statistics::Boson).unwrap(),
            vec![
                PureAmplitude::pair(3, 0, 0, Statistics::Boson, 0.5),
                PureAmplitude::pair(3, 1, 1, Statistics::Boson, 0.5),
            ],
        ),
        (
            "distinguishable",
            TwoParticleState::distinguishable_incoherent(&net, 0, 1).unwrap(),
            vec![
                PureAmplitude::pair(3, 0, 1, Statistics::Distinguishable, 0.5),
                PureAmplitude::pair(3, 1, 0, Statistics::Distinguishable, 0.5),
            ],
        ),
    ];
    let gen = two_particle_generator(&net);
    for (label, state, inputs) in cases {
        let theory = evolve_two(&gen, &state, 12.0, 1e-3, 1000).unwrap();
        let devs = SIZES.map(|m| worst(&ensemble_two(&net, &noise(&net), &inputs, config(m), &GRID).unwrap().record, &theory));
        assert_shrinks(label, devs);
    }
}
