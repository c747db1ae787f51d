mod common;

use common::{lindblad_single, max_abs_diff, propagate};
use dephasing::{
    coherence_magnitudes, coherence_norm, evolve_single, populations, relative_entropy_coherence,
    single_particle_generator, Basis, DensityMatrix, Network, TrimerPreset,
};

fn from_site_one(net: &Network, z_max: f64, dz: f64, every: usize) -> dephasing::EvolutionRecord {
    let gen = single_particle_generator(net);
    evolve_single(&gen, &DensityMatrix::site_state(3, 0).unwrap(), z_max, dz, every).unwrap()
}

#[test]
fn rk4_matches_matrix_exponential() {
    for preset in [TrimerPreset::Classical, TrimerPreset::Noiseless] {
        let net = Network::trimer(preset);
        let rec = from_site_one(&net, 12.0, 1e-3, 1000);
        let superop = lindblad_single(&net);
        for (z, rho) in rec.iter() {
            let reference = propagate(&superop, &rec.snapshots[0], z);
            assert!(max_abs_diff(rho, &reference) < 1e-10, "{preset:?} z={z}");
        }
    }
}

#[test]
fn halving_the_step_changes_final_state_by_less_than_1e7() {
    let net = Network::trimer(TrimerPreset::Classical);
    let coarse = from_site_one(&net, 12.0, 1e-3, 12_000);
    let fine = from_site_one(&net, 12.0, 5e-4, 24_000);
    let diff = max_abs_diff(coarse.last().unwrap().1, fine.last().unwrap().1);
    assert!(diff < 1e-7, "{diff:e}");
}

#[test]
fn noiseless_purity_is_conserved() {
    let rec = from_site_one(&Network::trimer(TrimerPreset::Noiseless), 12.0, 1e-3, 100);
    for (z, rho) in rec.iter() {
        assert!((rho.purity() - 1.0).abs() < 1e-8, "z={z}");
    }
}

#[test]
fn noiseless_transport_stays_in_upper_sites() {
    let rec = from_site_one(&Network::trimer(TrimerPreset::Noiseless), 12.0, 1e-3, 10);
    let worst = rec.snapshots.iter().map(|r| populations(r).unwrap()[2]).fold(0.0, f64::max);
    assert!(worst <= 0.10, "site-3 population reached {worst}");
}

#[test]
fn noiseless_coherence_revives() {
    let rec = from_site_one(&Network::trimer(TrimerPreset::Noiseless), 12.0, 1e-3, 10);
    let traces = coherence_magnitudes(&rec).unwrap();
    let rho12 = &traces.iter().find(|t| (t.n, t.m) == (0, 1)).unwrap().values;
    let first_min = (1..rho12.len() - 1)
        .find(|&k| rho12[k] < rho12[k - 1] && rho12[k] <= rho12[k + 1])
        .unwrap();
    let revival = rho12[first_min..].iter().copied().fold(0.0, f64::max);
    assert!(revival > 0.4, "max |rho_12| after first minimum is {revival}");
}

#[test]
fn steady_state_is_maximally_mixed() {
    let rec = from_site_one(&Network::trimer(TrimerPreset::Classical), 100.0, 1e-3, 1000);
    let last = rec.last().unwrap().1;
    let mixed = DensityMatrix::maximally_mixed(Basis::site(3));
    assert!(max_abs_diff(last, &mixed) < 1e-3);
    for p in populations(last).unwrap() {
        assert!((p - 1.0 / 3.0).abs() < 0.02);
    }
}

#[test]
fn weaker_dephasing_decays_coherences_more_slowly() {
    let net = Network::trimer(TrimerPreset::Classical);
    let at = |scale: f64| {
        let rec = from_site_one(&net.with_dephasing_scale(scale).unwrap(), 5.0, 1e-3, 100);
        let traces = coherence_magnitudes(&rec).unwrap();
        // envelope: running maximum over the last cm
        traces
            .iter()
            .map(|t| t.values[t.values.len() - 11..].iter().copied().fold(0.0, f64::max))
            .collect::<Vec<_>>()
    };
    let weak = at(0.3);
    let full = at(1.0);
    for (w, f) in weak.iter().zip(&full) {
        assert!(w >= f, "0.3γ envelope {w} below γ envelope {f}");
    }
}

#[test]
fn coherence_measures_decay_after_transient() {
    let rec = from_site_one(&Network::trimer(TrimerPreset::Classical), 12.0, 1e-3, 10);
    let cn: Vec<f64> = rec.snapshots.iter().map(coherence_norm).collect();
    let cre: Vec<f64> = rec.snapshots.iter().map(|r| relative_entropy_coherence(r).unwrap()).collect();
    let last = rec.len() - 1;
    // the initial site state carries no coherence; compare against the
    // build-up peak instead
    let early = rec.z_grid.iter().take_while(|&&z| z <= 2.0 + 1e-9).count();
    for series in [&cn, &cre] {
        assert!(series.iter().all(|&v| v >= -1e-10));
        let peak = series[..early].iter().copied().fold(0.0, f64::max);
        assert!(series[last] < 0.1 * peak, "{} vs peak {peak}", series[last]);
    }
    let k10 = rec.z_grid.iter().position(|&z| (z - 10.0).abs() < 1e-9).unwrap();
    // 2·Σ|ρ_nm| at z = 10 on the classical trimer
    assert!(cn[k10] < 0.05, "C_n(10) = {}", cn[k10]);
}

#[test]
fn csv_export_layout() {
    let rec = from_site_one(&Network::trimer(TrimerPreset::Classical), 0.2, 1e-2, 10);
    let mut buf = Vec::new();
    rec.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("z,rho_1_1_re,rho_1_1_im,rho_1_2_re,rho_1_2_im"));
    assert_eq!(header.split(',').count(), 1 + 2 * 9);
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "0");
    assert_eq!(first[1], "1");
    assert_eq!(lines.count(), 2);
}
