//! Executes a resolved experiment and writes its outputs.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use dephasing::{
    certify_dfs, coherence_norm, detect_steady_state, ensemble_single, ensemble_two, evolve_single, evolve_two,
    exchange_coherence_block, joint_probability, relative_entropy_coherence, similarity, single_particle_generator,
    trace_distance, two_particle_generator, Basis, CoherenceSeries, Complex64, CorrelationMatrix, DensityMatrix,
    EnsembleConfig, EvolutionRecord, Generator, Network, NoiseSpec, PureAmplitude, Statistics, TwoParticleState,
};
use serde_json::{json, Value};

use crate::config::{ConfigError, ExperimentConfig, ExplicitBasis, InitialState, Mode, OracleConfig};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{}: {}", .0.kind(), .0)]
    Engine(#[from] dephasing::Error),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Engine(e) if !e.is_input_error() => 3,
            _ => 2,
        }
    }
}

/// Output directory that remembers every file written to it.
struct Outputs {
    root: PathBuf,
    files: Vec<String>,
}

impl Outputs {
    fn write<F>(&mut self, name: &str, body: F) -> Result<(), RunError>
    where
        F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    {
        let path = self.root.join(name);
        let io = |source| RunError::Io { path: path.clone(), source };
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(io)?;
        }
        let mut w = BufWriter::new(File::create(&path).map_err(io)?);
        body(&mut w).and_then(|_| w.flush()).map_err(io)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn json(&mut self, name: &str, value: &Value) -> Result<(), RunError> {
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            writeln!(w)
        })
    }
}

fn join(prefix: &str, name: &str) -> String {
    if prefix.is_empty() {
        name.to_string()
    } else {
        format!("{prefix}/{name}")
    }
}

fn matrix_rows(re: &[Vec<f64>], im: Option<&Vec<Vec<f64>>>) -> Vec<Complex64> {
    let mut flat = Vec::new();
    for (r, row) in re.iter().enumerate() {
        for (c, &x) in row.iter().enumerate() {
            let y = im.map_or(0.0, |m| m[r][c]);
            flat.push(Complex64::new(x, y));
        }
    }
    flat
}

fn single_state(state: &InitialState, n: usize) -> Result<DensityMatrix, RunError> {
    Ok(match state {
        InitialState::Site { site } => DensityMatrix::site_state(n, site - 1)?,
        InitialState::Explicit { re, im, .. } => DensityMatrix::from_row_major(Basis::site(n), &matrix_rows(re, im.as_ref()))?,
        _ => unreachable!("validated as a single-particle state"),
    })
}

fn two_state(state: &InitialState, net: &Network) -> Result<TwoParticleState, RunError> {
    Ok(match *state {
        InitialState::Separable { p, q, statistics } => TwoParticleState::separable_pair(net, p - 1, q - 1, statistics)?,
        InitialState::Entangled { p, q } => TwoParticleState::entangled_nn(net, p - 1, q - 1, Statistics::Boson)?,
        InitialState::ClassicallyCorrelated { p, q } => {
            TwoParticleState::classically_correlated_mix(net, p - 1, q - 1, Statistics::Boson)?
        }
        InitialState::Distinguishable { p, q } => TwoParticleState::distinguishable_incoherent(net, p - 1, q - 1)?,
        InitialState::Explicit { ref re, ref im, statistics, basis } => {
            debug_assert_eq!(basis, ExplicitBasis::OrderedPair);
            let basis = Basis::ordered_pair(net.n_sites());
            TwoParticleState::new(DensityMatrix::from_row_major(basis, &matrix_rows(re, im.as_ref()))?, statistics)?
        }
        InitialState::Site { .. } => unreachable!("validated as a two-particle state"),
    })
}

fn amplitudes(state: &InitialState, n: usize) -> Result<Vec<PureAmplitude>, RunError> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Ok(match *state {
        InitialState::Separable { statistics: Statistics::Distinguishable, .. } => {
            return Err(dephasing::Error::InvalidParameter {
                name: "statistics",
                reason: "separable pairs are symmetrized; use the distinguishable state".into(),
            }
            .into())
        }
        InitialState::Separable { p, q, statistics } => vec![PureAmplitude::pair(n, p - 1, q - 1, statistics, 1.0)],
        InitialState::Entangled { p, q } => vec![PureAmplitude::superposition(
            n,
            &[((p - 1, p - 1), Complex64::new(h, 0.0)), ((q - 1, q - 1), Complex64::new(h, 0.0))],
            Statistics::Boson,
            1.0,
        )],
        InitialState::ClassicallyCorrelated { p, q } => vec![
            PureAmplitude::pair(n, p - 1, p - 1, Statistics::Boson, 0.5),
            PureAmplitude::pair(n, q - 1, q - 1, Statistics::Boson, 0.5),
        ],
        InitialState::Distinguishable { p, q } => vec![
            PureAmplitude::pair(n, p - 1, q - 1, Statistics::Distinguishable, 0.5),
            PureAmplitude::pair(n, q - 1, p - 1, Statistics::Distinguishable, 0.5),
        ],
        _ => unreachable!("validated as a named two-particle state"),
    })
}

fn nested(g: &CorrelationMatrix) -> Vec<Vec<f64>> {
    g.g2.chunks(g.n).map(<[f64]>::to_vec).collect()
}

fn steady_report(cfg: &ExperimentConfig, gen: &Generator, rec: &EvolutionRecord) -> Result<Value, RunError> {
    let (z, rho) = rec.last().expect("record has samples");
    let onset = detect_steady_state(gen, rec, cfg.steady_state_tol)?;
    let mut report = json!({
        "z": z,
        "steady_state_tol": cfg.steady_state_tol,
        "steady_state_onset": onset,
        "residual": gen.residual(rho)?,
        "c_norm": coherence_norm(rho),
        "c_rel_entropy": relative_entropy_coherence(rho)?,
    });
    if rho.basis() == Basis::site(rho.dim()) {
        report["populations"] = json!(rho.diagonal());
    } else {
        report["g2"] = json!(nested(&joint_probability(rho)?));
        let exchange: Vec<Value> = exchange_coherence_block(rho)?
            .into_iter()
            .map(|((p, q), v)| json!({"pair": [p + 1, q + 1], "re": v.re, "im": v.im}))
            .collect();
        report["exchange_coherences"] = json!(exchange);
    }
    Ok(report)
}

fn write_record(out: &mut Outputs, prefix: &str, rec: &EvolutionRecord) -> Result<(), RunError> {
    out.write(&join(prefix, "evolution.csv"), |w| rec.write_csv(w))?;
    let series = CoherenceSeries::from_record(rec)?;
    out.write(&join(prefix, "coherence.csv"), |w| series.write_csv(w))
}

fn write_g2(out: &mut Outputs, prefix: &str, stem: &str, rho: &DensityMatrix) -> Result<CorrelationMatrix, RunError> {
    let g = joint_probability(rho)?;
    out.write(&join(prefix, &format!("{stem}.csv")), |w| g.write_csv(w))?;
    out.json(&join(prefix, &format!("{stem}.json")), &g.to_json())?;
    Ok(g)
}

fn oracle_grid(cfg: &ExperimentConfig, oracle: &OracleConfig) -> Result<Vec<f64>, RunError> {
    let k = (cfg.z_max / oracle.record_every).round();
    if (k * oracle.record_every - cfg.z_max).abs() > 1e-9 * cfg.z_max {
        return Err(ConfigError::Invalid {
            field: "z_max",
            reason: format!("{} is not a multiple of oracle.record_every = {}", cfg.z_max, oracle.record_every),
        }
        .into());
    }
    Ok((0..=k as usize).map(|i| i as f64 * oracle.record_every).collect())
}

/// Theory run sampled on the oracle's grid.
fn theory_every(cfg: &ExperimentConfig, oracle: &OracleConfig) -> Result<usize, RunError> {
    let steps = oracle.record_every / cfg.dz;
    if (steps - steps.round()).abs() > 1e-6 || steps.round() < 1.0 {
        return Err(ConfigError::Invalid {
            field: "dz",
            reason: format!("oracle.record_every = {} is not a whole number of steps", oracle.record_every),
        }
        .into());
    }
    Ok(steps.round() as usize)
}

fn comparison(ensemble: &EvolutionRecord, theory: &EvolutionRecord) -> (Vec<f64>, Vec<f64>) {
    let mut zs = Vec::new();
    let mut devs = Vec::new();
    for (z, rho) in ensemble.iter() {
        if let Some(reference) = theory.at(z) {
            let dev = rho
                .to_row_major()
                .iter()
                .zip(reference.to_row_major())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            zs.push(z);
            devs.push(dev);
        }
    }
    (zs, devs)
}

fn run_once(cfg: &ExperimentConfig, net: &Network, out: &mut Outputs, prefix: &str) -> Result<(), RunError> {
    let n = net.n_sites();
    let state = cfg.initial_state.as_ref();
    match cfg.mode {
        Mode::Single => {
            let gen = single_particle_generator(net);
            let rec = evolve_single(&gen, &single_state(state.unwrap(), n)?, cfg.z_max, cfg.dz, cfg.sample_every)?;
            write_record(out, prefix, &rec)?;
            out.json(&join(prefix, "steady_state.json"), &steady_report(cfg, &gen, &rec)?)?;
        }
        Mode::Two => {
            let gen = two_particle_generator(net);
            let rec = evolve_two(&gen, &two_state(state.unwrap(), net)?, cfg.z_max, cfg.dz, cfg.sample_every)?;
            write_record(out, prefix, &rec)?;
            write_g2(out, prefix, "g2", rec.last().unwrap().1)?;
            out.json(&join(prefix, "steady_state.json"), &steady_report(cfg, &gen, &rec)?)?;
        }
        Mode::OracleSingle | Mode::OracleTwo => {
            let oracle = cfg.oracle.clone().unwrap_or_default();
            let grid = oracle_grid(cfg, &oracle)?;
            let noise = NoiseSpec::matching(net, oracle.segment_length, oracle.noise_model())?;
            let config = EnsembleConfig { trajectories: oracle.m, seed: oracle.seed, parallel: true };
            let every = theory_every(cfg, &oracle)?;
            let state = state.unwrap();
            let (ens, theory) = if cfg.mode == Mode::OracleSingle {
                let rho0 = single_state(state, n)?;
                let psi: Vec<Complex64> = rho0.diagonal().iter().map(|&p| Complex64::new(p.sqrt(), 0.0)).collect();
                let ens = ensemble_single(net, &noise, &psi, config, &grid)?;
                let theory = evolve_single(&single_particle_generator(net), &rho0, cfg.z_max, cfg.dz, every)?;
                (ens, theory)
            } else {
                let ens = ensemble_two(net, &noise, &amplitudes(state, n)?, config, &grid)?;
                let theory = evolve_two(&two_particle_generator(net), &two_state(state, net)?, cfg.z_max, cfg.dz, every)?;
                (ens, theory)
            };
            write_record(out, prefix, &ens.record)?;
            out.json(&join(prefix, "oracle.json"), &ens.sidecar())?;
            let (zs, devs) = comparison(&ens.record, &theory);
            let mut cmp = json!({"z": zs, "max_abs_deviation": devs});
            if cfg.mode == Mode::OracleTwo {
                let sampled = write_g2(out, prefix, "g2", ens.record.last().unwrap().1)?;
                let predicted = joint_probability(theory.last().unwrap().1)?;
                cmp["similarity_g2"] = json!(similarity(&predicted, &sampled)?);
            }
            out.json(&join(prefix, "comparison.json"), &cmp)?;
        }
        Mode::Analyze => {
            let (p, q) = state.and_then(InitialState::pair).unwrap_or((1, 2));
            let gen = two_particle_generator(net);
            let mut finals = Vec::new();
            let mut entries = Vec::new();
            for canonical in &cfg.compare_states {
                let name = canonical.name();
                let input = two_state(&canonical.initial_state(p, q), net)?;
                let rec = evolve_two(&gen, &input, cfg.z_max, cfg.dz, cfg.sample_every)?;
                let series = CoherenceSeries::from_record(&rec)?;
                out.write(&join(prefix, &format!("coherence_{name}.csv")), |w| series.write_csv(w))?;
                let rho = rec.last().unwrap().1.clone();
                let g = write_g2(out, prefix, &format!("g2_{name}"), &rho)?;
                entries.push(json!({
                    "name": name,
                    "g2": nested(&g),
                    "c_norm": coherence_norm(&rho),
                    "c_rel_entropy": relative_entropy_coherence(&rho)?,
                    "steady_state_onset": detect_steady_state(&gen, &rec, cfg.steady_state_tol)?,
                    "residual": gen.residual(&rho)?,
                }));
                finals.push(rho);
            }
            let mut distances = vec![vec![0.0; finals.len()]; finals.len()];
            for i in 0..finals.len() {
                for j in 0..finals.len() {
                    distances[i][j] = trace_distance(&finals[i], &finals[j])?;
                }
            }
            let labels: Vec<&str> = cfg.compare_states.iter().map(|s| s.name()).collect();
            out.json(
                &join(prefix, "analysis.json"),
                &json!({
                    "z": cfg.z_max,
                    "pair": [p, q],
                    "states": entries,
                    "trace_distance": {"labels": labels, "matrix": distances},
                }),
            )?;
        }
        Mode::Dfs => {
            let report = certify_dfs(&two_particle_generator(net), n)?;
            out.json(&join(prefix, "dfs_report.json"), &serde_json::to_value(&report).expect("report serializes"))?;
        }
    }
    Ok(())
}

/// Runs the experiment (every sweep factor, if any) and writes
/// `manifest.json`. Returns the written files relative to `output_dir`.
pub fn run(cfg: &ExperimentConfig, net: &Network, preset: Option<&str>) -> Result<Vec<String>, RunError> {
    let root = cfg.output_dir.clone();
    std::fs::create_dir_all(&root).map_err(|source| RunError::Io { path: root.clone(), source })?;
    let mut out = Outputs { root, files: Vec::new() };
    match &cfg.dephasing_sweep {
        Some(factors) => {
            for &f in factors {
                let scaled = net.with_dephasing_scale(cfg.dephasing_scale * f)?;
                run_once(cfg, &scaled, &mut out, &format!("scale-{f}"))?;
            }
        }
        None => run_once(cfg, &net.with_dephasing_scale(cfg.dephasing_scale)?, &mut out, "")?,
    }
    out.files.sort();
    let manifest = json!({
        "tool": concat!("dephasing ", env!("CARGO_PKG_VERSION")),
        "preset": preset,
        "config": cfg,
        "outputs": out.files,
    });
    out.json("manifest.json", &manifest)?;
    Ok(out.files)
}

pub fn base_dir(config_path: Option<&Path>) -> PathBuf {
    config_path.and_then(Path::parent).map_or_else(|| PathBuf::from("."), Path::to_path_buf)
}
