//! Stochastic-trajectory Monte Carlo: explicit disorder realizations,
//! single-particle propagators, and ensemble-averaged correlation products.
//!
//! This path never touches the master-equation generators, so it serves as
//! an independent check on them. Every trajectory draws from its own
//! ChaCha8 stream `(master_seed, trajectory_index)`, and averages are
//! reduced in a fixed order (pairwise within fixed-size blocks, then
//! pairwise across blocks), so results do not depend on the worker count.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::density::{Basis, DensityMatrix};
use crate::error::{Error, Result};
use crate::evolution::EvolutionRecord;
use crate::network::{Network, NoiseModel, NoiseSpec};
use crate::two::Statistics;

/// Trajectories per reduction block.
const BLOCK: usize = 32;
/// Largest `step · max(γ, κ, |β|)` accepted by the Euler–Maruyama backend.
const MAX_EM_STEP_RATE: f64 = 0.05;

/// The random stream of trajectory `index` under `master_seed`.
pub fn trajectory_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Length of one propagation tick: a segment, or one Euler–Maruyama step.
fn tick_length(noise: &NoiseSpec) -> f64 {
    match noise.model {
        NoiseModel::PiecewiseConstantSegments => noise.correlation_length,
        NoiseModel::WhiteNoiseWiener { step } => step,
    }
}

/// Standard deviation of the per-tick site-energy offset.
fn offset_scale(noise: &NoiseSpec) -> Vec<f64> {
    match noise.model {
        NoiseModel::PiecewiseConstantSegments => noise.sigma.clone(),
        // √γ dW / dz with dW ~ N(0, dz)
        NoiseModel::WhiteNoiseWiener { step } => {
            noise.dephasing_rates().iter().map(|g| (g / step).sqrt()).collect()
        }
    }
}

fn check_noise(net: &Network, noise: &NoiseSpec) -> Result<()> {
    if noise.sigma.len() != net.n_sites() {
        return Err(Error::DimensionMismatch {
            expected: net.n_sites(),
            found: noise.sigma.len(),
            context: "noise standard deviations",
        });
    }
    if let NoiseModel::WhiteNoiseWiener { step } = noise.model {
        let rate = noise
            .dephasing_rates()
            .into_iter()
            .fold(net.max_rate(), f64::max);
        if step * rate > MAX_EM_STEP_RATE {
            return Err(Error::StepTooLarge(step * rate));
        }
    }
    Ok(())
}

/// Number of ticks that make up `z`, which must be a whole multiple.
fn ticks_for(z: f64, tick: f64) -> Result<usize> {
    if !(z.is_finite() && z >= 0.0) {
        return Err(Error::InvalidParameter { name: "z", reason: format!("must be non-negative, got {z}") });
    }
    let k = (z / tick).round();
    if (k * tick - z).abs() > 1e-9 * z.max(1.0) {
        return Err(Error::InvalidParameter {
            name: "z",
            reason: format!("{z} is not a multiple of the propagation tick {tick}"),
        });
    }
    Ok(k as usize)
}

/// Per-site energy offsets `φ_n` of one realization, one row per tick.
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderRealization {
    pub seed: u64,
    pub index: u64,
    /// `[tick][site]`.
    pub segment_energies: Vec<Vec<f64>>,
    pub segment_length: f64,
    pub model: NoiseModel,
}

impl DisorderRealization {
    pub fn sample(noise: &NoiseSpec, seed: u64, index: u64, ticks: usize) -> Self {
        let mut stream = NoiseStream::new(noise, trajectory_rng(seed, index));
        let mut buf = vec![0.0; noise.sigma.len()];
        let segment_energies = (0..ticks)
            .map(|_| {
                stream.fill(&mut buf);
                buf.clone()
            })
            .collect();
        Self { seed, index, segment_energies, segment_length: tick_length(noise), model: noise.model }
    }
}

struct NoiseStream {
    rng: ChaCha8Rng,
    scale: Vec<f64>,
}

impl NoiseStream {
    fn new(noise: &NoiseSpec, rng: ChaCha8Rng) -> Self {
        Self { rng, scale: offset_scale(noise) }
    }

    fn fill(&mut self, out: &mut [f64]) {
        for (o, s) in out.iter_mut().zip(&self.scale) {
            let x: f64 = StandardNormal.sample(&mut self.rng);
            *o = s * x;
        }
    }
}

/// Single-particle propagator `U(z)`; column `s` is the amplitude profile
/// of a particle launched at site `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagator {
    pub z: f64,
    pub matrix: DMatrix<Complex64>,
}

impl Propagator {
    /// `‖U†U − I‖_max`.
    pub fn unitarity_error(&self) -> f64 {
        let n = self.matrix.nrows();
        let gram = self.matrix.adjoint() * &self.matrix;
        let mut worst = 0.0_f64;
        for r in 0..n {
            for c in 0..n {
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((gram[(r, c)] - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

/// `exp(i H Δz) = V diag(e^{iλΔz}) Vᵀ` for real symmetric `H`.
fn unitary_step(h: DMatrix<f64>, dz: f64) -> DMatrix<Complex64> {
    let n = h.nrows();
    let eig = SymmetricEigen::new(h);
    let v = eig.eigenvectors;
    let phases: Vec<Complex64> = eig.eigenvalues.iter().map(|l| Complex64::from_polar(1.0, l * dz)).collect();
    DMatrix::from_fn(n, n, |r, c| {
        (0..n).fold(Complex64::new(0.0, 0.0), |acc, k| acc + phases[k] * (v[(r, k)] * v[(c, k)]))
    })
}

/// Propagates one disorder realization tick by tick.
struct Walker {
    n: usize,
    model: NoiseModel,
    tick: f64,
    beta: Vec<f64>,
    gamma: Vec<f64>,
    hamiltonian: DMatrix<f64>,
    /// `exp(i H Δz)` of the noiseless network, used by the Euler–Maruyama split step.
    coherent_step: DMatrix<Complex64>,
    stream: NoiseStream,
    offsets: Vec<f64>,
    u: DMatrix<Complex64>,
    scratch: DMatrix<Complex64>,
}

impl Walker {
    fn new(net: &Network, noise: &NoiseSpec, rng: ChaCha8Rng) -> Self {
        let n = net.n_sites();
        let tick = tick_length(noise);
        Self {
            n,
            model: noise.model,
            tick,
            beta: net.site_energies().to_vec(),
            gamma: noise.dephasing_rates(),
            hamiltonian: net.hamiltonian(),
            coherent_step: unitary_step(net.hamiltonian(), tick),
            stream: NoiseStream::new(noise, rng),
            offsets: vec![0.0; n],
            u: DMatrix::identity(n, n),
            scratch: DMatrix::zeros(n, n),
        }
    }

    fn advance(&mut self) {
        self.stream.fill(&mut self.offsets);
        for s in 0..self.n {
            self.hamiltonian[(s, s)] = self.beta[s] + self.offsets[s];
        }
        match self.model {
            NoiseModel::PiecewiseConstantSegments => {
                let seg = unitary_step(self.hamiltonian.clone(), self.tick);
                seg.mul_to(&self.u, &mut self.scratch);
                std::mem::swap(&mut self.u, &mut self.scratch);
            }
            NoiseModel::WhiteNoiseWiener { .. } => {
                // exact coherent step, then the Itô noise increment
                // (1 + i√γ dW − γ dz/2) on each site and column renormalization
                let dz = self.tick;
                let n = self.n;
                self.coherent_step.mul_to(&self.u, &mut self.scratch);
                for r in 0..n {
                    let factor = Complex64::new(1.0 - 0.5 * self.gamma[r] * dz, self.offsets[r] * dz);
                    for c in 0..n {
                        self.scratch[(r, c)] *= factor;
                    }
                }
                for c in 0..n {
                    let norm = (0..n).map(|r| self.scratch[(r, c)].norm_sqr()).sum::<f64>().sqrt();
                    for r in 0..n {
                        self.scratch[(r, c)] /= norm;
                    }
                }
                std::mem::swap(&mut self.u, &mut self.scratch);
            }
        }
    }
}

/// Propagator checkpoints of trajectory `index`, one per correlation length.
pub fn sample_trajectory(
    net: &Network,
    noise: &NoiseSpec,
    seed: u64,
    index: u64,
    z_max: f64,
) -> Result<Vec<(f64, Propagator)>> {
    check_noise(net, noise)?;
    let tick = tick_length(noise);
    let per_record = ticks_for(noise.correlation_length, tick)?.max(1);
    let records = ticks_for(z_max, noise.correlation_length)?;
    let mut walker = Walker::new(net, noise, trajectory_rng(seed, index));
    let mut out = Vec::with_capacity(records);
    for k in 1..=records {
        for _ in 0..per_record {
            walker.advance();
        }
        let z = k as f64 * noise.correlation_length;
        out.push((z, Propagator { z, matrix: walker.u.clone() }));
    }
    Ok(out)
}

/// Propagator checkpoints at every correlation length for the realization
/// drawn from `seed` (stream 0).
pub fn sample_propagator(net: &Network, noise: &NoiseSpec, seed: u64, z_max: f64) -> Result<Vec<(f64, Propagator)>> {
    sample_trajectory(net, noise, seed, 0, z_max)
}

/// Ensemble size, master seed, and whether to fan trajectories across the
/// rayon pool. Parallel and serial runs give bit-identical averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EnsembleConfig {
    pub trajectories: usize,
    pub seed: u64,
    pub parallel: bool,
}

/// Averaged density matrices plus bookkeeping for the sidecar file.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub record: EvolutionRecord,
    pub config: EnsembleConfig,
    pub model: NoiseModel,
    /// Largest standard error of the mean over all elements and samples.
    pub max_std_error: f64,
}

impl Ensemble {
    /// `{"M", "seed", "model", "max_std_error"}`.
    pub fn sidecar(&self) -> serde_json::Value {
        serde_json::json!({
            "M": self.config.trajectories,
            "seed": self.config.seed,
            "model": self.model,
            "max_std_error": self.max_std_error,
        })
    }
}

/// Streaming pairwise summation: combines partial sums like a binary
/// counter so that the rounding error grows as `O(log M)`.
#[derive(Default)]
struct PairwiseSum {
    stack: Vec<(u32, Vec<f64>)>,
}

impl PairwiseSum {
    fn push(&mut self, v: Vec<f64>) {
        let mut node = (0_u32, v);
        while let Some((level, _)) = self.stack.last() {
            if *level != node.0 {
                break;
            }
            let (level, mut earlier) = self.stack.pop().expect("non-empty");
            for (e, x) in earlier.iter_mut().zip(&node.1) {
                *e += x;
            }
            node = (level + 1, earlier);
        }
        self.stack.push(node);
    }

    fn finish(mut self) -> Option<Vec<f64>> {
        let mut acc = self.stack.pop()?.1;
        while let Some((_, mut earlier)) = self.stack.pop() {
            for (e, x) in earlier.iter_mut().zip(&acc) {
                *e += x;
            }
            acc = earlier;
        }
        Some(acc)
    }
}

/// Runs the ensemble and returns, for every `z` in the grid, the average
/// of `observe(U)` (an `d × d` matrix, row-major) and its largest standard
/// error.
fn run_ensemble<F>(
    net: &Network,
    noise: &NoiseSpec,
    config: EnsembleConfig,
    z_grid: &[f64],
    d: usize,
    observe: F,
) -> Result<(Vec<Vec<Complex64>>, f64)>
where
    F: Fn(&DMatrix<Complex64>, &mut [Complex64]) + Sync,
{
    check_noise(net, noise)?;
    if config.trajectories == 0 {
        return Err(Error::InvalidParameter { name: "M", reason: "need at least one trajectory".into() });
    }
    let tick = tick_length(noise);
    let checkpoints: Vec<usize> = z_grid.iter().map(|&z| ticks_for(z, tick)).collect::<Result<_>>()?;
    if checkpoints.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter { name: "z_grid", reason: "must be ascending".into() });
    }
    let per_z = 3 * d * d; // re, im, |x|²
    let width = per_z * z_grid.len();

    let trajectory = |index: usize| -> Vec<f64> {
        let mut walker = Walker::new(net, noise, trajectory_rng(config.seed, index as u64));
        let mut out = vec![0.0; width];
        let mut obs = vec![Complex64::new(0.0, 0.0); d * d];
        let mut done = 0;
        for (slot, &target) in checkpoints.iter().enumerate() {
            while done < target {
                walker.advance();
                done += 1;
            }
            observe(&walker.u, &mut obs);
            let chunk = &mut out[slot * per_z..(slot + 1) * per_z];
            for (k, x) in obs.iter().enumerate() {
                chunk[3 * k] = x.re;
                chunk[3 * k + 1] = x.im;
                chunk[3 * k + 2] = x.norm_sqr();
            }
        }
        out
    };
    let block = |b: usize| -> Vec<f64> {
        let mut sum = PairwiseSum::default();
        for index in b * BLOCK..((b + 1) * BLOCK).min(config.trajectories) {
            sum.push(trajectory(index));
        }
        sum.finish().expect("blocks are non-empty")
    };

    let n_blocks = config.trajectories.div_ceil(BLOCK);
    let blocks: Vec<Vec<f64>> = if config.parallel {
        (0..n_blocks).into_par_iter().map(block).collect()
    } else {
        (0..n_blocks).map(block).collect()
    };
    let mut total = PairwiseSum::default();
    for b in blocks {
        total.push(b);
    }
    let total = total.finish().expect("at least one block");

    let m = config.trajectories as f64;
    let mut max_se = 0.0_f64;
    let means = total
        .chunks(per_z)
        .map(|chunk| {
            chunk
                .chunks(3)
                .map(|e| {
                    let mean = Complex64::new(e[0] / m, e[1] / m);
                    let var = (e[2] / m - mean.norm_sqr()).max(0.0);
                    max_se = max_se.max((var / m).sqrt());
                    mean
                })
                .collect()
        })
        .collect();
    Ok((means, max_se))
}

fn records_from_means(
    basis: Basis,
    z_grid: &[f64],
    means: Vec<Vec<Complex64>>,
    fingerprint: u64,
) -> Result<EvolutionRecord> {
    let mut snapshots = Vec::with_capacity(means.len());
    for (&z, mut flat) in z_grid.iter().zip(means) {
        let d = basis.size();
        let trace: f64 = (0..d).map(|a| flat[a * d + a].re).sum();
        if !(trace > 0.0) {
            return Err(Error::InvariantViolation { z, what: format!("ensemble trace {trace}") });
        }
        flat.iter_mut().for_each(|x| *x /= trace);
        let rho = DensityMatrix::from_row_major(basis, &flat)?;
        rho.validate(crate::density::TRACE_TOL, z)?;
        snapshots.push(rho);
    }
    Ok(EvolutionRecord { z_grid: z_grid.to_vec(), snapshots, step: None, network_fingerprint: fingerprint })
}

/// `ρ̄(z) = (1/M) Σ_k ψ⁽ᵏ⁾(z) ψ⁽ᵏ⁾(z)†` with `ψ⁽ᵏ⁾ = U⁽ᵏ⁾ ψ₀`.
pub fn ensemble_single(
    net: &Network,
    noise: &NoiseSpec,
    psi0: &[Complex64],
    config: EnsembleConfig,
    z_grid: &[f64],
) -> Result<Ensemble> {
    let n = net.n_sites();
    if psi0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: psi0.len(), context: "initial amplitudes" });
    }
    let norm: f64 = psi0.iter().map(|z| z.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NormalizationError(norm));
    }
    let psi0 = nalgebra::DVector::from_column_slice(psi0);
    let observe = |u: &DMatrix<Complex64>, out: &mut [Complex64]| {
        let psi = u * &psi0;
        let psi_norm = psi.norm_squared();
        for a in 0..n {
            for b in 0..n {
                out[a * n + b] = psi[a] * psi[b].conj() / psi_norm;
            }
        }
    };
    let (means, max_std_error) = run_ensemble(net, noise, config, z_grid, n, observe)?;
    let record = records_from_means(Basis::site(n), z_grid, means, net.fingerprint())?;
    Ok(Ensemble { record, config, model: noise.model, max_std_error })
}

/// One pure two-particle input: `weight` times the state built from the
/// initial amplitude profile `phi` (`phi[(m, n)]`: first particle at `m`,
/// second at `n`) under `statistics`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureAmplitude {
    pub weight: f64,
    pub phi: DMatrix<Complex64>,
    pub statistics: Statistics,
}

impl PureAmplitude {
    pub fn new(phi: DMatrix<Complex64>, statistics: Statistics) -> Self {
        Self { weight: 1.0, phi, statistics }
    }

    /// A single occupied ordered pair `(m, n)`.
    pub fn pair(n_sites: usize, m: usize, n: usize, statistics: Statistics, weight: f64) -> Self {
        let mut phi = DMatrix::zeros(n_sites, n_sites);
        phi[(m, n)] = Complex64::new(1.0, 0.0);
        Self { weight, phi, statistics }
    }

    /// `φ = Σ c · |m, n⟩` over the listed `((m, n), c)` terms.
    pub fn superposition(
        n_sites: usize,
        terms: &[((usize, usize), Complex64)],
        statistics: Statistics,
        weight: f64,
    ) -> Self {
        let mut phi = DMatrix::zeros(n_sites, n_sites);
        for &((m, n), c) in terms {
            phi[(m, n)] += c;
        }
        Self { weight, phi, statistics }
    }

    /// `Ψ = U φ Uᵀ ± U φᵀ Uᵀ`, so that `Ψ_pq = Σ φ_mn [U_pm U_qn ± U_pn U_qm]`.
    fn amplitude(&self, u: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let forward = u * &self.phi * u.transpose();
        match self.statistics.exchange_sign() {
            None => forward,
            Some(sign) => {
                let swapped = forward.transpose();
                forward + swapped * Complex64::new(sign, 0.0)
            }
        }
    }
}

/// Two-particle ensemble for a convex combination of pure inputs. Every
/// component sees the same disorder realizations.
pub fn ensemble_two(
    net: &Network,
    noise: &NoiseSpec,
    components: &[PureAmplitude],
    config: EnsembleConfig,
    z_grid: &[f64],
) -> Result<Ensemble> {
    let n = net.n_sites();
    if components.is_empty() {
        return Err(Error::InvalidParameter { name: "components", reason: "need at least one input".into() });
    }
    let mut scales = Vec::with_capacity(components.len());
    for c in components {
        if c.phi.nrows() != n || c.phi.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: c.phi.nrows(), context: "amplitude profile" });
        }
        let weight: f64 = c.phi.iter().map(|z| z.norm_sqr()).sum();
        if (weight - 1.0).abs() > 1e-9 {
            return Err(Error::NormalizationError(weight));
        }
        // Ψ(0) fixes the per-realization norm, which U ⊗ U preserves
        let norm0: f64 = c.amplitude(&DMatrix::identity(n, n)).iter().map(|z| z.norm_sqr()).sum();
        if !(norm0 > 1e-12) {
            return Err(Error::NormalizationError(norm0));
        }
        if !(c.weight >= 0.0) {
            return Err(Error::InvalidParameter { name: "weight", reason: format!("{}", c.weight) });
        }
        scales.push(c.weight / norm0);
    }
    let total_weight: f64 = components.iter().map(|c| c.weight).sum();
    if (total_weight - 1.0).abs() > 1e-9 {
        return Err(Error::NormalizationError(total_weight));
    }

    let d = n * n;
    let observe = |u: &DMatrix<Complex64>, out: &mut [Complex64]| {
        out.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
        for (c, &scale) in components.iter().zip(&scales) {
            let psi = c.amplitude(u);
            // ordered-pair index p * n + q
            let flat: Vec<Complex64> = (0..d).map(|k| psi[(k / n, k % n)]).collect();
            for a in 0..d {
                for b in 0..d {
                    out[a * d + b] += flat[a] * flat[b].conj() * scale;
                }
            }
        }
    };
    let (means, max_std_error) = run_ensemble(net, noise, config, z_grid, d, observe)?;
    let record = records_from_means(Basis::ordered_pair(n), z_grid, means, net.fingerprint())?;
    Ok(Ensemble { record, config, model: noise.model, max_std_error })
}
