//! Dense Liouvillian generators for one and two particles under pure
//! dephasing.
//!
//! A generator `G` acts on the row-major vectorization of a density matrix:
//! the element `ρ_ab` lives at flat index `a * d + b`, where `d` is the
//! number of basis states. The evolution is `dρ/dz = G · vec(ρ)`.

use num_complex::Complex64;

use crate::density::{Basis, BasisTag, DensityMatrix};
use crate::error::{Error, Result};
use crate::network::Network;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone)]
pub struct Generator {
    basis: Basis,
    dim: usize,
    /// Row-major `dim × dim`.
    matrix: Vec<Complex64>,
    /// Nonzero `(column, value)` pairs of every row, for fast application.
    rows: Vec<Vec<(usize, Complex64)>>,
    network_fingerprint: u64,
}

impl Generator {
    fn from_dense(basis: Basis, matrix: Vec<Complex64>, network_fingerprint: u64) -> Self {
        let dim = basis.size() * basis.size();
        debug_assert_eq!(matrix.len(), dim * dim);
        let rows = matrix
            .chunks(dim)
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(_, v)| **v != Complex64::new(0.0, 0.0))
                    .map(|(c, v)| (c, *v))
                    .collect()
            })
            .collect();
        Self { basis, dim, matrix, rows, network_fingerprint }
    }

    /// Basis of the density matrices this generator acts on.
    pub fn basis(&self) -> Basis {
        self.basis
    }

    /// Size `D` of the vectorized density matrix (`n²` or `n⁴`).
    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn network_fingerprint(&self) -> u64 {
        self.network_fingerprint
    }

    /// Entry `G[row, col]`.
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[row * self.dim + col]
    }

    pub fn matrix(&self) -> &[Complex64] {
        &self.matrix
    }

    /// Flat index of the matrix element `(a, b)`.
    pub fn element_index(&self, a: usize, b: usize) -> usize {
        a * self.basis.size() + b
    }

    /// Inverse of [`Self::element_index`].
    pub fn element_of(&self, index: usize) -> (usize, usize) {
        let d = self.basis.size();
        (index / d, index % d)
    }

    /// Flat index of `ρ_{(p,q),(p',q')}` on the ordered-pair basis.
    pub fn pair_element_index(&self, p: usize, q: usize, pp: usize, qq: usize) -> usize {
        self.element_index(self.basis.pair_index(p, q), self.basis.pair_index(pp, qq))
    }

    /// Net dephasing coefficient of element `index`: the real part of the
    /// diagonal generator entry. Couplings never touch the diagonal, so this
    /// is exactly the coefficient of `ρ` in its own equation.
    pub fn dephasing_coefficient(&self, index: usize) -> f64 {
        self.entry(index, index).re
    }

    /// `out = G · v`.
    pub fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(v.len(), self.dim);
        assert_eq!(out.len(), self.dim);
        for (o, row) in out.iter_mut().zip(&self.rows) {
            *o = row.iter().fold(Complex64::new(0.0, 0.0), |acc, &(c, g)| acc + g * v[c]);
        }
    }

    /// `dρ/dz` as a (generally non-density) matrix in row-major order.
    pub fn derivative(&self, rho: &DensityMatrix) -> Result<Vec<Complex64>> {
        self.check_basis(rho)?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        self.apply(&rho.to_row_major(), &mut out);
        Ok(out)
    }

    /// `‖G · vec(ρ)‖_max`, the stationarity residual.
    pub fn residual(&self, rho: &DensityMatrix) -> Result<f64> {
        Ok(self.derivative(rho)?.iter().fold(0.0_f64, |m, z| m.max(z.norm())))
    }

    pub(crate) fn check_basis(&self, rho: &DensityMatrix) -> Result<()> {
        if rho.basis() != self.basis {
            return Err(Error::BasisMismatch(format!(
                "generator acts on {:?}, state is {:?}",
                self.basis,
                rho.basis()
            )));
        }
        Ok(())
    }
}

/// Generator of the single-particle master equation
///
/// `i dρ_nm/dz = [(β_m − β_n) − i(γ_n + γ_m)/2] ρ_nm + i√(γ_n γ_m) δ_nm ρ_nm
///               − Σ_r κ_nr ρ_rm + Σ_r κ_mr ρ_nr`.
pub fn single_particle_generator(net: &Network) -> Generator {
    let n = net.n_sites();
    let beta = net.site_energies();
    let gamma = net.dephasing_rates();
    let d = n * n;
    let idx = |a: usize, b: usize| a * n + b;
    let mut g = vec![Complex64::new(0.0, 0.0); d * d];

    for a in 0..n {
        for b in 0..n {
            let row = idx(a, b);
            let mut decay = -(gamma[a] + gamma[b]) / 2.0;
            if a == b {
                decay += (gamma[a] * gamma[b]).sqrt();
            }
            g[row * d + row] += Complex64::new(decay, -(beta[b] - beta[a]));
            for r in 0..n {
                g[row * d + idx(r, b)] += I * net.coupling(a, r);
                g[row * d + idx(a, r)] -= I * net.coupling(b, r);
            }
        }
    }
    Generator::from_dense(Basis::site(n), g, net.fingerprint())
}

/// Generator of the two-particle master equation on the ordered-pair basis
///
/// `i dρ_(p,q),(p',q')/dz =
///     [(−β_p − β_q + β_p' + β_q') − i(γ_p + γ_q + γ_p' + γ_q')/2] ρ
///   + i[√(γ_p γ_p')δ_pp' + √(γ_p γ_q')δ_pq' + √(γ_q γ_p')δ_qp' + √(γ_q γ_q')δ_qq'
///       − √(γ_p γ_q)δ_pq − √(γ_p' γ_q')δ_p'q'] ρ
///   − Σ_r [κ_rp ρ_(r,q),(p',q') + κ_rq ρ_(p,r),(p',q')
///          − κ_rp' ρ_(p,q),(r,q') − κ_rq' ρ_(p,q),(p',r)]`.
///
/// Partial sums are grouped per ordered pair so that the diagonal and
/// exchange elements cancel to an exact floating-point zero.
pub fn two_particle_generator(net: &Network) -> Generator {
    let n = net.n_sites();
    let beta = net.site_energies();
    let gamma = net.dephasing_rates();
    let basis = Basis::ordered_pair(n);
    let states = n * n;
    let d = states * states;
    let idx = |p: usize, q: usize, pp: usize, qq: usize| (p * n + q) * states + (pp * n + qq);
    let delta = |a: usize, b: usize| if a == b { (gamma[a] * gamma[b]).sqrt() } else { 0.0 };
    let mut g = vec![Complex64::new(0.0, 0.0); d * d];

    for p in 0..n {
        for q in 0..n {
            for pp in 0..n {
                for qq in 0..n {
                    let row = idx(p, q, pp, qq);
                    let frequency = (beta[p] + beta[q]) - (beta[pp] + beta[qq]);
                    let decay = -((gamma[p] + gamma[q]) + (gamma[pp] + gamma[qq])) / 2.0;
                    let gain = (delta(p, pp) + delta(p, qq)) + (delta(q, pp) + delta(q, qq));
                    let loss = delta(p, q) + delta(pp, qq);
                    g[row * d + row] += Complex64::new(decay + (gain - loss), frequency);
                    for r in 0..n {
                        g[row * d + idx(r, q, pp, qq)] += I * net.coupling(r, p);
                        g[row * d + idx(p, r, pp, qq)] += I * net.coupling(r, q);
                        g[row * d + idx(p, q, r, qq)] -= I * net.coupling(r, pp);
                        g[row * d + idx(p, q, pp, r)] -= I * net.coupling(r, qq);
                    }
                }
            }
        }
    }
    debug_assert_eq!(basis.tag, BasisTag::OrderedPair);
    Generator::from_dense(basis, g, net.fingerprint())
}
