//! Two-particle states on the ordered-pair basis, their evolution, and the
//! joint detection probabilities `G⁽²⁾`.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::density::{Basis, BasisTag, DensityMatrix};
use crate::error::{Error, Result};
use crate::evolution::{integrate, EvolutionRecord};
use crate::generator::Generator;
use crate::network::Network;

/// Maximum tolerated drift of exchange (anti)symmetry during evolution.
pub const SYMMETRY_DRIFT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistics {
    Boson,
    Fermion,
    Distinguishable,
}

impl Statistics {
    /// `+1` for bosons, `−1` for fermions, `None` when unsymmetrized.
    pub fn exchange_sign(self) -> Option<f64> {
        match self {
            Statistics::Boson => Some(1.0),
            Statistics::Fermion => Some(-1.0),
            Statistics::Distinguishable => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoParticleState {
    pub rho: DensityMatrix,
    pub statistics: Statistics,
}

fn check_pair(net: &Network, p: usize, q: usize) -> Result<()> {
    let n = net.n_sites();
    for site in [p, q] {
        if site >= n {
            return Err(Error::SiteOutOfRange { site, n_sites: n });
        }
    }
    if p == q {
        return Err(Error::InvalidParameter { name: "sites", reason: format!("p and q must differ, both are {p}") });
    }
    Ok(())
}

/// Density matrix with `value` at the listed `((p,q),(p',q'))` entries.
fn pair_matrix(n: usize, entries: &[((usize, usize), (usize, usize), f64)]) -> Result<DensityMatrix> {
    let basis = Basis::ordered_pair(n);
    let d = basis.size();
    let mut m = DMatrix::zeros(d, d);
    for &((p, q), (pp, qq), v) in entries {
        m[(basis.pair_index(p, q), basis.pair_index(pp, qq))] += Complex64::new(v, 0.0);
    }
    DensityMatrix::new(basis, m)
}

impl TwoParticleState {
    /// Validates the statistics-dependent exchange relations.
    pub fn new(rho: DensityMatrix, statistics: Statistics) -> Result<Self> {
        if rho.basis().tag != BasisTag::OrderedPair {
            return Err(Error::BasisMismatch("two-particle states live on the ordered-pair basis".into()));
        }
        rho.validate(crate::density::TRACE_TOL, 0.0)?;
        let state = Self { rho, statistics };
        state.check_exchange(0.0, 1e-10)?;
        Ok(state)
    }

    /// `(|p,q⟩ ± |q,p⟩)/√2`, sign by statistics.
    pub fn separable_pair(net: &Network, p: usize, q: usize, statistics: Statistics) -> Result<Self> {
        if p == q && statistics == Statistics::Fermion {
            return Err(Error::SameSiteFermion(p));
        }
        check_pair(net, p, q)?;
        let sign = statistics.exchange_sign().ok_or_else(|| Error::InvalidParameter {
            name: "statistics",
            reason: "separable pairs are symmetrized; use distinguishable_incoherent".into(),
        })?;
        let rho = pair_matrix(
            net.n_sites(),
            &[
                ((p, q), (p, q), 0.5),
                ((q, p), (q, p), 0.5),
                ((p, q), (q, p), 0.5 * sign),
                ((q, p), (p, q), 0.5 * sign),
            ],
        )?;
        Self::new(rho, statistics)
    }

    /// Path-entangled boson pair `(|p,p⟩ + |q,q⟩)/√2`.
    pub fn entangled_nn(net: &Network, p: usize, q: usize, statistics: Statistics) -> Result<Self> {
        if statistics == Statistics::Fermion {
            return Err(Error::FermionNotAllowed);
        }
        check_pair(net, p, q)?;
        let rho = pair_matrix(
            net.n_sites(),
            &[
                ((p, p), (p, p), 0.5),
                ((p, p), (q, q), 0.5),
                ((q, q), (p, p), 0.5),
                ((q, q), (q, q), 0.5),
            ],
        )?;
        Self::new(rho, Statistics::Boson)
    }

    /// Equal classical mixture of both bosons on `p` or both on `q`.
    pub fn classically_correlated_mix(net: &Network, p: usize, q: usize, statistics: Statistics) -> Result<Self> {
        if statistics == Statistics::Fermion {
            return Err(Error::FermionNotAllowed);
        }
        check_pair(net, p, q)?;
        let rho = pair_matrix(net.n_sites(), &[((p, p), (p, p), 0.5), ((q, q), (q, q), 0.5)])?;
        Self::new(rho, Statistics::Boson)
    }

    /// Equal mixture of `|p,q⟩` and `|q,p⟩` with no exchange coherence.
    pub fn distinguishable_incoherent(net: &Network, p: usize, q: usize) -> Result<Self> {
        check_pair(net, p, q)?;
        let rho = pair_matrix(net.n_sites(), &[((p, q), (p, q), 0.5), ((q, p), (q, p), 0.5)])?;
        Self::new(rho, Statistics::Distinguishable)
    }

    /// Largest violation of the exchange relations implied by the statistics.
    pub fn exchange_error(&self) -> f64 {
        exchange_error(&self.rho, self.statistics)
    }

    fn check_exchange(&self, z: f64, tol: f64) -> Result<()> {
        let err = self.exchange_error();
        if !(err <= tol) {
            return Err(Error::InvariantViolation {
                z,
                what: format!("{:?} exchange symmetry drift {err:e}", self.statistics),
            });
        }
        if self.statistics == Statistics::Fermion {
            let worst = same_site_weight(&self.rho);
            if worst != 0.0 {
                return Err(Error::InvariantViolation {
                    z,
                    what: format!("fermion same-site element {worst:e}"),
                });
            }
        }
        Ok(())
    }
}

fn exchange_error(rho: &DensityMatrix, statistics: Statistics) -> f64 {
    let Some(sign) = statistics.exchange_sign() else {
        return 0.0;
    };
    let basis = rho.basis();
    let n = basis.n_sites;
    let mut worst = 0.0_f64;
    for p in 0..n {
        for q in 0..n {
            let a = basis.pair_index(p, q);
            let a_swapped = basis.pair_index(q, p);
            for pp in 0..n {
                for qq in 0..n {
                    let b = basis.pair_index(pp, qq);
                    let b_swapped = basis.pair_index(qq, pp);
                    let v = rho.get(a, b);
                    worst = worst
                        .max((v - rho.get(a_swapped, b) * sign).norm())
                        .max((v - rho.get(a, b_swapped) * sign).norm());
                }
            }
        }
    }
    worst
}

/// Largest `|ρ_(p,q),(p',q')|` with `p == q` or `p' == q'`.
fn same_site_weight(rho: &DensityMatrix) -> f64 {
    let basis = rho.basis();
    let n = basis.n_sites;
    let d = basis.size();
    let mut worst = 0.0_f64;
    for p in 0..n {
        let a = basis.pair_index(p, p);
        for b in 0..d {
            worst = worst.max(rho.get(a, b).norm()).max(rho.get(b, a).norm());
        }
    }
    worst
}

/// Integrates the two-particle master equation, re-checking the exchange
/// relations of `state.statistics` on every sample.
pub fn evolve_two(
    gen: &Generator,
    state: &TwoParticleState,
    z_max: f64,
    dz: f64,
    sample_every: usize,
) -> Result<EvolutionRecord> {
    if gen.basis().tag != BasisTag::OrderedPair {
        return Err(Error::BasisMismatch("evolve_two needs a two-particle generator".into()));
    }
    let n = gen.basis().n_sites;
    let d = n * n;
    let same_site: Vec<usize> = (0..n).map(|p| p * n + p).collect();
    let statistics = state.statistics;
    let pin = |v: &mut [Complex64]| {
        if statistics == Statistics::Fermion {
            let zero = Complex64::new(0.0, 0.0);
            for &a in &same_site {
                for b in 0..d {
                    v[a * d + b] = zero;
                    v[b * d + a] = zero;
                }
            }
        }
    };
    let check = |z: f64, rho: &DensityMatrix| {
        let err = exchange_error(rho, statistics);
        if !(err <= SYMMETRY_DRIFT_TOL) {
            return Err(Error::InvariantViolation { z, what: format!("{statistics:?} exchange symmetry drift {err:e}") });
        }
        if statistics == Statistics::Fermion && same_site_weight(rho) != 0.0 {
            return Err(Error::InvariantViolation { z, what: "fermion same-site element is nonzero".into() });
        }
        Ok(())
    };
    integrate(gen, &state.rho, z_max, dz, sample_every, pin, check)
}

/// Joint detection probabilities `G⁽²⁾_pq = ρ_(p,q),(p,q)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub n: usize,
    /// Row-major `n × n`.
    pub g2: Vec<f64>,
}

impl CorrelationMatrix {
    pub fn new(n: usize, g2: Vec<f64>) -> Result<Self> {
        if g2.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: g2.len(), context: "correlation matrix" });
        }
        Ok(Self { n, g2 })
    }

    pub fn get(&self, p: usize, q: usize) -> f64 {
        self.g2[p * self.n + q]
    }

    pub fn total(&self) -> f64 {
        self.g2.iter().sum()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for row in self.g2.chunks(self.n) {
            let line: Vec<String> = row.iter().map(f64::to_string).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }

    /// `{"n": .., "g2": [[..], ..]}`.
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<Vec<f64>> = self.g2.chunks(self.n).map(<[f64]>::to_vec).collect();
        serde_json::json!({ "n": self.n, "g2": rows })
    }
}

/// Reads `G⁽²⁾` off the diagonal of an ordered-pair density matrix.
pub fn joint_probability(rho: &DensityMatrix) -> Result<CorrelationMatrix> {
    let basis = rho.basis();
    if basis.tag != BasisTag::OrderedPair {
        return Err(Error::BasisMismatch("G2 needs an ordered-pair density matrix".into()));
    }
    let n = basis.n_sites;
    let mut g2 = Vec::with_capacity(n * n);
    for p in 0..n {
        for q in 0..n {
            let k = basis.pair_index(p, q);
            let value = rho.get(k, k).re;
            if value < -1e-8 {
                return Err(Error::NegativeProbability { p, q, value });
            }
            g2.push(value);
        }
    }
    CorrelationMatrix::new(n, g2)
}

/// Exchange coherences `ρ_(p,q),(q,p)` for `p < q`.
pub fn exchange_coherence_block(rho: &DensityMatrix) -> Result<Vec<((usize, usize), Complex64)>> {
    let basis = rho.basis();
    if basis.tag != BasisTag::OrderedPair {
        return Err(Error::BasisMismatch("exchange coherences need an ordered-pair density matrix".into()));
    }
    let n = basis.n_sites;
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for p in 0..n {
        for q in p + 1..n {
            out.push(((p, q), rho.get(basis.pair_index(p, q), basis.pair_index(q, p))));
        }
    }
    Ok(out)
}
