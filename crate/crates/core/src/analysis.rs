//! Coherence measures, distances and steady-state diagnostics.

use std::io::Write;

use serde::Serialize;

use crate::density::{hermitian_eigenvalues, BasisTag, DensityMatrix};
use crate::error::{Error, Result};
use crate::evolution::EvolutionRecord;
use crate::generator::Generator;
use crate::two::CorrelationMatrix;

/// Eigenvalues in `(−ENTROPY_CLAMP, 0)` are treated as zero.
pub const ENTROPY_CLAMP: f64 = 1e-10;

/// `C_n(ρ) = Σ_{i≠j} |ρ_ij|` in the matrix's own basis.
pub fn coherence_norm(rho: &DensityMatrix) -> f64 {
    let d = rho.dim();
    let mut total = 0.0;
    for a in 0..d {
        for b in 0..d {
            if a != b {
                total += rho.get(a, b).norm();
            }
        }
    }
    total
}

/// Shannon entropy in bits of a spectrum, with `0·log 0 = 0`.
fn entropy_bits(values: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for &v in values {
        if v <= -ENTROPY_CLAMP {
            return Err(Error::InvariantViolation { z: f64::NAN, what: format!("negative eigenvalue {v:e}") });
        }
        if v > 0.0 {
            s -= v * v.log2();
        }
    }
    Ok(s)
}

/// von Neumann entropy `S(ρ)` in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    entropy_bits(&rho.eigenvalues()?)
}

/// `C_RE(ρ) = S(ρ_diag) − S(ρ)`, logarithm base 2.
pub fn relative_entropy_coherence(rho: &DensityMatrix) -> Result<f64> {
    Ok(entropy_bits(&rho.diagonal())? - von_neumann_entropy(rho)?)
}

/// `D(a, b) = ½ Tr|a − b|`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.basis() != b.basis() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim(), context: "trace distance operands" });
    }
    let diff = a.entries() - b.entries();
    let eig = hermitian_eigenvalues(&diff)?;
    Ok(0.5 * eig.iter().map(|v| v.abs()).sum::<f64>())
}

/// `S = (Σ √(a_pq b_pq))² / (Σ a · Σ b)`; 1 iff `a ∝ b`.
pub fn similarity(a: &CorrelationMatrix, b: &CorrelationMatrix) -> Result<f64> {
    if a.n != b.n {
        return Err(Error::DimensionMismatch { expected: a.n, found: b.n, context: "similarity operands" });
    }
    if let Some(v) = a.g2.iter().chain(&b.g2).find(|v| !(**v >= 0.0)) {
        return Err(Error::InvalidParameter { name: "g2", reason: format!("entries must be non-negative, found {v}") });
    }
    let (sa, sb) = (a.total(), b.total());
    if sa == 0.0 || sb == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let overlap: f64 = a.g2.iter().zip(&b.g2).map(|(x, y)| (x * y).sqrt()).sum();
    Ok((overlap * overlap / (sa * sb)).min(1.0))
}

/// `C_n` and `C_RE` along a record.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceSeries {
    pub z_grid: Vec<f64>,
    pub c_norm: Vec<f64>,
    pub c_rel_entropy: Vec<f64>,
}

impl CoherenceSeries {
    pub fn from_record(record: &EvolutionRecord) -> Result<Self> {
        let mut c_norm = Vec::with_capacity(record.len());
        let mut c_rel_entropy = Vec::with_capacity(record.len());
        for (z, rho) in record.iter() {
            c_norm.push(coherence_norm(rho));
            let cre = relative_entropy_coherence(rho).map_err(|e| match e {
                Error::InvariantViolation { what, .. } => Error::InvariantViolation { z, what },
                other => other,
            })?;
            c_rel_entropy.push(cre);
        }
        Ok(Self { z_grid: record.z_grid.clone(), c_norm, c_rel_entropy })
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "z,c_norm,c_rel_entropy")?;
        for ((z, cn), cre) in self.z_grid.iter().zip(&self.c_norm).zip(&self.c_rel_entropy) {
            writeln!(out, "{z},{cn},{cre}")?;
        }
        Ok(())
    }
}

/// Smallest sampled `z` with `‖G · vec(ρ(z))‖_max < tol`.
pub fn detect_steady_state(gen: &Generator, record: &EvolutionRecord, tol: f64) -> Result<Option<f64>> {
    for (z, rho) in record.iter() {
        if gen.residual(rho)? < tol {
            return Ok(Some(z));
        }
    }
    Ok(None)
}

/// A two-particle element `((p,q),(p',q'))`, 0-based.
pub type PairElement = [[usize; 2]; 2];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayingElement {
    pub index: PairElement,
    /// `−Re G` on the element's diagonal entry (cm⁻¹).
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DfsReport {
    /// Diagonal `((p,q),(p,q))` and exchange `((p,q),(q,p))` elements whose
    /// net dephasing coefficient is exactly zero.
    pub zero_decay_elements: Vec<PairElement>,
    /// Candidate DFS elements with a nonzero coefficient; empty when certified.
    pub failed_elements: Vec<DecayingElement>,
    /// Every other element with its decay rate.
    pub decaying_elements: Vec<DecayingElement>,
    pub certified: bool,
}

/// Reads the net dephasing coefficient of every ordered-pair element off a
/// two-particle generator and certifies that diagonal and exchange elements
/// have none.
pub fn certify_dfs(gen: &Generator, n_sites: usize) -> Result<DfsReport> {
    let basis = gen.basis();
    if basis.tag != BasisTag::OrderedPair || basis.n_sites != n_sites {
        return Err(Error::BasisMismatch(format!("expected a {n_sites}-site two-particle generator")));
    }
    let mut report = DfsReport {
        zero_decay_elements: Vec::new(),
        failed_elements: Vec::new(),
        decaying_elements: Vec::new(),
        certified: true,
    };
    // (p,q),(p,q) and (p,q),(q,p) coincide for p == q; list each once
    let mut seen = std::collections::BTreeSet::new();
    for p in 0..n_sites {
        for q in 0..n_sites {
            for pp in 0..n_sites {
                for qq in 0..n_sites {
                    let k = gen.pair_element_index(p, q, pp, qq);
                    let coefficient = gen.dephasing_coefficient(k);
                    let index = [[p, q], [pp, qq]];
                    let candidate = (p == pp && q == qq) || (p == qq && q == pp);
                    if candidate {
                        if !seen.insert(k) {
                            continue;
                        }
                        if coefficient == 0.0 {
                            report.zero_decay_elements.push(index);
                        } else {
                            report.certified = false;
                            report.failed_elements.push(DecayingElement { index, rate: -coefficient });
                        }
                    } else {
                        report.decaying_elements.push(DecayingElement { index, rate: -coefficient });
                    }
                }
            }
        }
    }
    Ok(report)
}
