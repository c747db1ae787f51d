//! Density matrices over the site basis or the ordered-pair basis.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) const HERMITIAN_TOL: f64 = 1e-10;
pub(crate) const TRACE_TOL: f64 = 1e-9;
pub(crate) const POSITIVITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisTag {
    /// One particle: states are sites `n`.
    Site,
    /// Two particles: states are ordered pairs `(p, q)`, flattened row-major
    /// as `p * n_sites + q`.
    OrderedPair,
}

/// The state basis a density matrix is written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Basis {
    pub tag: BasisTag,
    pub n_sites: usize,
}

impl Basis {
    pub fn site(n_sites: usize) -> Self {
        Self { tag: BasisTag::Site, n_sites }
    }

    pub fn ordered_pair(n_sites: usize) -> Self {
        Self { tag: BasisTag::OrderedPair, n_sites }
    }

    /// Number of basis states.
    pub fn size(&self) -> usize {
        match self.tag {
            BasisTag::Site => self.n_sites,
            BasisTag::OrderedPair => self.n_sites * self.n_sites,
        }
    }

    pub fn pair_index(&self, p: usize, q: usize) -> usize {
        debug_assert_eq!(self.tag, BasisTag::OrderedPair);
        p * self.n_sites + q
    }

    pub fn pair_of(&self, index: usize) -> (usize, usize) {
        (index / self.n_sites, index % self.n_sites)
    }

    /// Human-readable 1-based label of a basis state: `"3"` or `"12"`.
    /// Pair labels are joined with `-` once sites need two digits.
    pub fn state_label(&self, index: usize) -> String {
        match self.tag {
            BasisTag::Site => (index + 1).to_string(),
            BasisTag::OrderedPair => {
                let (p, q) = self.pair_of(index);
                if self.n_sites < 10 {
                    format!("{}{}", p + 1, q + 1)
                } else {
                    format!("{}-{}", p + 1, q + 1)
                }
            }
        }
    }

    /// Column-name stem for the matrix element `(a, b)`, e.g. `rho_1_2`.
    pub fn element_label(&self, a: usize, b: usize) -> String {
        format!("rho_{}_{}", self.state_label(a), self.state_label(b))
    }
}

/// A Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    basis: Basis,
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Checks every density-matrix invariant before accepting `entries`.
    pub fn new(basis: Basis, entries: DMatrix<Complex64>) -> Result<Self> {
        let rho = Self::new_unchecked(basis, entries)?;
        rho.validate(TRACE_TOL, 0.0)?;
        Ok(rho)
    }

    /// Only checks the shape.
    pub fn new_unchecked(basis: Basis, entries: DMatrix<Complex64>) -> Result<Self> {
        let d = basis.size();
        if entries.nrows() != d || entries.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: entries.nrows().max(entries.ncols()),
                context: "density matrix",
            });
        }
        Ok(Self { basis, entries })
    }

    /// `|ψ⟩⟨ψ|` for a normalized `ψ`.
    pub fn pure(basis: Basis, psi: &[Complex64]) -> Result<Self> {
        let d = basis.size();
        if psi.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: psi.len(), context: "state vector" });
        }
        let entries = DMatrix::from_fn(d, d, |a, b| psi[a] * psi[b].conj());
        Self::new(basis, entries)
    }

    /// `|n⟩⟨n|` on the site basis.
    pub fn site_state(n_sites: usize, site: usize) -> Result<Self> {
        if site >= n_sites {
            return Err(Error::SiteOutOfRange { site, n_sites });
        }
        let mut entries = DMatrix::zeros(n_sites, n_sites);
        entries[(site, site)] = Complex64::new(1.0, 0.0);
        Self::new(Basis::site(n_sites), entries)
    }

    /// `I/d`.
    pub fn maximally_mixed(basis: Basis) -> Self {
        let d = basis.size();
        let entries = DMatrix::from_diagonal_element(d, d, Complex64::new(1.0 / d as f64, 0.0));
        Self { basis, entries }
    }

    /// Builds from a row-major flat vector, as produced by [`Self::to_row_major`].
    pub fn from_row_major(basis: Basis, flat: &[Complex64]) -> Result<Self> {
        let d = basis.size();
        if flat.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                found: flat.len(),
                context: "vectorized density matrix",
            });
        }
        Self::new_unchecked(basis, DMatrix::from_row_slice(d, d, flat))
    }

    pub fn to_row_major(&self) -> Vec<Complex64> {
        let d = self.dim();
        let mut out = Vec::with_capacity(d * d);
        for a in 0..d {
            for b in 0..d {
                out.push(self.entries[(a, b)]);
            }
        }
        out
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn get(&self, a: usize, b: usize) -> Complex64 {
        self.entries[(a, b)]
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        // Tr(ρ²) = Σ_ab ρ_ab ρ_ba = Σ_ab |ρ_ab|² for Hermitian ρ
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Largest `|ρ_ab − conj(ρ_ba)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0_f64;
        for a in 0..d {
            for b in a..d {
                worst = worst.max((self.entries[(a, b)] - self.entries[(b, a)].conj()).norm());
            }
        }
        worst
    }

    /// Real eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        hermitian_eigenvalues(&self.entries)
    }

    /// Checks Hermiticity, unit trace (to `trace_tol`) and positivity.
    /// `z` is only used to label the error.
    pub fn validate(&self, trace_tol: f64, z: f64) -> Result<()> {
        let herm = self.hermiticity_error();
        if !(herm < HERMITIAN_TOL) {
            return Err(Error::InvariantViolation { z, what: format!("hermiticity error {herm:e}") });
        }
        let drift = (self.trace() - Complex64::new(1.0, 0.0)).norm();
        if !(drift < trace_tol) {
            return Err(Error::InvariantViolation { z, what: format!("trace drift {drift:e}") });
        }
        let smallest = self.eigenvalues()?.first().copied().unwrap_or(0.0);
        if !(smallest > -POSITIVITY_TOL) {
            return Err(Error::InvariantViolation { z, what: format!("negative eigenvalue {smallest:e}") });
        }
        Ok(())
    }

    /// Real parts of the diagonal.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|a| self.entries[(a, a)].re).collect()
    }
}

pub(crate) fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let herm = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::try_new(herm, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::EigSolverFailure("Hermitian eigensolver did not converge".into()))?;
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigSolverFailure("non-finite eigenvalue".into()));
    }
    values.sort_by(f64::total_cmp);
    Ok(values)
}
