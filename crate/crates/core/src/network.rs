//! Coupled-site networks and their noise models.
//!
//! All rates are in cm⁻¹ and lengths in cm: the propagation distance `z`
//! along a waveguide array plays the role of time.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A network of `n_sites` coupled sites with independent Gaussian pure
/// dephasing on every site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetworkDoc", into = "NetworkDoc")]
pub struct Network {
    n_sites: usize,
    /// Row-major `n_sites × n_sites`.
    couplings: Vec<f64>,
    site_energies: Vec<f64>,
    dephasing_rates: Vec<f64>,
}

impl Network {
    /// Validates and builds a network. `couplings` is row-major.
    pub fn new(
        couplings: Vec<Vec<f64>>,
        site_energies: Vec<f64>,
        dephasing_rates: Vec<f64>,
    ) -> Result<Self> {
        let n = couplings.len();
        for row in &couplings {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                    context: "coupling matrix row",
                });
            }
        }
        Self::from_flat(n, couplings.concat(), site_energies, dephasing_rates)
    }

    fn from_flat(
        n: usize,
        couplings: Vec<f64>,
        site_energies: Vec<f64>,
        dephasing_rates: Vec<f64>,
    ) -> Result<Self> {
        if couplings.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: couplings.len(),
                context: "coupling matrix entries",
            });
        }
        if site_energies.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: site_energies.len(),
                context: "site energies",
            });
        }
        if dephasing_rates.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: dephasing_rates.len(),
                context: "dephasing rates",
            });
        }
        if n < 2 {
            return Err(Error::TooFewSites(n));
        }
        if couplings.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("couplings"));
        }
        if site_energies.iter().any(|b| !b.is_finite()) {
            return Err(Error::NonFinite("site energies"));
        }
        if dephasing_rates.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("dephasing rates"));
        }
        for row in 0..n {
            let diag = couplings[row * n + row];
            if diag != 0.0 {
                return Err(Error::NonzeroSelfCoupling { site: row, value: diag });
            }
            for col in row + 1..n {
                let forward = couplings[row * n + col];
                let backward = couplings[col * n + row];
                if forward != backward {
                    return Err(Error::AsymmetricCoupling { row, col, forward, backward });
                }
            }
        }
        if let Some((site, &value)) = dephasing_rates.iter().enumerate().find(|(_, g)| **g < 0.0) {
            return Err(Error::NegativeDephasing { site, value });
        }
        Ok(Self { n_sites: n, couplings, site_energies, dephasing_rates })
    }

    /// One of the three-waveguide presets used throughout the experiments:
    /// two strongly coupled upper sites (κ₁₂ = 2) weakly coupled (κ = 0.6)
    /// to a lower site, with β = (1, 1, −1).
    pub fn trimer(preset: TrimerPreset) -> Self {
        let couplings = vec![
            vec![0.0, 2.0, 0.6],
            vec![2.0, 0.0, 0.6],
            vec![0.6, 0.6, 0.0],
        ];
        Self::new(couplings, vec![1.0, 1.0, -1.0], preset.dephasing_rates().to_vec())
            .expect("trimer preset is valid")
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn coupling(&self, m: usize, n: usize) -> f64 {
        self.couplings[m * self.n_sites + n]
    }

    pub fn site_energies(&self) -> &[f64] {
        &self.site_energies
    }

    pub fn dephasing_rates(&self) -> &[f64] {
        &self.dephasing_rates
    }

    /// Copy of this network with every dephasing rate multiplied by `factor`.
    pub fn with_dephasing_scale(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "dephasing_scale",
                reason: format!("must be finite and non-negative, got {factor}"),
            });
        }
        let mut out = self.clone();
        out.dephasing_rates.iter_mut().for_each(|g| *g *= factor);
        Ok(out)
    }

    pub fn with_dephasing_rates(&self, rates: Vec<f64>) -> Result<Self> {
        Self::from_flat(self.n_sites, self.couplings.clone(), self.site_energies.clone(), rates)
    }

    /// Mean single-particle Hamiltonian `diag(β) + κ`.
    pub fn hamiltonian(&self) -> DMatrix<f64> {
        let n = self.n_sites;
        DMatrix::from_fn(n, n, |r, c| {
            if r == c {
                self.site_energies[r]
            } else {
                self.coupling(r, c)
            }
        })
    }

    /// Largest absolute coupling, site energy or dephasing rate.
    pub fn max_rate(&self) -> f64 {
        self.couplings
            .iter()
            .chain(&self.site_energies)
            .chain(&self.dephasing_rates)
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// Stable 64-bit fingerprint (FNV-1a over the IEEE-754 bit patterns).
    pub fn fingerprint(&self) -> u64 {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut hash = OFFSET;
        let mut feed = |bytes: [u8; 8]| {
            for b in bytes {
                hash ^= u64::from(b);
                hash = hash.wrapping_mul(PRIME);
            }
        };
        feed((self.n_sites as u64).to_le_bytes());
        for v in self.couplings.iter().chain(&self.site_energies).chain(&self.dephasing_rates) {
            feed(v.to_bits().to_le_bytes());
        }
        hash
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network serializes")
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CouplingLayout {
    Nested(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkDoc {
    n_sites: usize,
    couplings: CouplingLayout,
    site_energies: Vec<f64>,
    dephasing_rates: Vec<f64>,
}

impl TryFrom<NetworkDoc> for Network {
    type Error = Error;

    fn try_from(doc: NetworkDoc) -> Result<Self> {
        let flat = match doc.couplings {
            CouplingLayout::Flat(v) => v,
            CouplingLayout::Nested(rows) => {
                if rows.len() != doc.n_sites {
                    return Err(Error::DimensionMismatch {
                        expected: doc.n_sites,
                        found: rows.len(),
                        context: "coupling matrix rows",
                    });
                }
                if let Some(bad) = rows.iter().find(|r| r.len() != doc.n_sites) {
                    return Err(Error::DimensionMismatch {
                        expected: doc.n_sites,
                        found: bad.len(),
                        context: "coupling matrix row",
                    });
                }
                rows.concat()
            }
        };
        Network::from_flat(doc.n_sites, flat, doc.site_energies, doc.dephasing_rates)
    }
}

impl From<Network> for NetworkDoc {
    fn from(net: Network) -> Self {
        let rows = net.couplings.chunks(net.n_sites).map(<[f64]>::to_vec).collect();
        NetworkDoc {
            n_sites: net.n_sites,
            couplings: CouplingLayout::Nested(rows),
            site_energies: net.site_energies,
            dephasing_rates: net.dephasing_rates,
        }
    }
}

/// Dephasing presets for the waveguide trimer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrimerPreset {
    /// Rates of the single-photon (laser light) samples.
    Classical,
    /// Rates of the two-photon samples.
    Quantum,
    Noiseless,
}

impl TrimerPreset {
    pub fn dephasing_rates(self) -> [f64; 3] {
        match self {
            TrimerPreset::Classical => [1.7275, 1.7435, 1.7645],
            TrimerPreset::Quantum => [1.3012, 1.2365, 1.2930],
            TrimerPreset::Noiseless => [0.0; 3],
        }
    }

    /// Standard deviations of the inscribed segment energies (cm⁻¹), for a
    /// 1 cm correlation length.
    pub fn segment_sigma(self) -> [f64; 3] {
        match self {
            TrimerPreset::Classical => [1.3143, 1.3204, 1.3283],
            TrimerPreset::Quantum => [1.1407, 1.112, 1.1371],
            TrimerPreset::Noiseless => [0.0; 3],
        }
    }
}

/// How the stochastic site energies are generated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    /// Site energies are held constant over segments of one correlation
    /// length and redrawn i.i.d. at every boundary.
    PiecewiseConstantSegments,
    /// Delta-correlated noise integrated by Euler–Maruyama with the given step.
    WhiteNoiseWiener { step: f64 },
}

/// Per-site Gaussian noise on the site energies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sigma: Vec<f64>,
    pub correlation_length: f64,
    pub model: NoiseModel,
}

impl NoiseSpec {
    pub fn new(sigma: Vec<f64>, correlation_length: f64, model: NoiseModel) -> Result<Self> {
        if !(correlation_length.is_finite() && correlation_length > 0.0) {
            return Err(Error::InvalidParameter {
                name: "correlation_length",
                reason: format!("must be positive, got {correlation_length}"),
            });
        }
        if let Some((site, &value)) =
            sigma.iter().enumerate().find(|(_, s)| !(s.is_finite() && **s >= 0.0))
        {
            return Err(Error::InvalidParameter {
                name: "sigma",
                reason: format!("site {site} has invalid standard deviation {value}"),
            });
        }
        if let NoiseModel::WhiteNoiseWiener { step } = model {
            if !(step.is_finite() && step > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "step",
                    reason: format!("must be positive, got {step}"),
                });
            }
        }
        Ok(Self { sigma, correlation_length, model })
    }

    /// Noise whose rates `σ²Δz` reproduce the network's dephasing rates.
    pub fn matching(net: &Network, correlation_length: f64, model: NoiseModel) -> Result<Self> {
        let sigma = net
            .dephasing_rates()
            .iter()
            .map(|g| (g / correlation_length).sqrt())
            .collect();
        Self::new(sigma, correlation_length, model)
    }

    /// `γ_n = σ_n² Δz`.
    pub fn dephasing_rates(&self) -> Vec<f64> {
        self.sigma.iter().map(|s| s * s * self.correlation_length).collect()
    }
}
