//! Single- and two-particle transport in coupled networks with Gaussian pure
//! dephasing (Haken–Strobl model).
//!
//! The master-equation engines integrate dense Liouvillians with RK4; the
//! [`oracle`] module reproduces the same averages from explicit disorder
//! realizations. Distances along the network are `z` (cm) and all rates are
//! in cm⁻¹.

pub mod analysis;
pub mod density;
pub mod error;
pub mod evolution;
pub mod generator;
pub mod network;
pub mod oracle;
pub mod single;
pub mod two;

pub use analysis::{
    certify_dfs, coherence_norm, detect_steady_state, relative_entropy_coherence, similarity, trace_distance,
    CoherenceSeries, DfsReport,
};
pub use density::{Basis, BasisTag, DensityMatrix};
pub use error::{Error, Result};
pub use evolution::{EvolutionRecord, DEFAULT_DZ, DEFAULT_SAMPLE_EVERY, STEADY_STATE_HORIZON};
pub use generator::{single_particle_generator, two_particle_generator, Generator};
pub use network::{Network, NoiseModel, NoiseSpec, TrimerPreset};
pub use oracle::{ensemble_single, ensemble_two, sample_propagator, Ensemble, EnsembleConfig, PureAmplitude};
pub use single::{coherence_magnitudes, evolve_single, populations};
pub use two::{
    evolve_two, exchange_coherence_block, joint_probability, CorrelationMatrix, Statistics, TwoParticleState,
};

pub use num_complex::Complex64;
