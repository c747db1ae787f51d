//! Built-in experiment presets, one per reproduced figure panel.

use serde_json::{json, Value};

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    config: fn() -> Value,
}

impl Preset {
    pub fn config(&self) -> Value {
        (self.config)()
    }
}

fn single(preset: &str, z_max: f64, sample_every: usize) -> Value {
    json!({
        "network": {"preset": preset},
        "mode": "single",
        "initial_state": {"kind": "site", "site": 1},
        "z_max": z_max,
        "sample_every": sample_every,
    })
}

fn two(state: Value, scale: f64) -> Value {
    json!({
        "network": {"preset": "quantum"},
        "mode": "two",
        "initial_state": state,
        "z_max": 100.0,
        "sample_every": 100,
        "dephasing_scale": scale,
    })
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "fig1c-noiseless",
        description: "single photon in the noiseless trimer, site 1, z ≤ 12 cm",
        config: || single("noiseless", 12.0, 10),
    },
    Preset {
        name: "fig1d-noiseless-ensemble",
        description: "noiseless trimer through the trajectory sampler (one realization)",
        config: || {
            let mut v = single("noiseless", 12.0, 10);
            v["mode"] = json!("oracle_single");
            v["oracle"] = json!({"M": 1, "seed": 2024, "segment_length": 1.0, "record_every": 1.0});
            v
        },
    },
    Preset {
        name: "fig1e-classical-dephasing",
        description: "single photon with the classical-sample dephasing rates, master equation",
        config: || single("classical", 12.0, 10),
    },
    Preset {
        name: "fig1f-classical-dephasing",
        description: "classical-sample dephasing averaged over 21 disordered trimers with 1 cm segments",
        config: || {
            let mut v = single("classical", 12.0, 10);
            v["mode"] = json!("oracle_single");
            v["oracle"] = json!({"M": 21, "seed": 2024, "segment_length": 1.0, "record_every": 1.0});
            v
        },
    },
    Preset {
        name: "fig2-gamma-sweep",
        description: "single-photon coherence decay at 0.3, 0.6 and 1.0 times the classical rates",
        config: || {
            let mut v = single("classical", 12.0, 10);
            v["dephasing_sweep"] = json!([0.3, 0.6, 1.0]);
            v
        },
    },
    Preset {
        name: "fig3-separable-boson",
        description: "separable boson pair on sites 1,2 to the steady state (z = 100 cm)",
        config: || two(json!({"kind": "separable", "p": 1, "q": 2, "statistics": "boson"}), 1.0),
    },
    Preset {
        name: "fig3-entangled-boson",
        description: "path-entangled pair (|1,1⟩ + |2,2⟩)/√2 to the steady state",
        config: || two(json!({"kind": "entangled", "p": 1, "q": 2}), 1.0),
    },
    Preset {
        name: "fig3-incoherent-boson",
        description: "distinguishable (incoherent) pair on sites 1,2 to the steady state",
        config: || two(json!({"kind": "distinguishable", "p": 1, "q": 2}), 1.0),
    },
    Preset {
        name: "fig3-classically-correlated",
        description: "equal mixture of both photons on site 1 or both on site 2",
        config: || two(json!({"kind": "classically_correlated", "p": 1, "q": 2}), 1.0),
    },
    Preset {
        name: "fig3-separable-fermion",
        description: "antisymmetric fermion pair on sites 1,2 to the steady state",
        config: || two(json!({"kind": "separable", "p": 1, "q": 2, "statistics": "fermion"}), 1.0),
    },
    Preset {
        name: "fig4-coherence-measures",
        description: "C_RE and C_n along z for separable, entangled and incoherent inputs",
        config: || {
            json!({
                "network": {"preset": "quantum"},
                "mode": "analyze",
                "initial_state": {"kind": "separable", "p": 1, "q": 2, "statistics": "boson"},
                "z_max": 100.0,
                "sample_every": 100,
                "compare_states": ["separable", "entangled", "distinguishable"],
            })
        },
    },
    Preset {
        name: "fig5-correlations-theory",
        description: "G2 at z = 12 cm for separable, entangled, classically correlated and incoherent pairs",
        config: || {
            json!({
                "network": {"preset": "quantum"},
                "mode": "analyze",
                "initial_state": {"kind": "separable", "p": 1, "q": 2, "statistics": "boson"},
                "z_max": 12.0,
                "sample_every": 100,
            })
        },
    },
    Preset {
        name: "figF7-5x",
        description: "entangled pair under 5 times the experimental dephasing, z = 100 cm",
        config: || two(json!({"kind": "entangled", "p": 1, "q": 2}), 5.0),
    },
    Preset {
        name: "figF9-zeno-50x",
        description: "entangled pair under 50 times the experimental dephasing (Zeno slowdown)",
        config: || two(json!({"kind": "entangled", "p": 1, "q": 2}), 50.0),
    },
    Preset {
        name: "figF22-correlations-theory",
        description: "G2 at z = 12 cm for separable, entangled and incoherent pairs",
        config: || {
            json!({
                "network": {"preset": "quantum"},
                "mode": "analyze",
                "initial_state": {"kind": "separable", "p": 1, "q": 2, "statistics": "boson"},
                "z_max": 12.0,
                "sample_every": 100,
                "compare_states": ["separable", "entangled", "distinguishable"],
            })
        },
    },
    Preset {
        name: "oracle-two-separable",
        description: "trajectory ensemble of the separable boson pair against the master equation",
        config: || {
            json!({
                "network": {"preset": "quantum"},
                "mode": "oracle_two",
                "initial_state": {"kind": "separable", "p": 1, "q": 2, "statistics": "boson"},
                "z_max": 12.0,
                "sample_every": 100,
                "oracle": {"M": 2000, "seed": 2024, "segment_length": 0.01, "record_every": 1.0},
            })
        },
    },
    Preset {
        name: "dfs-quantum-trimer",
        description: "decoherence-free element certificate for the quantum trimer",
        config: || json!({"network": {"preset": "quantum"}, "mode": "dfs"}),
    },
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}
