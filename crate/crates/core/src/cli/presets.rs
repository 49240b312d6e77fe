//! Canned experiments.

use super::config::{parse_json, ExperimentConfig};
use crate::error::{Error, Result};

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub json: &'static str,
}

impl Preset {
    pub fn config(&self) -> Result<ExperimentConfig> {
        parse_json(self.json, self.name)
    }
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "bipartite-tightness",
        description: "rank-K maximally entangled states on 3+3 qubits, local Haar orbit, t=2, exact",
        json: r#"{
            "id": "bipartite-tightness",
            "ensemble": {"variant": "EntOrbit", "register": [2, 2, 2, 2, 2, 2],
                         "state": {"max_entangled": {"rank": 1}}, "partition": [[0, 1, 2], [3, 4, 5]]},
            "t": [2],
            "sweep": {"param": "rank", "values": [1, 2, 4, 8]},
            "method": {"kind": "exact"},
            "seed": 1
        }"#,
    },
    Preset {
        name: "ghz-scaling",
        description: "d-level GHZ state on three 2-qubit regions, local Haar orbit, t=2, exact",
        json: r#"{
            "id": "ghz-scaling",
            "ensemble": {"variant": "GhzOrbit", "register": [2, 2, 2, 2, 2, 2],
                         "partition": [[0, 1], [2, 3], [4, 5]], "level": 2},
            "t": [2],
            "sweep": {"param": "level", "values": [2, 3, 4]},
            "method": {"kind": "exact"},
            "seed": 1
        }"#,
    },
    Preset {
        name: "markov-gluing",
        description: "Bell chain on regions [2],[2,2],[2] with ranks (2,2), t=2, exact",
        json: r#"{
            "id": "markov-gluing",
            "ensemble": {"variant": "MarkovOrbit", "register": [2, 2, 2, 2],
                         "partition": [[0], [1, 2], [3]], "ranks": [2, 2]},
            "t": [2],
            "method": {"kind": "exact"},
            "seed": 1
        }"#,
    },
    Preset {
        name: "coherence-orbit",
        description: "uniform superpositions of m basis states on 3 qubits, permutation+phase orbit, t=2, exact",
        json: r#"{
            "id": "coherence-orbit",
            "ensemble": {"variant": "CohOrbit", "register": [2, 2, 2],
                         "state": {"uniform_superposition": {"support": 1}}},
            "t": [2],
            "sweep": {"param": "support", "values": [1, 2, 4, 8]},
            "method": {"kind": "exact"},
            "seed": 1
        }"#,
    },
    Preset {
        name: "ec-orbit",
        description: "rank-K subset-phase ensemble on 3+3 qubits (±1 phases), t=2, exact",
        json: r#"{
            "id": "ec-orbit",
            "ensemble": {"variant": "EcOrbit", "register": [2, 2, 2, 2, 2, 2],
                         "bipartition": [[0, 1, 2], [3, 4, 5]], "rank": 2, "phase_mode": "binary"},
            "t": [2],
            "sweep": {"param": "rank", "values": [2, 4, 8]},
            "method": {"kind": "exact"},
            "seed": 1
        }"#,
    },
    Preset {
        name: "mc-convergence",
        description: "Monte Carlo design error of the Bell-pair local Haar orbit against sample count, t=2",
        json: r#"{
            "id": "mc-convergence",
            "ensemble": {"variant": "EntOrbit", "register": [2, 2],
                         "state": {"max_entangled": {"rank": 2}}, "partition": [[0], [1]]},
            "t": [2],
            "sweep": {"param": "samples", "values": [1000, 2000, 4000, 8000, 16000]},
            "method": {"kind": "mc", "samples": 1000, "batches": 10},
            "seed": 7
        }"#,
    },
];

pub fn find(name: &str) -> Result<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name).ok_or_else(|| {
        let names: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
        Error::Config(format!("unknown preset \"{name}\" (available: {})", names.join(", ")))
    })
}
