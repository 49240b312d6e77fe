//! Resource entropies of a stored state.

use serde::Serialize;

use crate::entropy::{renyi2_coherence, renyi2_entanglement, renyi2_stabilizer, MAX_STABILIZER_QUBITS};
use crate::error::{Error, Result};
use crate::registers::{PureState, Region};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum MagicMode {
    /// Stabilizer entropy for qubit registers small enough to enumerate.
    Auto,
    On,
    Off,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyRow {
    pub quantity: String,
    pub region: String,
    pub nats: f64,
}

/// Parses a cut such as `0,2,3`.
pub fn parse_cut(text: &str) -> Result<Region> {
    let sites = text
        .split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| Error::Config(format!("bad site index \"{s}\" in cut \"{text}\""))))
        .collect::<Result<Vec<_>>>()?;
    Region::new(sites)
}

/// One `N2` row per cut, then `C2`, then `M2` when requested and available.
pub fn entropy_report(state: &PureState, cuts: &[Region], magic: MagicMode) -> Result<Vec<EntropyRow>> {
    let format_region = |r: &Region| r.sites().iter().map(|s| s.to_string()).collect::<Vec<_>>().join(";");
    let mut rows = Vec::new();
    for cut in cuts {
        rows.push(EntropyRow {
            quantity: "N2".into(),
            region: format_region(cut),
            nats: renyi2_entanglement(state, cut)?,
        });
    }
    rows.push(EntropyRow { quantity: "C2".into(), region: String::new(), nats: renyi2_coherence(state) });
    let register = state.register();
    let magic_available = register.is_qubits() && register.n_sites() <= MAX_STABILIZER_QUBITS;
    if magic == MagicMode::On || (magic == MagicMode::Auto && magic_available) {
        rows.push(EntropyRow { quantity: "M2".into(), region: String::new(), nats: renyi2_stabilizer(state)? });
    }
    Ok(rows)
}
