//! Exact and Monte Carlo averaging channels and the random samplers behind them.

mod haar;
mod mc;
mod permutation;
mod phase;
mod rng;
mod sample;
mod weingarten;

pub use haar::{exact_haar_twirl, exact_local_twirl, local_twirl_in_place};
pub use mc::{batch_sizes, mc_moment, mc_moment_batched, mc_moment_streaming, McMoment, DEFAULT_BATCHES};
pub use permutation::{
    permutation_twirl, permutation_twirl_in_place, permutation_twirl_labels, PermutationTwirlMode,
    MAX_EXACT_PERMUTATION_COPIES,
};
pub use phase::{phase_twirl, phase_twirl_in_place, phase_twirl_labels};
pub use rng::RandomStream;
pub use sample::{sample_haar_state, sample_haar_unitary, sample_permutation, sample_phase_unitary, PhaseMode};
pub use weingarten::{gram_matrix, WeingartenTable, MAX_WEINGARTEN_COPIES};
