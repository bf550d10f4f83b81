//! Truncated multimode Fock states and Heisenberg-picture mode unitaries.
//!
//! A state is a sparse map from occupation vectors to complex amplitudes over
//! an ordered [`ModeLayout`] of named optical modes (spatial label ×
//! polarization). Every state carries a global total-photon cutoff; source
//! expansion and tensor products truncate above it and record the discarded
//! weight instead of erroring, while explicit photon addition errors.
//!
//! Linear-optical elements act in the Heisenberg picture,
//! `a_i† → Σ_j U_ji a_j†`, over a declared set of target modes, which keeps
//! every transformation exact on the truncated space.

mod layout;
mod state;
mod unitary;

pub use layout::{LayoutBuilder, ModeIndex, ModeLayout, Polarization};
pub use state::{FockState, Occupation, AMPLITUDE_PRUNE_THRESHOLD};
pub use unitary::{
    beam_splitter, beam_splitter_spatial, hwp, hwp_on, polarization_prep, qwp, qwp_on,
    ModeUnitary,
};
