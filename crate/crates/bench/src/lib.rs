//! Fixtures shared by the benchmarks.

use kings_core::search::{find_signal_states, SignalState};
use kings_core::{construct_mub, MubFamily};

/// The two-qubit family together with its signal states.
pub fn two_qubit_fixture() -> (MubFamily, Vec<SignalState>) {
    let family = construct_mub(4).expect("d=4 family");
    let states = find_signal_states(&family).expect("d=4 search");
    (family, states)
}
