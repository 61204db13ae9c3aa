//! Experiment harness behind the `spml` command line tool: block model
//! sweeps, concentration measurements, region proportions, timing, and the
//! file-based clustering entry point.
//!
//! Everything is deterministic given the experiment configuration: work is
//! dispatched over a thread pool keyed by `(cell, sample)` and collected in
//! sorted key order, and every sampled graph derives its seed from the
//! configured base seed and its coordinates, so rerunning a configuration
//! reproduces the numeric CSV columns byte for byte (wall-time columns are
//! the one exception, and always come last).

pub mod config;
pub mod csv;
pub mod experiments;
pub mod methods;

pub use config::KvConfig;
pub use csv::CsvDoc;

/// Deterministic seed mixing (splitmix64 over the concatenated words).
pub fn mix_seed(base: u64, parts: &[u64]) -> u64 {
    let mut state = base;
    for &p in parts {
        state = state.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(p);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        state = z ^ (z >> 31);
    }
    state
}
