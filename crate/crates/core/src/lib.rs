//! Core account-profiling routines: domain types, feature engineering,
//! vectorization, a four-classifier bank, and evaluation statistics.
//!
//! Everything in this crate is pure computation over in-memory data. File
//! formats, corpus generation, and the command-line surface live in the
//! companion `botprof` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod classify;
pub mod eval;
pub mod features;
pub mod space;
pub mod stats;
pub mod timeutil;
pub mod types;
pub mod wilcoxon;

pub use types::{
    Account, AccountProfile, ClassLabel, Corpus, FollowSnapshot, TimeWindow, TweetRecord,
};

/// SplitMix64 step, used to derive named substreams from a root seed.
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
