//! Clique detection by l1 recovery over the Radon basis of a network.
//!
//! Observations live on the `j`-sets of `n` nodes (edges for `j = 2`). A
//! weighted family of cliques is mapped to observations by the dictionary in
//! [`radon`], and sparse clique weights are recovered from observations by
//! basis pursuit ([`bp`]) on the dense dictionary or by column generation
//! ([`colgen`]) when the dictionary is too large to enumerate. [`conditions`]
//! checks the recovery guarantees, [`netio`] loads graphs and produces
//! observation vectors, and [`lp`] is the interior-point solver underneath.

// `!(x >= 0.0)` style checks are meant to reject NaN too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bp;
pub mod colgen;
pub mod combinat;
pub mod conditions;
pub mod error;
pub mod lp;
pub mod netio;
pub mod radon;

pub use bp::{BpResult, PathMode};
pub use colgen::{ColgenLimits, ColgenResult, ColgenStatus, Pricing};
pub use combinat::{binom, rank_kset, unrank_kset, KSet};
pub use error::{Error, Result};
pub use lp::{LinearProgram, LpSolution, LpStatus, Tolerances};
pub use netio::{Graph, NoiseScope, Observations};
pub use radon::{CliqueDictionary, DictionaryScope, SparseSignal};
