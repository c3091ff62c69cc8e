//! Graph ingestion, observation vectors, synthetic instances and the
//! conductance/volume metrics.

mod gml;
mod graph;
mod observations;

pub use gml::load_gml;
pub use graph::{conductance, load_edge_list, volume, Graph};
pub use observations::{
    basketball_preset, count_jsets, devectorize, gen_planted, vectorize, BallotCounts, NoiseScope,
    Observations, PlantedSpec,
};
