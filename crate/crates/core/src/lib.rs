//! Population-level regression of planar truss natural frequencies with a
//! graph network.
//!
//! The pipeline generates random Delaunay trusses ([`synth`]), labels each
//! with its first natural frequency from a finite-element modal solve
//! ([`fem`]), encodes it as an attributed graph ([`truss`], [`graph`]) and
//! trains an edge/node/global block network ([`gnn`], [`training`]) to
//! predict the label.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the precision used by the data pipeline.

pub mod delaunay;
pub mod fem;
pub mod gnn;
pub mod graph;
pub mod linalg;
pub mod scalar;
pub mod selftest;
pub mod synth;
pub mod training;
pub mod truss;

pub use gnn::{Activation, Aggregator, Architecture, GnnError};
pub use graph::{GraphDims, GraphError};
pub use scalar::Scalar;
pub use synth::{LabeledSample, SynthConfig};
pub use training::{nmse, History, TrainConfig, TrainError};

pub type Graph = graph::AttributedGraph<f64>;
pub type Graph32 = graph::AttributedGraph<f32>;
pub type Batch = graph::BatchedGraph<f64>;
pub type Batch32 = graph::BatchedGraph<f32>;
pub type Model = gnn::GnModel<f64>;
pub type Model32 = gnn::GnModel<f32>;
pub type Truss = truss::Truss<f64>;
pub type Dataset = training::Dataset<f64>;
pub type Checkpoint = training::Checkpoint<f64>;
pub type Matrix = linalg::Matrix<f64>;
