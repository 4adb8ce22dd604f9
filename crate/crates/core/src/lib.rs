//! QoE-driven placement and movement of UAV aerial base stations.
//!
//! Ground users are grouped into clusters, each served by one UAV over its own
//! spectrum slice. The objective is the summed mean opinion score of web
//! browsing users, driven by the air-to-ground channel.

pub mod baselines;
pub mod channel;
pub mod cli;
pub mod clustering;
pub mod qoe;
pub mod report;
pub mod rl;
pub mod scenario;
pub mod world;

pub use channel::{ChannelParams, Position3};
pub use clustering::{gak_means, kmeans, GaConfig, Partition, Point2};
pub use qoe::{mos, MosProfile, MosScore};
pub use rl::{QLearnConfig, QTable};
pub use scenario::Scenario;
pub use world::{Action, Arena, GridPos, World};
