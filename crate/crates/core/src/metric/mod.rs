//! Horizontal flows and Carnot–Carathéodory distance estimates.

mod flow;
mod group;
mod solver;

pub use flow::{flow_anchored, horizontal_flow, path_length, ControlPath, Trajectory};
pub use group::{cone_convergence_check, group_cc_distance, group_frame, ConeCheckCell, ConeCheckTable};
pub use solver::{cc_distance, DistanceEstimate, SolverOptions};
