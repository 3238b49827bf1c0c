//! Independent reference computations for validating the no-propagate estimators.

mod ensemble;
mod fd;
mod grid;
mod kernel;

pub use ensemble::{ensemble_response, EnsembleConfig, EnsembleEstimate};
pub use fd::{finite_difference_response, FdEstimate, FdMode, NoisePairing, DEFAULT_MC_DELTA_GAMMA};
pub use grid::{
    grid_smoothed_response, grid_transfer_response_1d, stationary_density, transition_matrix, wrapped_gaussian, GridOracleConfig,
    GridResponse, TransitionMatrix,
};
pub use kernel::{kernel_smoothed_response, KernelConfig, KernelEstimate, DEFAULT_KERNEL_SAMPLES};
