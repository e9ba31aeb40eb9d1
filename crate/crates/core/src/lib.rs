#![no_std]
extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod langmuir;
pub mod model;
pub mod moments;
pub mod sde;
pub mod spectral;

pub use model::{
    correlation_from_noise, linearize_noise_coupling, validate_system, CorrelationTensor,
    DiagonalNoiseSpec, LinearSDESystem, ModelError, NoiseCoupling, Violation,
};
