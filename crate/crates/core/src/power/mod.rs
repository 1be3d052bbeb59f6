//! Envelope power, third-order power-loss coefficients and level corrections.

pub mod coefficients;
pub mod hermite;

pub use coefficients::{
    coefficients, delta_p, envelope_power_first, third_order_loss, CurvatureScalars, PowerCoefficients, PowerContext,
    LIMIT_S,
};
pub use hermite::{hermite_values, level_correction, radial_hermite, tensor_hermite, HermitePolyValues, LevelContractions};
