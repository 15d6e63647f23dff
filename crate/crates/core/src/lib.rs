//! Trapped-ion register used as a measuring device for the vibrational mode.
//!
//! An `N`-ion electronic register is Fourier transformed, coupled to the
//! centre-of-mass mode by `exp(i r x̂ Υ̂)`, and transformed back. Reading out the
//! register gives a result `l` whose distribution `P(l)` approximates the
//! mode's quadrature distribution on a grid of `2^N` points.
//!
//! * [`register`]: register encoding, Fourier transform, phase kicks, sampling.
//! * [`cvmode`]: momentum-grid wavefunctions of the vibrational mode.
//! * [`protocol`]: analytic readout distribution and derived quantities.
//! * [`oracle`]: brute-force joint-state simulation used for validation.

pub mod cvmode;
pub mod error;
pub mod oracle;
pub mod protocol;
pub mod register;

pub use cvmode::{gaussian_state, GaussianSpec, Grid, ModeState, PositionDistribution};
pub use error::{Axis, Error, Result};
pub use oracle::{conditional_state, oracle_vs_analytic, run_protocol, JointState, OracleLimits};
pub use protocol::{
    estimate_moments, n_min, readout_distribution, readout_distribution_gaussian, reflect_and_map,
    truncation_order, MappedDistribution, Moments, ProtocolConfig, ReadoutDistribution, Truncation,
};
pub use register::{Direction, RegisterState};
