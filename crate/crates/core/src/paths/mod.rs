//! Monte Carlo for the killed α-stable process.
//!
//! Paths are built by subordination: a Brownian motion running at twice the
//! usual speed, evaluated at an independent (α/2)-stable subordinator. Each
//! time step is exact in distribution; only exits between grid times are
//! missed, which biases exit times upward by at most one step per excursion.
//!
//! Every path owns one [`RngStream`] keyed by `(seed, path index)`, and all
//! tallies are reduced in path order, so results do not depend on how many
//! threads ran them.

mod exit;
mod rng;
mod stable;

pub use exit::{
    boundary_decay_profile, fit_lambda1, mean_exit, simulate_exit, survival_curve, DecayProfile, DecayRow, ExitSample, MeanExit, RateFit,
    SurvivalEstimate,
};
pub use rng::RngStream;
pub use stable::{sample_positive_stable, sample_stable_increment};
