//! Strategic-uncertainty measures for N-player repeated social dilemmas.
//!
//! A group of `N` players repeatedly chooses to cooperate or defect; each
//! player only learns whether *all* others cooperated. The crate covers:
//!
//! - [`game`]: the stage game, normalized by a relative cost `x`;
//! - [`strategies`]: Grim trigger and All-D automata;
//! - [`basin`]: the size of All-D's basin of attraction under correlated and
//!   independent beliefs, and treatment design by inverting it;
//! - [`simulator`]: seeded Monte Carlo sessions with random rematching;
//! - [`estimation`]: piecewise probit of cooperation on basin size;
//! - [`config`]: TOML treatment and session files.
//!
//! ```
//! use coopbasin::basin::{basin_corr, basin_ind};
//!
//! let corr = basin_corr(1.0, 0.75)?;
//! let ind = basin_ind(1.0, 4, 0.75)?;
//! assert!((corr - 1.0 / 3.0).abs() < 1e-12);
//! assert!((ind - 3f64.powf(-1.0 / 3.0)).abs() < 1e-12);
//! # Ok::<(), coopbasin::Error>(())
//! ```

pub mod basin;
pub mod config;
mod error;
pub mod estimation;
pub mod exact;
pub mod game;
pub mod simulator;
pub mod strategies;
mod sum;

pub use error::{Error, Result};

// The guide's code samples run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/basins.md")]
    mod basins {}
    #[doc = include_str!("../../../book/src/design.md")]
    mod design {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/estimation.md")]
    mod estimation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
