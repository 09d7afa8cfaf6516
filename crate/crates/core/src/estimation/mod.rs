//! Probit estimation of cooperation on basin size.

mod decomposition;
mod io;
pub mod normal;
mod piecewise;
mod probit;

pub use decomposition::{
    dummy_decomposition, dummy_decomposition_with, render_panel_b, CellObservation, DesignCell, DummyDecomposition,
    PanelBHeader, DUMMY_NAMES,
};
pub use io::{
    read_cell_observations, read_observations, write_cell_observations, write_observations, CELL_COLUMNS,
    OBSERVATION_COLUMNS,
};
pub use piecewise::{
    basin_covariates, curve, fit_piecewise_probit, fit_piecewise_probit_with, ongoing_from_initial, predict_rate,
    Observation, Prediction, KNOT, PIECEWISE_NAMES,
};
pub use probit::{fit_probit, ProbitDesign, ProbitFit, ProbitOptions};
