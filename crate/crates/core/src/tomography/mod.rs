//! Quantum state and process tomography for a single qubit.

pub mod counts;
pub mod io;
pub mod physical;
pub mod process;
pub mod state;

pub use counts::{
    parse_counts_csv, read_counts_csv, simulate_counts, write_counts_csv, CountRecord, MeasurementSetting, NoiseModel,
};
pub use physical::project_to_physical;
pub use process::{process_fidelity, qpt_chi, ChiMatrix};
pub use state::{linear_inversion, mle_state, poisson_log_likelihood};
