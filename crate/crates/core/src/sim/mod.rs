//! Time integration, waveform reconstruction and hysteresis checks.

mod csv;
mod drive;
mod integrate;
mod trajectory;
mod waveforms;

pub use csv::{write_trajectory_csv, write_waveforms_csv};
pub use drive::{
    drive_element, incremental_bound, pinch_check, pinch_pair, pinch_report, Drive, DriveVariable, PinchReport,
    DRIVE_SAMPLES,
};
pub use integrate::{integrate, integrate_on, uniform_grid, Method, Solution, Stats, MAX_STEPS};
pub use trajectory::{ikvl_residual, simulate, IntegratorInfo, Trajectory};
pub use waveforms::{branch_waveforms, differentiate, ElementSeries, ElementWaveforms, Quantity};
