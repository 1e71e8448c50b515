//! Decomposition of space-time signals into spatial and temporal intrinsic
//! mode functions by fast iterative filtering.
//!
//! A signal is a [`SignalCube`]: samples on an `n`-dimensional spatial grid
//! at `T` instants, time stored last. [`decompose`] alternates between
//! extracting a spatial IMF (one n-D kernel applied to every time slice) and
//! a temporal IMF (one 1-D kernel applied along time at every location, its
//! length set by the rotation angles between consecutive slices). [`st_fif`]
//! instead filters with a single space-time kernel per IMF, which suits
//! signals whose time behaviour is the same everywhere.
//!
//! ```
//! use mdmvfif::{decompose, gen_example1, StopConfig};
//!
//! let (cube, _truth) = gen_example1(64, 64, 128, 7).unwrap();
//! let stop = StopConfig::new(0.0316, 200, 2).unwrap();
//! let result = decompose(&cube, 1.6, &stop).unwrap();
//! let back = result.reconstruct();
//! let err = cube.try_sub(&back).unwrap().max_abs() / cube.max_abs();
//! assert!(err < 1e-9);
//! ```

mod cube;
mod error;
mod fft;

pub mod dataio;
pub mod kernels;
pub mod orchestrator;
pub mod oscillation;
pub mod scaling;
pub mod sift;
pub mod signalgen;
pub mod spatial;
pub mod temporal;

pub use cube::SignalCube;
pub use error::{Error, Result};

pub use dataio::{
    export_plotdata, export_result, export_stfif, import_csv_stack, import_exported, read_cube, write_cube,
    PlotSelector,
};
pub use kernels::{
    kernel_spectrum, make_kernel_1d, make_kernel_nd, Kernel, Kernel1D, KernelND, KernelProfile, KernelSpectrum,
    Mollifier, SupportSpec, TabulatedProfile,
};
pub use orchestrator::{
    decompose, has_spatial_oscillation, has_temporal_oscillation, st_fif, DecompositionResult, ImfRecord, Scale,
    Stage, StFifResult,
};
pub use oscillation::{
    estimate_spatial_support, filter_length_from_spacing, local_extrema, min_support_over_time, ExtremaReport,
};
pub use sift::{extend_boundary, sift_fixed, sift_spectral, trim_boundary, SiftAxes, StageImf, StopConfig};
pub use signalgen::{gen_air_temperature, gen_example1, gen_example2, gen_separable, GroundTruth};
pub use spatial::extract_spatial_imf;
pub use temporal::{extract_temporal_imf, rotation_angles, temporal_filter_length, ThetaSeries};
