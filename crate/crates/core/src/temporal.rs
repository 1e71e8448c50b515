//! One temporal IMF. The time filter length comes from the rotation angles
//! between consecutive flattened time slices, and the same 1-D kernel is run
//! along time at every spatial location.

use crate::cube::SignalCube;
use crate::error::{Error, Result};
use crate::kernels::{kernel_spectrum, make_kernel_1d};
use crate::oscillation::{filter_length_from_spacing, local_extrema};
use crate::sift::{sift_spectral, SiftAxes, StageImf, StopConfig};

/// Angles (radians, in `[0, π]`) between slices `t` and `t + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaSeries {
    angles: Vec<f64>,
}

impl ThetaSeries {
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        if let Some(index) = angles
            .iter()
            .position(|a| !(0.0..=std::f64::consts::PI).contains(a))
        {
            return Err(Error::InvalidConfig(format!(
                "angle {} at {index} is outside [0, pi]",
                angles[index]
            )));
        }
        Ok(Self { angles })
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.angles.iter().copied().fold(0.0, f64::max)
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.angles
    }
}

/// Angles at or below this are roundoff, not rotation.
pub const ANGLE_FLOOR: f64 = 1e-9;

/// Angle between consecutive flattened time slices.
///
/// Evaluated as `2 atan2(|a - b|, |a + b|)` on the unit-normalized slices,
/// which equals `arccos(<a, b>)` but keeps full precision for nearly parallel
/// slices and can never leave `[0, π]`.
pub fn rotation_angles(cube: &SignalCube) -> Result<ThetaSeries> {
    let t_len = cube.time_len();
    if t_len < 2 {
        return Err(Error::SeriesTooShort(t_len));
    }
    let values = cube.values();
    let mut norm2 = vec![0.0; t_len];
    for series in values.chunks(t_len) {
        norm2.iter_mut().zip(series).for_each(|(n, v)| *n += v * v);
    }
    if let Some(t) = norm2.iter().position(|&n| n == 0.0) {
        return Err(Error::DegenerateSlice { t });
    }
    let inv: Vec<f64> = norm2.iter().map(|n| 1.0 / n.sqrt()).collect();
    let mut diff2 = vec![0.0; t_len - 1];
    let mut sum2 = vec![0.0; t_len - 1];
    for series in values.chunks(t_len) {
        for t in 0..t_len - 1 {
            let a = series[t] * inv[t];
            let b = series[t + 1] * inv[t + 1];
            diff2[t] += (a - b) * (a - b);
            sum2[t] += (a + b) * (a + b);
        }
    }
    let angles = diff2
        .iter()
        .zip(&sum2)
        .map(|(d, s)| (2.0 * d.sqrt().atan2(s.sqrt())).clamp(0.0, std::f64::consts::PI))
        .collect();
    Ok(ThetaSeries { angles })
}

/// Twice the mean spacing between extrema of θ̃.
pub fn temporal_filter_length(theta: &ThetaSeries) -> Result<usize> {
    temporal_filter_length_with(theta, 2.0)
}

/// `multiplier` times the mean spacing between extrema of θ̃.
pub fn temporal_filter_length_with(theta: &ThetaSeries, multiplier: f64) -> Result<usize> {
    let report = local_extrema(theta.angles())?;
    filter_length_from_spacing(&report, multiplier)
}

pub fn extract_temporal_imf(cube: &SignalCube, half_length: usize, stop: &StopConfig) -> Result<StageImf> {
    let kernel = make_kernel_1d(half_length)?;
    let spectrum = kernel_spectrum(&kernel, &[cube.time_len()])?;
    let (imf, iterations) = sift_spectral(cube, spectrum.values(), SiftAxes::Temporal, stop)?;
    log::debug!(
        "temporal IMF: L = {half_length}, {iterations} steps, {} clamped bins",
        spectrum.clamped_bins()
    );
    Ok(StageImf {
        imf,
        iterations,
        clamped_bins: spectrum.clamped_bins(),
    })
}
