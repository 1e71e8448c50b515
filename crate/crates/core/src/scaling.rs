//! Runtime scaling of the spatial stage against grid size.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use crate::cube::SignalCube;
use crate::error::{Error, Result};
use crate::oscillation::min_support_over_time;
use crate::sift::StopConfig;
use crate::spatial::extract_spatial_imf;

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingPoint {
    /// Side of the square spatial grid.
    pub size: usize,
    pub time_len: usize,
    /// Median wall time of one spatial IMF extraction.
    pub runtime: Duration,
    pub iterations: usize,
}

impl ScalingPoint {
    pub fn samples(&self) -> usize {
        self.size * self.size * self.time_len
    }
}

/// Two spatial tones with a fixed number of cycles across the grid, so the
/// estimated support grows with the grid and the iteration count stays put.
pub fn scaling_cube(size: usize, time_len: usize) -> Result<SignalCube> {
    let n = size as f64;
    SignalCube::from_fn(&[size, size, time_len], |i| {
        let (x, y, t) = (i[0] as f64 / n, i[1] as f64 / n, i[2] as f64 / time_len as f64);
        (2.0 * PI * (8.0 * x + 0.5 * t)).sin() * (2.0 * PI * 8.0 * y).cos()
            + (2.0 * PI * (2.0 * x + t)).cos() + (2.0 * PI * 2.0 * y).sin()
    })
}

/// Median runtime of [`extract_spatial_imf`] over `repeats` runs for each
/// square size, with the support estimated once beforehand.
pub fn measure(sizes: &[usize], time_len: usize, repeats: usize, stop: &StopConfig) -> Result<Vec<ScalingPoint>> {
    if repeats == 0 {
        return Err(Error::InvalidConfig("repeats must be at least 1".into()));
    }
    sizes
        .iter()
        .map(|&size| {
            let cube = scaling_cube(size, time_len)?;
            let support = min_support_over_time(&cube, 1.6)?;
            // warm-up: plans and allocator
            let first = extract_spatial_imf(&cube, &support, stop)?;
            let mut times: Vec<Duration> = (0..repeats)
                .map(|_| {
                    let start = Instant::now();
                    extract_spatial_imf(&cube, &support, stop).map(|_| start.elapsed())
                })
                .collect::<Result<_>>()?;
            times.sort();
            Ok(ScalingPoint {
                size,
                time_len,
                runtime: times[times.len() / 2],
                iterations: first.iterations,
            })
        })
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return None;
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Slope of runtime against sample count.
pub fn runtime_slope(points: &[ScalingPoint]) -> Option<f64> {
    let xy: Vec<(f64, f64)> = points
        .iter()
        .map(|p| (p.samples() as f64, p.runtime.as_secs_f64()))
        .collect();
    loglog_slope(&xy)
}
