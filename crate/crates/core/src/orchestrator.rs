//! Outer loops: alternating spatial/temporal extraction, and the separable
//! variant that uses one space-time kernel per IMF.

use std::fmt;

use crate::cube::SignalCube;
use crate::error::{Error, Result};
use crate::kernels::{kernel_spectrum, make_kernel_1d, make_kernel_nd, KernelND, SupportSpec};
use crate::oscillation::{axis_extrema_counts, local_extrema, maximal_half_length, min_support_over_time};
use crate::sift::{sift_spectral, SiftAxes, StopConfig};
use crate::spatial::extract_spatial_imf;
use crate::temporal::{
    extract_temporal_imf, rotation_angles, temporal_filter_length_with, ThetaSeries, ANGLE_FLOOR,
};

/// Multiplier on the mean θ̃ extrema spacing used by [`decompose`] and
/// [`st_fif`] when choosing the time filter length. θ̃ extrema of a rotating
/// mode sit about a quarter of its period apart, so this gives `L` close to
/// one period.
pub const TEMPORAL_MULTIPLIER: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Spatial,
    Temporal,
    SpaceTime,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Spatial => "spatial",
            Stage::Temporal => "temporal",
            Stage::SpaceTime => "spacetime",
        })
    }
}

/// Filter size used for one IMF.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scale {
    Support(SupportSpec),
    HalfLength(usize),
    SpaceTime { support: SupportSpec, half_length: usize },
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scale::Support(s) => write!(f, "support={s}"),
            Scale::HalfLength(l) => write!(f, "L={l}"),
            Scale::SpaceTime { support, half_length } => write!(f, "support={support} L={half_length}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImfRecord {
    pub stage: Stage,
    pub scale: Scale,
    pub iterations: usize,
    pub clamped_bins: usize,
    /// Outer round (0-based) that produced the IMF.
    pub round: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionResult {
    pub spatial_imfs: Vec<SignalCube>,
    pub temporal_imfs: Vec<SignalCube>,
    pub residual: SignalCube,
    /// One record per IMF, in extraction order.
    pub diagnostics: Vec<ImfRecord>,
    pub warnings: Vec<String>,
}

impl DecompositionResult {
    /// Sum of every IMF and the residual.
    pub fn reconstruct(&self) -> SignalCube {
        let mut acc = self.residual.clone();
        for imf in self.spatial_imfs.iter().chain(&self.temporal_imfs) {
            acc.add_assign(imf).expect("all parts share the input shape");
        }
        acc
    }

    pub fn records(&self, stage: Stage) -> impl Iterator<Item = &ImfRecord> {
        self.diagnostics.iter().filter(move |r| r.stage == stage)
    }
}

/// Separable decomposition output; `imfs` excludes the residual.
#[derive(Debug, Clone, PartialEq)]
pub struct StFifResult {
    pub imfs: Vec<SignalCube>,
    pub residual: SignalCube,
    pub diagnostics: Vec<ImfRecord>,
    pub warnings: Vec<String>,
}

impl StFifResult {
    /// IMFs followed by the residual.
    pub fn into_vec(self) -> Vec<SignalCube> {
        let mut v = self.imfs;
        v.push(self.residual);
        v
    }

    pub fn reconstruct(&self) -> SignalCube {
        let mut acc = self.residual.clone();
        for imf in &self.imfs {
            acc.add_assign(imf).expect("all parts share the input shape");
        }
        acc
    }
}

/// At least one time slice whose per-line extrema, summed along some axis,
/// reach two.
pub fn has_spatial_oscillation(cube: &SignalCube) -> bool {
    (0..cube.time_len()).any(|t| {
        axis_extrema_counts(&cube.time_slice(t))
            .into_iter()
            .any(|c| c >= 2)
    })
}

enum TimeCheck {
    Oscillating(ThetaSeries),
    Quiet,
    Degenerate(String),
}

fn check_time(cube: &SignalCube) -> TimeCheck {
    if cube.time_len() < 3 {
        return TimeCheck::Quiet;
    }
    match rotation_angles(cube) {
        Ok(theta) => {
            let enough = local_extrema(theta.angles()).map(|r| r.count() >= 2).unwrap_or(false);
            if enough && theta.max() > ANGLE_FLOOR {
                TimeCheck::Oscillating(theta)
            } else {
                TimeCheck::Quiet
            }
        }
        Err(e) => TimeCheck::Degenerate(e.to_string()),
    }
}

/// θ̃ exists and has at least two extrema. Angles that never exceed
/// [`ANGLE_FLOOR`] count as no rotation at all.
pub fn has_temporal_oscillation(cube: &SignalCube) -> bool {
    matches!(check_time(cube), TimeCheck::Oscillating(_))
}

fn check_grid(cube: &SignalCube) -> Result<()> {
    if cube.spatial_dims().iter().any(|&n| n < 3) {
        return Err(Error::GridTooSmall(cube.spatial_dims().to_vec()));
    }
    if cube.time_len() < 3 {
        return Err(Error::SeriesTooShort(cube.time_len()));
    }
    Ok(())
}

fn warn_once(warnings: &mut Vec<String>, msg: String) {
    if !warnings.contains(&msg) {
        log::warn!("{msg}");
        warnings.push(msg);
    }
}

fn time_length(theta: &ThetaSeries, t_len: usize) -> Result<usize> {
    Ok(temporal_filter_length_with(theta, TEMPORAL_MULTIPLIER)?.min(maximal_half_length(t_len)))
}

/// Alternates spatial and temporal IMF extraction until neither stage finds
/// oscillation or both lists are full. A stage without oscillation is
/// skipped for that round while the other keeps going.
pub fn decompose(cube: &SignalCube, xi: f64, stop: &StopConfig) -> Result<DecompositionResult> {
    check_grid(cube)?;
    let mut f = cube.clone();
    let mut spatial_imfs = Vec::new();
    let mut temporal_imfs = Vec::new();
    let mut diagnostics = Vec::new();
    let mut warnings = Vec::new();

    for round in 0.. {
        let mut progressed = false;

        if spatial_imfs.len() < stop.max_imfs() && has_spatial_oscillation(&f) {
            let support = min_support_over_time(&f, xi).map_err(|e| e.in_round(round))?;
            let out = extract_spatial_imf(&f, &support, stop).map_err(|e| e.in_round(round))?;
            f.sub_assign(&out.imf)?;
            diagnostics.push(ImfRecord {
                stage: Stage::Spatial,
                scale: Scale::Support(support),
                iterations: out.iterations,
                clamped_bins: out.clamped_bins,
                round,
            });
            spatial_imfs.push(out.imf);
            progressed = true;
        }

        if temporal_imfs.len() < stop.max_imfs() {
            match check_time(&f) {
                TimeCheck::Oscillating(theta) => {
                    let l = time_length(&theta, f.time_len()).map_err(|e| e.in_round(round))?;
                    let out = extract_temporal_imf(&f, l, stop).map_err(|e| e.in_round(round))?;
                    f.sub_assign(&out.imf)?;
                    diagnostics.push(ImfRecord {
                        stage: Stage::Temporal,
                        scale: Scale::HalfLength(l),
                        iterations: out.iterations,
                        clamped_bins: out.clamped_bins,
                        round,
                    });
                    temporal_imfs.push(out.imf);
                    progressed = true;
                }
                TimeCheck::Degenerate(msg) => {
                    warn_once(&mut warnings, format!("temporal stage skipped: {msg}"));
                }
                TimeCheck::Quiet => {}
            }
        }

        if !progressed {
            break;
        }
    }

    Ok(DecompositionResult {
        spatial_imfs,
        temporal_imfs,
        residual: f,
        diagnostics,
        warnings,
    })
}

/// One space-time kernel per IMF: the product of the spatial kernel on the
/// minimal support and the temporal kernel of length `L`. When θ̃ cannot set
/// `L` (degenerate slices or no rotation) the largest admissible `L` is used,
/// so the time axis is averaged as broadly as possible.
pub fn st_fif(cube: &SignalCube, xi: f64, stop: &StopConfig) -> Result<StFifResult> {
    check_grid(cube)?;
    let mut f = cube.clone();
    let mut imfs = Vec::new();
    let mut diagnostics = Vec::new();
    let mut warnings = Vec::new();
    let t_len = f.time_len();

    for round in 0..stop.max_imfs() {
        let time = check_time(&f);
        let spatial = has_spatial_oscillation(&f);
        if !spatial && !matches!(time, TimeCheck::Oscillating(_)) {
            break;
        }
        let half_length = match time {
            TimeCheck::Oscillating(theta) => time_length(&theta, t_len).map_err(|e| e.in_round(round))?,
            TimeCheck::Degenerate(msg) => {
                warn_once(&mut warnings, format!("time length falls back to maximum: {msg}"));
                maximal_half_length(t_len)
            }
            TimeCheck::Quiet => maximal_half_length(t_len),
        };
        let support = min_support_over_time(&f, xi).map_err(|e| e.in_round(round))?;
        let kernel = KernelND::space_time(
            &make_kernel_nd(&support).map_err(|e| e.in_round(round))?,
            &make_kernel_1d(half_length).map_err(|e| e.in_round(round))?,
        );
        let spectrum = kernel_spectrum(&kernel, f.dims()).map_err(|e| e.in_round(round))?;
        let (imf, iterations) =
            sift_spectral(&f, spectrum.values(), SiftAxes::All, stop).map_err(|e| e.in_round(round))?;
        log::debug!("space-time IMF {round}: support {support}, L = {half_length}, {iterations} steps");
        f.sub_assign(&imf)?;
        diagnostics.push(ImfRecord {
            stage: Stage::SpaceTime,
            scale: Scale::SpaceTime { support, half_length },
            iterations,
            clamped_bins: spectrum.clamped_bins(),
            round,
        });
        imfs.push(imf);
    }

    Ok(StFifResult {
        imfs,
        residual: f,
        diagnostics,
        warnings,
    })
}
