//! Compactly supported smoothing kernels and their discrete spectra.
//!
//! Kernels are sampled from a [`KernelProfile`] on the normalized grid
//! `u = j / (L + 1)`, `j = -L..=L`, so the profile's zero at `|u| = 1` lies just
//! outside the sampled points. The default profile is the C∞ bump
//! `exp(1 / (u² - 1))`. Any other even profile vanishing at `|u| >= 1` (for
//! example a tabulated Fokker-Planck shape) can be plugged in through the
//! `*_with` constructors without touching the rest of the pipeline.

use ndarray::{ArrayD, ArrayView1, ArrayViewD, Dimension, IxDyn};

use crate::error::{Error, Result};
use crate::fft;

/// Radial profile of a smoothing kernel on the normalized radius `u`.
pub trait KernelProfile: Send + Sync {
    /// Must be nonnegative, even, continuous and zero for `|u| >= 1`.
    fn eval(&self, u: f64) -> f64;
}

/// The smooth bump `exp(1 / (u² - 1))` on `|u| < 1`, zero elsewhere.
#[derive(Debug, Clone, Copy, Default)]
pub struct Mollifier;

impl KernelProfile for Mollifier {
    fn eval(&self, u: f64) -> f64 {
        if u.abs() < 1.0 {
            (1.0 / (u * u - 1.0)).exp()
        } else {
            0.0
        }
    }
}

/// Profile given by samples on `u = 0, 1/(n-1), ..., 1`, linearly
/// interpolated and mirrored to negative `u`. The last sample is forced to 0.
#[derive(Debug, Clone)]
pub struct TabulatedProfile {
    samples: Vec<f64>,
}

impl TabulatedProfile {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.len() < 2 || samples.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidConfig(
                "tabulated profile needs >= 2 finite nonnegative samples".into(),
            ));
        }
        *samples.last_mut().unwrap() = 0.0;
        Ok(Self { samples })
    }
}

impl KernelProfile for TabulatedProfile {
    fn eval(&self, u: f64) -> f64 {
        let u = u.abs();
        if u >= 1.0 {
            return 0.0;
        }
        let pos = u * (self.samples.len() - 1) as f64;
        let i = pos.floor() as usize;
        let frac = pos - i as f64;
        self.samples[i] * (1.0 - frac) + self.samples[i + 1] * frac
    }
}

/// Per-axis half-support lengths (in samples) of a spatial kernel.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SupportSpec {
    half_lengths: Vec<usize>,
}

impl SupportSpec {
    pub fn new(half_lengths: Vec<usize>) -> Result<Self> {
        if half_lengths.is_empty() {
            return Err(Error::InvalidConfig("support needs at least one axis".into()));
        }
        if let Some(&bad) = half_lengths.iter().find(|&&l| l < 1) {
            return Err(Error::InvalidFilterLength(bad));
        }
        Ok(Self { half_lengths })
    }

    pub fn half_lengths(&self) -> &[usize] {
        &self.half_lengths
    }

    pub fn ndim(&self) -> usize {
        self.half_lengths.len()
    }

    /// Elementwise minimum of two supports of equal rank.
    pub fn min(&self, other: &SupportSpec) -> SupportSpec {
        debug_assert_eq!(self.ndim(), other.ndim());
        SupportSpec {
            half_lengths: self
                .half_lengths
                .iter()
                .zip(&other.half_lengths)
                .map(|(a, b)| *a.min(b))
                .collect(),
        }
    }

    /// True when every half-length is below half the matching grid extent,
    /// i.e. the full kernel `2L + 1` fits on the axis.
    pub fn fits(&self, grid: &[usize]) -> bool {
        grid.len() == self.ndim()
            && self
                .half_lengths
                .iter()
                .zip(grid)
                .all(|(&l, &n)| 2 * l < n)
    }
}

impl std::fmt::Display for SupportSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.half_lengths.iter().map(|l| l.to_string()).collect();
        write!(f, "{}", parts.join("x"))
    }
}

/// Anything that can be laid onto a grid and transformed.
pub trait Kernel {
    /// Weights as an n-D array of odd extents `2 * L_a + 1`.
    fn weights_nd(&self) -> ArrayViewD<'_, f64>;

    fn extents(&self) -> Vec<usize> {
        self.weights_nd().shape().to_vec()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Kernel1D {
    half_length: usize,
    weights: Vec<f64>,
}

impl Kernel1D {
    pub fn half_length(&self) -> usize {
        self.half_length
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `w * w`: half-length `2L`, transfer function `S²`, which is never
    /// negative.
    pub fn autocorrelation(&self) -> Kernel1D {
        let n = self.weights.len();
        let mut out = vec![0.0; 2 * n - 1];
        for (i, a) in self.weights.iter().enumerate() {
            for (j, b) in self.weights.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Kernel1D {
            half_length: 2 * self.half_length,
            weights: out,
        }
    }
}

impl Kernel for Kernel1D {
    fn weights_nd(&self) -> ArrayViewD<'_, f64> {
        ArrayView1::from(&self.weights[..]).into_dyn()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelND {
    half_lengths: Vec<usize>,
    weights: ArrayD<f64>,
}

impl KernelND {
    pub fn half_lengths(&self) -> &[usize] {
        &self.half_lengths
    }

    pub fn weights(&self) -> &ArrayD<f64> {
        &self.weights
    }

    /// `w * w` along every axis jointly; the transfer function is `S²`.
    pub fn autocorrelation(&self) -> KernelND {
        let shape: Vec<usize> = self.weights.shape().iter().map(|n| 2 * n - 1).collect();
        let mut out = ArrayD::zeros(IxDyn(&shape));
        let mut at = vec![0usize; shape.len()];
        for (i, &a) in self.weights.indexed_iter() {
            for (j, &b) in self.weights.indexed_iter() {
                for (k, slot) in at.iter_mut().enumerate() {
                    *slot = i[k] + j[k];
                }
                out[IxDyn(&at)] += a * b;
            }
        }
        KernelND {
            half_lengths: self.half_lengths.iter().map(|l| 2 * l).collect(),
            weights: out,
        }
    }

    /// Tensor product of a spatial kernel and a temporal kernel, renormalized
    /// to unit mass. The temporal axis comes last.
    pub fn space_time(spatial: &KernelND, temporal: &Kernel1D) -> KernelND {
        let mut shape = spatial.weights.shape().to_vec();
        shape.push(temporal.weights.len());
        let nt = temporal.weights.len();
        let mut values = Vec::with_capacity(spatial.weights.len() * nt);
        for &ws in spatial.weights.iter() {
            values.extend(temporal.weights.iter().map(|&wt| ws * wt));
        }
        let total: f64 = values.iter().sum();
        values.iter_mut().for_each(|v| *v /= total);
        let mut half_lengths = spatial.half_lengths.clone();
        half_lengths.push(temporal.half_length);
        KernelND {
            half_lengths,
            weights: ArrayD::from_shape_vec(IxDyn(&shape), values).expect("shape matches"),
        }
    }
}

impl Kernel for KernelND {
    fn weights_nd(&self) -> ArrayViewD<'_, f64> {
        self.weights.view()
    }
}

fn normalize(values: &mut [f64]) -> Result<()> {
    let total: f64 = values.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::InvalidConfig(
            "kernel profile has no mass on the sampling grid".into(),
        ));
    }
    values.iter_mut().for_each(|v| *v /= total);
    Ok(())
}

pub fn make_kernel_1d(half_length: usize) -> Result<Kernel1D> {
    make_kernel_1d_with(&Mollifier, half_length)
}

pub fn make_kernel_1d_with(profile: &dyn KernelProfile, half_length: usize) -> Result<Kernel1D> {
    if half_length < 1 {
        return Err(Error::InvalidFilterLength(half_length));
    }
    let scale = (half_length + 1) as f64;
    let l = half_length as isize;
    let mut weights: Vec<f64> = (-l..=l).map(|j| profile.eval(j as f64 / scale)).collect();
    // exact evenness regardless of profile roundoff
    for j in 0..half_length {
        let mirror = weights[2 * half_length - j];
        weights[j] = mirror;
    }
    normalize(&mut weights)?;
    Ok(Kernel1D {
        half_length,
        weights,
    })
}

pub fn make_kernel_nd(support: &SupportSpec) -> Result<KernelND> {
    make_kernel_nd_with(&Mollifier, support)
}

/// Samples `profile(r)` with `r = sqrt(sum_a (j_a / (L_a + 1))^2)`, i.e. an
/// ellipsoid whose semi-axes follow the per-axis half-lengths.
pub fn make_kernel_nd_with(profile: &dyn KernelProfile, support: &SupportSpec) -> Result<KernelND> {
    let half = support.half_lengths();
    if let Some(&bad) = half.iter().find(|&&l| l < 1) {
        return Err(Error::InvalidFilterLength(bad));
    }
    let shape: Vec<usize> = half.iter().map(|l| 2 * l + 1).collect();
    let weights = ArrayD::from_shape_fn(IxDyn(&shape), |idx| {
        let r2: f64 = idx
            .slice()
            .iter()
            .zip(half)
            .map(|(&i, &l)| {
                let u = i.abs_diff(l) as f64 / (l + 1) as f64;
                u * u
            })
            .sum();
        let r = r2.sqrt();
        if r >= 1.0 {
            0.0
        } else {
            profile.eval(r)
        }
    });
    let mut weights = weights;
    normalize(weights.as_slice_mut().expect("fresh array"))?;
    Ok(KernelND {
        half_lengths: half.to_vec(),
        weights,
    })
}

const CLAMP_REPORT_TOL: f64 = 1e-12;

/// Real transfer function of a kernel on a grid, clamped into `[0, 1]`.
#[derive(Debug, Clone)]
pub struct KernelSpectrum {
    values: ArrayD<f64>,
    clamped_bins: usize,
}

impl KernelSpectrum {
    pub fn values(&self) -> &ArrayD<f64> {
        &self.values
    }

    pub fn into_values(self) -> ArrayD<f64> {
        self.values
    }

    /// Number of bins whose raw value fell outside `[0, 1]` by more than
    /// roundoff.
    pub fn clamped_bins(&self) -> usize {
        self.clamped_bins
    }
}

/// DFT of the kernel zero-padded onto `grid_shape` with its center at the
/// origin (circular wrap). Only the real part is kept.
pub fn raw_kernel_spectrum<K: Kernel + ?Sized>(kernel: &K, grid_shape: &[usize]) -> Result<ArrayD<f64>> {
    let w = kernel.weights_nd();
    let ext = w.shape();
    if ext.len() != grid_shape.len() || ext.iter().zip(grid_shape).any(|(k, g)| k > g) {
        return Err(Error::KernelTooLarge {
            kernel: ext.to_vec(),
            grid: grid_shape.to_vec(),
        });
    }
    let mut buf = ArrayD::from_elem(IxDyn(grid_shape), rustfft::num_complex::Complex64::default());
    let mut target = vec![0usize; ext.len()];
    for (idx, &v) in w.indexed_iter() {
        for (a, t) in target.iter_mut().enumerate() {
            let half = ext[a] / 2;
            let n = grid_shape[a];
            *t = (idx[a] + n - half) % n;
        }
        buf[IxDyn(&target)].re += v;
    }
    fft::fft_axes(&mut buf, &fft::all_axes(grid_shape.len()), false);
    Ok(fft::real_part(&buf))
}

pub fn kernel_spectrum<K: Kernel + ?Sized>(kernel: &K, grid_shape: &[usize]) -> Result<KernelSpectrum> {
    let mut values = raw_kernel_spectrum(kernel, grid_shape)?;
    let mut clamped_bins = 0;
    values.mapv_inplace(|v| {
        let c = v.clamp(0.0, 1.0);
        // roundoff at DC or at exact zeros is not worth reporting
        if (c - v).abs() > CLAMP_REPORT_TOL {
            clamped_bins += 1;
        }
        c
    });
    Ok(KernelSpectrum {
        values,
        clamped_bins,
    })
}
