//! The inner sifting loop, run entirely in the frequency domain.
//!
//! One sifting step `f <- f - f * w` is a multiplication by `1 - S` per
//! frequency bin, where `S` is the kernel's transfer function. After `k`
//! steps the transform is `(1 - S)^k F`. The relative change
//! `||F_k - F_{k-1}|| / ||F_{k-1}||` only depends on the per-bin energies of
//! `F`, so those are summed once over the broadcast axes and the stopping
//! test costs `O(bins)` per step instead of a pass over the whole cube.

use ndarray::{ArrayD, IxDyn};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use crate::cube::SignalCube;
use crate::error::{Error, Result};
use crate::fft;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopConfig {
    delta: f64,
    max_inner: usize,
    max_imfs: usize,
}

impl StopConfig {
    pub fn new(delta: f64, max_inner: usize, max_imfs: usize) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::InvalidConfig(format!("delta must be positive, got {delta}")));
        }
        if max_inner == 0 || max_imfs == 0 {
            return Err(Error::InvalidConfig(
                "max_inner and max_imfs must be at least 1".into(),
            ));
        }
        Ok(Self {
            delta,
            max_inner,
            max_imfs,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn max_inner(&self) -> usize {
        self.max_inner
    }

    pub fn max_imfs(&self) -> usize {
        self.max_imfs
    }
}

/// One extracted IMF together with what it took to get it.
#[derive(Debug, Clone, PartialEq)]
pub struct StageImf {
    pub imf: SignalCube,
    pub iterations: usize,
    /// Spectrum bins that had to be clamped into `[0, 1]`.
    pub clamped_bins: usize,
}

/// Which axes of a (space..., time) cube the spectrum covers. The remaining
/// axes are broadcast.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiftAxes {
    /// Every axis except the last.
    Spatial,
    /// Only the last axis.
    Temporal,
    All,
}

impl SiftAxes {
    pub fn axes(self, ndim: usize) -> Vec<usize> {
        match self {
            SiftAxes::Spatial => (0..ndim - 1).collect(),
            SiftAxes::Temporal => vec![ndim - 1],
            SiftAxes::All => (0..ndim).collect(),
        }
    }

    pub fn spectrum_shape(self, dims: &[usize]) -> Vec<usize> {
        self.axes(dims.len()).into_iter().map(|a| dims[a]).collect()
    }
}

/// Reflects `cube` by `pad[a]` samples on both ends of every axis, mirroring
/// about the edge sample without repeating it: `[1,2,3]`, pad 1 gives
/// `[2,1,2,3,2]`.
pub fn extend_boundary(cube: &SignalCube, pad: &[usize]) -> Result<SignalCube> {
    let dims = cube.dims();
    if pad.len() != dims.len() {
        return Err(Error::InvalidConfig(format!(
            "{} pad entries for {} axes",
            pad.len(),
            dims.len()
        )));
    }
    for (axis, (&p, &n)) in pad.iter().zip(dims).enumerate() {
        if p > 0 && p >= n {
            return Err(Error::PadTooLarge { axis, pad: p, extent: n });
        }
    }
    if pad.iter().all(|&p| p == 0) {
        return Ok(cube.clone());
    }
    let out_dims: Vec<usize> = dims.iter().zip(pad).map(|(n, p)| n + 2 * p).collect();
    let src = cube.array();
    let mut at = vec![0usize; dims.len()];
    let data = ArrayD::from_shape_fn(IxDyn(&out_dims), |idx| {
        for (a, slot) in at.iter_mut().enumerate() {
            let n = dims[a] as isize;
            let mut s = idx[a] as isize - pad[a] as isize;
            if s < 0 {
                s = -s;
            } else if s >= n {
                s = 2 * (n - 1) - s;
            }
            *slot = s as usize;
        }
        src[IxDyn(&at)]
    });
    Ok(SignalCube::from_trusted(data).with_meta_of(cube))
}

/// Removes `pad[a]` samples from both ends of every axis.
pub fn trim_boundary(cube: &SignalCube, pad: &[usize]) -> Result<SignalCube> {
    let dims = cube.dims();
    if pad.len() != dims.len() {
        return Err(Error::InvalidConfig(format!(
            "{} pad entries for {} axes",
            pad.len(),
            dims.len()
        )));
    }
    for (axis, (&p, &n)) in pad.iter().zip(dims).enumerate() {
        if 2 * p >= n {
            return Err(Error::PadTooLarge { axis, pad: p, extent: n });
        }
    }
    let view = cube.array().slice_each_axis(|ax| {
        let p = pad[ax.axis.index()];
        ndarray::Slice::from(p..ax.len - p)
    });
    Ok(SignalCube::from_trusted(view.to_owned()).with_meta_of(cube))
}

fn check_spectrum(cube: &SignalCube, spectrum: &ArrayD<f64>, axes: SiftAxes) -> Result<()> {
    let expected = axes.spectrum_shape(cube.dims());
    if spectrum.shape() != expected.as_slice() {
        return Err(Error::SpectrumShape {
            spectrum: spectrum.shape().to_vec(),
            expected,
        });
    }
    if let Some((bin, &value)) = spectrum
        .iter()
        .enumerate()
        .find(|(_, v)| !(0.0..=1.0).contains(*v))
    {
        return Err(Error::SpectrumOutOfRange { bin, value });
    }
    Ok(())
}

/// Row-major layout of bins against cube samples.
#[derive(Clone, Copy)]
enum Broadcast {
    /// bin = flat / inner (spectrum over leading axes)
    Leading { inner: usize },
    /// bin = flat % bins (spectrum over trailing axes, possibly all)
    Trailing { bins: usize },
}

impl Broadcast {
    fn new(cube: &SignalCube, axes: SiftAxes) -> Self {
        match axes {
            SiftAxes::Spatial => Broadcast::Leading {
                inner: cube.time_len(),
            },
            SiftAxes::Temporal => Broadcast::Trailing {
                bins: cube.time_len(),
            },
            SiftAxes::All => Broadcast::Trailing { bins: cube.len() },
        }
    }

    /// Per-bin energy summed over broadcast axes, in a fixed order.
    fn bin_energy(self, data: &[Complex64], nbins: usize) -> Vec<f64> {
        match self {
            Broadcast::Leading { inner } => data
                .par_chunks(inner)
                .map(|c| c.iter().map(|z| z.norm_sqr()).sum())
                .collect(),
            Broadcast::Trailing { bins } => {
                let mut g = vec![0.0; nbins];
                for chunk in data.chunks(bins) {
                    g.iter_mut().zip(chunk).for_each(|(e, z)| *e += z.norm_sqr());
                }
                g
            }
        }
    }

    fn apply(self, data: &mut [Complex64], factor: &[f64]) {
        match self {
            Broadcast::Leading { inner } => data
                .par_chunks_mut(inner)
                .zip(factor.par_iter())
                .for_each(|(c, &f)| c.iter_mut().for_each(|z| *z *= f)),
            Broadcast::Trailing { bins } => data.par_chunks_mut(bins).for_each(|c| {
                c.iter_mut().zip(factor).for_each(|(z, &f)| *z *= f)
            }),
        }
    }
}

fn forward(cube: &SignalCube, axes: SiftAxes) -> ArrayD<Complex64> {
    let mut spec = fft::to_complex(cube.array());
    fft::fft_axes(&mut spec, &axes.axes(cube.ndim()), false);
    spec
}

fn finish(
    cube: &SignalCube,
    mut spec: ArrayD<Complex64>,
    spectrum: &ArrayD<f64>,
    axes: SiftAxes,
    iterations: usize,
) -> SignalCube {
    let k = i32::try_from(iterations).unwrap_or(i32::MAX);
    let factor: Vec<f64> = spectrum.iter().map(|&s| (1.0 - s).powi(k)).collect();
    let layout = Broadcast::new(cube, axes);
    layout.apply(spec.as_slice_mut().expect("standard layout"), &factor);
    fft::fft_axes(&mut spec, &axes.axes(cube.ndim()), true);
    SignalCube::from_trusted(fft::real_part(&spec)).with_meta_of(cube)
}

/// Sifts until the relative change drops below `stop.delta()` or
/// `stop.max_inner()` steps have run. Returns the IMF and the step count.
pub fn sift_spectral(
    cube: &SignalCube,
    spectrum: &ArrayD<f64>,
    axes: SiftAxes,
    stop: &StopConfig,
) -> Result<(SignalCube, usize)> {
    check_spectrum(cube, spectrum, axes)?;
    if cube.norm() == 0.0 {
        return Ok((SignalCube::from_trusted(ArrayD::zeros(cube.array().raw_dim())).with_meta_of(cube), 0));
    }
    let spec = forward(cube, axes);
    let layout = Broadcast::new(cube, axes);
    let mut energy = layout.bin_energy(spec.as_slice().expect("standard layout"), spectrum.len());
    let s: Vec<f64> = spectrum.iter().copied().collect();
    let mut k = 0;
    loop {
        k += 1;
        let (mut num, mut den) = (0.0, 0.0);
        for (e, &sb) in energy.iter_mut().zip(&s) {
            num += sb * sb * *e;
            den += *e;
            *e *= (1.0 - sb) * (1.0 - sb);
        }
        let r = if den > 0.0 { (num / den).sqrt() } else { 0.0 };
        log::trace!("sift step {k}: relative change {r:.3e}");
        if r < stop.delta() || k >= stop.max_inner() {
            break;
        }
    }
    Ok((finish(cube, spec, spectrum, axes, k), k))
}

/// Exactly `iterations` sifting steps, no stopping test.
pub fn sift_fixed(
    cube: &SignalCube,
    spectrum: &ArrayD<f64>,
    axes: SiftAxes,
    iterations: usize,
) -> Result<SignalCube> {
    check_spectrum(cube, spectrum, axes)?;
    let spec = forward(cube, axes);
    Ok(finish(cube, spec, spectrum, axes, iterations))
}

/// The sequence `r_1, r_2, ...` of relative changes the stopping rule sees,
/// for inspection and diagnostics.
pub fn relative_changes(
    cube: &SignalCube,
    spectrum: &ArrayD<f64>,
    axes: SiftAxes,
    steps: usize,
) -> Result<Vec<f64>> {
    check_spectrum(cube, spectrum, axes)?;
    let spec = forward(cube, axes);
    let layout = Broadcast::new(cube, axes);
    let mut energy = layout.bin_energy(spec.as_slice().expect("standard layout"), spectrum.len());
    Ok((0..steps)
        .map(|_| {
            let (mut num, mut den) = (0.0, 0.0);
            for (e, &sb) in energy.iter_mut().zip(spectrum.iter()) {
                num += sb * sb * *e;
                den += *e;
                *e *= (1.0 - sb) * (1.0 - sb);
            }
            if den > 0.0 {
                (num / den).sqrt()
            } else {
                0.0
            }
        })
        .collect())
}
