//! One spatial IMF: a single n-D kernel applied to every time slice, with one
//! iteration count shared by the whole cube.

use crate::cube::SignalCube;
use crate::error::{Error, Result};
use crate::kernels::{kernel_spectrum, make_kernel_nd, SupportSpec};
use crate::sift::{sift_spectral, SiftAxes, StageImf, StopConfig};

pub fn extract_spatial_imf(cube: &SignalCube, support: &SupportSpec, stop: &StopConfig) -> Result<StageImf> {
    let grid = cube.spatial_dims();
    if !support.fits(grid) {
        return Err(Error::KernelTooLarge {
            kernel: support.half_lengths().iter().map(|l| 2 * l + 1).collect(),
            grid: grid.to_vec(),
        });
    }
    let kernel = make_kernel_nd(support)?;
    let spectrum = kernel_spectrum(&kernel, grid)?;
    let (imf, iterations) = sift_spectral(cube, spectrum.values(), SiftAxes::Spatial, stop)?;
    log::debug!(
        "spatial IMF: support {support}, {iterations} steps, {} clamped bins",
        spectrum.clamped_bins()
    );
    Ok(StageImf {
        imf,
        iterations,
        clamped_bins: spectrum.clamped_bins(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oscillation::{axis_extrema_counts, min_support_over_time};
    use crate::sift::sift_fixed;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn stop() -> StopConfig {
        StopConfig::new(0.0316, 200, 9).unwrap()
    }

    fn pearson(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
        let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
        for (x, y) in a.iter().zip(b) {
            sab += (x - ma) * (y - mb);
            saa += (x - ma) * (x - ma);
            sbb += (y - mb) * (y - mb);
        }
        sab / (saa * sbb).sqrt()
    }

    #[test]
    fn spatially_constant_cube_gives_zero() {
        let c = SignalCube::from_fn(&[16, 12, 5], |i| (i[2] as f64 * 0.7).sin() + 2.0).unwrap();
        let s = SupportSpec::new(vec![3, 3]).unwrap();
        let out = extract_spatial_imf(&c, &s, &stop()).unwrap();
        assert!(out.imf.max_abs() < 1e-10);
    }

    #[test]
    fn separates_two_spatial_tones() {
        let n = 128;
        let hi = |i: &[usize]| {
            (2.0 * PI * 16.0 * i[0] as f64 / n as f64).sin() * (2.0 * PI * 16.0 * i[1] as f64 / n as f64).cos()
        };
        let lo = |i: &[usize]| {
            (2.0 * PI * 2.0 * i[0] as f64 / n as f64).cos() + (2.0 * PI * 2.0 * i[1] as f64 / n as f64).sin()
        };
        let c = SignalCube::from_fn(&[n, n, 2], |i| hi(i) + lo(i)).unwrap();
        let support = min_support_over_time(&c, 1.6).unwrap();
        let out = extract_spatial_imf(&c, &support, &stop()).unwrap();
        for t in 0..2 {
            let got: Vec<f64> = out.imf.time_slice(t).iter().copied().collect();
            let truth: Vec<f64> = (0..n * n).map(|k| hi(&[k / n, k % n, t])).collect();
            assert!(pearson(&got, &truth) >= 0.95);
        }
        // the remainder oscillates less than the input
        let rest = c.try_sub(&out.imf).unwrap();
        let before: usize = axis_extrema_counts(&c.time_slice(0)).iter().sum();
        let after: usize = axis_extrema_counts(&rest.time_slice(0)).iter().sum();
        assert!(after < before);
    }

    #[test]
    fn matches_slice_by_slice_with_shared_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let c = SignalCube::from_fn(&[16, 16, 4], |_| rng.random_range(-1.0..1.0)).unwrap();
        let s = SupportSpec::new(vec![3, 2]).unwrap();
        let out = extract_spatial_imf(&c, &s, &stop()).unwrap();
        let spec = kernel_spectrum(&make_kernel_nd(&s).unwrap(), &[16, 16]).unwrap();
        for t in 0..4 {
            let slice = SignalCube::from_fn(&[16, 16, 1], |i| c.get(&[i[0], i[1], t]).unwrap()).unwrap();
            let alone = sift_fixed(&slice, spec.values(), SiftAxes::Spatial, out.iterations).unwrap();
            for i in 0..16 {
                for j in 0..16 {
                    let d = alone.get(&[i, j, 0]).unwrap() - out.imf.get(&[i, j, t]).unwrap();
                    assert!(d.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn oversized_support_rejected() {
        let c = SignalCube::zeros(&[8, 8, 2]).unwrap();
        let s = SupportSpec::new(vec![4, 1]).unwrap();
        assert!(matches!(
            extract_spatial_imf(&c, &s, &stop()),
            Err(Error::KernelTooLarge { .. })
        ));
    }
}
