//! Synthetic space-time test signals with known components.
//!
//! Spatial components are chirped rings centred on the grid corner: with
//! `r = sqrt(x² + y²) / √2` on normalized coordinates, the phase
//! `2π f0 (r + r²/2)` sweeps the local frequency from `f0` at the corner to
//! `2 f0` at the far corner. Temporal components use the same sweep along
//! `t / nt`. Each component gets a random starting phase from the seed.

use std::f64::consts::{PI, SQRT_2};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::cube::SignalCube;
use crate::error::{Error, Result};

/// Named pure components whose sum is the generated signal.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    components: Vec<(String, SignalCube)>,
}

impl GroundTruth {
    pub fn components(&self) -> &[(String, SignalCube)] {
        &self.components
    }

    pub fn get(&self, name: &str) -> Option<&SignalCube> {
        self.components.iter().find(|(n, _)| n == name).map(|(_, c)| c)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.components.iter().map(|(n, _)| n.as_str())
    }

    pub fn sum(&self) -> SignalCube {
        SignalCube::sum(self.components.iter().map(|(_, c)| c))
            .expect("components share one shape")
            .expect("at least one component")
    }
}

/// Base spatial frequencies (cycles per unit radius at the corner) of `c1`
/// and `c2`, and base temporal frequencies (cycles per record) of `c3` and
/// `c4`.
pub const SPATIAL_BASE: [f64; 2] = [16.0, 4.0];
pub const TEMPORAL_BASE: [f64; 2] = [16.0, 4.0];

/// Phase of a chirp whose frequency rises linearly from `f0` to `2 f0` over
/// `u` in `[0, 1]`.
pub fn chirp_phase(u: f64, f0: f64) -> f64 {
    2.0 * PI * f0 * (u + 0.5 * u * u)
}

fn check_example_dims(nx: usize, ny: usize, nt: usize) -> Result<()> {
    if nx < 64 || ny < 64 || nt < 128 {
        return Err(Error::GridTooSmall(vec![nx, ny, nt]));
    }
    Ok(())
}

fn ring_radius(i: usize, j: usize, nx: usize, ny: usize) -> f64 {
    let x = i as f64 / (nx - 1) as f64;
    let y = j as f64 / (ny - 1) as f64;
    (x * x + y * y).sqrt() / SQRT_2
}

/// Tilted plane plus a parabola across `y`, unit peak-to-peak scale.
fn trend(i: usize, j: usize, nx: usize, ny: usize) -> f64 {
    let x = i as f64 / (nx - 1) as f64;
    let y = j as f64 / (ny - 1) as f64;
    0.5 * (2.0 * x - 1.0) + 0.5 * (2.0 * y - 1.0).powi(2)
}

fn cube_of(dims: [usize; 3], f: impl Fn(usize, usize, usize) -> f64) -> SignalCube {
    SignalCube::from_fn(&dims, |i| f(i[0], i[1], i[2])).expect("generator output is finite")
}

fn example(nx: usize, ny: usize, nt: usize, seed: u64, chirped_time: bool) -> Result<(SignalCube, GroundTruth)> {
    check_example_dims(nx, ny, nt)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phase: [f64; 4] = std::array::from_fn(|_| rng.random_range(0.0..2.0 * PI));
    let dims = [nx, ny, nt];

    let space = |k: usize| {
        let f0 = SPATIAL_BASE[k];
        let p = phase[k];
        cube_of(dims, move |i, j, _| (chirp_phase(ring_radius(i, j, nx, ny), f0) + p).sin())
    };
    let time = |k: usize| {
        let f0 = TEMPORAL_BASE[k];
        let p = phase[2 + k];
        cube_of(dims, move |_, _, t| {
            let u = t as f64 / nt as f64;
            let arg = if chirped_time {
                chirp_phase(u, f0)
            } else {
                2.0 * PI * f0 * u
            };
            (arg + p).sin()
        })
    };

    let components = vec![
        ("c1".to_string(), space(0)),
        ("c2".to_string(), space(1)),
        ("c3".to_string(), time(0)),
        ("c4".to_string(), time(1)),
        ("trend".to_string(), cube_of(dims, |i, j, _| trend(i, j, nx, ny))),
    ];
    let truth = GroundTruth { components };
    Ok((truth.sum(), truth))
}

/// Two chirped spatial rings (`c1` fast, `c2` slow, ratio 4), two pure
/// temporal tones (`c3` with 16 cycles, `c4` with 4), and a smooth spatial
/// trend. All amplitudes are 1.
pub fn gen_example1(nx: usize, ny: usize, nt: usize, seed: u64) -> Result<(SignalCube, GroundTruth)> {
    example(nx, ny, nt, seed, false)
}

/// As [`gen_example1`] but `c3` and `c4` are temporal chirps (16→32 and
/// 4→8 cycles per record).
pub fn gen_example2(nx: usize, ny: usize, nt: usize, seed: u64) -> Result<(SignalCube, GroundTruth)> {
    example(nx, ny, nt, seed, true)
}

/// `sin(2π fx x / nx) · sin(2π ft t / nt)`, constant along `y`.
pub fn gen_separable(nx: usize, ny: usize, nt: usize, fx: usize, ft: usize) -> Result<(SignalCube, GroundTruth)> {
    for (f, n) in [(fx, nx), (ft, nt)] {
        let limit = n as f64 / 4.0;
        if f < 1 || f as f64 >= limit {
            return Err(Error::BadFrequency { value: f, limit });
        }
    }
    if ny == 0 {
        return Err(Error::InvalidDims(vec![nx, ny, nt]));
    }
    let s = cube_of([nx, ny, nt], |i, _, t| {
        (2.0 * PI * (fx * i % nx) as f64 / nx as f64).sin() * (2.0 * PI * (ft * t % nt) as f64 / nt as f64).sin()
    });
    let truth = GroundTruth {
        components: vec![("product".to_string(), s.clone())],
    };
    Ok((s, truth))
}

/// Daily near-surface temperature stand-in on a `nlat × nlon` grid: a
/// latitudinal gradient, a seasonal cycle whose amplitude grows toward the
/// pole, a weak zonal wave, and Gaussian day-to-day noise.
pub fn gen_air_temperature(nlat: usize, nlon: usize, ndays: usize, seed: u64) -> Result<(SignalCube, GroundTruth)> {
    if nlat < 3 || nlon < 3 || ndays < 3 {
        return Err(Error::GridTooSmall(vec![nlat, nlon, ndays]));
    }
    let dims = [nlat, nlon, ndays];
    // row 0 is the northern edge
    let lat = |i: usize| 1.0 - i as f64 / (nlat - 1) as f64;
    let lon = |j: usize| j as f64 / nlon as f64;
    let gradient = cube_of(dims, |i, _, _| 26.0 - 30.0 * lat(i));
    let seasonal = cube_of(dims, |i, _, d| {
        let amp = 3.0 + 12.0 * lat(i);
        -amp * (2.0 * PI * (d as f64 + 10.0) / 365.0).cos()
    });
    let zonal = cube_of(dims, |i, j, _| 2.0 * (2.0 * PI * 3.0 * lon(j)).cos() * (PI * lat(i)).sin());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.5).expect("valid sigma");
    let noise_values: Vec<f64> = (0..nlat * nlon * ndays).map(|_| normal.sample(&mut rng)).collect();
    let noise = SignalCube::new(&dims, noise_values)?;
    let truth = GroundTruth {
        components: vec![
            ("gradient".to_string(), gradient),
            ("seasonal".to_string(), seasonal),
            ("zonal".to_string(), zonal),
            ("noise".to_string(), noise),
        ],
    };
    let labels = vec!["lat".to_string(), "lon".to_string(), "day".to_string()];
    Ok((truth.sum().with_labels(labels)?, truth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oscillation::{count_extrema, local_extrema};
    use crate::temporal::rotation_angles;

    #[test]
    fn components_sum_exactly() {
        for gen in [gen_example1, gen_example2] {
            let (s, truth) = gen(64, 72, 128, 5).unwrap();
            assert_eq!(truth.components().len(), 5);
            let d = s.try_sub(&truth.sum()).unwrap().max_abs();
            assert!(d <= 1e-12);
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let (a, _) = gen_example2(64, 64, 128, 3).unwrap();
        let (b, _) = gen_example2(64, 64, 128, 3).unwrap();
        let (c, _) = gen_example2(64, 64, 128, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn undersized_rejected() {
        assert!(matches!(gen_example1(32, 64, 128, 0), Err(Error::GridTooSmall(_))));
        assert!(matches!(gen_example2(64, 64, 100, 0), Err(Error::GridTooSmall(_))));
    }

    #[test]
    fn c1_extrema_track_nominal_cycles() {
        let (nx, ny) = (128, 128);
        let (_, truth) = gen_example1(nx, ny, 128, 1).unwrap();
        let c1 = truth.get("c1").unwrap();
        for j in [0, 40, 127] {
            let row: Vec<f64> = (0..nx).map(|i| c1.get(&[i, j, 0]).unwrap()).collect();
            let span = chirp_phase(ring_radius(nx - 1, j, nx, ny), 16.0) - chirp_phase(ring_radius(0, j, nx, ny), 16.0);
            let cycles = span / (2.0 * PI);
            let found = count_extrema(&row) as f64;
            assert!((found - 2.0 * cycles).abs() <= 2.0, "row {j}: {found} vs {cycles}");
        }
    }

    #[test]
    fn chirped_time_has_shrinking_extrema_gaps() {
        let (_, truth) = gen_example2(64, 64, 512, 2).unwrap();
        let c34 = truth.get("c3").unwrap().try_add(truth.get("c4").unwrap()).unwrap();
        let theta = rotation_angles(&c34).unwrap();
        // Slices are all multiples of one constant pattern, so θ̃ jumps to π
        // at each sign change of c3 + c4; those peaks mark its zero crossings.
        let pos: Vec<usize> = local_extrema(theta.angles())
            .unwrap()
            .positions()
            .iter()
            .copied()
            .filter(|&p| theta.angles()[p] > PI / 2.0)
            .collect();
        let gaps: Vec<f64> = pos.windows(2).map(|w| (w[1] - w[0]) as f64).collect();
        let half = gaps.len() / 2;
        let early = gaps[..half].iter().sum::<f64>() / half as f64;
        let late = gaps[half..].iter().sum::<f64>() / (gaps.len() - half) as f64;
        assert!(early > 1.2 * late, "{early} vs {late}");
    }

    #[test]
    fn separable_checks() {
        assert!(matches!(gen_separable(64, 8, 64, 0, 3), Err(Error::BadFrequency { value: 0, .. })));
        assert!(matches!(gen_separable(64, 8, 64, 16, 3), Err(Error::BadFrequency { value: 16, .. })));
        let (s, _) = gen_separable(64, 8, 64, 5, 3).unwrap();
        assert!(s.mean().abs() <= 1e-12);
    }

    #[test]
    fn separable_angles_follow_the_time_factor() {
        // Every slice is g(t) times one fixed pattern, so the angle between
        // nonzero slices is 0 when g keeps its sign and π when it flips.
        let (nt, ft) = (60, 7);
        let (s, _) = gen_separable(32, 4, nt, 3, ft).unwrap();
        let g = |t: usize| (2.0 * PI * (ft * t % nt) as f64 / nt as f64).sin();
        let shifted = SignalCube::from_fn(&[32, 4, nt - 1], |i| s.get(&[i[0], i[1], i[2] + 1]).unwrap()).unwrap();
        let theta = rotation_angles(&shifted).unwrap();
        for (k, a) in theta.angles().iter().enumerate() {
            let (t, u) = (k + 1, k + 2);
            let want = if g(t) * g(u) > 0.0 { 0.0 } else { PI };
            assert!((a - want).abs() <= 1e-10, "t={t}");
        }
        // the t = 0 slice is identically zero
        assert!(rotation_angles(&s).is_err());
    }

    #[test]
    fn air_temperature_shape() {
        let (s, truth) = gen_air_temperature(12, 20, 40, 1).unwrap();
        assert_eq!(s.dims(), &[12, 20, 40]);
        assert_eq!(s.labels(), &["lat", "lon", "day"]);
        assert!(s.try_sub(&truth.sum()).unwrap().max_abs() <= 1e-12);
        // colder toward the north edge on average
        let north: f64 = (0..20).map(|j| s.get(&[0, j, 20]).unwrap()).sum();
        let south: f64 = (0..20).map(|j| s.get(&[11, j, 20]).unwrap()).sum();
        assert!(north < south);
    }
}
