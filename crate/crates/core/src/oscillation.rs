//! Extrema detection and the mapping from extrema spacing to filter lengths.

use ndarray::{ArrayViewD, Axis};
use rayon::prelude::*;

use crate::cube::SignalCube;
use crate::error::{Error, Result};
use crate::kernels::SupportSpec;

/// Interior strict local extrema of a series.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExtremaReport {
    positions: Vec<usize>,
}

impl ExtremaReport {
    /// Builds a report from explicit positions, which must be strictly
    /// increasing.
    pub fn from_positions(positions: Vec<usize>) -> Result<Self> {
        if positions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "extrema positions must be strictly increasing".into(),
            ));
        }
        Ok(Self { positions })
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn count(&self) -> usize {
        self.positions.len()
    }

    /// Mean distance between consecutive extrema, if there are at least two.
    pub fn mean_spacing(&self) -> Option<f64> {
        match self.positions.as_slice() {
            [first, .., last] => Some((last - first) as f64 / (self.count() - 1) as f64),
            _ => None,
        }
    }
}

/// Calls `hit` for every interior extremum. A run of equal values is one
/// candidate located at its left edge; it counts when both outer neighbours
/// lie on the same side of it. Runs touching either end never count.
fn scan_extrema(x: &[f64], mut hit: impl FnMut(usize)) {
    let n = x.len();
    let mut i = 1;
    while i + 1 < n {
        if x[i] == x[i - 1] {
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < n && x[j + 1] == x[i] {
            j += 1;
        }
        if j + 1 == n {
            break;
        }
        let (left, mid, right) = (x[i - 1], x[i], x[j + 1]);
        if (left < mid && right < mid) || (left > mid && right > mid) {
            hit(i);
        }
        i = j + 1;
    }
}

pub fn local_extrema(series: &[f64]) -> Result<ExtremaReport> {
    if series.len() < 3 {
        return Err(Error::SeriesTooShort(series.len()));
    }
    let mut positions = Vec::new();
    scan_extrema(series, |i| positions.push(i));
    Ok(ExtremaReport { positions })
}

/// Extrema count without allocating the position list. Series shorter than
/// three samples have none.
pub fn count_extrema(series: &[f64]) -> usize {
    let mut count = 0;
    scan_extrema(series, |_| count += 1);
    count
}

/// `max(1, round(multiplier * mean gap))`.
pub fn filter_length_from_spacing(report: &ExtremaReport, multiplier: f64) -> Result<usize> {
    let gap = report
        .mean_spacing()
        .ok_or(Error::NoOscillation(report.count()))?;
    Ok(((multiplier * gap).round() as usize).max(1))
}

/// Total extrema over every 1-D line along each axis of `slice`.
pub fn axis_extrema_counts(slice: &ArrayViewD<'_, f64>) -> Vec<usize> {
    (0..slice.ndim())
        .map(|a| {
            let n = slice.shape()[a];
            if n < 3 {
                return 0;
            }
            let mut buf = vec![0.0; n];
            slice
                .lanes(Axis(a))
                .into_iter()
                .map(|lane| {
                    match lane.as_slice() {
                        Some(s) => count_extrema(s),
                        None => {
                            buf.iter_mut().zip(lane.iter()).for_each(|(b, v)| *b = *v);
                            count_extrema(&buf)
                        }
                    }
                })
                .sum()
        })
        .collect()
}

/// Largest half-length the estimator hands out on an axis of this extent.
pub(crate) fn maximal_half_length(extent: usize) -> usize {
    (extent / 2).saturating_sub(1).max(1)
}

fn check_xi(xi: f64) -> Result<()> {
    if !(xi.is_finite() && xi > 0.0) {
        return Err(Error::InvalidConfig(format!("xi must be positive, got {xi}")));
    }
    Ok(())
}

/// Per-axis half-lengths `round(xi * samples / extrema)` from line scans.
/// Axes without any extrema get the maximal admissible length, and every
/// estimate is capped there so the kernel always fits the grid.
pub fn estimate_spatial_support(slice: &ArrayViewD<'_, f64>, xi: f64) -> Result<SupportSpec> {
    check_xi(xi)?;
    let shape = slice.shape();
    if shape.is_empty() || shape.iter().any(|&n| n < 3) {
        return Err(Error::GridTooSmall(shape.to_vec()));
    }
    let total = slice.len() as f64;
    let half = axis_extrema_counts(slice)
        .into_iter()
        .zip(shape)
        .map(|(count, &extent)| {
            let cap = maximal_half_length(extent);
            if count == 0 {
                cap
            } else {
                ((xi * total / count as f64).round() as usize).clamp(1, cap)
            }
        })
        .collect();
    SupportSpec::new(half)
}

/// Elementwise minimum of the per-slice support estimates. Slices are
/// estimated in parallel; the reduction runs in time order.
pub fn min_support_over_time(cube: &SignalCube, xi: f64) -> Result<SupportSpec> {
    check_xi(xi)?;
    let per_slice: Vec<SupportSpec> = (0..cube.time_len())
        .into_par_iter()
        .map(|t| estimate_spatial_support(&cube.time_slice(t), xi))
        .collect::<Result<_>>()?;
    let mut iter = per_slice.into_iter();
    let first = iter.next().expect("cube has at least one time step");
    Ok(iter.fold(first, |acc, s| acc.min(&s)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{Array2, ArrayD, IxDyn};
    use std::f64::consts::PI;

    #[test]
    fn small_examples() {
        assert_eq!(local_extrema(&[1.0, 3.0, 1.0]).unwrap().positions(), &[1]);
        assert_eq!(
            local_extrema(&[0.0, 1.0, 0.0, 1.0, 0.0]).unwrap().positions(),
            &[1, 2, 3]
        );
        assert_eq!(local_extrema(&[1.0, 2.0, 2.0, 1.0]).unwrap().positions(), &[1]);
        assert!(matches!(local_extrema(&[1.0, 2.0]), Err(Error::SeriesTooShort(2))));
    }

    #[test]
    fn plateaus() {
        // a step is not an extremum
        assert_eq!(local_extrema(&[0.0, 1.0, 1.0, 2.0]).unwrap().count(), 0);
        // plateau touching an end
        assert_eq!(local_extrema(&[0.0, 1.0, 1.0]).unwrap().count(), 0);
        assert_eq!(local_extrema(&[1.0, 1.0, 0.0, 1.0]).unwrap().positions(), &[2]);
        assert_eq!(
            local_extrema(&[3.0, 1.0, 1.0, 1.0, 2.0, 5.0, 5.0, 0.0]).unwrap().positions(),
            &[1, 5]
        );
    }

    #[test]
    fn spacing_rule() {
        let r = ExtremaReport::from_positions(vec![10, 20, 30]).unwrap();
        assert_eq!(filter_length_from_spacing(&r, 2.0).unwrap(), 20);
        let one = ExtremaReport::from_positions(vec![7]).unwrap();
        assert!(matches!(
            filter_length_from_spacing(&one, 3.0),
            Err(Error::NoOscillation(1))
        ));
    }

    #[test]
    fn sine_spacing_against_brute_force() {
        let x: Vec<f64> = (0..1000).map(|t| (2.0 * PI * 5.0 * t as f64 / 1000.0).sin()).collect();
        // brute force: sign changes of the forward difference
        let d: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let brute: Vec<usize> = (1..d.len())
            .filter(|&i| d[i - 1] * d[i] < 0.0)
            .collect();
        let r = local_extrema(&x).unwrap();
        assert_eq!(r.positions(), brute.as_slice());
        assert_eq!(r.count(), 10);
        let l = filter_length_from_spacing(&r, 2.0).unwrap();
        assert!((198..=202).contains(&l), "{l}");
    }

    #[test]
    fn support_of_x_sine() {
        let n = 256;
        let a = Array2::from_shape_fn((n, n), |(i, _)| (2.0 * PI * 8.0 * i as f64 / n as f64).sin())
            .into_dyn();
        // line-scan oracle along axis 0: every column carries 16 extrema
        let per_line = count_extrema(&a.index_axis(Axis(1), 0).iter().copied().collect::<Vec<_>>());
        assert_eq!(per_line, 16);
        let s = estimate_spatial_support(&a.view(), 1.6).unwrap();
        assert_eq!(s.half_lengths(), &[26, 127]);
    }

    #[test]
    fn constant_and_tiny_slices() {
        let c = ArrayD::from_elem(IxDyn(&[20, 31]), 2.5);
        let s = estimate_spatial_support(&c.view(), 1.6).unwrap();
        assert_eq!(s.half_lengths(), &[9, 14]);
        let tiny = ArrayD::zeros(IxDyn(&[2, 2]));
        assert!(matches!(
            estimate_spatial_support(&tiny.view(), 1.6),
            Err(Error::GridTooSmall(_))
        ));
        let three = ArrayD::zeros(IxDyn(&[3, 3]));
        assert_eq!(
            estimate_spatial_support(&three.view(), 1.6).unwrap().half_lengths(),
            &[1, 1]
        );
    }

    #[test]
    fn min_over_time_picks_elementwise_minimum() {
        let n = 64;
        let cube = SignalCube::from_fn(&[n, n, 2], |i| {
            let (x, y) = (i[0] as f64 / n as f64, i[1] as f64 / n as f64);
            if i[2] == 0 {
                (2.0 * PI * 2.0 * x).sin() + (2.0 * PI * 8.0 * y).sin()
            } else {
                (2.0 * PI * 8.0 * x).sin() + (2.0 * PI * 2.0 * y).sin()
            }
        })
        .unwrap();
        let s0 = estimate_spatial_support(&cube.time_slice(0), 1.6).unwrap();
        let s1 = estimate_spatial_support(&cube.time_slice(1), 1.6).unwrap();
        assert!(s0.half_lengths()[0] > s1.half_lengths()[0]);
        assert!(s0.half_lengths()[1] < s1.half_lengths()[1]);
        let m = min_support_over_time(&cube, 1.6).unwrap();
        assert_eq!(m, s0.min(&s1));
    }
}
