//! Multi-axis complex FFT over dense n-D arrays.

use ndarray::ArrayD;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// Transforms `data` in place along each axis in `axes`. The inverse is
/// normalized by the product of the transformed lengths.
pub(crate) fn fft_axes(data: &mut ArrayD<Complex64>, axes: &[usize], inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let mut scale = 1.0;
    for &axis in axes {
        let n = data.shape()[axis];
        scale *= n as f64;
        if n == 1 {
            continue;
        }
        let fft = if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        };
        let last = data.ndim() - 1;
        if axis == last {
            let buf = data.as_slice_mut().expect("standard layout");
            buf.par_chunks_mut(n).for_each_init(
                || vec![Complex64::default(); fft.get_inplace_scratch_len()],
                |scratch, lane| fft.process_with_scratch(lane, scratch),
            );
        } else {
            // Move the axis last, transform contiguous lanes, then move it back.
            let mut moved = data.view();
            moved.swap_axes(axis, last);
            let mut tmp = moved.as_standard_layout().into_owned();
            tmp.as_slice_mut()
                .expect("standard layout")
                .par_chunks_mut(n)
                .for_each_init(
                    || vec![Complex64::default(); fft.get_inplace_scratch_len()],
                    |scratch, lane| fft.process_with_scratch(lane, scratch),
                );
            tmp.swap_axes(axis, last);
            data.assign(&tmp);
        }
    }
    if inverse {
        let inv = 1.0 / scale;
        data.par_mapv_inplace(|c| c * inv);
    }
}

pub(crate) fn to_complex(data: &ArrayD<f64>) -> ArrayD<Complex64> {
    let mut out = ArrayD::from_elem(data.raw_dim(), Complex64::default());
    ndarray::Zip::from(&mut out)
        .and(data)
        .par_for_each(|o, &v| *o = Complex64::new(v, 0.0));
    out
}

pub(crate) fn real_part(data: &ArrayD<Complex64>) -> ArrayD<f64> {
    data.map(|c| c.re)
}

/// Axis indices of an `ndim` array, used for "transform everything".
pub(crate) fn all_axes(ndim: usize) -> Vec<usize> {
    (0..ndim).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::IxDyn;

    fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter().enumerate().fold(Complex64::default(), |acc, (j, v)| {
                    let ang = -2.0 * std::f64::consts::PI * (j * k % n) as f64 / n as f64;
                    acc + v * Complex64::new(ang.cos(), ang.sin())
                })
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft_on_middle_axis() {
        let dims = [3, 5, 4];
        let data = ArrayD::from_shape_fn(IxDyn(&dims), |i| {
            Complex64::new((i[0] * 7 + i[1] * 3 + i[2]) as f64 * 0.37 % 1.3, 0.0)
        });
        let mut got = data.clone();
        fft_axes(&mut got, &[1], false);
        for a in 0..3 {
            for c in 0..4 {
                let lane: Vec<_> = (0..5).map(|b| data[[a, b, c]]).collect();
                let want = naive_dft(&lane);
                for b in 0..5 {
                    assert!((got[[a, b, c]] - want[b]).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn round_trip_all_axes() {
        let dims = [4, 6, 5];
        let data = ArrayD::from_shape_fn(IxDyn(&dims), |i| {
            Complex64::new(((i[0] + 2 * i[1] + 3 * i[2]) as f64).sin(), 0.0)
        });
        let mut work = data.clone();
        let axes = all_axes(3);
        fft_axes(&mut work, &axes, false);
        fft_axes(&mut work, &axes, true);
        for (a, b) in work.iter().zip(data.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
