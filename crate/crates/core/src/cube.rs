//! Dense space-time signal container.
//!
//! A [`SignalCube`] holds a real-valued field sampled on an `n`-dimensional
//! spatial grid at `T` time instants. Storage is row-major with time as the
//! last (fastest varying) axis, so the samples of one spatial location form a
//! contiguous run of length `T`.

use ndarray::{ArrayD, ArrayView1, ArrayViewD, Axis, Dimension, IxDyn};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SignalCube {
    data: ArrayD<f64>,
    labels: Vec<String>,
    spacing: Vec<f64>,
}

fn default_labels(ndim: usize) -> Vec<String> {
    (0..ndim)
        .map(|a| {
            if a + 1 == ndim {
                "t".to_string()
            } else {
                format!("x{}", a + 1)
            }
        })
        .collect()
}

impl SignalCube {
    /// Builds a cube from row-major values (time last). Rejects empty
    /// extents, length mismatches and non-finite samples.
    pub fn new(dims: &[usize], values: Vec<f64>) -> Result<Self> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(Error::InvalidDims(dims.to_vec()));
        }
        let expected: usize = dims.iter().product();
        if values.len() != expected {
            return Err(Error::InvalidDims(dims.to_vec()));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let data = ArrayD::from_shape_vec(IxDyn(dims), values)
            .map_err(|_| Error::InvalidDims(dims.to_vec()))?;
        Ok(Self::from_trusted(data))
    }

    pub fn zeros(dims: &[usize]) -> Result<Self> {
        let len = dims.iter().product();
        Self::new(dims, vec![0.0; len])
    }

    /// Evaluates `f` at every multi-index (spatial indices then `t`).
    pub fn from_fn(dims: &[usize], mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(Error::InvalidDims(dims.to_vec()));
        }
        let data = ArrayD::from_shape_fn(IxDyn(dims), |idx| f(idx.slice()));
        Self::from_array(data)
    }

    pub fn from_array(data: ArrayD<f64>) -> Result<Self> {
        let dims = data.shape().to_vec();
        let values = data.into_iter().collect();
        Self::new(&dims, values)
    }

    /// Wraps an array produced internally; forces standard layout but skips
    /// the finiteness scan.
    pub(crate) fn from_trusted(data: ArrayD<f64>) -> Self {
        let data = if data.is_standard_layout() {
            data
        } else {
            data.as_standard_layout().into_owned()
        };
        let ndim = data.ndim();
        Self {
            data,
            labels: default_labels(ndim),
            spacing: vec![1.0; ndim],
        }
    }

    pub(crate) fn with_meta_of(mut self, other: &SignalCube) -> Self {
        if self.ndim() == other.ndim() {
            self.labels = other.labels.clone();
            self.spacing = other.spacing.clone();
        }
        self
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.ndim() {
            return Err(Error::InvalidConfig(format!(
                "{} labels for {} axes",
                labels.len(),
                self.ndim()
            )));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn with_spacing(mut self, spacing: Vec<f64>) -> Result<Self> {
        if spacing.len() != self.ndim() || spacing.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::InvalidConfig(format!(
                "spacing {spacing:?} invalid for {} axes",
                self.ndim()
            )));
        }
        self.spacing = spacing;
        Ok(self)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    /// All extents, time last.
    pub fn dims(&self) -> &[usize] {
        self.data.shape()
    }

    pub fn ndim(&self) -> usize {
        self.data.ndim()
    }

    pub fn spatial_dims(&self) -> &[usize] {
        let d = self.dims();
        &d[..d.len() - 1]
    }

    pub fn spatial_ndim(&self) -> usize {
        self.ndim() - 1
    }

    pub fn time_len(&self) -> usize {
        *self.dims().last().expect("cube has at least two axes")
    }

    /// Number of spatial locations (product of spatial extents).
    pub fn locations(&self) -> usize {
        self.spatial_dims().iter().product()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn array(&self) -> &ArrayD<f64> {
        &self.data
    }

    pub fn into_array(self) -> ArrayD<f64> {
        self.data
    }

    pub fn values(&self) -> &[f64] {
        self.data
            .as_slice()
            .expect("cube storage is always standard layout")
    }

    /// The spatial field at time `t`.
    pub fn time_slice(&self, t: usize) -> ArrayViewD<'_, f64> {
        self.data.index_axis(Axis(self.ndim() - 1), t)
    }

    /// The time series at spatial location `loc`.
    pub fn series(&self, loc: &[usize]) -> Result<ArrayView1<'_, f64>> {
        let sd = self.spatial_dims();
        if loc.len() != sd.len() || loc.iter().zip(sd).any(|(i, n)| i >= n) {
            return Err(Error::IndexOutOfRange {
                index: loc.to_vec(),
                dims: self.dims().to_vec(),
            });
        }
        let flat = loc.iter().zip(sd).fold(0, |acc, (i, n)| acc * n + i);
        let t = self.time_len();
        Ok(ArrayView1::from(&self.values()[flat * t..(flat + 1) * t]))
    }

    pub fn get(&self, index: &[usize]) -> Option<f64> {
        self.data.get(IxDyn(index)).copied()
    }

    fn check_same_dims(&self, other: &SignalCube) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::InvalidDims(other.dims().to_vec()));
        }
        Ok(())
    }

    pub fn try_sub(&self, other: &SignalCube) -> Result<SignalCube> {
        self.check_same_dims(other)?;
        Ok(SignalCube::from_trusted(&self.data - &other.data).with_meta_of(self))
    }

    pub fn try_add(&self, other: &SignalCube) -> Result<SignalCube> {
        self.check_same_dims(other)?;
        Ok(SignalCube::from_trusted(&self.data + &other.data).with_meta_of(self))
    }

    pub fn sub_assign(&mut self, other: &SignalCube) -> Result<()> {
        self.check_same_dims(other)?;
        self.data -= &other.data;
        Ok(())
    }

    pub fn add_assign(&mut self, other: &SignalCube) -> Result<()> {
        self.check_same_dims(other)?;
        self.data += &other.data;
        Ok(())
    }

    pub fn scaled(&self, factor: f64) -> SignalCube {
        SignalCube::from_trusted(&self.data * factor).with_meta_of(self)
    }

    pub fn max_abs(&self) -> f64 {
        self.values().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn norm(&self) -> f64 {
        self.values().iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn mean(&self) -> f64 {
        self.values().iter().sum::<f64>() / self.len() as f64
    }

    /// Sums a list of equally shaped cubes. Returns `None` for an empty list.
    pub fn sum<'a>(cubes: impl IntoIterator<Item = &'a SignalCube>) -> Result<Option<SignalCube>> {
        let mut iter = cubes.into_iter();
        let Some(first) = iter.next() else {
            return Ok(None);
        };
        let mut acc = first.clone();
        for c in iter {
            acc.add_assign(c)?;
        }
        Ok(Some(acc))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            SignalCube::new(&[2, 0], vec![]),
            Err(Error::InvalidDims(_))
        ));
        assert!(matches!(
            SignalCube::new(&[4], vec![0.0; 4]),
            Err(Error::InvalidDims(_))
        ));
        assert!(matches!(
            SignalCube::new(&[2, 2], vec![0.0; 3]),
            Err(Error::InvalidDims(_))
        ));
        assert!(matches!(
            SignalCube::new(&[2, 2], vec![0.0, f64::NAN, 0.0, 0.0]),
            Err(Error::NonFinite { index: 1 })
        ));
    }

    #[test]
    fn layout_is_time_last() {
        let c = SignalCube::from_fn(&[2, 3, 4], |i| (i[0] * 100 + i[1] * 10 + i[2]) as f64).unwrap();
        assert_eq!(c.values()[..4], [0.0, 1.0, 2.0, 3.0]);
        let s = c.series(&[1, 2]).unwrap();
        assert_eq!(s.to_vec(), vec![120.0, 121.0, 122.0, 123.0]);
        let sl = c.time_slice(3);
        assert_eq!(sl.shape(), &[2, 3]);
        assert_eq!(sl[[1, 1]], 113.0);
        assert!(c.series(&[2, 0]).is_err());
        assert_eq!(c.labels(), &["x1", "x2", "t"]);
    }
}
