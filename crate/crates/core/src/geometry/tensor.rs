//! Dense anisotropic tensors, as jets and as plain values.

use alloc::vec::Vec;

use crate::jet::Jet;

/// Position of one tensor index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Variance {
    Covariant,
    Contravariant,
}

/// A point `(x, y)` of the slit tangent bundle in the chart. Contraction with
/// the Liouville field is contraction with `y`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TangentSample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl TangentSample {
    pub fn new(x: &[f64], y: &[f64]) -> Self {
        Self {
            x: x.to_vec(),
            y: y.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// The same base point with `y` scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            x: self.x.clone(),
            y: self.y.iter().map(|v| v * factor).collect(),
        }
    }
}

/// Row-major flat index of `idx` in an `n`-dimensional tensor.
pub(crate) fn flat(idx: &[usize], n: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * n + i)
}

/// Multi-index of the flat position `k` for the given rank.
pub(crate) fn unflat(mut k: usize, n: usize, rank: usize) -> Vec<usize> {
    let mut idx = alloc::vec![0; rank];
    for slot in (0..rank).rev() {
        idx[slot] = k % n;
        k /= n;
    }
    idx
}

/// Components of an anisotropic tensor field as jets at one sample.
#[derive(Debug, Clone)]
pub struct JetTensor {
    pub(crate) dim: usize,
    pub(crate) slots: Vec<Variance>,
    pub(crate) comps: Vec<Jet>,
}

impl JetTensor {
    /// Panics if the component count is not `dim^rank`.
    pub fn new(dim: usize, slots: Vec<Variance>, comps: Vec<Jet>) -> Self {
        assert_eq!(
            comps.len(),
            dim.pow(slots.len() as u32),
            "component count does not match the variance signature"
        );
        Self { dim, slots, comps }
    }

    pub fn scalar(value: Jet, dim: usize) -> Self {
        Self::new(dim, Vec::new(), alloc::vec![value])
    }

    pub fn covector(comps: Vec<Jet>) -> Self {
        let n = comps.len();
        Self::new(n, alloc::vec![Variance::Covariant], comps)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.slots.len()
    }

    pub fn slots(&self) -> &[Variance] {
        &self.slots
    }

    pub fn comps(&self) -> &[Jet] {
        &self.comps
    }

    pub fn get(&self, idx: &[usize]) -> &Jet {
        &self.comps[flat(idx, self.dim)]
    }

    /// Lowest jet order among the components.
    pub fn order(&self) -> usize {
        self.comps.iter().map(Jet::order).min().unwrap_or(0)
    }

    pub fn value(&self, sample: &TangentSample) -> TensorValue {
        TensorValue {
            dim: self.dim,
            slots: self.slots.clone(),
            comps: self.comps.iter().map(Jet::value).collect(),
            sample: sample.clone(),
        }
    }
}

/// Components of an anisotropic tensor at one sample.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TensorValue {
    pub dim: usize,
    pub slots: Vec<Variance>,
    pub comps: Vec<f64>,
    pub sample: TangentSample,
}

impl TensorValue {
    pub fn rank(&self) -> usize {
        self.slots.len()
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        assert_eq!(idx.len(), self.rank(), "index length does not match rank");
        self.comps[flat(idx, self.dim)]
    }

    /// The single component of a rank-0 tensor.
    pub fn as_scalar(&self) -> f64 {
        assert_eq!(self.rank(), 0, "not a scalar");
        self.comps[0]
    }

    pub fn max_abs(&self) -> f64 {
        crate::math::max_abs(&self.comps)
    }

    /// Largest deviation from symmetry under swapping slots `a` and `b`.
    pub fn asymmetry(&self, a: usize, b: usize) -> f64 {
        let n = self.dim;
        let rank = self.rank();
        (0..self.comps.len())
            .map(|k| {
                let mut idx = unflat(k, n, rank);
                idx.swap(a, b);
                crate::math::abs(self.comps[k] - self.comps[flat(&idx, n)])
            })
            .fold(0.0, f64::max)
    }
}

/// A tensor together with its vertical (`·j`), horizontal (`|j`) and
/// dynamical (`|0`) derivatives; the derivative index is the last slot.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DerivativeBundle {
    pub value: TensorValue,
    pub vertical: TensorValue,
    pub horizontal: TensorValue,
    pub dynamical: TensorValue,
}
