//! Dense tensors of rank 0..=5 over a 4-dimensional fiber.
//!
//! Components are stored row-major with slot 0 varying slowest, so the
//! component `T[i0][i1]..[ik]` lives at `sum(i_s * 4^(k - s))`.

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DIM: usize = 4;
pub const MAX_RANK: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variance {
    Upper,
    Lower,
}

impl Variance {
    pub fn flipped(self) -> Self {
        match self {
            Variance::Upper => Variance::Lower,
            Variance::Lower => Variance::Upper,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    variance: Vec<Variance>,
    components: Vec<f64>,
}

fn len_for_rank(rank: usize) -> usize {
    DIM.pow(rank as u32)
}

impl Tensor4 {
    pub fn zeros(variance: &[Variance]) -> Result<Self> {
        if variance.len() > MAX_RANK {
            return Err(Error::Index(format!(
                "rank {} exceeds {MAX_RANK}",
                variance.len()
            )));
        }
        Ok(Tensor4 {
            variance: variance.to_vec(),
            components: vec![0.0; len_for_rank(variance.len())],
        })
    }

    pub fn from_components(variance: &[Variance], components: Vec<f64>) -> Result<Self> {
        let mut t = Tensor4::zeros(variance)?;
        if components.len() != t.components.len() {
            return Err(Error::Index(format!(
                "expected {} components for rank {}, got {}",
                t.components.len(),
                variance.len(),
                components.len()
            )));
        }
        if let Some(bad) = components.iter().find(|c| !c.is_finite()) {
            return Err(Error::Domain(format!("non-finite tensor component {bad}")));
        }
        t.components = components;
        Ok(t)
    }

    /// Builds a tensor by evaluating `f` on every multi-index.
    pub fn from_fn(variance: &[Variance], mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let mut t = Tensor4::zeros(variance)?;
        let rank = variance.len();
        let mut idx = [0usize; MAX_RANK];
        for flat in 0..t.components.len() {
            unflatten(flat, rank, &mut idx);
            t.components[flat] = f(&idx[..rank]);
        }
        Ok(t)
    }

    pub fn scalar(value: f64) -> Self {
        Tensor4 {
            variance: Vec::new(),
            components: vec![value],
        }
    }

    pub fn vector(variance: Variance, v: [f64; 4]) -> Self {
        Tensor4 {
            variance: vec![variance],
            components: v.to_vec(),
        }
    }

    pub fn matrix(variance: [Variance; 2], m: &[[f64; 4]; 4]) -> Self {
        Tensor4 {
            variance: variance.to_vec(),
            components: m.iter().flatten().copied().collect(),
        }
    }

    /// The (1,1) identity `delta^i_j`.
    pub fn identity() -> Self {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Tensor4::matrix([Variance::Upper, Variance::Lower], &m)
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn variance(&self) -> &[Variance] {
        &self.variance
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.components[flatten(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: f64) {
        let at = flatten(idx);
        self.components[at] = value;
    }

    pub fn as_scalar(&self) -> Option<f64> {
        (self.rank() == 0).then(|| self.components[0])
    }

    pub fn as_matrix(&self) -> Option<[[f64; 4]; 4]> {
        (self.rank() == 2)
            .then(|| std::array::from_fn(|i| std::array::from_fn(|j| self.components[4 * i + j])))
    }

    pub fn as_vector(&self) -> Option<[f64; 4]> {
        (self.rank() == 1).then(|| std::array::from_fn(|i| self.components[i]))
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn scale(&self, a: f64) -> Self {
        Tensor4 {
            variance: self.variance.clone(),
            components: self.components.iter().map(|c| a * c).collect(),
        }
    }

    fn zip_with(&self, other: &Tensor4, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.variance != other.variance {
            return Err(Error::Variance(format!(
                "slot variances differ: {:?} vs {:?}",
                self.variance, other.variance
            )));
        }
        Ok(Tensor4 {
            variance: self.variance.clone(),
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Tensor4) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Tensor4) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Tensor product; slots of `self` come first.
    pub fn outer(&self, other: &Tensor4) -> Result<Self> {
        let mut variance = self.variance.clone();
        variance.extend_from_slice(&other.variance);
        if variance.len() > MAX_RANK {
            return Err(Error::Index(format!(
                "rank {} exceeds {MAX_RANK}",
                variance.len()
            )));
        }
        let components = self
            .components
            .iter()
            .flat_map(|a| other.components.iter().map(move |b| a * b))
            .collect();
        Ok(Tensor4 {
            variance,
            components,
        })
    }

    fn check_slot(&self, slot: usize) -> Result<()> {
        if slot >= self.rank() {
            Err(Error::Index(format!(
                "slot {slot} out of range for rank {}",
                self.rank()
            )))
        } else {
            Ok(())
        }
    }

    /// Sums over a pair of slots of opposite variance.
    pub fn contract(&self, slot_a: usize, slot_b: usize) -> Result<Self> {
        self.check_slot(slot_a)?;
        self.check_slot(slot_b)?;
        if slot_a == slot_b {
            return Err(Error::Index(format!(
                "cannot contract slot {slot_a} with itself"
            )));
        }
        if self.variance[slot_a] == self.variance[slot_b] {
            return Err(Error::Variance(format!(
                "slots {slot_a} and {slot_b} are both {:?}",
                self.variance[slot_a]
            )));
        }
        Ok(self.trace_unchecked(slot_a, slot_b))
    }

    fn trace_unchecked(&self, slot_a: usize, slot_b: usize) -> Self {
        let rank = self.rank();
        let (lo, hi) = (slot_a.min(slot_b), slot_a.max(slot_b));
        let variance: Vec<Variance> = self
            .variance
            .iter()
            .enumerate()
            .filter(|(s, _)| *s != lo && *s != hi)
            .map(|(_, v)| *v)
            .collect();
        let mut full = [0usize; MAX_RANK];
        let mut out = [0usize; MAX_RANK];
        let components = (0..len_for_rank(rank - 2))
            .map(|flat| {
                unflatten(flat, rank - 2, &mut out);
                let mut src = 0;
                for s in 0..rank {
                    if s != lo && s != hi {
                        full[s] = out[src];
                        src += 1;
                    }
                }
                (0..DIM)
                    .map(|k| {
                        full[lo] = k;
                        full[hi] = k;
                        self.components[flatten(&full[..rank])]
                    })
                    .sum()
            })
            .collect();
        Tensor4 {
            variance,
            components,
        }
    }

    /// Contracts `slot` with the first index of the rank-2 `m`, leaving the
    /// result in the same slot.
    fn apply_on_slot(&self, slot: usize, m: &[[f64; 4]; 4], variance: Variance) -> Self {
        let rank = self.rank();
        let mut idx = [0usize; MAX_RANK];
        let mut src = [0usize; MAX_RANK];
        let mut components = vec![0.0; self.components.len()];
        for (flat, out) in components.iter_mut().enumerate() {
            unflatten(flat, rank, &mut idx);
            src[..rank].copy_from_slice(&idx[..rank]);
            let target = idx[slot];
            *out = (0..DIM)
                .map(|k| {
                    src[slot] = k;
                    m[target][k] * self.components[flatten(&src[..rank])]
                })
                .sum();
        }
        let mut new_variance = self.variance.clone();
        new_variance[slot] = variance;
        Tensor4 {
            variance: new_variance,
            components,
        }
    }

    /// Flips the variance of one slot with the metric or its inverse.
    pub fn raise_lower(&self, slot: usize, metric: &MetricAtPoint) -> Result<Self> {
        self.check_slot(slot)?;
        Ok(match self.variance[slot] {
            Variance::Upper => self.apply_on_slot(slot, &metric.g, Variance::Lower),
            Variance::Lower => self.apply_on_slot(slot, &metric.g_inv, Variance::Upper),
        })
    }

    /// Reorders slots: slot `s` of the result is slot `order[s]` of `self`.
    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        let rank = self.rank();
        let mut seen = [false; MAX_RANK];
        if order.len() != rank
            || order
                .iter()
                .any(|&s| s >= rank || std::mem::replace(&mut seen[s], true))
        {
            return Err(Error::Index(format!(
                "{order:?} is not a permutation of 0..{rank}"
            )));
        }
        let variance: Vec<Variance> = order.iter().map(|&s| self.variance[s]).collect();
        let mut src = [0usize; MAX_RANK];
        Tensor4::from_fn(&variance, |idx| {
            for (s, &o) in order.iter().enumerate() {
                src[o] = idx[s];
            }
            self.components[flatten(&src[..rank])]
        })
    }
}

pub(crate) fn flatten(idx: &[usize]) -> usize {
    idx.iter().fold(0, |acc, &i| acc * DIM + i)
}

pub(crate) fn unflatten(mut flat: usize, rank: usize, idx: &mut [usize; MAX_RANK]) {
    for s in (0..rank).rev() {
        idx[s] = flat % DIM;
        flat /= DIM;
    }
}

/// Metric, inverse metric and signature at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricAtPoint {
    pub g: [[f64; 4]; 4],
    pub g_inv: [[f64; 4]; 4],
    pub det: f64,
}

pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

impl MetricAtPoint {
    pub fn new(g: [[f64; 4]; 4]) -> Result<Self> {
        let m = Matrix4::from_fn(|i, j| g[i][j]);
        let det = m.determinant();
        if !det.is_finite() || det.abs() <= DEGENERACY_THRESHOLD {
            return Err(Error::DegenerateMetric { det });
        }
        let inv = m.try_inverse().ok_or(Error::DegenerateMetric { det })?;
        let mut g_inv: [[f64; 4]; 4] =
            std::array::from_fn(|i| std::array::from_fn(|j| inv[(i, j)]));
        // symmetrize away rounding
        for i in 0..4 {
            for j in i + 1..4 {
                let avg = 0.5 * (g_inv[i][j] + g_inv[j][i]);
                g_inv[i][j] = avg;
                g_inv[j][i] = avg;
            }
        }
        Ok(MetricAtPoint { g, g_inv, det })
    }

    /// Eigenvalue signs, sorted ascending (negatives first).
    pub fn signature(&self) -> [i8; 4] {
        let m = Matrix4::from_fn(|i, j| self.g[i][j]);
        let eig = m.symmetric_eigen().eigenvalues;
        let mut signs: [i8; 4] = std::array::from_fn(|i| if eig[i] < 0.0 { -1 } else { 1 });
        signs.sort();
        signs
    }

    pub fn lower_tensor(&self) -> Tensor4 {
        Tensor4::matrix([Variance::Lower, Variance::Lower], &self.g)
    }

    pub fn upper_tensor(&self) -> Tensor4 {
        Tensor4::matrix([Variance::Upper, Variance::Upper], &self.g_inv)
    }

    pub fn inner(&self, u: &[f64; 4], v: &[f64; 4]) -> f64 {
        let mut s = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                s += self.g[i][j] * u[i] * v[j];
            }
        }
        s
    }

    /// Index lowering of a vector: `g_ij v^j`.
    pub fn lower(&self, v: &[f64; 4]) -> [f64; 4] {
        std::array::from_fn(|i| (0..4).map(|j| self.g[i][j] * v[j]).sum())
    }

    /// Index raising of a covector: `g^ij w_j`.
    pub fn raise(&self, w: &[f64; 4]) -> [f64; 4] {
        std::array::from_fn(|i| (0..4).map(|j| self.g_inv[i][j] * w[j]).sum())
    }
}
