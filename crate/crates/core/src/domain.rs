//! Dense working windows: a box of carrier elements with a fixed row-major
//! enumeration, so functions can be stored as plain vectors.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::func::GFunc;
use crate::group::{Element, Group};
use crate::weight::Weight;

/// A box `lo_i ..= lo_i + shape_i - 1` in every coordinate. On `ℤ_N^d` the
/// only box used is the whole group.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    group: Group,
    lo: Vec<i64>,
    shape: Vec<usize>,
    elements: Arc<Vec<Element>>,
}

impl Domain {
    /// All of `ℤ_N^d`.
    pub fn full(group: Group) -> Result<Self> {
        let n = group
            .modulus()
            .ok_or_else(|| Error::InvalidCarrier("the whole lattice is not a finite window".into()))?;
        Ok(Self::build(group, vec![0; group.dim()], vec![n as usize; group.dim()]))
    }

    /// The box `lo ..= hi` on a lattice carrier.
    pub fn window(group: Group, lo: &[i64], hi: &[i64]) -> Result<Self> {
        if group.is_finite() {
            return Self::full(group);
        }
        if lo.len() != group.dim() || hi.len() != group.dim() {
            return Err(Error::DimensionMismatch {
                expected: group.dim(),
                got: lo.len().min(hi.len()),
            });
        }
        if lo.iter().zip(hi).any(|(l, h)| l > h) {
            return Err(Error::Precondition("empty window".into()));
        }
        group.element(lo)?;
        group.element(hi)?;
        let shape = lo.iter().zip(hi).map(|(l, h)| (h - l + 1) as usize).collect();
        Ok(Self::build(group, lo.to_vec(), shape))
    }

    /// `{-r..r}^d` on a lattice, the whole group on `ℤ_N^d`.
    pub fn centered(group: Group, radius: i64) -> Result<Self> {
        if group.is_finite() {
            return Self::full(group);
        }
        let d = group.dim();
        Self::window(group, &vec![-radius; d], &vec![radius; d])
    }

    /// Smallest window holding every support, widened by `margin`.
    pub fn covering<'a>(group: Group, funcs: impl IntoIterator<Item = &'a GFunc>, margin: i64) -> Result<Self> {
        if group.is_finite() {
            return Self::full(group);
        }
        let d = group.dim();
        let mut lo = vec![i64::MAX; d];
        let mut hi = vec![i64::MIN; d];
        for f in funcs {
            for x in f.support() {
                for i in 0..d {
                    lo[i] = lo[i].min(x.coords()[i]);
                    hi[i] = hi[i].max(x.coords()[i]);
                }
            }
        }
        if lo[0] > hi[0] {
            lo = vec![0; d];
            hi = vec![0; d];
        }
        let lo: Vec<i64> = lo.iter().map(|c| c - margin).collect();
        let hi: Vec<i64> = hi.iter().map(|c| c + margin).collect();
        Self::window(group, &lo, &hi)
    }

    fn build(group: Group, lo: Vec<i64>, shape: Vec<usize>) -> Self {
        let total: usize = shape.iter().product();
        let mut elements = Vec::with_capacity(total);
        let mut coords = vec![0i64; shape.len()];
        for mut idx in 0..total {
            for i in (0..shape.len()).rev() {
                coords[i] = lo[i] + (idx % shape[i]) as i64;
                idx /= shape[i];
            }
            elements.push(group.element(&coords).expect("window inside the carrier"));
        }
        Domain {
            group,
            lo,
            shape,
            elements: Arc::new(elements),
        }
    }

    pub fn group(&self) -> Group {
        self.group
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &Element {
        &self.elements[i]
    }

    /// Whether the window is all of a finite carrier.
    pub fn is_whole_group(&self) -> bool {
        self.group.is_finite()
    }

    #[inline]
    pub fn index_of(&self, x: &Element) -> Option<usize> {
        let mut idx = 0usize;
        for (i, &c) in x.coords().iter().enumerate() {
            let off = c - self.lo[i];
            if off < 0 || off as usize >= self.shape[i] {
                return None;
            }
            idx = idx * self.shape[i] + off as usize;
        }
        Some(idx)
    }

    /// Index of `elements[i] · x`, if it stays in the window.
    #[inline]
    pub fn shift_index(&self, i: usize, x: &Element) -> Option<usize> {
        self.index_of(&self.group.op(&self.elements[i], x))
    }

    pub fn contains(&self, x: &Element) -> bool {
        self.index_of(x).is_some()
    }

    /// Dense values of `f`; fails when the support leaves the window.
    pub fn dense(&self, f: &GFunc) -> Result<Vec<C64>> {
        if f.group() != self.group {
            return Err(Error::CarrierMismatch);
        }
        let mut out = vec![C64::default(); self.len()];
        for (x, v) in f.iter() {
            let i = self
                .index_of(x)
                .ok_or_else(|| Error::OutOfRange(x.coords().to_vec()))?;
            out[i] = *v;
        }
        Ok(out)
    }

    /// Dense values of `f` on the window, silently dropping the rest.
    pub fn restrict(&self, f: &GFunc) -> Vec<C64> {
        let mut out = vec![C64::default(); self.len()];
        for (x, v) in f.iter() {
            if let Some(i) = self.index_of(x) {
                out[i] = *v;
            }
        }
        out
    }

    pub fn to_gfunc(&self, values: &[C64]) -> GFunc {
        GFunc::from_map_unchecked(
            self.group,
            self.elements
                .iter()
                .zip(values)
                .map(|(x, v)| (*x, *v))
                .collect(),
        )
    }

    pub fn to_gfunc_real(&self, values: &[f64]) -> GFunc {
        GFunc::from_map_unchecked(
            self.group,
            self.elements
                .iter()
                .zip(values)
                .map(|(x, v)| (*x, C64::new(*v, 0.0)))
                .collect(),
        )
    }

    pub fn weights(&self, w: &Weight) -> Vec<f64> {
        self.elements.iter().map(|x| w.eval(&self.group, x)).collect()
    }

    /// In-place multidimensional DFT over the window's shape, each axis taken
    /// as cyclic (unnormalized in both directions). On a whole finite carrier
    /// this is the group Fourier transform.
    pub fn fft(&self, data: &mut [C64], inverse: bool) {
        assert_eq!(data.len(), self.len(), "data must cover the window");
        let mut planner = FftPlanner::new();
        let d = self.shape.len();
        let total = data.len();
        let mut buf = Vec::new();
        for axis in 0..d {
            let n = self.shape[axis];
            let stride: usize = self.shape[axis + 1..].iter().product();
            let fft = if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            };
            for base in 0..total {
                if (base / stride) % n != 0 {
                    continue;
                }
                buf.clear();
                buf.extend((0..n).map(|k| data[base + k * stride]));
                fft.process(&mut buf);
                for (k, v) in buf.iter().enumerate() {
                    data[base + k * stride] = *v;
                }
            }
        }
    }

    /// `(a * k)(x) = Σ_y a(y) k(y^{-1}x)` on the window with a sparse kernel;
    /// contributions landing outside the window are dropped.
    pub fn convolve_sparse(&self, a: &[f64], kernel: &[(Element, f64)]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0.0 {
                continue;
            }
            for (z, kz) in kernel {
                if let Some(j) = self.shift_index(i, z) {
                    out[j] += ai * kz;
                }
            }
        }
        out
    }
}
