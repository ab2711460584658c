//! Finitely supported complex functions on a carrier.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::group::{Element, Group, Side};

/// A finitely supported function `G → ℂ`. Exact zeros are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct GFunc {
    group: Group,
    values: BTreeMap<Element, C64>,
}

impl GFunc {
    pub fn zero(group: Group) -> Self {
        GFunc {
            group,
            values: BTreeMap::new(),
        }
    }

    /// Builds a function from `(point, value)` pairs; repeated points add up.
    pub fn from_pairs(group: Group, pairs: impl IntoIterator<Item = (Element, C64)>) -> Result<Self> {
        let mut values: BTreeMap<Element, C64> = BTreeMap::new();
        for (x, v) in pairs {
            group.check(&x)?;
            *values.entry(x).or_default() += v;
        }
        values.retain(|_, v| *v != C64::new(0.0, 0.0));
        Ok(GFunc { group, values })
    }

    pub fn from_real(group: Group, pairs: impl IntoIterator<Item = (Element, f64)>) -> Result<Self> {
        Self::from_pairs(group, pairs.into_iter().map(|(x, v)| (x, C64::new(v, 0.0))))
    }

    pub(crate) fn from_map_unchecked(group: Group, mut values: BTreeMap<Element, C64>) -> Self {
        values.retain(|_, v| *v != C64::new(0.0, 0.0));
        GFunc { group, values }
    }

    pub fn delta(group: Group, x: Element) -> Result<Self> {
        Self::from_real(group, [(x, 1.0)])
    }

    /// Indicator `χ_A`.
    pub fn indicator(group: Group, set: impl IntoIterator<Item = Element>) -> Result<Self> {
        let mut values = BTreeMap::new();
        for x in set {
            group.check(&x)?;
            values.insert(x, C64::new(1.0, 0.0));
        }
        Ok(GFunc { group, values })
    }

    pub fn group(&self) -> Group {
        self.group
    }

    #[inline]
    pub fn get(&self, x: &Element) -> C64 {
        self.values.get(x).copied().unwrap_or_default()
    }

    pub fn support(&self) -> impl Iterator<Item = &Element> {
        self.values.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Element, &C64)> {
        self.values.iter()
    }

    pub fn support_len(&self) -> usize {
        self.values.len()
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, mut f: impl FnMut(C64) -> C64) -> GFunc {
        GFunc::from_map_unchecked(
            self.group,
            self.values.iter().map(|(k, v)| (*k, f(*v))).collect(),
        )
    }

    pub fn scale(&self, s: C64) -> GFunc {
        self.map(|v| v * s)
    }

    /// `|f|` as a real-valued function.
    pub fn abs(&self) -> GFunc {
        self.map(|v| C64::new(v.norm(), 0.0))
    }

    pub fn conj(&self) -> GFunc {
        self.map(|v| v.conj())
    }

    fn same_carrier(&self, other: &GFunc) -> Result<()> {
        if self.group != other.group {
            return Err(Error::CarrierMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &GFunc) -> Result<GFunc> {
        self.same_carrier(other)?;
        let mut values = self.values.clone();
        for (k, v) in &other.values {
            *values.entry(*k).or_default() += v;
        }
        Ok(GFunc::from_map_unchecked(self.group, values))
    }

    pub fn sub(&self, other: &GFunc) -> Result<GFunc> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// Pointwise product.
    pub fn mul(&self, other: &GFunc) -> Result<GFunc> {
        self.same_carrier(other)?;
        let (small, large) = if self.values.len() <= other.values.len() {
            (self, other)
        } else {
            (other, self)
        };
        Ok(GFunc::from_map_unchecked(
            self.group,
            small
                .values
                .iter()
                .filter_map(|(k, v)| large.values.get(k).map(|w| (*k, v * w)))
                .collect(),
        ))
    }

    /// `⟨f, g⟩ = Σ f(x) conj(g(x))`.
    pub fn inner(&self, other: &GFunc) -> Result<C64> {
        self.same_carrier(other)?;
        Ok(self
            .values
            .iter()
            .filter_map(|(k, v)| other.values.get(k).map(|w| v * w.conj()))
            .sum())
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.values().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.values().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `L_x f(y) = f(x^{-1}y)` or `R_x f(y) = f(yx)`.
    pub fn translate(&self, x: &Element, side: Side) -> Result<GFunc> {
        self.group.check(x)?;
        let g = self.group;
        let shift = match side {
            Side::Left => *x,
            Side::Right => g.inverse(x),
        };
        let mut values = BTreeMap::new();
        for (k, v) in &self.values {
            // Abelian carriers: both translations move the support by a
            // fixed element, only the direction differs.
            let target = g.op(&shift, k);
            g.check(&target)?;
            values.insert(target, *v);
        }
        Ok(GFunc {
            group: g,
            values,
        })
    }

    /// `f^∨(x) = f(x^{-1})`.
    pub fn involute(&self) -> GFunc {
        let g = self.group;
        GFunc {
            group: g,
            values: self.values.iter().map(|(k, v)| (g.inverse(k), *v)).collect(),
        }
    }

    /// `(f * g)(x) = Σ_y f(y) g(y^{-1}x)`.
    pub fn convolve(&self, other: &GFunc) -> Result<GFunc> {
        self.same_carrier(other)?;
        let g = self.group;
        let mut values: BTreeMap<Element, C64> = BTreeMap::new();
        for (y, a) in &self.values {
            for (z, b) in &other.values {
                *values.entry(g.op(y, z)).or_default() += a * b;
            }
        }
        Ok(GFunc::from_map_unchecked(g, values))
    }

    /// Convolution through the multidimensional FFT; on `ℤ^d` both inputs
    /// are zero-padded onto the window of the sum of their supports.
    pub fn convolve_fft(&self, other: &GFunc) -> Result<GFunc> {
        self.same_carrier(other)?;
        let g = self.group;
        if !g.is_finite() && (self.is_zero() || other.is_zero()) {
            return Ok(GFunc::zero(g));
        }
        let (domain, mut a, mut b) = if g.is_finite() {
            let domain = Domain::full(g)?;
            let a = domain.dense(self)?;
            let b = domain.dense(other)?;
            (domain, a, b)
        } else {
            let fa = Domain::covering(g, [self], 0)?;
            let fb = Domain::covering(g, [other], 0)?;
            let lo: Vec<i64> = fa.lo().iter().zip(fb.lo()).map(|(x, y)| x + y).collect();
            let hi: Vec<i64> = lo
                .iter()
                .zip(fa.shape().iter().zip(fb.shape()))
                .map(|(l, (sa, sb))| l + (sa + sb - 2) as i64)
                .collect();
            let domain = Domain::window(g, &lo, &hi)?;
            let shift_a = g.element(fb.lo())?;
            let shift_b = g.element(fa.lo())?;
            let place = |f: &GFunc, shift: &Element| {
                let mut v = vec![C64::default(); domain.len()];
                for (x, z) in f.iter() {
                    v[domain.index_of(&g.op(x, shift)).expect("inside padded window")] = *z;
                }
                v
            };
            let a = place(self, &shift_a);
            let b = place(other, &shift_b);
            (domain, a, b)
        };
        domain.fft(&mut a, false);
        domain.fft(&mut b, false);
        for (x, y) in a.iter_mut().zip(&b) {
            *x *= y;
        }
        domain.fft(&mut a, true);
        let scale = 1.0 / domain.len() as f64;
        for x in a.iter_mut() {
            *x *= scale;
        }
        Ok(domain.to_gfunc(&a))
    }

    /// Drops values with `|f(x)| ≤ tol`.
    pub fn pruned(&self, tol: f64) -> GFunc {
        GFunc {
            group: self.group,
            values: self
                .values
                .iter()
                .filter(|(_, v)| v.norm() > tol)
                .map(|(k, v)| (*k, *v))
                .collect(),
        }
    }
}
