//! Solid mixed-norm spaces `ℓ^{p,q}_v`, amalgam norms built from local
//! maximum functions, and the discrete sequence spaces attached to a node set.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::func::GFunc;
use crate::group::{Element, Group, Neighborhood, RelSepSet, Side, MAX_DIM};
use crate::weight::Weight;

/// `ℓ^{p,q}_v` on a carrier. Without a split this is `ℓ^p_v`; with
/// `inner_dims = k` the `ℓ^p` sum runs over the first `k` coordinates and the
/// `ℓ^q` sum over the remaining ones.
#[derive(Debug, Clone, PartialEq)]
pub struct SolidSpaceSpec {
    pub p: f64,
    pub q: f64,
    pub weight: Weight,
    pub inner_dims: Option<usize>,
    /// Admissible weight the space is measured against.
    pub reference: Weight,
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    Ok(())
}

impl SolidSpaceSpec {
    pub fn lp(p: f64, weight: Weight) -> Result<Self> {
        check_exponent(p)?;
        Ok(SolidSpaceSpec {
            p,
            q: p,
            reference: weight.clone(),
            weight,
            inner_dims: None,
        })
    }

    pub fn mixed(p: f64, q: f64, weight: Weight, inner_dims: usize) -> Result<Self> {
        check_exponent(p)?;
        check_exponent(q)?;
        Ok(SolidSpaceSpec {
            p,
            q,
            reference: weight.clone(),
            weight,
            inner_dims: Some(inner_dims),
        })
    }

    pub fn with_reference(mut self, w: Weight) -> Self {
        self.reference = w;
        self
    }

    /// `ℓ^1_w`, the space every weak and strong amalgam is built on.
    pub fn l1(w: &Weight) -> Self {
        SolidSpaceSpec {
            p: 1.0,
            q: 1.0,
            weight: w.clone(),
            inner_dims: None,
            reference: w.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_exponent(self.p)?;
        check_exponent(self.q)
    }

    /// Label such as `l^2` or `l^{1,inf}`.
    pub fn label(&self) -> String {
        match self.inner_dims {
            None => format!("l^{}", exp_label(self.p)),
            Some(_) => format!("l^{{{},{}}}", exp_label(self.p), exp_label(self.q)),
        }
    }

    /// Norm of a function given as `(point, |value|)` pairs.
    pub fn norm_iter(&self, group: &Group, items: impl IntoIterator<Item = (Element, f64)>) -> f64 {
        let unit = self.weight.is_unit();
        let weighted = items.into_iter().map(|(x, m)| {
            let wm = if unit || m == 0.0 {
                m
            } else {
                m * self.weight.eval(group, &x)
            };
            (x, wm)
        });
        match self.inner_dims {
            None => lp_sum(weighted.map(|(_, m)| m), self.p),
            Some(k) => {
                let mut blocks: BTreeMap<[i64; MAX_DIM], Acc> = BTreeMap::new();
                for (x, m) in weighted {
                    let mut key = [0i64; MAX_DIM];
                    for (i, c) in x.coords().iter().enumerate().skip(k) {
                        key[i] = *c;
                    }
                    blocks.entry(key).or_insert_with(|| Acc::new(self.p)).push(m);
                }
                lp_sum(blocks.into_values().map(|a| a.finish()), self.q)
            }
        }
    }

    /// `‖f‖_E`.
    pub fn norm(&self, f: &GFunc) -> Result<f64> {
        self.validate()?;
        let g = f.group();
        Ok(self.norm_iter(&g, f.iter().map(|(x, v)| (*x, v.norm()))))
    }

    /// `‖f‖_E` for magnitudes stored densely on a window.
    pub fn norm_dense(&self, domain: &Domain, mags: &[f64]) -> f64 {
        let g = domain.group();
        self.norm_iter(
            &g,
            domain
                .elements()
                .iter()
                .zip(mags)
                .filter(|(_, m)| **m != 0.0)
                .map(|(x, m)| (*x, *m)),
        )
    }

    pub fn norm_dense_complex(&self, domain: &Domain, values: &[C64]) -> f64 {
        let mags: Vec<f64> = values.iter().map(|v| v.norm()).collect();
        self.norm_dense(domain, &mags)
    }

    /// Operator norm of a translation on `ℓ^{p,q}_v`: `sup_z v(xz)/v(z)` for
    /// `L_x` and `sup_z v(zx)/v(z)` for `R_{x^{-1}}`, over the centered box of
    /// the given radius.
    pub fn translation_norm(&self, group: &Group, x: &Element, side: Side, radius: i64) -> f64 {
        if self.weight.is_unit() {
            return 1.0;
        }
        group
            .box_elements(radius)
            .iter()
            .map(|z| {
                let xz = match side {
                    Side::Left => group.op(x, z),
                    Side::Right => group.op(z, x),
                };
                self.weight.eval(group, &xz) / self.weight.eval(group, z)
            })
            .fold(0.0, f64::max)
    }

    /// The constant `C` with `w(x) ≥ C max{u(x), u(x^{-1}), v̂(x), v̂(x^{-1})}`
    /// and the moderation constant `C′` with `v(xy) ≤ C′ w(x) v(y)`, both over
    /// the centered box of the given radius.
    pub fn admissibility(&self, group: &Group, radius: i64) -> Admissibility {
        let pts = group.box_elements(radius);
        let mut c = f64::INFINITY;
        let mut c_prime: f64 = 0.0;
        for x in &pts {
            let xi = group.inverse(x);
            let t = [
                self.translation_norm(group, x, Side::Left, radius),
                self.translation_norm(group, &xi, Side::Left, radius),
                self.translation_norm(group, x, Side::Right, radius),
                self.translation_norm(group, &xi, Side::Right, radius),
            ]
            .into_iter()
            .fold(0.0, f64::max);
            let wx = self.reference.eval(group, x);
            c = c.min(wx / t);
            for y in &pts {
                let r = self.weight.eval(group, &group.op(x, y)) / (wx * self.weight.eval(group, y));
                c_prime = c_prime.max(r);
            }
        }
        Admissibility {
            constant: c,
            moderation: c_prime,
        }
    }
}

fn exp_label(p: f64) -> String {
    if p.is_infinite() {
        "inf".into()
    } else if p.fract() == 0.0 {
        format!("{}", p as i64)
    } else {
        format!("{p}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Admissibility {
    pub constant: f64,
    pub moderation: f64,
}

struct Acc {
    p: f64,
    total: f64,
}

impl Acc {
    fn new(p: f64) -> Self {
        Acc { p, total: 0.0 }
    }

    #[inline]
    fn push(&mut self, m: f64) {
        if self.p.is_infinite() {
            self.total = self.total.max(m);
        } else if self.p == 1.0 {
            self.total += m;
        } else if self.p == 2.0 {
            self.total += m * m;
        } else {
            self.total += m.powf(self.p);
        }
    }

    fn finish(&self) -> f64 {
        if self.p.is_infinite() || self.p == 1.0 {
            self.total
        } else if self.p == 2.0 {
            self.total.sqrt()
        } else {
            self.total.powf(1.0 / self.p)
        }
    }
}

fn lp_sum(items: impl Iterator<Item = f64>, p: f64) -> f64 {
    let mut acc = Acc::new(p);
    for m in items {
        acc.push(m);
    }
    acc.finish()
}

/// `f^#(x) = max_{y∈V} |f(xy)|` (left) or `f_#(x) = max_{y∈V} |f(yx)|` (right).
pub fn local_max(f: &GFunc, v: &Neighborhood, side: Side) -> GFunc {
    let g = f.group();
    let mut out: BTreeMap<Element, f64> = BTreeMap::new();
    for (s, val) in f.iter() {
        let m = val.norm();
        for y in v.elements() {
            let yi = g.inverse(y);
            let x = match side {
                Side::Left => g.op(s, &yi),
                Side::Right => g.op(&yi, s),
            };
            let e = out.entry(x).or_insert(0.0);
            *e = e.max(m);
        }
    }
    GFunc::from_map_unchecked(g, out.into_iter().map(|(k, m)| (k, C64::new(m, 0.0))).collect())
}

/// Dense local maximum on a window; values outside the window count as zero.
pub fn local_max_dense(domain: &Domain, mags: &[f64], v: &Neighborhood, side: Side) -> Vec<f64> {
    let g = domain.group();
    (0..domain.len())
        .map(|i| {
            v.elements()
                .iter()
                .filter_map(|y| {
                    let x = domain.element(i);
                    let t = match side {
                        Side::Left => g.op(x, y),
                        Side::Right => g.op(y, x),
                    };
                    domain.index_of(&t).map(|j| mags[j])
                })
                .fold(0.0, f64::max)
        })
        .collect()
}

/// Which amalgam norm to take.
#[derive(Debug, Clone, Copy)]
pub enum AmalgamKind<'a> {
    /// `‖f^#‖_E`.
    Left(&'a SolidSpaceSpec),
    /// `‖(f_#)^∨‖_E`.
    Right(&'a SolidSpaceSpec),
    /// `‖(χ_V * |f|)^#‖_{ℓ^1_w}`.
    WeakLeft(&'a Weight),
    /// `‖(|f| * χ_V)_#‖_{ℓ^1_w}`.
    WeakRight(&'a Weight),
    /// `‖(f_#)^#‖_{ℓ^1_w}`.
    Strong(&'a Weight),
    /// `W(L^1, E)` with control function `x ↦ Σ_{y∈V} |f(xy)|`.
    LocalL1(&'a SolidSpaceSpec),
}

pub fn amalgam_norm(f: &GFunc, v: &Neighborhood, kind: AmalgamKind<'_>) -> Result<f64> {
    let g = f.group();
    let chi_v = GFunc::indicator(g, v.elements().iter().copied())?;
    match kind {
        AmalgamKind::Left(e) => e.norm(&local_max(f, v, Side::Left)),
        AmalgamKind::Right(e) => e.norm(&local_max(f, v, Side::Right).involute()),
        AmalgamKind::WeakLeft(w) => {
            let c = chi_v.convolve(&f.abs())?;
            SolidSpaceSpec::l1(w).norm(&local_max(&c, v, Side::Left))
        }
        AmalgamKind::WeakRight(w) => {
            let c = f.abs().convolve(&chi_v)?;
            SolidSpaceSpec::l1(w).norm(&local_max(&c, v, Side::Right))
        }
        AmalgamKind::Strong(w) => {
            let inner = local_max(f, v, Side::Right);
            SolidSpaceSpec::l1(w).norm(&local_max(&inner, v, Side::Left))
        }
        AmalgamKind::LocalL1(e) => {
            // Σ_{y∈V} |f(xy)| = (|f| * χ_V^∨)(x) and V is symmetric.
            let k = f.abs().convolve(&chi_v)?;
            e.norm(&k)
        }
    }
}

/// `‖f‖_{W(L^∞,E)} = ‖f^#‖_E` for dense data on a window.
pub fn left_amalgam_dense(domain: &Domain, values: &[C64], v: &Neighborhood, e: &SolidSpaceSpec) -> f64 {
    let mags: Vec<f64> = values.iter().map(|z| z.norm()).collect();
    e.norm_dense(domain, &local_max_dense(domain, &mags, v, Side::Left))
}

/// Coefficients indexed by a node set.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteCoeffs {
    nodes: RelSepSet,
    values: Vec<C64>,
}

impl DiscreteCoeffs {
    pub fn new(nodes: RelSepSet, values: Vec<C64>) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(Error::LengthMismatch {
                expected: nodes.len(),
                got: values.len(),
            });
        }
        Ok(DiscreteCoeffs { nodes, values })
    }

    pub fn zeros(nodes: RelSepSet) -> Self {
        let n = nodes.len();
        DiscreteCoeffs {
            nodes,
            values: vec![C64::default(); n],
        }
    }

    pub fn nodes(&self) -> &RelSepSet {
        &self.nodes
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }
}

/// One function per node.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorCoeffs {
    nodes: RelSepSet,
    entries: Vec<GFunc>,
}

impl VectorCoeffs {
    pub fn new(nodes: RelSepSet, entries: Vec<GFunc>) -> Result<Self> {
        if nodes.len() != entries.len() {
            return Err(Error::LengthMismatch {
                expected: nodes.len(),
                got: entries.len(),
            });
        }
        if let Some(first) = entries.first() {
            if entries.iter().any(|e| e.group() != first.group()) {
                return Err(Error::CarrierMismatch);
            }
        }
        Ok(VectorCoeffs { nodes, entries })
    }

    pub fn nodes(&self) -> &RelSepSet {
        &self.nodes
    }

    pub fn entries(&self) -> &[GFunc] {
        &self.entries
    }

    pub fn scale(&self, s: C64) -> VectorCoeffs {
        VectorCoeffs {
            nodes: self.nodes.clone(),
            entries: self.entries.iter().map(|e| e.scale(s)).collect(),
        }
    }
}

/// `‖Σ_λ c_λ χ_{λV}‖_E` for nonnegative `c`.
pub fn ed_norm_values(nodes: &[Element], group: &Group, mags: &[f64], e: &SolidSpaceSpec, v: &Neighborhood) -> f64 {
    let mut stack: BTreeMap<Element, f64> = BTreeMap::new();
    for (lambda, &m) in nodes.iter().zip(mags) {
        if m == 0.0 {
            continue;
        }
        for y in v.elements() {
            *stack.entry(group.op(lambda, y)).or_insert(0.0) += m;
        }
    }
    e.norm_iter(group, stack)
}

pub fn ed_norm(c: &DiscreteCoeffs, e: &SolidSpaceSpec, v: &Neighborhood) -> Result<f64> {
    e.validate()?;
    let g = c.nodes().group();
    let mags: Vec<f64> = c.values().iter().map(|z| z.norm()).collect();
    Ok(ed_norm_values(c.nodes().elements(), &g, &mags, e, v))
}

/// `E_d` norm of the sequence `(‖F_γ‖_B)_γ`.
pub fn edb_norm(f: &VectorCoeffs, e: &SolidSpaceSpec, b: &SolidSpaceSpec, v: &Neighborhood) -> Result<f64> {
    e.validate()?;
    let mags = f
        .entries()
        .iter()
        .map(|x| b.norm(x))
        .collect::<Result<Vec<_>>>()?;
    let g = f.nodes().group();
    Ok(ed_norm_values(f.nodes().elements(), &g, &mags, e, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> Group {
        Group::lattice(1).unwrap()
    }

    fn e(c: i64) -> Element {
        z().element(&[c]).unwrap()
    }

    fn real(pairs: &[(i64, f64)]) -> GFunc {
        GFunc::from_real(z(), pairs.iter().map(|&(x, v)| (e(x), v))).unwrap()
    }

    #[test]
    fn space_norm_examples() {
        let v = Weight::polynomial(1.0);
        let d0 = real(&[(0, 1.0)]);
        for p in [1.0, 2.0, f64::INFINITY] {
            assert_eq!(SolidSpaceSpec::lp(p, v.clone()).unwrap().norm(&d0).unwrap(), 1.0);
        }
        let chi = real(&[(0, 1.0), (1, 1.0), (2, 1.0), (3, 1.0)]);
        let l2 = SolidSpaceSpec::lp(2.0, Weight::unit()).unwrap();
        assert_eq!(l2.norm(&chi).unwrap(), 2.0);
        let linf = SolidSpaceSpec::lp(f64::INFINITY, Weight::unit()).unwrap();
        assert_eq!(linf.norm(&real(&[(0, 2.0), (1, 1.0)])).unwrap(), 2.0);
        assert_eq!(l2.norm(&GFunc::zero(z())).unwrap(), 0.0);
        assert_eq!(SolidSpaceSpec::lp(0.5, Weight::unit()), Err(Error::InvalidExponent(0.5)));
    }

    #[test]
    fn mixed_norm_inner_block_first() {
        let g = Group::cyclic(2, 4).unwrap();
        let f = GFunc::from_real(
            g,
            [
                (g.element(&[0, 0]).unwrap(), 3.0),
                (g.element(&[1, 0]).unwrap(), 4.0),
                (g.element(&[0, 1]).unwrap(), 1.0),
            ],
        )
        .unwrap();
        // inner ℓ^2 over the first coordinate: (5, 1), outer ℓ^1: 6
        let e21 = SolidSpaceSpec::mixed(2.0, 1.0, Weight::unit(), 1).unwrap();
        assert!((e21.norm(&f).unwrap() - 6.0).abs() < 1e-14);
        // inner ℓ^1: (7, 1), outer ℓ^∞: 7
        let e1i = SolidSpaceSpec::mixed(1.0, f64::INFINITY, Weight::unit(), 1).unwrap();
        assert_eq!(e1i.norm(&f).unwrap(), 7.0);
    }

    #[test]
    fn translation_norm_examples() {
        let g = z();
        let flat = SolidSpaceSpec::lp(2.0, Weight::unit()).unwrap();
        assert_eq!(flat.translation_norm(&g, &e(5), Side::Left, 10), 1.0);
        let poly = SolidSpaceSpec::lp(2.0, Weight::polynomial(1.0)).unwrap();
        assert_eq!(poly.translation_norm(&g, &e(1), Side::Left, 10), 2.0);
        assert_eq!(poly.translation_norm(&g, &e(0), Side::Left, 10), 1.0);
        let a = poly.admissibility(&g, 6);
        assert!((a.constant - 1.0).abs() < 1e-12);
        assert!(a.moderation <= 1.0 + 1e-12);
    }

    #[test]
    fn local_max_examples() {
        let v = Neighborhood::box_radius(z(), 1);
        let d0 = real(&[(0, 1.0)]);
        assert_eq!(local_max(&d0, &v, Side::Left), real(&[(-1, 1.0), (0, 1.0), (1, 1.0)]));
        let f = real(&[(0, -2.0), (3, 1.0)]);
        assert_eq!(local_max(&f, &Neighborhood::identity(z()), Side::Left), f.abs());
        assert_eq!(local_max(&f, &v, Side::Left), local_max(&f, &v, Side::Right));
    }

    #[test]
    fn amalgam_examples() {
        let v = Neighborhood::box_radius(z(), 1);
        let l1 = SolidSpaceSpec::lp(1.0, Weight::unit()).unwrap();
        let d0 = real(&[(0, 1.0)]);
        assert_eq!(amalgam_norm(&d0, &v, AmalgamKind::Left(&l1)).unwrap(), 3.0);
        let f = real(&[(0, 1.5), (2, -1.0), (-1, 0.25)]);
        let id = Neighborhood::identity(z());
        assert_eq!(amalgam_norm(&f, &id, AmalgamKind::Left(&l1)).unwrap(), l1.norm(&f).unwrap());
    }

    #[test]
    fn ed_norm_examples() {
        let v = Neighborhood::box_radius(z(), 1);
        let l1 = SolidSpaceSpec::lp(1.0, Weight::unit()).unwrap();
        let one = RelSepSet::new(z(), vec![e(4)], &v).unwrap();
        let c = DiscreteCoeffs::new(one.clone(), vec![C64::new(1.0, 0.0)]).unwrap();
        assert_eq!(ed_norm(&c, &l1, &v).unwrap(), 3.0);
        assert_eq!(ed_norm(&DiscreteCoeffs::zeros(one.clone()), &l1, &v).unwrap(), 0.0);
        let two = RelSepSet::new(z(), vec![e(0), e(1)], &v).unwrap();
        let c = DiscreteCoeffs::new(two, vec![C64::new(1.0, 0.0); 2]).unwrap();
        assert_eq!(ed_norm(&c, &l1, &v).unwrap(), 6.0);
        assert!(DiscreteCoeffs::new(one, vec![]).is_err());
    }

    #[test]
    fn edb_norm_examples() {
        let v = Neighborhood::box_radius(z(), 1);
        let l1 = SolidSpaceSpec::lp(1.0, Weight::unit()).unwrap();
        let l2 = SolidSpaceSpec::lp(2.0, Weight::unit()).unwrap();
        let nodes = RelSepSet::new(z(), vec![e(0)], &v).unwrap();
        let f = VectorCoeffs::new(nodes.clone(), vec![real(&[(0, 1.0)])]).unwrap();
        assert_eq!(edb_norm(&f, &l1, &l2, &v).unwrap(), 3.0);
        let scaled = f.scale(C64::new(2.5, 0.0));
        assert!((edb_norm(&scaled, &l1, &l2, &v).unwrap() - 7.5).abs() < 1e-14);
        let zero = VectorCoeffs::new(nodes, vec![GFunc::zero(z())]).unwrap();
        assert_eq!(edb_norm(&zero, &l1, &l2, &v).unwrap(), 0.0);
    }
}
