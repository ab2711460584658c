//! Computable discrete abelian groups: the lattices `ℤ^d` and the finite
//! groups `ℤ_N^d`, their elements, symmetric neighborhoods of the identity and
//! relatively separated node sets.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported dimension `d`.
pub const MAX_DIM: usize = 4;

/// Lattice coordinates beyond this magnitude are rejected.
pub const LATTICE_COORD_LIMIT: i64 = 1 << 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// A group element, stored as up to [`MAX_DIM`] integer coordinates.
///
/// On `ℤ_N^d` coordinates are always reduced to `0..N`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element {
    dim: u8,
    coords: [i64; MAX_DIM],
}

impl Element {
    pub fn coords(&self) -> &[i64] {
        &self.coords[..self.dim as usize]
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    fn raw(coords: &[i64]) -> Self {
        let mut c = [0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Element {
            dim: coords.len() as u8,
            coords: c,
        }
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coords())
    }
}

impl Serialize for Element {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.coords().serialize(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CarrierKind {
    Lattice,
    Cyclic { modulus: i64 },
}

/// A computable group `ℤ^d` or `ℤ_N^d` with counting Haar measure.
///
/// Both carriers are abelian, hence unimodular: the modular function is
/// identically one and left and right translations commute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Group {
    kind: CarrierKind,
    dim: usize,
}

impl Group {
    pub fn lattice(dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidCarrier(format!("dimension {dim} not in 1..={MAX_DIM}")));
        }
        Ok(Group {
            kind: CarrierKind::Lattice,
            dim,
        })
    }

    pub fn cyclic(dim: usize, modulus: i64) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidCarrier(format!("dimension {dim} not in 1..={MAX_DIM}")));
        }
        if modulus < 1 {
            return Err(Error::InvalidCarrier(format!("modulus {modulus} must be positive")));
        }
        Ok(Group {
            kind: CarrierKind::Cyclic { modulus },
            dim,
        })
    }

    pub fn kind(&self) -> CarrierKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modulus(&self) -> Option<i64> {
        match self.kind {
            CarrierKind::Cyclic { modulus } => Some(modulus),
            CarrierKind::Lattice => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.modulus().is_some()
    }

    /// Number of elements of a finite carrier.
    pub fn order(&self) -> Option<usize> {
        self.modulus().map(|n| (n as usize).pow(self.dim as u32))
    }

    pub fn identity(&self) -> Element {
        Element::raw(&[0; MAX_DIM][..self.dim])
    }

    /// Builds an element, reducing modulo `N` on finite carriers.
    pub fn element(&self, coords: &[i64]) -> Result<Element> {
        if coords.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: coords.len(),
            });
        }
        match self.kind {
            CarrierKind::Lattice => {
                if coords.iter().any(|c| c.abs() > LATTICE_COORD_LIMIT) {
                    return Err(Error::OutOfRange(coords.to_vec()));
                }
                Ok(Element::raw(coords))
            }
            CarrierKind::Cyclic { modulus } => {
                let mut c = [0; MAX_DIM];
                for (dst, src) in c.iter_mut().zip(coords) {
                    *dst = src.rem_euclid(modulus);
                }
                Ok(Element {
                    dim: self.dim as u8,
                    coords: c,
                })
            }
        }
    }

    pub fn contains(&self, x: &Element) -> bool {
        if x.dim() != self.dim {
            return false;
        }
        match self.kind {
            CarrierKind::Lattice => x.coords().iter().all(|c| c.abs() <= LATTICE_COORD_LIMIT),
            CarrierKind::Cyclic { modulus } => x.coords().iter().all(|&c| (0..modulus).contains(&c)),
        }
    }

    pub(crate) fn check(&self, x: &Element) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.dim(),
            });
        }
        if !self.contains(x) {
            return Err(Error::OutOfRange(x.coords().to_vec()));
        }
        Ok(())
    }

    /// Group product `x·y` (written additively on the coordinates).
    #[inline]
    pub fn op(&self, x: &Element, y: &Element) -> Element {
        let mut c = [0; MAX_DIM];
        match self.kind {
            CarrierKind::Lattice => {
                for i in 0..self.dim {
                    c[i] = x.coords[i] + y.coords[i];
                }
            }
            CarrierKind::Cyclic { modulus } => {
                for i in 0..self.dim {
                    let s = x.coords[i] + y.coords[i];
                    c[i] = if s >= modulus { s - modulus } else { s };
                }
            }
        }
        Element {
            dim: self.dim as u8,
            coords: c,
        }
    }

    #[inline]
    pub fn inverse(&self, x: &Element) -> Element {
        let mut c = [0; MAX_DIM];
        match self.kind {
            CarrierKind::Lattice => {
                for i in 0..self.dim {
                    c[i] = -x.coords[i];
                }
            }
            CarrierKind::Cyclic { modulus } => {
                for i in 0..self.dim {
                    c[i] = if x.coords[i] == 0 { 0 } else { modulus - x.coords[i] };
                }
            }
        }
        Element {
            dim: self.dim as u8,
            coords: c,
        }
    }

    /// `x^{-1}·y`.
    #[inline]
    pub fn left_div(&self, x: &Element, y: &Element) -> Element {
        self.op(&self.inverse(x), y)
    }

    /// `x^n` for `n ≥ 0`.
    pub fn pow(&self, x: &Element, n: u64) -> Element {
        let mut c = [0; MAX_DIM];
        for i in 0..self.dim {
            c[i] = match self.kind {
                CarrierKind::Lattice => x.coords[i] * n as i64,
                CarrierKind::Cyclic { modulus } => {
                    ((x.coords[i] as i128 * n as i128).rem_euclid(modulus as i128)) as i64
                }
            };
        }
        Element {
            dim: self.dim as u8,
            coords: c,
        }
    }

    /// Representative of coordinate `c` with the smallest absolute value
    /// (ties on `ℤ_N` with even `N` resolve to `N/2`).
    #[inline]
    pub fn centered(&self, c: i64) -> i64 {
        match self.kind {
            CarrierKind::Lattice => c,
            CarrierKind::Cyclic { modulus } => {
                let r = c.rem_euclid(modulus);
                if 2 * r > modulus {
                    r - modulus
                } else {
                    r
                }
            }
        }
    }

    /// Euclidean length of the shortest representative of `x`.
    pub fn abs(&self, x: &Element) -> f64 {
        x.coords()
            .iter()
            .map(|&c| {
                let r = self.centered(c) as f64;
                r * r
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Sup-norm length of the shortest representative of `x`.
    pub fn abs_max(&self, x: &Element) -> i64 {
        x.coords()
            .iter()
            .map(|&c| self.centered(c).abs())
            .max()
            .unwrap_or(0)
    }

    /// The centered box `{-r..r}^d`, reduced and deduplicated on finite carriers.
    pub fn box_elements(&self, radius: i64) -> Vec<Element> {
        let radius = radius.max(0);
        let side = (2 * radius + 1) as usize;
        let total = side.pow(self.dim as u32);
        let mut out = BTreeSet::new();
        let mut coords = vec![0i64; self.dim];
        for mut idx in 0..total {
            for c in coords.iter_mut().rev() {
                *c = (idx % side) as i64 - radius;
                idx /= side;
            }
            // Coordinates here stay far inside the lattice range.
            out.insert(self.element(&coords).expect("box coordinates in range"));
        }
        out.into_iter().collect()
    }

    /// All elements of a finite carrier in row-major order (first coordinate
    /// most significant).
    pub fn elements(&self) -> Option<Vec<Element>> {
        let n = self.modulus()?;
        let total = self.order()?;
        let mut out = Vec::with_capacity(total);
        let mut coords = vec![0i64; self.dim];
        for mut idx in 0..total {
            for c in coords.iter_mut().rev() {
                *c = (idx as i64) % n;
                idx /= n as usize;
            }
            out.push(Element::raw(&coords));
        }
        Some(out)
    }
}

/// A finite symmetric neighborhood `V = V^{-1}` of the identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Neighborhood {
    group: Group,
    elements: Vec<Element>,
}

impl Neighborhood {
    pub fn new(group: Group, elements: impl IntoIterator<Item = Element>) -> Result<Self> {
        let set: BTreeSet<Element> = elements.into_iter().collect();
        for x in &set {
            group.check(x)?;
        }
        if !set.contains(&group.identity()) {
            return Err(Error::InvalidNeighborhood);
        }
        if set.iter().any(|x| !set.contains(&group.inverse(x))) {
            return Err(Error::InvalidNeighborhood);
        }
        Ok(Neighborhood {
            group,
            elements: set.into_iter().collect(),
        })
    }

    /// `{-r..r}^d`; the default neighborhood is `radius = 1`.
    pub fn box_radius(group: Group, radius: i64) -> Self {
        Neighborhood {
            group,
            elements: group.box_elements(radius),
        }
    }

    pub fn identity(group: Group) -> Self {
        Neighborhood {
            group,
            elements: vec![group.identity()],
        }
    }

    pub fn group(&self) -> Group {
        self.group
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, x: &Element) -> bool {
        self.elements.binary_search(x).is_ok()
    }

    /// `V·V`, used when comparing left/right/strong amalgams.
    pub fn squared(&self) -> Neighborhood {
        let g = self.group;
        let set: BTreeSet<Element> = self
            .elements
            .iter()
            .flat_map(|a| self.elements.iter().map(move |b| g.op(a, b)))
            .collect();
        Neighborhood {
            group: g,
            elements: set.into_iter().collect(),
        }
    }
}

/// `ρ_V(Λ) = max_x #(Λ ∩ xV)`.
///
/// Only the finitely many `x ∈ Λ·V^{-1}` can meet `Λ`, so the maximum is
/// exact.
pub fn spreadness(group: Group, nodes: &[Element], v: &Neighborhood) -> Result<usize> {
    if nodes.is_empty() {
        return Err(Error::EmptyNodeSet);
    }
    let lookup: HashSet<Element> = nodes.iter().copied().collect();
    let mut seen = HashSet::new();
    let mut best = 0;
    for lambda in nodes {
        for t in v.elements() {
            let x = group.op(lambda, &group.inverse(t));
            if !seen.insert(x) {
                continue;
            }
            let count = v
                .elements()
                .iter()
                .filter(|s| lookup.contains(&group.op(&x, s)))
                .count();
            best = best.max(count);
        }
    }
    Ok(best)
}

/// A finite relatively separated node set with its cached spreadness.
#[derive(Debug, Clone)]
pub struct RelSepSet {
    group: Group,
    elements: Arc<Vec<Element>>,
    spreadness: usize,
}

impl PartialEq for RelSepSet {
    fn eq(&self, other: &Self) -> bool {
        self.group == other.group && self.elements == other.elements
    }
}

impl RelSepSet {
    /// Validates the node list and caches `ρ_V` for the given `V`.
    pub fn new(group: Group, elements: Vec<Element>, v: &Neighborhood) -> Result<Self> {
        let mut seen = HashSet::with_capacity(elements.len());
        for x in &elements {
            group.check(x)?;
            if !seen.insert(*x) {
                return Err(Error::DuplicateNode(*x));
            }
        }
        let spreadness = spreadness(group, &elements, v)?;
        Ok(RelSepSet {
            group,
            elements: Arc::new(elements),
            spreadness,
        })
    }

    /// Node set with spreadness taken against the default `V = {-1,0,1}^d`.
    pub fn with_default_neighborhood(group: Group, elements: Vec<Element>) -> Result<Self> {
        Self::new(group, elements, &Neighborhood::box_radius(group, 1))
    }

    /// The subgroup `a_1ℤ × … × a_dℤ` of a finite carrier.
    pub fn sublattice(group: Group, steps: &[i64]) -> Result<Self> {
        let n = group
            .modulus()
            .ok_or_else(|| Error::InvalidCarrier("sublattice needs a finite carrier".into()))?;
        if steps.len() != group.dim() {
            return Err(Error::DimensionMismatch {
                expected: group.dim(),
                got: steps.len(),
            });
        }
        for &s in steps {
            if s < 1 || n % s != 0 {
                return Err(Error::InvalidCarrier(format!("step {s} does not divide {n}")));
            }
        }
        let elements = group
            .elements()
            .expect("finite carrier")
            .into_iter()
            .filter(|x| x.coords().iter().zip(steps).all(|(c, s)| c % s == 0))
            .collect();
        Self::with_default_neighborhood(group, elements)
    }

    pub fn group(&self) -> Group {
        self.group
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn spreadness(&self) -> usize {
        self.spreadness
    }

    pub fn position(&self, x: &Element) -> Option<usize> {
        self.elements.iter().position(|e| e == x)
    }

    /// Whether the node set is a subgroup. On `ℤ^d` a finite window can only be
    /// closed "within the window", see [`RelSepSet::closed_within_window`].
    pub fn is_subgroup(&self) -> bool {
        if !self.group.is_finite() {
            return self.elements.len() == 1 && self.elements[0] == self.group.identity();
        }
        self.first_closure_violation(false).is_none()
    }

    /// Closure under products and inverses, ignoring products that leave the
    /// coordinate bounding box of the set. On finite carriers this is the
    /// plain subgroup test.
    pub fn closed_within_window(&self) -> Result<()> {
        match self.first_closure_violation(true) {
            None => Ok(()),
            Some(x) => Err(Error::NotSubgroup(x)),
        }
    }

    fn first_closure_violation(&self, windowed: bool) -> Option<Element> {
        let g = self.group;
        let set: HashSet<Element> = self.elements.iter().copied().collect();
        let d = g.dim();
        let mut lo = [i64::MAX; MAX_DIM];
        let mut hi = [i64::MIN; MAX_DIM];
        for x in self.elements.iter() {
            for i in 0..d {
                lo[i] = lo[i].min(x.coords()[i]);
                hi[i] = hi[i].max(x.coords()[i]);
            }
        }
        let in_window = |x: &Element| {
            !windowed
                || g.is_finite()
                || x.coords()
                    .iter()
                    .enumerate()
                    .all(|(i, &c)| c >= lo[i] && c <= hi[i])
        };
        for a in self.elements.iter() {
            let inv = g.inverse(a);
            if in_window(&inv) && !set.contains(&inv) {
                return Some(inv);
            }
            for b in self.elements.iter() {
                let p = g.op(a, b);
                if in_window(&p) && !set.contains(&p) {
                    return Some(p);
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> Group {
        Group::lattice(1).unwrap()
    }

    fn els(g: Group, xs: &[i64]) -> Vec<Element> {
        xs.iter().map(|&x| g.element(&[x]).unwrap()).collect()
    }

    #[test]
    fn cyclic_axioms_exhaustive() {
        let g = Group::cyclic(2, 3).unwrap();
        let all = g.elements().unwrap();
        let e = g.identity();
        for a in &all {
            assert_eq!(g.op(a, &e), *a);
            assert_eq!(g.op(a, &g.inverse(a)), e);
            for b in &all {
                for c in &all {
                    assert_eq!(g.op(&g.op(a, b), c), g.op(a, &g.op(b, c)));
                }
            }
        }
    }

    #[test]
    fn lattice_range_is_enforced() {
        let g = z();
        assert!(matches!(
            g.element(&[LATTICE_COORD_LIMIT + 1]),
            Err(Error::OutOfRange(_))
        ));
        assert!(matches!(
            g.element(&[1, 2]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn centered_representatives() {
        let g = Group::cyclic(1, 8).unwrap();
        assert_eq!(g.centered(5), -3);
        assert_eq!(g.centered(4), 4);
        assert_eq!(g.abs(&g.element(&[7]).unwrap()), 1.0);
    }

    #[test]
    fn neighborhood_must_be_symmetric() {
        let g = z();
        assert!(Neighborhood::new(g, els(g, &[0, 1])).is_err());
        assert!(Neighborhood::new(g, els(g, &[1, -1])).is_err());
        assert!(Neighborhood::new(g, els(g, &[-1, 0, 1])).is_ok());
    }

    #[test]
    fn spreadness_examples() {
        let g = z();
        let v1 = Neighborhood::box_radius(g, 1);
        let v2 = Neighborhood::box_radius(g, 2);
        assert_eq!(spreadness(g, &els(g, &[0]), &v1).unwrap(), 1);
        let evens: Vec<i64> = (-8..=8).filter(|x| x % 2 == 0).collect();
        assert_eq!(spreadness(g, &els(g, &evens), &v1).unwrap(), 2);
        let all: Vec<i64> = (-4..=4).collect();
        assert_eq!(spreadness(g, &els(g, &all), &v2).unwrap(), 5);
        assert_eq!(spreadness(g, &[], &v1), Err(Error::EmptyNodeSet));
    }

    #[test]
    fn duplicates_rejected() {
        let g = z();
        let r = RelSepSet::with_default_neighborhood(g, els(g, &[0, 1, 0]));
        assert!(matches!(r, Err(Error::DuplicateNode(_))));
    }

    #[test]
    fn sublattice_is_subgroup() {
        let g = Group::cyclic(2, 8).unwrap();
        let l = RelSepSet::sublattice(g, &[2, 4]).unwrap();
        assert_eq!(l.len(), 8);
        assert!(l.is_subgroup());
        let h = Group::lattice(1).unwrap();
        let w = RelSepSet::with_default_neighborhood(h, els(h, &(-5..=5).collect::<Vec<_>>()))
            .unwrap();
        assert!(w.closed_within_window().is_ok());
        let holes = RelSepSet::with_default_neighborhood(h, els(h, &[-2, 0, 1, 2])).unwrap();
        assert!(holes.closed_within_window().is_err());
    }
}
