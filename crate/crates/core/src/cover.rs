//! Partitions of unity on the carrier, the localized analysis/synthesis pair,
//! the approximate projector `P_U` and its error certificate.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::atomic::{coset_representatives, KernelEnvelope, Lookup, MoleculeSystem};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::func::GFunc;
use crate::group::{Element, Group, Neighborhood, RelSepSet, Side};
use crate::spaces::{left_amalgam_dense, local_max, SolidSpaceSpec, VectorCoeffs};
use crate::trials::TrialRng;
use crate::weight::Weight;

/// Sums within this distance of one count as an exact partition.
pub const PARTITION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// `max(0, 1 − |t| / (width/2))`.
    Triangular,
    /// `cos²(π t / width)` on `|t| < width/2`.
    RaisedCosine,
    /// `exp(−π (2t / width)²)`, never zero.
    GaussianNormalized,
}

impl Profile {
    pub fn eval1(&self, t: f64, width: f64) -> f64 {
        let half = width / 2.0;
        match self {
            Profile::Triangular => (1.0 - t.abs() / half).max(0.0),
            Profile::RaisedCosine => {
                if t.abs() < half {
                    (std::f64::consts::PI * t / width).cos().powi(2)
                } else {
                    0.0
                }
            }
            Profile::GaussianNormalized => (-std::f64::consts::PI * (t / half).powi(2)).exp(),
        }
    }

    /// Product profile at a group element, using centered representatives.
    pub fn eval(&self, group: &Group, x: &Element, width: f64) -> f64 {
        x.coords()
            .iter()
            .map(|&c| self.eval1(group.centered(c) as f64, width))
            .product()
    }
}

/// A finite symmetric window `U ∋ e`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverWindow(Neighborhood);

impl CoverWindow {
    pub fn new(group: Group, elements: impl IntoIterator<Item = Element>) -> Result<Self> {
        Neighborhood::new(group, elements).map(CoverWindow)
    }

    /// `{-r..r}^d`.
    pub fn box_radius(group: Group, radius: i64) -> Self {
        CoverWindow(Neighborhood::box_radius(group, radius))
    }

    pub fn contains(&self, x: &Element) -> bool {
        self.0.contains(x)
    }

    pub fn elements(&self) -> &[Element] {
        self.0.elements()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Whether `U` is all of a finite carrier.
    pub fn is_whole_group(&self) -> bool {
        self.0.group().order() == Some(self.0.len())
    }
}

/// A partition `{η_γ}` (or a modulated family `θ_γ = m η_γ`) on a window.
#[derive(Debug, Clone)]
pub struct PartitionOfUnity {
    centers: RelSepSet,
    functions: Vec<GFunc>,
    sparse: Vec<Vec<(usize, C64)>>,
    envelope: GFunc,
    lower: f64,
    upper: f64,
    exact: bool,
    real: bool,
    domain: Domain,
}

/// Centers on the grid `spacing·ℤ^d` inside the window.
pub fn grid_centers(domain: &Domain, spacing: i64) -> Result<RelSepSet> {
    if spacing < 1 {
        return Err(Error::Precondition("center spacing must be positive".into()));
    }
    let g = domain.group();
    if g.is_finite() {
        return RelSepSet::sublattice(g, &vec![spacing; g.dim()]);
    }
    let pts = domain
        .elements()
        .iter()
        .filter(|x| x.coords().iter().all(|c| c.rem_euclid(spacing) == 0))
        .copied()
        .collect();
    RelSepSet::with_default_neighborhood(g, pts)
}

/// Normalizes translated profiles: `η_γ = L_γ p / Σ_{γ′} L_{γ′} p` on the window.
pub fn build_bupu(domain: &Domain, centers: RelSepSet, profile: Profile, width: f64) -> Result<PartitionOfUnity> {
    let g = domain.group();
    if centers.group() != g {
        return Err(Error::CarrierMismatch);
    }
    if !(width > 0.0) {
        return Err(Error::Precondition("profile width must be positive".into()));
    }
    let raw: Vec<Vec<(usize, f64)>> = centers
        .elements()
        .iter()
        .map(|gamma| {
            domain
                .elements()
                .iter()
                .enumerate()
                .filter_map(|(i, x)| {
                    let p = profile.eval(&g, &g.left_div(gamma, x), width);
                    (p > 0.0).then_some((i, p))
                })
                .collect()
        })
        .collect();
    let mut sum = vec![0.0; domain.len()];
    for list in &raw {
        for &(i, p) in list {
            sum[i] += p;
        }
    }
    if let Some(i) = sum.iter().position(|&s| s <= 0.0) {
        return Err(Error::CoverageGap(*domain.element(i)));
    }
    let sparse: Vec<Vec<(usize, C64)>> = raw
        .iter()
        .map(|list| list.iter().map(|&(i, p)| (i, C64::new(p / sum[i], 0.0))).collect())
        .collect();
    PartitionOfUnity::assemble(domain.clone(), centers, sparse)
}

impl PartitionOfUnity {
    /// Builds a family from functions given on the window; bounds, exactness
    /// and the tightest envelope `g(t) = max_γ |η_γ(γt)|` are computed.
    pub fn from_functions(domain: &Domain, centers: RelSepSet, functions: &[GFunc]) -> Result<Self> {
        if functions.len() != centers.len() {
            return Err(Error::LengthMismatch {
                expected: centers.len(),
                got: functions.len(),
            });
        }
        let sparse = functions
            .iter()
            .map(|f| {
                let d = domain.dense(f)?;
                Ok(d.into_iter().enumerate().filter(|(_, v)| *v != C64::default()).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::assemble(domain.clone(), centers, sparse)
    }

    fn assemble(domain: Domain, centers: RelSepSet, sparse: Vec<Vec<(usize, C64)>>) -> Result<Self> {
        let g = domain.group();
        let mut sum = vec![C64::default(); domain.len()];
        for list in &sparse {
            for &(i, v) in list {
                sum[i] += v;
            }
        }
        let real = sparse.iter().flatten().all(|(_, v)| v.im == 0.0);
        let lower = sum.iter().map(|s| s.re).fold(f64::INFINITY, f64::min);
        let upper = sum.iter().map(|s| s.re).fold(f64::NEG_INFINITY, f64::max);
        let exact = sum.iter().all(|s| (s - C64::new(1.0, 0.0)).norm() <= PARTITION_TOL);
        let mut env: BTreeMap<Element, f64> = BTreeMap::new();
        for (gamma, list) in centers.elements().iter().zip(&sparse) {
            for &(i, v) in list {
                let e = env.entry(g.left_div(gamma, domain.element(i))).or_insert(0.0);
                *e = e.max(v.norm());
            }
        }
        let envelope = GFunc::from_real(g, env)?;
        let functions = sparse
            .iter()
            .map(|list| {
                GFunc::from_pairs(g, list.iter().map(|&(i, v)| (*domain.element(i), v)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PartitionOfUnity {
            centers,
            functions,
            sparse,
            envelope,
            lower,
            upper,
            exact,
            real,
            domain,
        })
    }

    /// `θ_γ = m η_γ` for a real mask `m`.
    pub fn modulate(&self, mask: &GFunc) -> Result<PartitionOfUnity> {
        if mask.iter().any(|(_, v)| v.im != 0.0) {
            return Err(Error::ComplexMask);
        }
        let m = self.domain.restrict(mask);
        let sparse = self
            .sparse
            .iter()
            .map(|list| {
                list.iter()
                    .map(|&(i, v)| (i, v * m[i]))
                    .filter(|(_, v)| *v != C64::default())
                    .collect()
            })
            .collect();
        Self::assemble(self.domain.clone(), self.centers.clone(), sparse)
    }

    pub fn centers(&self) -> &RelSepSet {
        &self.centers
    }

    pub fn functions(&self) -> &[GFunc] {
        &self.functions
    }

    /// Nonzero values of each function as `(domain index, value)`.
    pub fn sparse(&self) -> &[Vec<(usize, C64)>] {
        &self.sparse
    }

    pub fn envelope(&self) -> &GFunc {
        &self.envelope
    }

    /// `(A, B)` with `A ≤ Σ_γ η_γ ≤ B` on the window.
    pub fn bounds(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// `|η_γ(x)| ≤ g(γ^{-1}x)` everywhere (holds by construction of `g`).
    pub fn verify_envelope(&self) -> bool {
        let g = self.domain.group();
        self.centers.elements().iter().zip(&self.functions).all(|(gamma, f)| {
            f.iter()
                .all(|(x, v)| v.norm() <= self.envelope.get(&g.left_div(gamma, x)).re)
        })
    }

    fn check_system(&self, sys: &MoleculeSystem) -> Result<()> {
        if sys.domain() != &self.domain {
            return Err(Error::Precondition(
                "partition and molecule system live on different windows".into(),
            ));
        }
        Ok(())
    }

    fn require_exact(&self) -> Result<()> {
        if !self.exact {
            return Err(Error::NotExactPartition {
                lower: self.lower,
                upper: self.upper,
            });
        }
        Ok(())
    }

    /// Dense pieces `P(f η_γ)` for every center.
    pub fn pieces_dense(&self, sys: &MoleculeSystem, f: &[C64]) -> Vec<Vec<C64>> {
        self.sparse
            .iter()
            .map(|list| {
                let local: Vec<(usize, C64)> = list.iter().map(|&(i, v)| (i, f[i] * v)).collect();
                sys.project_sparse(&local)
            })
            .collect()
    }
}

/// `C^B(f) = (P(f η_γ))_γ`.
pub fn vector_analysis(sys: &MoleculeSystem, pu: &PartitionOfUnity, f: &GFunc) -> Result<VectorCoeffs> {
    pu.check_system(sys)?;
    if f.group() != sys.group() {
        return Err(Error::CarrierMismatch);
    }
    let d = pu.domain.restrict(f);
    let entries = pu
        .pieces_dense(sys, &d)
        .iter()
        .map(|p| pu.domain.to_gfunc(p))
        .collect();
    VectorCoeffs::new(pu.centers.clone(), entries)
}

/// Domain indices of `γU` for every center.
fn window_masks(pu: &PartitionOfUnity, u: &CoverWindow) -> Vec<Vec<bool>> {
    let g = pu.domain.group();
    pu.centers
        .elements()
        .iter()
        .map(|gamma| {
            pu.domain
                .elements()
                .iter()
                .map(|x| u.contains(&g.left_div(gamma, x)))
                .collect()
        })
        .collect()
}

/// `R^B_U(F) = Σ_γ P(F_γ) χ_{γU}`.
pub fn vector_synthesis(sys: &MoleculeSystem, pu: &PartitionOfUnity, f: &VectorCoeffs, u: &CoverWindow) -> Result<GFunc> {
    pu.check_system(sys)?;
    if f.nodes() != &pu.centers {
        return Err(Error::Precondition("entries indexed by a different center set".into()));
    }
    let masks = window_masks(pu, u);
    let mut out = vec![C64::default(); pu.domain.len()];
    for (entry, mask) in f.entries().iter().zip(&masks) {
        let d = pu.domain.restrict(entry);
        let p = sys.project_dense(&d);
        for ((o, v), inside) in out.iter_mut().zip(&p).zip(mask) {
            if *inside {
                *o += v;
            }
        }
    }
    Ok(pu.domain.to_gfunc(&out))
}

/// `P_U(f) = R^B_U(C^B(f))`; needs `Σ η_γ ≡ 1`.
pub fn approx_projector(sys: &MoleculeSystem, pu: &PartitionOfUnity, u: &CoverWindow, f: &GFunc) -> Result<GFunc> {
    pu.require_exact()?;
    let coeffs = vector_analysis(sys, pu, f)?;
    vector_synthesis(sys, pu, &coeffs, u)
}

/// `P(f) − P_U(f) = Σ_γ P(f η_γ) χ_{γ(G∖U)}` from precomputed pieces.
pub(crate) fn tail_from_pieces(pieces: &[Vec<C64>], outside: &[Vec<bool>]) -> Vec<C64> {
    let n = pieces.first().map_or(0, |p| p.len());
    let mut out = vec![C64::default(); n];
    for (p, mask) in pieces.iter().zip(outside) {
        for ((o, v), out_of_u) in out.iter_mut().zip(p).zip(mask) {
            if *out_of_u {
                *o += v;
            }
        }
    }
    out
}

pub(crate) fn outside_masks(pu: &PartitionOfUnity, u: &CoverWindow) -> Vec<Vec<bool>> {
    window_masks(pu, u)
        .into_iter()
        .map(|m| m.into_iter().map(|inside| !inside).collect())
        .collect()
}

/// `P(f) − P_U(f)` on the window.
pub fn approx_projector_error(sys: &MoleculeSystem, pu: &PartitionOfUnity, u: &CoverWindow, f: &[C64]) -> Result<Vec<C64>> {
    pu.check_system(sys)?;
    pu.require_exact()?;
    Ok(tail_from_pieces(&pu.pieces_dense(sys, f), &outside_masks(pu, u)))
}

/// `G_U(x) = sup_y Σ_γ (g * χ_V)(γ^{-1}y) [γ^{-1}yx ∉ U]` at the given points.
pub fn auxiliary_g_u_at(pu: &PartitionOfUnity, u: &CoverWindow, v: &Neighborhood, xs: &[Element]) -> Result<Vec<f64>> {
    let g = pu.domain.group();
    let chi_v = GFunc::indicator(g, v.elements().iter().copied())?;
    let gv = pu.envelope.convolve(&chi_v)?;
    let lookup = Lookup::new(&gv);
    let supp: Vec<Element> = gv.support().copied().collect();
    let centers = pu.centers.elements();
    let ys: Vec<Element> = if g.is_finite() && pu.centers.is_subgroup() {
        coset_representatives(&g, centers)
    } else {
        let set: BTreeSet<Element> = centers
            .iter()
            .flat_map(|c| supp.iter().map(move |t| g.op(c, t)))
            .collect();
        set.into_iter().collect()
    };
    let partial: Vec<Vec<f64>> = ys
        .par_iter()
        .map(|y| {
            let active: Vec<(Element, f64)> = centers
                .iter()
                .filter_map(|c| {
                    let t = g.left_div(c, y);
                    let a = lookup.at(&t);
                    (a != 0.0).then_some((t, a))
                })
                .collect();
            xs.iter()
                .map(|x| {
                    active
                        .iter()
                        .filter(|(t, _)| !u.contains(&g.op(t, x)))
                        .map(|(_, a)| a)
                        .sum()
                })
                .collect()
        })
        .collect();
    let mut best = vec![0.0f64; xs.len()];
    for acc in &partial {
        for (b, a) in best.iter_mut().zip(acc) {
            *b = b.max(*a);
        }
    }
    Ok(best)
}

/// `G_U` on the whole finite carrier, or on the difference window of the
/// partition's domain for lattices.
pub fn auxiliary_g_u(pu: &PartitionOfUnity, u: &CoverWindow, v: &Neighborhood) -> Result<GFunc> {
    let g = pu.domain.group();
    let xs: Vec<Element> = if g.is_finite() {
        g.elements().expect("finite carrier")
    } else {
        let ext: Vec<i64> = pu.domain.shape().iter().map(|&s| s as i64 - 1).collect();
        let neg: Vec<i64> = ext.iter().map(|e| -e).collect();
        Domain::window(g, &neg, &ext)?.elements().to_vec()
    };
    let vals = auxiliary_g_u_at(pu, u, v, &xs)?;
    GFunc::from_real(g, xs.into_iter().zip(vals))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateRow {
    pub radius: i64,
    pub empirical_opnorm: f64,
    pub theory_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub rows: Vec<CertificateRow>,
    /// `(ε, smallest radius whose empirical error is ≤ ε)`.
    pub certified: Vec<(f64, Option<i64>)>,
    pub probes: usize,
}

pub struct CertificateSetup<'a> {
    pub space: &'a SolidSpaceSpec,
    pub neighborhood: &'a Neighborhood,
    pub weight: &'a Weight,
    pub kernel: &'a KernelEnvelope,
    pub radii: &'a [i64],
    pub random_probes: usize,
    pub seed: u64,
}

/// The dense probe set: seeded complex Gaussians followed by every atom.
pub fn probe_set(sys: &MoleculeSystem, random: usize, seed: u64) -> Vec<Vec<C64>> {
    let mut rng = TrialRng::new(seed);
    let n = sys.domain().len();
    let mut probes: Vec<Vec<C64>> = (0..random).map(|_| rng.gaussian_vec(n)).collect();
    for k in 0..sys.phi().ncols() {
        probes.push(sys.phi().column(k).iter().copied().collect());
    }
    probes
}

/// Sweeps `U` over centered boxes and brackets `‖P − P_U‖_{W(L^∞,E)→E}`
/// between a probe estimate and the bound `‖H_# · G_U‖_{ℓ^1_w}`.
pub fn approx_error_certificate(sys: &MoleculeSystem, pu: &PartitionOfUnity, setup: &CertificateSetup<'_>) -> Result<Certificate> {
    pu.check_system(sys)?;
    pu.require_exact()?;
    let g = sys.group();
    let dom = pu.domain.clone();
    let windows: Vec<CoverWindow> = setup.radii.iter().map(|&r| CoverWindow::box_radius(g, r)).collect();
    let outside: Vec<Vec<Vec<bool>>> = windows.iter().map(|u| outside_masks(pu, u)).collect();

    let h_sharp = local_max(&setup.kernel.kernel, setup.neighborhood, Side::Left);
    let hs: Vec<(Element, f64)> = h_sharp.iter().map(|(x, v)| (*x, v.re)).collect();
    let xs: Vec<Element> = hs.iter().map(|(x, _)| *x).collect();
    let bounds = windows
        .iter()
        .map(|u| {
            let gu = auxiliary_g_u_at(pu, u, setup.neighborhood, &xs)?;
            Ok(hs
                .iter()
                .zip(&gu)
                .map(|((x, h), gx)| h * gx * setup.weight.eval(&g, x))
                .fold(0.0, |acc, t| acc + t))
        })
        .collect::<Result<Vec<f64>>>()?;

    let probes = probe_set(sys, setup.random_probes, setup.seed);
    let per_probe: Vec<Vec<f64>> = probes
        .par_iter()
        .map(|f| {
            let denom = left_amalgam_dense(&dom, f, setup.neighborhood, setup.space);
            if denom == 0.0 {
                return vec![0.0; windows.len()];
            }
            let pieces = pu.pieces_dense(sys, f);
            outside
                .iter()
                .map(|mask| setup.space.norm_dense_complex(&dom, &tail_from_pieces(&pieces, mask)) / denom)
                .collect()
        })
        .collect();
    let rows: Vec<CertificateRow> = setup
        .radii
        .iter()
        .enumerate()
        .map(|(k, &radius)| CertificateRow {
            radius,
            empirical_opnorm: per_probe.iter().map(|r| r[k]).fold(0.0, f64::max),
            theory_bound: bounds[k],
        })
        .collect();
    let certified = [0.1, 0.01]
        .into_iter()
        .map(|eps| (eps, rows.iter().find(|r| r.empirical_opnorm <= eps).map(|r| r.radius)))
        .collect();
    Ok(Certificate {
        rows,
        certified,
        probes: probes.len(),
    })
}

/// Radii `r, 2r, 4r, …` with `doublings` steps after the first.
pub fn doubling_radii(initial: i64, doublings: u32) -> Vec<i64> {
    (0..=doublings).map(|k| initial << k).collect()
}
