//! Phase-space multipliers `M_m = P(m ·)`, their localized approximants,
//! convolution-dominated matrices, Gram matrices with their pseudo-inverses,
//! and the empirical norm-equivalence engine.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::atomic::MoleculeSystem;
use crate::cover::{outside_masks, tail_from_pieces, CoverWindow, PartitionOfUnity};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::func::GFunc;
use crate::group::{Element, Neighborhood, RelSepSet, Side};
use crate::linalg::{self, CMat, RANK_CUTOFF};
use crate::spaces::{ed_norm_values, SolidSpaceSpec};
use crate::trials::TrialRng;
use crate::weight::Weight;

/// A symbol on the working window of a molecule system.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolMask {
    domain: Domain,
    values: Vec<C64>,
}

impl SymbolMask {
    pub fn new(domain: &Domain, m: &GFunc) -> Result<Self> {
        if m.group() != domain.group() {
            return Err(Error::CarrierMismatch);
        }
        Ok(SymbolMask {
            domain: domain.clone(),
            values: domain.dense(m)?,
        })
    }

    pub fn from_real(domain: &Domain, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::LengthMismatch {
                expected: domain.len(),
                got: values.len(),
            });
        }
        Ok(SymbolMask {
            domain: domain.clone(),
            values: values.into_iter().map(|v| C64::new(v, 0.0)).collect(),
        })
    }

    fn from_fn(domain: &Domain, f: impl Fn(&Element) -> f64) -> Self {
        SymbolMask {
            domain: domain.clone(),
            values: domain.elements().iter().map(|x| C64::new(f(x), 0.0)).collect(),
        }
    }

    pub fn constant(domain: &Domain, c: f64) -> Self {
        Self::from_fn(domain, |_| c)
    }

    /// Indicator of the points whose first coordinate lies in the lower half
    /// of the window (the left half of the time-frequency plane).
    pub fn half_plane(domain: &Domain) -> Self {
        let lo = domain.lo()[0];
        let half = domain.shape()[0] as i64 / 2;
        Self::from_fn(domain, |x| if x.coords()[0] - lo < half { 1.0 } else { 0.0 })
    }

    /// `offset + amplitude · cos(2π x_0 / n)` with `n` the window length along
    /// the first coordinate.
    pub fn cosine(domain: &Domain, offset: f64, amplitude: f64) -> Self {
        let n = domain.shape()[0] as f64;
        Self::from_fn(domain, |x| {
            offset + amplitude * (2.0 * std::f64::consts::PI * x.coords()[0] as f64 / n).cos()
        })
    }

    /// `+1` on the listed points and `−1` elsewhere.
    pub fn sign(domain: &Domain, positive: &[Element]) -> Self {
        Self::from_fn(domain, |x| if positive.contains(x) { 1.0 } else { -1.0 })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn to_gfunc(&self) -> GFunc {
        self.domain.to_gfunc(&self.values)
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `(A, B)` with `A ≤ m ≤ B` when `m` is real.
    pub fn real_bounds(&self) -> Option<(f64, f64)> {
        self.is_real().then(|| {
            let lo = self.values.iter().map(|v| v.re).fold(f64::INFINITY, f64::min);
            let hi = self.values.iter().map(|v| v.re).fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        })
    }

    /// Bounds when `m` is real and bounded below by a positive constant.
    pub fn positive_bounds(&self) -> Option<(f64, f64)> {
        self.real_bounds().filter(|(lo, _)| *lo > 0.0)
    }

    fn require_positive(&self) -> Result<(f64, f64)> {
        if !self.is_real() {
            return Err(Error::ComplexMask);
        }
        let (lo, hi) = self.real_bounds().expect("real mask");
        if lo <= 0.0 {
            return Err(Error::MaskNotPositive { min: lo });
        }
        Ok((lo, hi))
    }

    fn apply(&self, f: &[C64]) -> Vec<C64> {
        f.iter().zip(&self.values).map(|(a, m)| a * m).collect()
    }
}

fn check_mask(sys: &MoleculeSystem, mask: &SymbolMask) -> Result<()> {
    if mask.domain() != sys.domain() {
        return Err(Error::Precondition("mask and system live on different windows".into()));
    }
    Ok(())
}

/// `M_m(f) = P(m f)`.
pub fn multiplier(sys: &MoleculeSystem, mask: &SymbolMask, f: &GFunc) -> Result<GFunc> {
    check_mask(sys, mask)?;
    let d = sys.domain().restrict(f);
    Ok(sys.domain().to_gfunc(&multiplier_dense(sys, mask, &d)))
}

pub fn multiplier_dense(sys: &MoleculeSystem, mask: &SymbolMask, f: &[C64]) -> Vec<C64> {
    sys.project_dense(&mask.apply(f))
}

/// `M_{m,U}(f) = P(P_U(m f))`.
pub fn approx_multiplier(sys: &MoleculeSystem, pu: &PartitionOfUnity, mask: &SymbolMask, u: &CoverWindow, f: &GFunc) -> Result<GFunc> {
    check_mask(sys, mask)?;
    let mf = mask.to_gfunc().mul(f)?;
    let pu_mf = crate::cover::approx_projector(sys, pu, u, &mf)?;
    sys.projector(&pu_mf)
}

/// Coefficients drawn as complex Gaussians and pushed through `S`.
pub fn span_trials(sys: &MoleculeSystem, count: usize, seed: u64) -> Vec<Vec<C64>> {
    let mut rng = TrialRng::new(seed);
    let n = sys.nodes().len();
    (0..count)
        .map(|_| sys.synthesis_dense(&rng.gaussian_vec(n)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiplierErrorRow {
    pub radius: i64,
    /// `max ‖(M_{m,U} − M_m) f‖_2 / ‖f‖_2` over the probes.
    pub probe_norm: f64,
}

/// Probe-norm distance between `M_{m,U}` and `M_m` along a sequence of
/// boxes, using `M_{m,U} − M_m = −P(P(mf) − P_U(mf))`.
pub fn approx_multiplier_error(sys: &MoleculeSystem, pu: &PartitionOfUnity, mask: &SymbolMask, radii: &[i64], probes: &[Vec<C64>]) -> Result<Vec<MultiplierErrorRow>> {
    check_mask(sys, mask)?;
    if !pu.is_exact() {
        let (lower, upper) = pu.bounds();
        return Err(Error::NotExactPartition { lower, upper });
    }
    let g = sys.group();
    let masks: Vec<Vec<Vec<bool>>> = radii
        .iter()
        .map(|&r| outside_masks(pu, &CoverWindow::box_radius(g, r)))
        .collect();
    let per_probe: Vec<Vec<f64>> = probes
        .par_iter()
        .map(|f| {
            let nf = linalg::vec_norm(f);
            if nf == 0.0 {
                return vec![0.0; radii.len()];
            }
            let pieces = pu.pieces_dense(sys, &mask.apply(f));
            masks
                .iter()
                .map(|m| linalg::vec_norm(&sys.project_dense(&tail_from_pieces(&pieces, m))) / nf)
                .collect()
        })
        .collect();
    Ok(radii
        .iter()
        .enumerate()
        .map(|(k, &radius)| MultiplierErrorRow {
            radius,
            probe_norm: per_probe.iter().map(|r| r[k]).fold(0.0, f64::max),
        })
        .collect())
}

/// Orthonormal basis of the span of the atoms, as columns.
pub fn span_basis(sys: &MoleculeSystem) -> CMat {
    let phi = sys.phi();
    let gram = phi.adjoint() * phi;
    let (vals, vecs) = linalg::hermitian_eigen(&gram);
    let top = vals.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > RANK_CUTOFF * top).collect();
    let mut q = CMat::zeros(phi.nrows(), keep.len());
    for (j, &k) in keep.iter().enumerate() {
        let col = phi * vecs.column(k) * C64::new(1.0 / vals[k].sqrt(), 0.0);
        q.set_column(j, &col);
    }
    q
}

/// Matrix of a linear map `S → S` in the basis from [`span_basis`].
pub fn restrict_to_span(q: &CMat, apply: impl Fn(&[C64]) -> Vec<C64> + Sync) -> CMat {
    let cols: Vec<Vec<C64>> = (0..q.ncols())
        .into_par_iter()
        .map(|j| {
            let x: Vec<C64> = q.column(j).iter().copied().collect();
            apply(&x)
        })
        .collect();
    let image = linalg::from_columns(&cols, q.nrows());
    q.adjoint() * image
}

/// `M_m` on `S` in an orthonormal basis.
pub fn multiplier_on_span(sys: &MoleculeSystem, mask: &SymbolMask) -> Result<CMat> {
    check_mask(sys, mask)?;
    Ok(restrict_to_span(&span_basis(sys), |x| multiplier_dense(sys, mask, x)))
}

/// A matrix indexed by a node set, with its convolution-dominated norm.
#[derive(Debug, Clone)]
pub struct CdMatrix {
    pub nodes: RelSepSet,
    pub entries: CMat,
    pub side: Side,
    pub norm: f64,
    /// Per-diagonal maxima `a_μ`.
    pub dominating: Vec<(Element, f64)>,
}

impl CdMatrix {
    pub fn new(nodes: RelSepSet, entries: CMat, w: &Weight, side: Side) -> Result<Self> {
        let (norm, dominating) = cd_norm(&entries, &nodes, w, side)?;
        Ok(CdMatrix {
            nodes,
            entries,
            side,
            norm,
            dominating,
        })
    }
}

/// `‖T‖_CD = Σ_μ a_μ w(μ)` with `a_μ = max |T_{λ,λ′}|` over `λ′^{-1}λ = μ`
/// (right) or `λλ′^{-1} = μ` (left).
pub fn cd_norm(t: &CMat, nodes: &RelSepSet, w: &Weight, side: Side) -> Result<(f64, Vec<(Element, f64)>)> {
    let n = nodes.len();
    if t.nrows() != n || t.ncols() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: t.nrows().max(t.ncols()),
        });
    }
    nodes.closed_within_window()?;
    let g = nodes.group();
    let el = nodes.elements();
    let mut diag: BTreeMap<Element, f64> = BTreeMap::new();
    for (r, lr) in el.iter().enumerate() {
        for (c, lc) in el.iter().enumerate() {
            let mu = match side {
                Side::Right => g.left_div(lc, lr),
                Side::Left => g.op(lr, &g.inverse(lc)),
            };
            let e = diag.entry(mu).or_insert(0.0);
            *e = e.max(t[(r, c)].norm());
        }
    }
    let a: Vec<(Element, f64)> = diag.into_iter().filter(|(_, v)| *v > 0.0).collect();
    let norm = a.iter().map(|(mu, v)| v * w.eval(&g, mu)).sum();
    Ok((norm, a))
}

/// `L_{λ,λ′} = ⟨m φ_{λ′}, φ_λ⟩` with its pseudo-inverse and spectral data.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    pub matrix: CdMatrix,
    pub pinv: CMat,
    pub rank: usize,
    pub sigma_max: f64,
    /// Smallest singular value kept by the pseudo-inverse cutoff.
    pub spectral_gap: f64,
    /// `‖m‖_∞ Σ_μ (h * h^∨)(μ) w(μ)` over the node set.
    pub domination_bound: f64,
    pub pinv_cd_norm: f64,
}

pub fn gram_matrix(sys: &MoleculeSystem, mask: &SymbolMask, w: &Weight) -> Result<GramMatrix> {
    check_mask(sys, mask)?;
    if !mask.is_real() {
        return Err(Error::ComplexMask);
    }
    let report = sys.envelope_report();
    if !report.ok {
        return Err(Error::EnvelopeViolated(report.worst_excess));
    }
    let phi = sys.phi();
    let mut mphi = phi.clone();
    for (r, m) in mask.values().iter().enumerate() {
        for c in 0..mphi.ncols() {
            mphi[(r, c)] *= m;
        }
    }
    let l = phi.adjoint() * &mphi;
    let sv = linalg::singular_values(&l);
    let sigma_max = sv.first().copied().unwrap_or(0.0);
    let (pinv, rank) = linalg::pseudo_inverse(&l, RANK_CUTOFF);
    let spectral_gap = sv.get(rank.saturating_sub(1)).copied().filter(|_| rank > 0).unwrap_or(0.0);

    let g = sys.group();
    let h = sys.envelope();
    let nodes = sys.nodes();
    let domination_bound = mask.sup_norm()
        * nodes
            .elements()
            .iter()
            .map(|mu| {
                let hh: f64 = h
                    .iter()
                    .map(|(y, hy)| hy.re * h.get(&g.left_div(mu, y)).re)
                    .sum();
                hh * w.eval(&g, mu)
            })
            .sum::<f64>();
    let matrix = CdMatrix::new(nodes.clone(), l, w, Side::Right)?;
    let (pinv_cd_norm, _) = cd_norm(&pinv, nodes, w, Side::Right)?;
    Ok(GramMatrix {
        matrix,
        pinv,
        rank,
        sigma_max,
        spectral_gap,
        domination_bound,
        pinv_cd_norm,
    })
}

/// `N_m = S L^† S′` for a mask bounded below by a positive constant.
#[derive(Debug, Clone)]
pub struct InverseMultiplier {
    pub gram: GramMatrix,
    pub mask_bounds: (f64, f64),
}

impl InverseMultiplier {
    pub fn new(sys: &MoleculeSystem, mask: &SymbolMask, w: &Weight) -> Result<Self> {
        check_mask(sys, mask)?;
        let mask_bounds = mask.require_positive()?;
        Ok(InverseMultiplier {
            gram: gram_matrix(sys, mask, w)?,
            mask_bounds,
        })
    }

    pub fn apply_dense(&self, sys: &MoleculeSystem, f: &[C64]) -> Vec<C64> {
        let c = sys.synthesis_adjoint_dense(f);
        let d: Vec<C64> = (&self.gram.pinv * linalg::CVec::from_vec(c)).iter().copied().collect();
        sys.synthesis_dense(&d)
    }
}

pub fn inverse_multiplier(sys: &MoleculeSystem, mask: &SymbolMask, f: &GFunc) -> Result<GFunc> {
    let inv = InverseMultiplier::new(sys, mask, &Weight::unit())?;
    let d = sys.domain().restrict(f);
    Ok(sys.domain().to_gfunc(&inv.apply_dense(sys, &d)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceRow {
    pub space: String,
    pub p: f64,
    pub q: f64,
    pub weight: String,
    pub trial_count: usize,
    pub c_min: f64,
    pub c_max: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub rows: Vec<EquivalenceRow>,
    /// Per space, per nonzero trial: `(‖f‖_E, ‖(‖P(fη_γ)‖_B)_γ‖_{E_d})`.
    pub samples: Vec<Vec<(f64, f64)>>,
}

/// Compares `‖f‖_E` with `‖(‖P(f η_γ)‖_B)_γ‖_{E_d}` for each trial and each
/// space. A non-exact partition (`θ_γ = m η_γ`) needs real functions with a
/// positive lower sum bound, a subgroup node set and canonical duals.
pub fn norm_equivalence_report(
    sys: &MoleculeSystem,
    pu: &PartitionOfUnity,
    spaces: &[SolidSpaceSpec],
    b: &SolidSpaceSpec,
    v: &Neighborhood,
    trials: &[Vec<C64>],
) -> Result<EquivalenceReport> {
    if pu.domain() != sys.domain() {
        return Err(Error::Precondition("partition and system live on different windows".into()));
    }
    for e in spaces.iter().chain([b]) {
        e.validate()?;
    }
    if !pu.is_exact() {
        if !pu.is_real() {
            return Err(Error::ComplexMask);
        }
        let (lower, upper) = pu.bounds();
        if !(lower > 0.0) {
            return Err(Error::DegeneratePartition(format!(
                "partition sums range over [{lower}, {upper}]"
            )));
        }
        if !sys.nodes().is_subgroup() {
            return Err(Error::Precondition("node set must be a subgroup".into()));
        }
        if !sys.canonical_dual() {
            return Err(Error::Precondition("duals must be the canonical dual frame".into()));
        }
    }
    let dom = sys.domain();
    let g = sys.group();
    let centers = pu.centers().elements();
    let per_trial: Vec<Option<Vec<(f64, f64)>>> = trials
        .par_iter()
        .map(|f| {
            if f.iter().all(|z| *z == C64::default()) {
                return None;
            }
            let pieces = pu.pieces_dense(sys, f);
            let mags: Vec<f64> = pieces.iter().map(|p| b.norm_dense_complex(dom, p)).collect();
            let fm: Vec<f64> = f.iter().map(|z| z.norm()).collect();
            Some(
                spaces
                    .iter()
                    .map(|e| (e.norm_dense(dom, &fm), ed_norm_values(centers, &g, &mags, e, v)))
                    .collect(),
            )
        })
        .collect();
    let kept: Vec<&Vec<(f64, f64)>> = per_trial.iter().flatten().collect();
    let mut rows = Vec::new();
    let mut samples = Vec::new();
    for (k, e) in spaces.iter().enumerate() {
        let s: Vec<(f64, f64)> = kept.iter().map(|t| t[k]).collect();
        let ratios = s.iter().map(|(l, r)| r / l);
        let c_min = ratios.clone().fold(f64::INFINITY, f64::min);
        let c_max = ratios.fold(f64::NEG_INFINITY, f64::max);
        rows.push(EquivalenceRow {
            space: e.label(),
            p: e.p,
            q: e.q,
            weight: e.weight.label(),
            trial_count: s.len(),
            c_min,
            c_max,
            ratio: c_max / c_min,
        });
        samples.push(s);
    }
    Ok(EquivalenceReport { rows, samples })
}

/// Smallest singular value of `P ∘ R^B_U ∘ C^B` on `S`.
pub fn left_invertibility_witness(sys: &MoleculeSystem, pu: &PartitionOfUnity, u: &CoverWindow) -> Result<f64> {
    if !pu.is_exact() {
        let (lower, upper) = pu.bounds();
        return Err(Error::NotExactPartition { lower, upper });
    }
    let masks = outside_masks(pu, u);
    let q = span_basis(sys);
    let m = restrict_to_span(&q, |x| {
        let pieces = pu.pieces_dense(sys, x);
        let pf = sys.project_dense(x);
        let tail = tail_from_pieces(&pieces, &masks);
        let pu_x: Vec<C64> = pf.iter().zip(&tail).map(|(a, b)| a - b).collect();
        sys.project_dense(&pu_x)
    });
    Ok(linalg::singular_values(&m).last().copied().unwrap_or(0.0))
}
