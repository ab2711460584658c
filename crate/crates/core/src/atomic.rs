//! Molecule systems: atoms and dual atoms under a common envelope, the
//! analysis and synthesis operators, the reproducing projector and its
//! domination kernel.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::func::GFunc;
use crate::group::{Element, Group, Neighborhood, RelSepSet};
use crate::linalg::{self, CMat, RANK_CUTOFF};
use crate::spaces::{amalgam_norm, AmalgamKind, DiscreteCoeffs, SolidSpaceSpec};
use crate::trials::TrialRng;
use crate::weight::Weight;

/// Relative slack for envelope checks, scaled by `max h`.
pub const ENVELOPE_TOL: f64 = 1e-12;

/// Agreement required between supplied duals and the numerically computed
/// canonical dual, in operator norm.
pub const CANONICAL_DUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeReport {
    pub ok: bool,
    pub worst_excess: f64,
}

#[derive(Debug, Clone)]
pub struct MoleculeSystem {
    nodes: RelSepSet,
    atoms: Vec<GFunc>,
    duals: Vec<GFunc>,
    envelope: GFunc,
    envelope_report: EnvelopeReport,
    canonical_dual: bool,
    domain: Domain,
    phi: CMat,
    psi: CMat,
    psi_adj: CMat,
    phi_adj: CMat,
}

impl MoleculeSystem {
    /// Assembles a system. The envelope is checked but a failing check does
    /// not reject the system; see [`MoleculeSystem::envelope_verified`].
    pub fn new(nodes: RelSepSet, atoms: Vec<GFunc>, duals: Vec<GFunc>, envelope: GFunc) -> Result<Self> {
        let group = nodes.group();
        for list in [&atoms, &duals] {
            if list.len() != nodes.len() {
                return Err(Error::LengthMismatch {
                    expected: nodes.len(),
                    got: list.len(),
                });
            }
            if list.iter().any(|f| f.group() != group) {
                return Err(Error::CarrierMismatch);
            }
        }
        if envelope.group() != group {
            return Err(Error::CarrierMismatch);
        }
        if envelope.iter().any(|(_, v)| v.re < 0.0 || v.im != 0.0) {
            return Err(Error::Malformed("envelope must be real and nonnegative".into()));
        }
        let domain = Domain::covering(group, atoms.iter().chain(&duals), 0)?;
        let phi = dense_columns(&domain, &atoms)?;
        let psi = dense_columns(&domain, &duals)?;
        let mut sys = MoleculeSystem {
            psi_adj: psi.adjoint(),
            phi_adj: phi.adjoint(),
            nodes,
            atoms,
            duals,
            envelope,
            envelope_report: EnvelopeReport {
                ok: false,
                worst_excess: f64::INFINITY,
            },
            canonical_dual: false,
            domain,
            phi,
            psi,
        };
        sys.envelope_report = sys.verify_envelope();
        Ok(sys)
    }

    /// Orthonormal point masses `φ_λ = ψ_λ = δ_λ` with envelope `δ_e`.
    pub fn deltas(nodes: RelSepSet) -> Result<Self> {
        let g = nodes.group();
        let atoms = nodes
            .elements()
            .iter()
            .map(|x| GFunc::delta(g, *x))
            .collect::<Result<Vec<_>>>()?;
        let env = GFunc::delta(g, g.identity())?;
        let mut sys = Self::new(nodes, atoms.clone(), atoms, env)?;
        sys.check_canonical_dual();
        Ok(sys)
    }

    /// Uses the canonical dual frame of the atoms on their span as duals and
    /// the tightest common envelope.
    pub fn with_canonical_dual(nodes: RelSepSet, atoms: Vec<GFunc>) -> Result<Self> {
        let group = nodes.group();
        let domain = Domain::covering(group, atoms.iter(), 0)?;
        let phi = dense_columns(&domain, &atoms)?;
        let psi = canonical_dual_matrix(&phi);
        let duals: Vec<GFunc> = (0..psi.ncols())
            .map(|k| domain.to_gfunc(psi.column(k).as_slice()))
            .collect();
        let env = tight_envelope(&nodes, &atoms, &duals);
        let mut sys = Self::new(nodes, atoms, duals, env)?;
        sys.check_canonical_dual();
        Ok(sys)
    }

    /// Normalized block indicators `φ_k = χ_{[wk, wk+w)} / √w` on `ℤ_n`.
    pub fn block_indicators(n: i64, width: i64) -> Result<Self> {
        let g = Group::cyclic(1, n)?;
        let nodes = RelSepSet::sublattice(g, &[width])?;
        let amp = 1.0 / (width as f64).sqrt();
        let atoms = nodes
            .elements()
            .iter()
            .map(|x| {
                let start = x.coords()[0];
                GFunc::from_real(g, (0..width).map(|j| (g.element(&[start + j]).expect("reduced"), amp)))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::with_canonical_dual(nodes, atoms)
    }

    /// Sets the canonical-dual flag when the duals agree with the numerically
    /// computed canonical dual to [`CANONICAL_DUAL_TOL`]; returns the deviation.
    pub fn check_canonical_dual(&mut self) -> f64 {
        let dev = self.canonical_dual_deviation();
        self.canonical_dual = dev <= CANONICAL_DUAL_TOL;
        dev
    }

    /// `‖Ψ − Φ (Φ^*Φ)^†‖` in operator norm.
    pub fn canonical_dual_deviation(&self) -> f64 {
        let reference = canonical_dual_matrix(&self.phi);
        linalg::op_norm(&(&self.psi - reference))
    }

    pub fn group(&self) -> Group {
        self.nodes.group()
    }

    pub fn nodes(&self) -> &RelSepSet {
        &self.nodes
    }

    pub fn atoms(&self) -> &[GFunc] {
        &self.atoms
    }

    pub fn duals(&self) -> &[GFunc] {
        &self.duals
    }

    pub fn envelope(&self) -> &GFunc {
        &self.envelope
    }

    pub fn envelope_verified(&self) -> bool {
        self.envelope_report.ok
    }

    pub fn canonical_dual(&self) -> bool {
        self.canonical_dual
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// Atoms as columns over the domain.
    pub fn phi(&self) -> &CMat {
        &self.phi
    }

    pub fn psi(&self) -> &CMat {
        &self.psi
    }

    /// `max |φ_λ(x)| − h(λ^{-1}x)` and the same for `ψ`, over all pairs.
    pub fn verify_envelope(&self) -> EnvelopeReport {
        let g = self.group();
        let hmax = self.envelope.max_abs();
        let mut worst = f64::NEG_INFINITY;
        for (k, lambda) in self.nodes.elements().iter().enumerate() {
            for f in [&self.atoms[k], &self.duals[k]] {
                for (x, v) in f.iter() {
                    let h = self.envelope.get(&g.left_div(lambda, x)).re;
                    worst = worst.max(v.norm() - h);
                }
            }
        }
        if worst == f64::NEG_INFINITY {
            worst = 0.0;
        }
        EnvelopeReport {
            ok: worst <= ENVELOPE_TOL * hmax,
            worst_excess: worst,
        }
    }

    pub fn envelope_report(&self) -> EnvelopeReport {
        self.envelope_report
    }

    fn dense_in(&self, f: &GFunc) -> Result<Vec<C64>> {
        if f.group() != self.group() {
            return Err(Error::CarrierMismatch);
        }
        Ok(self.domain.restrict(f))
    }

    /// `C(f) = (⟨f, ψ_λ⟩)_λ`.
    pub fn analysis(&self, f: &GFunc) -> Result<DiscreteCoeffs> {
        let d = self.dense_in(f)?;
        DiscreteCoeffs::new(self.nodes.clone(), self.analysis_dense(&d))
    }

    /// `S(c) = Σ_λ c_λ φ_λ`.
    pub fn synthesis(&self, c: &DiscreteCoeffs) -> Result<GFunc> {
        self.check_coeffs(c)?;
        Ok(self.domain.to_gfunc(&self.synthesis_dense(c.values())))
    }

    /// `C′(c) = Σ_λ c_λ ψ_λ`, the adjoint of `C`.
    pub fn analysis_adjoint(&self, c: &DiscreteCoeffs) -> Result<GFunc> {
        self.check_coeffs(c)?;
        Ok(self.domain.to_gfunc(&mat_vec(&self.psi, c.values())))
    }

    /// `S′(f) = (⟨f, φ_λ⟩)_λ`, the adjoint of `S`.
    pub fn synthesis_adjoint(&self, f: &GFunc) -> Result<DiscreteCoeffs> {
        let d = self.dense_in(f)?;
        DiscreteCoeffs::new(self.nodes.clone(), mat_vec(&self.phi_adj, &d))
    }

    /// `P(f) = Σ_λ ⟨f, ψ_λ⟩ φ_λ`.
    pub fn projector(&self, f: &GFunc) -> Result<GFunc> {
        let d = self.dense_in(f)?;
        Ok(self.domain.to_gfunc(&self.project_dense(&d)))
    }

    fn check_coeffs(&self, c: &DiscreteCoeffs) -> Result<()> {
        if c.nodes() != &self.nodes {
            return Err(Error::Precondition("coefficients indexed by a different node set".into()));
        }
        Ok(())
    }

    pub fn analysis_dense(&self, f: &[C64]) -> Vec<C64> {
        mat_vec(&self.psi_adj, f)
    }

    pub fn synthesis_dense(&self, c: &[C64]) -> Vec<C64> {
        mat_vec(&self.phi, c)
    }

    pub fn synthesis_adjoint_dense(&self, f: &[C64]) -> Vec<C64> {
        mat_vec(&self.phi_adj, f)
    }

    pub fn project_dense(&self, f: &[C64]) -> Vec<C64> {
        self.synthesis_dense(&self.analysis_dense(f))
    }

    /// `P(f)` for `f` supported on a few domain indices.
    pub fn project_sparse(&self, f: &[(usize, C64)]) -> Vec<C64> {
        let n = self.nodes.len();
        let mut c = vec![C64::default(); n];
        for (k, ck) in c.iter_mut().enumerate() {
            let mut s = C64::default();
            for &(i, v) in f {
                s += self.psi_adj[(k, i)] * v;
            }
            *ck = s;
        }
        self.synthesis_dense(&c)
    }

    /// The projector as a dense matrix `Φ Ψ^*`.
    pub fn projector_matrix(&self) -> CMat {
        &self.phi * &self.psi_adj
    }

    /// `(‖P² − P‖, ‖P^* − P‖)` in operator norm, computed from the thin
    /// factors `P² − P = Φ (Ψ^*Φ − I) Ψ^*` and `P^* − P = [Ψ Φ] [Φ −Ψ]^*`.
    pub fn projector_defects(&self) -> (f64, f64) {
        let k = self.phi.ncols();
        let r = |m: &CMat| m.clone().qr().r();
        let inner = &self.psi_adj * &self.phi - CMat::identity(k, k);
        let idem = linalg::op_norm(&(r(&self.phi) * inner * r(&self.psi).adjoint()));
        let left = concat_columns(&self.psi, &self.phi);
        let right = concat_columns(&self.phi, &(-&self.psi));
        let adj = linalg::op_norm(&(r(&left) * r(&right).adjoint()));
        (idem, adj)
    }

    /// Smallest and largest nonzero eigenvalues of the frame operator
    /// `Σ φ_λ φ_λ^*` on the span of the atoms.
    pub fn frame_bounds(&self) -> (f64, f64) {
        let gram = &self.phi_adj * &self.phi;
        let (vals, _) = linalg::hermitian_eigen(&gram);
        let top = vals.iter().copied().fold(0.0, f64::max);
        let low = vals
            .iter()
            .copied()
            .filter(|&l| l > RANK_CUTOFF * top)
            .fold(f64::INFINITY, f64::min);
        (low, top)
    }

    /// Dimension of the span of the atoms.
    pub fn span_rank(&self) -> usize {
        let gram = &self.phi_adj * &self.phi;
        let (vals, _) = linalg::hermitian_eigen(&gram);
        let top = vals.iter().copied().fold(0.0, f64::max);
        vals.iter().filter(|&&l| l > RANK_CUTOFF * top).count()
    }

    /// Operator norms of `C` and `S` between `ℓ^p(G)` and `ℓ^p(Λ)` for
    /// `p ∈ {1, 2, ∞}` next to the `W(L^∞, ℓ^1)` norm of the envelope.
    pub fn operator_bounds(&self, v: &Neighborhood) -> Result<OperatorBounds> {
        let l1 = SolidSpaceSpec::lp(1.0, Weight::unit())?;
        let env = amalgam_norm(&self.envelope, v, AmalgamKind::Left(&l1))?;
        let norms = |m: &CMat| {
            let col = (0..m.ncols())
                .map(|c| m.column(c).iter().map(|z| z.norm()).sum::<f64>())
                .fold(0.0, f64::max);
            let row = (0..m.nrows())
                .map(|r| m.row(r).iter().map(|z| z.norm()).sum::<f64>())
                .fold(0.0, f64::max);
            [col, linalg::op_norm(m), row]
        };
        Ok(OperatorBounds {
            analysis: norms(&self.psi_adj),
            synthesis: norms(&self.phi),
            envelope_amalgam: env,
            spreadness: self.nodes.spreadness(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatorBounds {
    /// `‖C‖` on `ℓ^1`, `ℓ^2`, `ℓ^∞`.
    pub analysis: [f64; 3],
    /// `‖S‖` on `ℓ^1`, `ℓ^2`, `ℓ^∞`.
    pub synthesis: [f64; 3],
    pub envelope_amalgam: f64,
    pub spreadness: usize,
}

fn concat_columns(a: &CMat, b: &CMat) -> CMat {
    let mut out = CMat::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

fn dense_columns(domain: &Domain, funcs: &[GFunc]) -> Result<CMat> {
    let cols = funcs
        .iter()
        .map(|f| domain.dense(f))
        .collect::<Result<Vec<_>>>()?;
    Ok(linalg::from_columns(&cols, domain.len()))
}

/// `Φ (Φ^*Φ)^†`: the canonical dual frame of the columns on their span.
pub fn canonical_dual_matrix(phi: &CMat) -> CMat {
    let gram = phi.adjoint() * phi;
    let (pinv, _) = linalg::psd_pseudo_inverse(&gram, RANK_CUTOFF);
    phi * pinv
}

/// `h(t) = max_λ max(|φ_λ(λt)|, |ψ_λ(λt)|)`.
pub fn tight_envelope(nodes: &RelSepSet, atoms: &[GFunc], duals: &[GFunc]) -> GFunc {
    let g = nodes.group();
    let mut env: BTreeMap<Element, f64> = BTreeMap::new();
    for (k, lambda) in nodes.elements().iter().enumerate() {
        for f in [&atoms[k], &duals[k]] {
            for (x, v) in f.iter() {
                let e = env.entry(g.left_div(lambda, x)).or_insert(0.0);
                *e = e.max(v.norm());
            }
        }
    }
    GFunc::from_map_unchecked(g, env.into_iter().map(|(k, v)| (k, C64::new(v, 0.0))).collect())
}

#[inline]
fn mat_vec(m: &CMat, v: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::default(); m.nrows()];
    for (c, &x) in v.iter().enumerate() {
        if x == C64::default() {
            continue;
        }
        let col = m.column(c);
        for (o, a) in out.iter_mut().zip(col.iter()) {
            *o += a * x;
        }
    }
    out
}

/// Coset representatives of a subgroup of a finite carrier.
pub(crate) fn coset_representatives(group: &Group, subgroup: &[Element]) -> Vec<Element> {
    let all = group.elements().expect("finite carrier");
    let mut covered = HashSet::with_capacity(all.len());
    let mut reps = Vec::new();
    for x in all {
        if covered.contains(&x) {
            continue;
        }
        reps.push(x);
        for s in subgroup {
            covered.insert(group.op(&x, s));
        }
    }
    reps
}

/// `H(x) = sup_y Σ_λ h(λ^{-1}y) h(λ^{-1}yx)` with its two amalgam norms.
#[derive(Debug, Clone)]
pub struct KernelEnvelope {
    pub kernel: GFunc,
    /// `‖H‖_{W(L^∞, ℓ^1_w)}`.
    pub left_amalgam: f64,
    /// `‖H‖_{W_R(L^∞, ℓ^1_w)}`.
    pub right_amalgam: f64,
}

/// Lookup of a sparse nonnegative function, dense on finite carriers.
pub(crate) enum Lookup {
    Dense(Domain, Vec<f64>),
    Sparse(HashMap<Element, f64>),
}

impl Lookup {
    pub(crate) fn new(f: &GFunc) -> Self {
        let g = f.group();
        if g.is_finite() {
            let d = Domain::full(g).expect("finite carrier");
            let vals = d.restrict(f).iter().map(|z| z.re).collect();
            Lookup::Dense(d, vals)
        } else {
            Lookup::Sparse(f.iter().map(|(k, v)| (*k, v.re)).collect())
        }
    }

    #[inline]
    pub(crate) fn at(&self, x: &Element) -> f64 {
        match self {
            Lookup::Dense(d, v) => v[d.index_of(x).expect("reduced element")],
            Lookup::Sparse(m) => m.get(x).copied().unwrap_or(0.0),
        }
    }
}

/// Computes `H` exactly. The supremum runs over every `y` where the inner sum
/// can be nonzero; when the nodes form a subgroup the sum is periodic in `y`
/// and coset representatives suffice.
pub fn kernel_envelope(sys: &MoleculeSystem, v: &Neighborhood, w: &Weight) -> Result<KernelEnvelope> {
    let g = sys.group();
    let h = sys.envelope();
    let lookup = Lookup::new(h);
    let supp: Vec<Element> = h.support().copied().collect();
    let nodes = sys.nodes().elements();

    let ys: Vec<Element> = if g.is_finite() && sys.nodes().is_subgroup() {
        coset_representatives(&g, nodes)
    } else {
        let set: std::collections::BTreeSet<Element> = nodes
            .iter()
            .flat_map(|l| supp.iter().map(move |t| g.op(l, t)))
            .collect();
        set.into_iter().collect()
    };
    let xs: Vec<Element> = if g.is_finite() {
        g.elements().expect("finite carrier")
    } else {
        let set: std::collections::BTreeSet<Element> = supp
            .iter()
            .flat_map(|a| supp.iter().map(move |b| g.left_div(a, b)))
            .collect();
        set.into_iter().collect()
    };

    let partial: Vec<Vec<f64>> = ys
        .par_iter()
        .map(|y| {
            let mut acc = vec![0.0; xs.len()];
            for lambda in nodes {
                let t = g.left_div(lambda, y);
                let a = lookup.at(&t);
                if a == 0.0 {
                    continue;
                }
                for (slot, x) in acc.iter_mut().zip(&xs) {
                    let b = lookup.at(&g.op(&t, x));
                    if b != 0.0 {
                        *slot += a * b;
                    }
                }
            }
            acc
        })
        .collect();
    let mut best = vec![0.0f64; xs.len()];
    for acc in &partial {
        for (b, a) in best.iter_mut().zip(acc) {
            *b = b.max(*a);
        }
    }
    let kernel = GFunc::from_real(g, xs.into_iter().zip(best))?;
    let l1w = SolidSpaceSpec::l1(w);
    let left_amalgam = amalgam_norm(&kernel, v, AmalgamKind::Left(&l1w))?;
    let right_amalgam = amalgam_norm(&kernel, v, AmalgamKind::Right(&l1w))?;
    Ok(KernelEnvelope {
        kernel,
        left_amalgam,
        right_amalgam,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DominationReport {
    pub trials: usize,
    /// `max (|P f|(x) − (|f| * H)(x))` over trials and points.
    pub worst_excess: f64,
}

/// Checks `|P(f)| ≤ |f| * H` pointwise on the given dense inputs.
pub fn check_domination_on(sys: &MoleculeSystem, kernel: &KernelEnvelope, inputs: &[Vec<C64>]) -> DominationReport {
    let dom = sys.domain();
    let k: Vec<(Element, f64)> = kernel.kernel.iter().map(|(x, v)| (*x, v.re)).collect();
    let excess: Vec<f64> = inputs
        .par_iter()
        .map(|f| {
            let pf = sys.project_dense(f);
            let mags: Vec<f64> = f.iter().map(|z| z.norm()).collect();
            let bound = dom.convolve_sparse(&mags, &k);
            pf.iter()
                .zip(&bound)
                .map(|(p, b)| p.norm() - b)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    DominationReport {
        trials: inputs.len(),
        worst_excess: excess.into_iter().fold(f64::NEG_INFINITY, f64::max),
    }
}

/// [`check_domination_on`] with complex Gaussian inputs on the domain.
pub fn check_domination(sys: &MoleculeSystem, kernel: &KernelEnvelope, trials: usize, seed: u64) -> DominationReport {
    let mut rng = TrialRng::new(seed);
    let inputs: Vec<Vec<C64>> = (0..trials).map(|_| rng.gaussian_vec(sys.domain().len())).collect();
    check_domination_on(sys, kernel, &inputs)
}
