//! Discrete Gabor analysis on `ℤ_N`: time-frequency shifts, the STFT and its
//! adjoint, Gabor frame operators and dual windows, localization operators,
//! and Gabor molecule systems on the time-frequency plane `ℤ_N × ℤ_N`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::atomic::MoleculeSystem;
use crate::cover::PartitionOfUnity;
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::func::GFunc;
use crate::group::{Group, RelSepSet};
use crate::linalg::{self, CMat};
use crate::spaces::SolidSpaceSpec;
use crate::weight::Weight;

/// Frames whose smallest frame-operator eigenvalue falls below this fraction
/// of the largest are rejected.
pub const FRAME_CUTOFF: f64 = 1e-10;

/// `e^{2πik/N}` for `k = 0..N`.
#[derive(Debug, Clone)]
pub struct Twiddles {
    n: usize,
    table: Vec<C64>,
}

impl Twiddles {
    pub fn new(n: usize) -> Self {
        let table = (0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                C64::new(t.cos(), t.sin())
            })
            .collect();
        Twiddles { n, table }
    }

    /// `e^{2πik/N}` for any integer `k`.
    #[inline]
    pub fn at(&self, k: i64) -> C64 {
        self.table[k.rem_euclid(self.n as i64) as usize]
    }
}

fn norm2(v: &[C64]) -> f64 {
    linalg::vec_norm(v)
}

/// `M_ς T_x h` with `T_x f(y) = f(y − x)` and `M_ς f(y) = e^{2πiςy/N} f(y)`.
/// Both indices are taken modulo `N`.
pub fn tf_shift(h: &[C64], x: i64, xi: i64) -> Vec<C64> {
    let n = h.len() as i64;
    let tw = Twiddles::new(h.len());
    (0..n)
        .map(|y| tw.at(xi * y) * h[(y - x).rem_euclid(n) as usize])
        .collect()
}

fn tf_shift_with(tw: &Twiddles, h: &[C64], x: i64, xi: i64) -> Vec<C64> {
    let n = h.len() as i64;
    (0..n)
        .map(|y| tw.at(xi * y) * h[(y - x).rem_euclid(n) as usize])
        .collect()
}

fn check_pair(f: &[C64], h: &[C64]) -> Result<()> {
    if f.len() != h.len() {
        return Err(Error::LengthMismatch {
            expected: h.len(),
            got: f.len(),
        });
    }
    if h.is_empty() || norm2(h) == 0.0 {
        return Err(Error::ZeroWindow);
    }
    Ok(())
}

/// STFT engine for a fixed length, with cached FFT plans.
#[derive(Clone)]
pub struct Stft {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Stft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Stft({})", self.n)
    }
}

impl Stft {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Stft {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    /// `V_h f(x, ς) = Σ_y f(y) conj(h(y − x)) e^{−2πiςy/N}`, stored at
    /// `x·N + ς`. One FFT per time shift.
    pub fn raw(&self, f: &[C64], h: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut out = vec![C64::default(); n * n];
        let mut scratch = vec![C64::default(); self.forward.get_inplace_scratch_len()];
        for (x, row) in out.chunks_mut(n).enumerate() {
            for (y, r) in row.iter_mut().enumerate() {
                *r = f[y] * h[(y + n - x) % n].conj();
            }
            self.forward.process_with_scratch(row, &mut scratch);
        }
        out
    }

    /// `Σ_x h(y − x) Σ_ς F(x, ς) e^{2πiςy/N}`, the adjoint of [`Stft::raw`].
    pub fn raw_adjoint(&self, big_f: &[C64], h: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut out = vec![C64::default(); n];
        let mut row = vec![C64::default(); n];
        let mut scratch = vec![C64::default(); self.inverse.get_inplace_scratch_len()];
        for x in 0..n {
            row.copy_from_slice(&big_f[x * n..(x + 1) * n]);
            self.inverse.process_with_scratch(&mut row, &mut scratch);
            for (y, o) in out.iter_mut().enumerate() {
                *o += h[(y + n - x) % n] * row[y];
            }
        }
        out
    }
}

/// Raw STFT on `ℤ_N`; `Σ |V_h f|² = N ‖h‖² ‖f‖²`.
pub fn stft(f: &[C64], h: &[C64]) -> Result<Vec<C64>> {
    check_pair(f, h)?;
    Ok(Stft::new(h.len()).raw(f, h))
}

/// The STFT by direct summation, an independent reference.
pub fn stft_direct(f: &[C64], h: &[C64]) -> Result<Vec<C64>> {
    check_pair(f, h)?;
    let n = h.len();
    let tw = Twiddles::new(n);
    let mut out = vec![C64::default(); n * n];
    for x in 0..n {
        for xi in 0..n {
            let mut s = C64::default();
            for y in 0..n {
                s += f[y] * h[(y + n - x) % n].conj() * tw.at(-((xi * y) as i64));
            }
            out[x * n + xi] = s;
        }
    }
    Ok(out)
}

/// The time-frequency plane `ℤ_N × ℤ_N` (time first).
pub fn tf_plane(n: usize) -> Result<Group> {
    Group::cyclic(2, n as i64)
}

/// STFT as a function on the time-frequency plane.
pub fn stft_gfunc(f: &[C64], h: &[C64]) -> Result<GFunc> {
    let v = stft(f, h)?;
    Ok(Domain::full(tf_plane(h.len())?)?.to_gfunc(&v))
}

/// The isometric STFT `f ↦ V_g f / √N` with `g = h / ‖h‖`, and its adjoint.
#[derive(Debug, Clone)]
pub struct IsometricStft {
    engine: Stft,
    window: Vec<C64>,
    scale: f64,
}

impl IsometricStft {
    pub fn new(h: &[C64]) -> Result<Self> {
        let nh = norm2(h);
        if h.is_empty() || nh == 0.0 {
            return Err(Error::ZeroWindow);
        }
        Ok(IsometricStft {
            engine: Stft::new(h.len()),
            window: h.iter().map(|v| v / nh).collect(),
            scale: 1.0 / (h.len() as f64).sqrt(),
        })
    }

    pub fn len(&self) -> usize {
        self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window.is_empty()
    }

    pub fn window(&self) -> &[C64] {
        &self.window
    }

    pub fn forward(&self, f: &[C64]) -> Vec<C64> {
        let mut v = self.engine.raw(f, &self.window);
        for z in v.iter_mut() {
            *z *= self.scale;
        }
        v
    }

    pub fn adjoint(&self, big_f: &[C64]) -> Vec<C64> {
        let mut v = self.engine.raw_adjoint(big_f, &self.window);
        for z in v.iter_mut() {
            *z *= self.scale;
        }
        v
    }
}

fn check_lattice(n: usize, a: usize, b: usize) -> Result<()> {
    if a == 0 || n % a != 0 {
        return Err(Error::LatticeParameter { param: "a", value: a, n });
    }
    if b == 0 || n % b != 0 {
        return Err(Error::LatticeParameter { param: "b", value: b, n });
    }
    Ok(())
}

/// Lattice points `(k a, l b)` in row-major order.
pub fn lattice_points(n: usize, a: usize, b: usize) -> Vec<(i64, i64)> {
    let mut out = Vec::with_capacity((n / a) * (n / b));
    for x in (0..n).step_by(a) {
        for xi in (0..n).step_by(b) {
            out.push((x as i64, xi as i64));
        }
    }
    out
}

/// `Σ_λ π(λ)h (π(λ)h)^*` over the lattice `aℤ_N × bℤ_N`.
pub fn frame_operator(h: &[C64], a: usize, b: usize) -> Result<CMat> {
    let n = h.len();
    check_lattice(n, a, b)?;
    let tw = Twiddles::new(n);
    let mut s = CMat::zeros(n, n);
    for (x, xi) in lattice_points(n, a, b) {
        let v = tf_shift_with(&tw, h, x, xi);
        for r in 0..n {
            for c in 0..n {
                s[(r, c)] += v[r] * v[c].conj();
            }
        }
    }
    Ok(s)
}

/// Frame bounds `(A, B)` of the Gabor system.
pub fn gabor_frame_bounds(h: &[C64], a: usize, b: usize) -> Result<(f64, f64)> {
    let s = frame_operator(h, a, b)?;
    let (vals, _) = linalg::hermitian_eigen(&s);
    Ok((vals[0], *vals.last().expect("nonempty")))
}

/// `h̃ = S^{-1} h`.
pub fn canonical_dual_window(h: &[C64], a: usize, b: usize) -> Result<Vec<C64>> {
    if h.is_empty() || norm2(h) == 0.0 {
        return Err(Error::ZeroWindow);
    }
    let s = frame_operator(h, a, b)?;
    let (vals, vecs) = linalg::hermitian_eigen(&s);
    let lo = vals[0];
    let hi = *vals.last().expect("nonempty");
    if lo < FRAME_CUTOFF * hi {
        return Err(Error::NotAFrame {
            sigma_min: lo,
            sigma_max: hi,
        });
    }
    let hv = linalg::CVec::from_column_slice(h);
    let coeffs = vecs.adjoint() * hv;
    let scaled = linalg::CVec::from_iterator(
        coeffs.len(),
        coeffs.iter().zip(&vals).map(|(c, l)| c / *l),
    );
    Ok((vecs * scaled).iter().copied().collect())
}

/// `‖Σ_λ π(λ)h (π(λ)h̃)^* − I‖` in operator norm.
pub fn reconstruction_error(h: &[C64], dual: &[C64], a: usize, b: usize) -> Result<f64> {
    let n = h.len();
    check_lattice(n, a, b)?;
    let tw = Twiddles::new(n);
    let mut s = CMat::zeros(n, n);
    for (x, xi) in lattice_points(n, a, b) {
        let u = tf_shift_with(&tw, h, x, xi);
        let v = tf_shift_with(&tw, dual, x, xi);
        for r in 0..n {
            for c in 0..n {
                s[(r, c)] += u[r] * v[c].conj();
            }
        }
    }
    Ok(linalg::op_norm(&(s - CMat::identity(n, n))))
}

/// `e^{−π (k − N/2)² / (N σ)}`, periodized over the neighboring periods.
pub fn gaussian_window(n: usize, sigma: f64) -> Vec<C64> {
    let nf = n as f64;
    (0..n)
        .map(|k| {
            let v: f64 = (-3..=3)
                .map(|p| {
                    let t = k as f64 - nf / 2.0 + p as f64 * nf;
                    (-PI * t * t / (nf * sigma)).exp()
                })
                .sum();
            C64::new(v, 0.0)
        })
        .collect()
}

/// Largest `a = b` dividing `N` with `N / (ab) ≥ 2`.
pub fn default_lattice(n: usize) -> usize {
    (1..=n)
        .rev()
        .find(|&a| n % a == 0 && n >= 2 * a * a)
        .unwrap_or(1)
}

/// `H_m f = V^*(m · V f)` with the window normalized.
pub fn localization_operator(h: &[C64], mask: &[C64], f: &[C64]) -> Result<Vec<C64>> {
    check_pair(f, h)?;
    let n = h.len();
    if mask.len() != n * n {
        return Err(Error::LengthMismatch {
            expected: n * n,
            got: mask.len(),
        });
    }
    let v = IsometricStft::new(h)?;
    let vf: Vec<C64> = v.forward(f).iter().zip(mask).map(|(a, m)| a * m).collect();
    Ok(v.adjoint(&vf))
}

/// Dense matrix of a localization operator.
pub fn localization_matrix(h: &[C64], mask: &[C64]) -> Result<CMat> {
    let n = h.len();
    let cols = (0..n)
        .map(|k| {
            let mut e = vec![C64::default(); n];
            e[k] = C64::new(1.0, 0.0);
            localization_operator(h, mask, &e)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(linalg::from_columns(&cols, n))
}

/// A Gabor frame on `ℤ_N` and the molecule system it induces on the
/// time-frequency plane: `φ_λ = V(π(λ)g)`, `ψ_λ = V(π(λ)g̃)`, envelope
/// `|Vg| + |Vg̃|`.
#[derive(Debug, Clone)]
pub struct GaborSystem {
    pub n: usize,
    pub a: usize,
    pub b: usize,
    window: Vec<C64>,
    dual: Vec<C64>,
    frame_bounds: (f64, f64),
    stft: IsometricStft,
    molecules: MoleculeSystem,
}

impl GaborSystem {
    pub fn new(h: &[C64], a: usize, b: usize) -> Result<Self> {
        let n = h.len();
        check_lattice(n, a, b)?;
        let stft = IsometricStft::new(h)?;
        let window = stft.window().to_vec();
        let dual = canonical_dual_window(&window, a, b)?;
        let frame_bounds = gabor_frame_bounds(&window, a, b)?;

        let plane = tf_plane(n)?;
        let domain = Domain::full(plane)?;
        let nodes = RelSepSet::sublattice(plane, &[a as i64, b as i64])?;
        let tw = Twiddles::new(n);
        let lattice: Vec<(i64, i64)> = nodes
            .elements()
            .iter()
            .map(|e| (e.coords()[0], e.coords()[1]))
            .collect();
        let build = |w: &[C64]| -> Vec<GFunc> {
            lattice
                .par_iter()
                .map(|&(x, xi)| domain.to_gfunc(&stft.forward(&tf_shift_with(&tw, w, x, xi))))
                .collect()
        };
        let atoms = build(&window);
        let duals = build(&dual);
        let env: Vec<f64> = stft
            .forward(&window)
            .iter()
            .zip(stft.forward(&dual))
            .map(|(p, q)| p.norm() + q.norm())
            .collect();
        let envelope = domain.to_gfunc_real(&env);
        let mut molecules = MoleculeSystem::new(nodes, atoms, duals, envelope)?;
        molecules.check_canonical_dual();
        Ok(GaborSystem {
            n,
            a,
            b,
            window,
            dual,
            frame_bounds,
            stft,
            molecules,
        })
    }

    /// Periodized Gaussian window (`σ = 1`) on the default lattice.
    pub fn with_defaults(n: usize) -> Result<Self> {
        let a = default_lattice(n);
        Self::new(&gaussian_window(n, 1.0), a, a)
    }

    pub fn window(&self) -> &[C64] {
        &self.window
    }

    pub fn dual_window(&self) -> &[C64] {
        &self.dual
    }

    pub fn frame_bounds(&self) -> (f64, f64) {
        self.frame_bounds
    }

    pub fn stft(&self) -> &IsometricStft {
        &self.stft
    }

    pub fn molecules(&self) -> &MoleculeSystem {
        &self.molecules
    }

    pub fn into_molecules(self) -> MoleculeSystem {
        self.molecules
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarnessReport {
    pub c_min: f64,
    pub c_max: f64,
    /// Per nonzero trial: `(‖V f‖_{ℓ^{p,q}_v}, Σ-side)`.
    pub samples: Vec<(f64, f64)>,
}

/// Exponents and weight for [`modulation_norm_harness`].
#[derive(Debug, Clone)]
pub struct HarnessNorms {
    pub p: f64,
    pub q: f64,
    pub weight: Weight,
    pub s: f64,
    pub t: f64,
}

/// Brute-force comparison of `‖V f‖_{ℓ^{p,q}_v}` with
/// `(Σ_{γ₂} (Σ_{γ₁} ‖V H_{θ_γ} f‖_{ℓ^{s,t}}^p v(γ)^p)^{q/p})^{1/q}`,
/// every transform evaluated by direct summation.
pub fn modulation_norm_harness(h: &[C64], theta: &PartitionOfUnity, norms: &HarnessNorms, trials: &[Vec<C64>]) -> Result<HarnessReport> {
    let n = h.len();
    let plane = tf_plane(n)?;
    if theta.domain().group() != plane {
        return Err(Error::CarrierMismatch);
    }
    if !theta.is_real() {
        return Err(Error::ComplexMask);
    }
    let (lower, upper) = theta.bounds();
    if !(lower > 0.0) {
        return Err(Error::DegeneratePartition(format!(
            "partition sums range over [{lower}, {upper}]"
        )));
    }
    let centers = theta.centers().elements();
    let firsts: std::collections::BTreeSet<i64> = centers.iter().map(|c| c.coords()[0]).collect();
    let seconds: std::collections::BTreeSet<i64> = centers.iter().map(|c| c.coords()[1]).collect();
    if firsts.len() * seconds.len() != centers.len() {
        return Err(Error::DegeneratePartition("centers are not a product set".into()));
    }
    let nh = norm2(h);
    if nh == 0.0 {
        return Err(Error::ZeroWindow);
    }
    let g: Vec<C64> = h.iter().map(|v| v / nh).collect();
    let scale = 1.0 / (n as f64).sqrt();
    let tw = Twiddles::new(n);
    let forward = |f: &[C64]| -> Result<Vec<C64>> {
        Ok(stft_direct(f, &g)?.into_iter().map(|z| z * scale).collect())
    };
    let adjoint = |big_f: &[C64]| -> Vec<C64> {
        (0..n)
            .map(|y| {
                let mut s = C64::default();
                for x in 0..n {
                    for xi in 0..n {
                        s += big_f[x * n + xi] * tw.at((xi * y) as i64) * g[(y + n - x) % n];
                    }
                }
                s * scale
            })
            .collect()
    };
    let domain = theta.domain();
    let outer = SolidSpaceSpec::mixed(norms.p, norms.q, norms.weight.clone(), 1)?;
    let inner = SolidSpaceSpec::mixed(norms.s, norms.t, Weight::unit(), 1)?;
    let thetas: Vec<Vec<C64>> = theta.functions().iter().map(|f| domain.restrict(f)).collect();
    let mut samples = Vec::new();
    for f in trials {
        if f.iter().all(|z| *z == C64::default()) {
            continue;
        }
        let vf = forward(f)?;
        let lhs = outer.norm_dense_complex(domain, &vf);
        let local: Vec<(crate::group::Element, f64)> = centers
            .iter()
            .zip(&thetas)
            .map(|(c, th)| {
                let masked: Vec<C64> = vf.iter().zip(th).map(|(a, b)| a * b).collect();
                let piece = forward(&adjoint(&masked))?;
                Ok((*c, inner.norm_dense_complex(domain, &piece)))
            })
            .collect::<Result<_>>()?;
        let rhs = outer.norm_iter(&plane, local);
        samples.push((lhs, rhs));
    }
    let c_min = samples.iter().map(|(l, r)| r / l).fold(f64::INFINITY, f64::min);
    let c_max = samples.iter().map(|(l, r)| r / l).fold(f64::NEG_INFINITY, f64::max);
    Ok(HarnessReport {
        c_min,
        c_max,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trials::TrialRng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn tf_shift_examples() {
        let mut rng = TrialRng::new(3);
        let h = rng.gaussian_vec(8);
        assert_eq!(tf_shift(&h, 0, 0), h);
        assert_eq!(tf_shift(&h, 8, 0), h);
        let s = tf_shift(&h, 3, 5);
        assert!((norm2(&s) - norm2(&h)).abs() < 1e-14);
        // M_ς T_x h = e^{2πixς/N} T_x M_ς h
        let tm = tf_shift(&tf_shift(&h, 0, 5), 3, 0);
        let tw = Twiddles::new(8);
        for (a, b) in s.iter().zip(&tm) {
            assert!((a - tw.at(15) * b).norm() < 1e-14);
        }
    }

    #[test]
    fn stft_of_delta() {
        let d = vec![c(1.0), c(0.0), c(0.0), c(0.0)];
        let v = stft(&d, &d).unwrap();
        for x in 0..4 {
            for xi in 0..4 {
                let expect = if x == 0 { 1.0 } else { 0.0 };
                assert!((v[x * 4 + xi] - c(expect)).norm() < 1e-15);
            }
        }
        assert_eq!(stft(&d, &[c(0.0); 4]).unwrap_err(), Error::ZeroWindow);
    }

    #[test]
    fn fft_matches_direct_and_adjoint() {
        let mut rng = TrialRng::new(5);
        let f = rng.gaussian_vec(12);
        let h = rng.gaussian_vec(12);
        let a = stft(&f, &h).unwrap();
        let b = stft_direct(&f, &h).unwrap();
        assert!(linalg::vec_dist(&a, &b) < 1e-12 * linalg::vec_norm(&b));
        let v = IsometricStft::new(&h).unwrap();
        let big = rng.gaussian_vec(144);
        let lhs = linalg::vec_dot(&v.forward(&f), &big);
        let rhs = linalg::vec_dot(&f, &v.adjoint(&big));
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn full_lattice_dual_is_scaled_window() {
        let mut rng = TrialRng::new(9);
        let h = rng.gaussian_vec(6);
        let dual = canonical_dual_window(&h, 1, 1).unwrap();
        let scale = 6.0 * norm2(&h).powi(2);
        for (d, x) in dual.iter().zip(&h) {
            assert!((d - x / scale).norm() < 1e-12);
        }
    }

    #[test]
    fn dual_window_reconstructs() {
        let h = gaussian_window(16, 1.0);
        let dual = canonical_dual_window(&h, 2, 2).unwrap();
        assert!(reconstruction_error(&h, &dual, 2, 2).unwrap() <= 1e-10);
    }

    #[test]
    fn lattice_parameters_checked() {
        let h = gaussian_window(12, 1.0);
        assert_eq!(
            canonical_dual_window(&h, 5, 1).unwrap_err(),
            Error::LatticeParameter { param: "a", value: 5, n: 12 }
        );
        // a single lattice point cannot span ℤ_4
        let h4 = gaussian_window(4, 1.0);
        assert!(matches!(canonical_dual_window(&h4, 4, 4), Err(Error::NotAFrame { .. })));
    }

    #[test]
    fn default_lattices() {
        assert_eq!(default_lattice(16), 2);
        assert_eq!(default_lattice(32), 4);
        assert_eq!(default_lattice(8), 2);
    }

    #[test]
    fn localization_identity_and_zero() {
        let h = gaussian_window(8, 1.0);
        let mut rng = TrialRng::new(1);
        let f = rng.gaussian_vec(8);
        let one = localization_operator(&h, &vec![c(1.0); 64], &f).unwrap();
        assert!(linalg::vec_dist(&one, &f) < 1e-12);
        let zero = localization_operator(&h, &vec![c(0.0); 64], &f).unwrap();
        assert!(linalg::vec_norm(&zero) == 0.0);
    }
}
