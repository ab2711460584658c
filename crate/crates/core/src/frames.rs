//! Localized frames on a window of `ℤ^d` (here `d = 1`), their canonical
//! duals and frame multipliers, and the bridge to a molecule system on the
//! coefficient lattice.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::atomic::{tight_envelope, MoleculeSystem};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::func::GFunc;
use crate::group::{Group, RelSepSet};
use crate::linalg::{self, CMat, RANK_CUTOFF};
use crate::trials::TrialRng;
use crate::weight::Weight;

/// Decay rate of the off-diagonal perturbation, per unit distance.
pub const DEFAULT_DECAY: f64 = 0.5;
/// Size of the off-diagonal perturbation.
pub const DEFAULT_STRENGTH: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayCertificate {
    /// `a_m = max_{k−j=m} |⟨f_j, f_k⟩|` for `m = −(n−1) ..= n−1`.
    pub profile: Vec<f64>,
    /// `Σ_m a_m w(m)`.
    pub weighted_sum: f64,
    /// Whether every Gramian entry is dominated by the profile.
    pub dominated: bool,
}

/// A frame `{f_k}` indexed by `lo..=hi`, stored as columns.
#[derive(Debug, Clone)]
pub struct LocalizedFrame {
    group: Group,
    lo: i64,
    frame: CMat,
    dual: CMat,
    bounds: (f64, f64),
}

impl LocalizedFrame {
    /// Columns are the frame vectors `f_k`, indexed by `lo..`.
    pub fn from_vectors(lo: i64, frame: CMat) -> Result<Self> {
        if frame.nrows() != frame.ncols() {
            return Err(Error::Precondition("frame must be square on its window".into()));
        }
        let s = &frame * frame.adjoint();
        let (vals, _) = linalg::hermitian_eigen(&s);
        let (a, b) = (vals[0], *vals.last().expect("nonempty"));
        if a <= RANK_CUTOFF * b {
            return Err(Error::NotAFrame {
                sigma_min: a,
                sigma_max: b,
            });
        }
        let (sinv, _) = linalg::psd_pseudo_inverse(&s, RANK_CUTOFF);
        let dual = sinv * &frame;
        Ok(LocalizedFrame {
            group: Group::lattice(1)?,
            lo,
            frame,
            dual,
            bounds: (a, b),
        })
    }

    /// `f_k = e_k + strength Σ_{j≠k} r_{kj} e^{−decay |k−j|} e_j` on
    /// `−radius..=radius` with `r_{kj}` uniform in `[−1, 1]`.
    pub fn exponential(radius: i64, strength: f64, decay: f64, seed: u64) -> Result<Self> {
        let n = (2 * radius + 1) as usize;
        let mut rng = TrialRng::new(seed);
        let mut frame = CMat::identity(n, n);
        for k in 0..n {
            for j in 0..n {
                if j == k {
                    continue;
                }
                let r = rng.uniform(-1.0, 1.0);
                let dist = (k as f64 - j as f64).abs();
                frame[(j, k)] = C64::new(strength * r * (-decay * dist).exp(), 0.0);
            }
        }
        Self::from_vectors(-radius, frame)
    }

    pub fn len(&self) -> usize {
        self.frame.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.frame.ncols() == 0
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn domain(&self) -> Result<Domain> {
        Domain::window(self.group, &[self.lo], &[self.lo + self.len() as i64 - 1])
    }

    pub fn frame(&self) -> &CMat {
        &self.frame
    }

    pub fn dual(&self) -> &CMat {
        &self.dual
    }

    pub fn bounds(&self) -> (f64, f64) {
        self.bounds
    }

    /// `G_{kj} = ⟨f_j, f_k⟩`.
    pub fn gramian(&self) -> CMat {
        self.frame.adjoint() * &self.frame
    }

    pub fn decay_certificate(&self, w: &Weight) -> DecayCertificate {
        let n = self.len() as i64;
        let gram = self.gramian();
        let mut profile = vec![0.0f64; (2 * n - 1) as usize];
        for k in 0..n {
            for j in 0..n {
                let slot = (k - j + n - 1) as usize;
                profile[slot] = profile[slot].max(gram[(k as usize, j as usize)].norm());
            }
        }
        let dominated = (0..n).all(|k| {
            (0..n).all(|j| gram[(k as usize, j as usize)].norm() <= profile[(k - j + n - 1) as usize])
        });
        let weighted_sum = profile
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let m = self.group.element(&[i as i64 - (n - 1)]).expect("small offset");
                a * w.eval(&self.group, &m)
            })
            .sum();
        DecayCertificate {
            profile,
            weighted_sum,
            dominated,
        }
    }

    /// `M_m f = Σ_k m_k ⟨f, f_k⟩ g_k`.
    pub fn multiplier(&self, mask: &[C64], f: &[C64]) -> Result<Vec<C64>> {
        let n = self.len();
        for len in [mask.len(), f.len()] {
            if len != n {
                return Err(Error::LengthMismatch { expected: n, got: len });
            }
        }
        let fv = linalg::CVec::from_column_slice(f);
        let coeffs = self.frame.adjoint() * fv;
        let masked = linalg::CVec::from_iterator(n, coeffs.iter().zip(mask).map(|(c, m)| c * m));
        Ok((&self.dual * masked).iter().copied().collect())
    }

    /// Analysis `f ↦ (⟨f, f_k⟩)_k`.
    pub fn analysis(&self, f: &[C64]) -> Vec<C64> {
        (self.frame.adjoint() * linalg::CVec::from_column_slice(f)).iter().copied().collect()
    }

    /// The molecule system on the coefficient window with
    /// `φ_j = (⟨g_j, f_k⟩)_k` and `ψ_j = (⟨f_j, g_k⟩)_k`; its projector is the
    /// orthogonal projection onto the range of the analysis operator.
    pub fn coefficient_system(&self) -> Result<MoleculeSystem> {
        let domain = self.domain()?;
        let nodes = RelSepSet::with_default_neighborhood(self.group, domain.elements().to_vec())?;
        let phi = self.frame.adjoint() * &self.dual;
        let psi = self.dual.adjoint() * &self.frame;
        let col = |m: &CMat, j: usize| -> GFunc {
            let v: Vec<C64> = m.column(j).iter().copied().collect();
            domain.to_gfunc(&v)
        };
        let atoms: Vec<GFunc> = (0..self.len()).map(|j| col(&phi, j)).collect();
        let duals: Vec<GFunc> = (0..self.len()).map(|j| col(&psi, j)).collect();
        let env = tight_envelope(&nodes, &atoms, &duals);
        let mut sys = MoleculeSystem::new(nodes, atoms, duals, env)?;
        sys.check_canonical_dual();
        Ok(sys)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_mask_reconstructs() {
        let fr = LocalizedFrame::exponential(8, DEFAULT_STRENGTH, DEFAULT_DECAY, 7).unwrap();
        let mut rng = TrialRng::new(2);
        let f = rng.gaussian_vec(fr.len());
        let out = fr.multiplier(&vec![C64::new(1.0, 0.0); fr.len()], &f).unwrap();
        assert!(linalg::vec_dist(&out, &f) < 1e-10);
    }

    #[test]
    fn delta_mask_is_rank_one() {
        let fr = LocalizedFrame::exponential(4, DEFAULT_STRENGTH, DEFAULT_DECAY, 7).unwrap();
        let mut rng = TrialRng::new(4);
        let f = rng.gaussian_vec(fr.len());
        let mut mask = vec![C64::default(); fr.len()];
        mask[3] = C64::new(1.0, 0.0);
        let out = fr.multiplier(&mask, &f).unwrap();
        let c = fr.analysis(&f)[3];
        for (o, g) in out.iter().zip(fr.dual().column(3).iter()) {
            assert!((o - c * g).norm() < 1e-13);
        }
    }

    #[test]
    fn decay_profile_dominates() {
        let fr = LocalizedFrame::exponential(10, DEFAULT_STRENGTH, DEFAULT_DECAY, 1).unwrap();
        let cert = fr.decay_certificate(&Weight::polynomial(1.0));
        assert!(cert.dominated);
        assert!(cert.weighted_sum.is_finite());
    }
}
