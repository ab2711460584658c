//! Weights on the carrier and the checks that make them usable: positivity,
//! symmetry, submultiplicativity and the GRS growth test.

use serde::{Deserialize, Serialize};

use crate::group::{Element, Group};

/// Slack used when comparing weight products.
const WEIGHT_TOL: f64 = 1e-12;

/// GRS tolerance: a weight passes when its estimated growth rate stays
/// below `1 + GRS_TOL`.
pub const GRS_TOL: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Weight {
    /// `w ≡ value`.
    Constant { value: f64 },
    /// `(1 + |x|)^alpha`.
    Polynomial { alpha: f64 },
    /// `base^{|x|}`.
    Exponential { base: f64 },
    /// Explicit values on listed points, `default` elsewhere.
    Table {
        entries: Vec<(Vec<i64>, f64)>,
        default: f64,
    },
}

impl Default for Weight {
    fn default() -> Self {
        Weight::Constant { value: 1.0 }
    }
}

impl Weight {
    pub fn unit() -> Self {
        Self::default()
    }

    pub fn polynomial(alpha: f64) -> Self {
        Weight::Polynomial { alpha }
    }

    pub fn exponential(base: f64) -> Self {
        Weight::Exponential { base }
    }

    pub fn is_unit(&self) -> bool {
        matches!(self, Weight::Constant { value } if *value == 1.0)
            || matches!(self, Weight::Polynomial { alpha } if *alpha == 0.0)
            || matches!(self, Weight::Exponential { base } if *base == 1.0)
    }

    #[inline]
    pub fn eval(&self, group: &Group, x: &Element) -> f64 {
        match self {
            Weight::Constant { value } => *value,
            Weight::Polynomial { alpha } => (1.0 + group.abs(x)).powf(*alpha),
            Weight::Exponential { base } => base.powf(group.abs(x)),
            Weight::Table { entries, default } => entries
                .iter()
                .find(|(c, _)| group.element(c).map(|e| e == *x).unwrap_or(false))
                .map(|(_, v)| *v)
                .unwrap_or(*default),
        }
    }

    /// Short label used in report tables.
    pub fn label(&self) -> String {
        match self {
            Weight::Constant { value } => format!("const({value})"),
            Weight::Polynomial { alpha } => format!("poly({alpha})"),
            Weight::Exponential { base } => format!("exp({base})"),
            Weight::Table { entries, .. } => format!("table({})", entries.len()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub positive: bool,
    pub submultiplicative: bool,
    pub symmetric: bool,
    /// Largest `w(xy) / (w(x) w(y))` over the checked pairs.
    pub worst_ratio: f64,
    pub pairs_checked: usize,
}

/// Checks positivity, symmetry and submultiplicativity of `w` on all pairs
/// from the centered box of the given radius (all of `ℤ_N^d` once the radius
/// reaches `N/2`).
pub fn check_weight_admissible(w: &Weight, group: &Group, radius: i64) -> AdmissibilityReport {
    let pts = group.box_elements(radius);
    let vals: Vec<f64> = pts.iter().map(|x| w.eval(group, x)).collect();
    let positive = vals.iter().all(|&v| v > 0.0 && v.is_finite());
    let symmetric = pts.iter().zip(&vals).all(|(x, &v)| {
        let vi = w.eval(group, &group.inverse(x));
        (v - vi).abs() <= WEIGHT_TOL * v.abs().max(1.0)
    });
    let mut worst: f64 = 0.0;
    for (x, &wx) in pts.iter().zip(&vals) {
        for (y, &wy) in pts.iter().zip(&vals) {
            let r = w.eval(group, &group.op(x, y)) / (wx * wy);
            worst = worst.max(r);
        }
    }
    AdmissibilityReport {
        positive,
        submultiplicative: worst <= 1.0 + WEIGHT_TOL,
        symmetric,
        worst_ratio: worst,
        pairs_checked: pts.len() * pts.len(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrsReport {
    pub generator: Element,
    /// `w(λ^n)^{1/n}` for `n = 1..=n_max`.
    pub roots: Vec<f64>,
    /// Growth rate over the second half of the sequence,
    /// `(w(λ^n) / w(λ^{n/2}))^{2/n}` at `n = n_max`.
    pub tail_rate: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Estimates `lim w(λ^n)^{1/n}` for each generator.
///
/// The plain root converges slowly for polynomial weights (`65^{1/64} ≈
/// 1.067`), so the verdict uses the ratio of the last value to the value at
/// `n_max / 2`, which cancels the polynomial prefactor to first order.
pub fn check_grs(w: &Weight, group: &Group, generators: &[Element], n_max: usize) -> Vec<GrsReport> {
    let n_max = n_max.max(2);
    generators
        .iter()
        .map(|g| {
            let logs: Vec<f64> = (1..=n_max as u64)
                .map(|n| w.eval(group, &group.pow(g, n)).ln())
                .collect();
            let roots = logs
                .iter()
                .enumerate()
                .map(|(i, l)| (l / (i + 1) as f64).exp())
                .collect();
            let half = n_max / 2;
            let tail_rate = ((logs[n_max - 1] - logs[half - 1]) / (n_max - half) as f64).exp();
            GrsReport {
                generator: *g,
                roots,
                tail_rate,
                tolerance: GRS_TOL,
                pass: tail_rate < 1.0 + GRS_TOL,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_weight_is_admissible() {
        let g = Group::lattice(1).unwrap();
        let r = check_weight_admissible(&Weight::unit(), &g, 6);
        assert!(r.positive && r.symmetric && r.submultiplicative);
        assert_eq!(r.worst_ratio, 1.0);
    }

    #[test]
    fn polynomial_and_exponential_are_submultiplicative() {
        let g = Group::lattice(1).unwrap();
        assert!(check_weight_admissible(&Weight::polynomial(2.0), &g, 10).submultiplicative);
        assert!(check_weight_admissible(&Weight::exponential(2.0), &g, 10).submultiplicative);
        let c = Group::cyclic(2, 8).unwrap();
        let r = check_weight_admissible(&Weight::polynomial(1.5), &c, 4);
        assert!(r.submultiplicative && r.symmetric);
    }

    #[test]
    fn growing_weight_fails_submultiplicativity() {
        let g = Group::lattice(1).unwrap();
        let w = Weight::Table {
            entries: vec![(vec![2], 10.0), (vec![-2], 10.0)],
            default: 1.0,
        };
        let r = check_weight_admissible(&w, &g, 3);
        assert!(!r.submultiplicative);
        assert!((r.worst_ratio - 10.0).abs() < 1e-12);
    }

    #[test]
    fn grs_verdicts() {
        let g = Group::lattice(1).unwrap();
        let one = g.element(&[1]).unwrap();
        let r = &check_grs(&Weight::unit(), &g, &[one], 64)[0];
        assert!(r.pass && r.roots.iter().all(|&v| v == 1.0));
        let r = &check_grs(&Weight::polynomial(1.0), &g, &[one], 64)[0];
        assert!(r.pass);
        assert!((r.roots[63] - 65f64.powf(1.0 / 64.0)).abs() < 1e-12);
        assert!(r.roots.windows(2).all(|p| p[1] <= p[0]));
        let r = &check_grs(&Weight::exponential(2.0), &g, &[one], 64)[0];
        assert!(!r.pass);
        assert!(r.roots.iter().all(|&v| (v - 2.0).abs() < 1e-12));
    }
}
