use proptest::prelude::*;

use phasecover::atomic::{check_domination, kernel_envelope};
use phasecover::gabor::{
    gaussian_window, localization_matrix, reconstruction_error, tf_shift, IsometricStft,
};
use phasecover::linalg::{hermitian_eigen, vec_dist, vec_dot, vec_norm};
use phasecover::trials::TrialRng;
use phasecover::{C64, GFunc, GaborSystem, Group, MoleculeSystem, Neighborhood, RelSepSet, Weight};

fn gabor8() -> GaborSystem {
    GaborSystem::new(&gaussian_window(8, 1.0), 2, 2).unwrap()
}

fn bump_system(n: i64, step: i64, bump: &[f64]) -> MoleculeSystem {
    let g = Group::cyclic(1, n).unwrap();
    let nodes = RelSepSet::sublattice(g, &[step]).unwrap();
    let atoms = nodes
        .elements()
        .iter()
        .map(|x| {
            let c = x.coords()[0];
            let pts = bump.iter().enumerate().map(|(j, &v)| (g.element(&[c + j as i64 - 2]).unwrap(), v));
            GFunc::from_real(g, pts).unwrap()
        })
        .collect();
    MoleculeSystem::with_canonical_dual(nodes, atoms).unwrap()
}

#[test]
fn stft_is_covariant_under_time_frequency_shifts() {
    let n = 8usize;
    let v = IsometricStft::new(&gaussian_window(n, 1.3)).unwrap();
    let f = TrialRng::new(3).gaussian_vec(n);
    let vf = v.forward(&f);
    for (x, xi) in [(1i64, 0i64), (0, 3), (5, 6)] {
        let moved = v.forward(&tf_shift(&f, x, xi));
        for y in 0..n as i64 {
            for eta in 0..n as i64 {
                let here = moved[(y * n as i64 + eta) as usize].norm();
                let src = (((y - x).rem_euclid(n as i64)) * n as i64 + (eta - xi).rem_euclid(n as i64)) as usize;
                assert!((here - vf[src].norm()).abs() < 1e-12, "({x},{xi}) at ({y},{eta})");
            }
        }
    }
}

#[test]
fn isometric_stft_satisfies_orthogonality_relations() {
    let v = IsometricStft::new(&gaussian_window(12, 0.8)).unwrap();
    let mut rng = TrialRng::new(11);
    let (f, h) = (rng.gaussian_vec(12), rng.gaussian_vec(12));
    let lhs = vec_dot(&v.forward(&f), &v.forward(&h));
    assert!((lhs - vec_dot(&f, &h)).norm() < 1e-12);
    assert!(vec_dist(&v.adjoint(&v.forward(&f)), &f) < 1e-12);
}

#[test]
fn gabor_molecules_form_a_reproducing_system() {
    let gs = gabor8();
    let sys = gs.molecules();
    assert!(sys.canonical_dual());
    assert!(sys.envelope_verified());
    let (idem, adj) = sys.projector_defects();
    assert!(idem < 1e-10 && adj < 1e-10, "{idem} {adj}");
    let (lo, hi) = sys.frame_bounds();
    assert!(lo > 0.0 && hi >= lo);
    for atom in sys.atoms() {
        let d = sys.domain().restrict(atom);
        assert!(vec_dist(&sys.project_dense(&d), &d) < 1e-10);
    }
    assert!(reconstruction_error(gs.window(), gs.dual_window(), 2, 2).unwrap() < 1e-10);
}

#[test]
fn synthesis_adjoint_is_the_adjoint() {
    let gs = gabor8();
    let sys = gs.molecules();
    let mut rng = TrialRng::new(5);
    let c = rng.gaussian_vec(sys.nodes().len());
    let f = rng.gaussian_vec(sys.domain().len());
    let lhs = vec_dot(&sys.synthesis_dense(&c), &f);
    let rhs = vec_dot(&c, &sys.synthesis_adjoint_dense(&f));
    assert!((lhs - rhs).norm() < 1e-11 * (1.0 + lhs.norm()));
}

#[test]
fn localization_spectrum_lies_in_the_mask_range() {
    let n = 8;
    let mut rng = TrialRng::new(9);
    let mask: Vec<C64> = (0..n * n).map(|_| C64::new(rng.uniform(0.0, 1.0), 0.0)).collect();
    let a = localization_matrix(&gaussian_window(n, 1.0), &mask).unwrap();
    let (vals, _) = hermitian_eigen(&a);
    assert!(vals.iter().all(|&l| (-1e-10..=1.0 + 1e-10).contains(&l)), "{vals:?}");
}

#[test]
fn block_system_is_orthonormal() {
    let sys = MoleculeSystem::block_indicators(8, 2).unwrap();
    assert!(sys.canonical_dual());
    let (lo, hi) = sys.frame_bounds();
    assert!((lo - 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
    assert_eq!(sys.span_rank(), 4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn projector_is_dominated_by_the_kernel(
        bump in prop::collection::vec(0.05..1.0f64, 5),
        step in prop::sample::select(vec![2i64, 3, 4]),
        seed in any::<u64>(),
    ) {
        let sys = bump_system(12, step, &bump);
        prop_assert!(sys.envelope_verified());
        let g = sys.group();
        let kernel = kernel_envelope(&sys, &Neighborhood::box_radius(g, 1), &Weight::unit()).unwrap();
        let rep = check_domination(&sys, &kernel, 8, seed);
        let scale = kernel.kernel.max_abs();
        prop_assert!(rep.worst_excess <= 1e-12 * (1.0 + scale), "{rep:?}");
    }

    #[test]
    fn projector_fixes_the_span(
        bump in prop::collection::vec(0.05..1.0f64, 5),
        seed in any::<u64>(),
    ) {
        let sys = bump_system(12, 3, &bump);
        let c = TrialRng::new(seed).gaussian_vec(sys.nodes().len());
        let f = sys.synthesis_dense(&c);
        prop_assert!(vec_dist(&sys.project_dense(&f), &f) <= 1e-10 * (1.0 + vec_norm(&f)));
    }
}
