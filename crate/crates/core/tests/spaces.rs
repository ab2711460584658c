use num_complex::Complex64 as C64;
use proptest::prelude::*;

use phasecover::group::{Element, Group, Neighborhood, RelSepSet, Side};
use phasecover::spaces::{amalgam_norm, ed_norm, local_max, AmalgamKind, DiscreteCoeffs, SolidSpaceSpec};
use phasecover::weight::{check_weight_admissible, Weight};
use phasecover::GFunc;

fn carriers() -> impl Strategy<Value = Group> {
    prop_oneof![
        Just(Group::lattice(1).unwrap()),
        Just(Group::lattice(2).unwrap()),
        Just(Group::cyclic(1, 11).unwrap()),
        Just(Group::cyclic(2, 7).unwrap()),
    ]
}

fn func(g: Group) -> impl Strategy<Value = GFunc> {
    prop::collection::vec((prop::collection::vec(-4i64..=4, g.dim()), -3.0..3.0f64, -3.0..3.0f64), 1..12).prop_map(
        move |pts| {
            let pairs: std::collections::BTreeMap<Element, C64> = pts
                .into_iter()
                .map(|(c, re, im)| (g.element(&c).unwrap(), C64::new(re, im)))
                .collect();
            GFunc::from_pairs(g, pairs).unwrap()
        },
    )
}

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(1.5), Just(2.0), Just(3.0), Just(f64::INFINITY)]
}

fn weight() -> impl Strategy<Value = Weight> {
    prop_oneof![
        Just(Weight::unit()),
        (0.0..2.0f64).prop_map(Weight::polynomial),
        (1.0..1.5f64).prop_map(Weight::exponential),
    ]
}

fn space(g: Group) -> impl Strategy<Value = SolidSpaceSpec> {
    (exponent(), exponent(), weight()).prop_map(move |(p, q, w)| {
        if g.dim() == 1 {
            SolidSpaceSpec::lp(p, w).unwrap()
        } else {
            SolidSpaceSpec::mixed(p, q, w, 1).unwrap()
        }
    })
}

fn setup() -> impl Strategy<Value = (GFunc, SolidSpaceSpec)> {
    carriers().prop_flat_map(|g| (func(g), space(g)))
}

proptest! {
    #[test]
    fn norms_are_solid((f, e) in setup(), shrink in prop::collection::vec(0.0..=1.0f64, 12)) {
        let mut k = 0;
        let smaller = f.map(|z| {
            k += 1;
            z * shrink[(k - 1) % shrink.len()]
        });
        prop_assert!(e.norm(&smaller).unwrap() <= e.norm(&f).unwrap() * (1.0 + 1e-12));
        prop_assert_eq!(e.norm(&f.abs()).unwrap(), e.norm(&f).unwrap());
    }

    #[test]
    fn norm_is_homogeneous_and_subadditive((f, e) in setup(), t in -4.0..4.0f64) {
        let scaled = e.norm(&f.scale(C64::new(t, 0.0))).unwrap();
        prop_assert!((scaled - t.abs() * e.norm(&f).unwrap()).abs() <= 1e-10 * (1.0 + scaled));
        let g2 = f.map(|z| z * C64::new(0.0, 1.0) + C64::new(0.5, 0.0));
        let sum = e.norm(&f.add(&g2).unwrap()).unwrap();
        prop_assert!(sum <= (e.norm(&f).unwrap() + e.norm(&g2).unwrap()) * (1.0 + 1e-12));
    }

    #[test]
    fn right_amalgam_is_left_amalgam_of_involution((f, e) in setup(), r in 0i64..3) {
        let v = Neighborhood::box_radius(f.group(), r);
        let right = amalgam_norm(&f, &v, AmalgamKind::Right(&e)).unwrap();
        let left = amalgam_norm(&f.involute(), &v, AmalgamKind::Left(&e)).unwrap();
        prop_assert!((right - left).abs() <= 1e-12 * (1.0 + left));
    }

    #[test]
    fn amalgams_dominate_the_space_norm((f, e) in setup(), r in 0i64..3) {
        let v = Neighborhood::box_radius(f.group(), r);
        let plain = e.norm(&f).unwrap();
        let left = amalgam_norm(&f, &v, AmalgamKind::Left(&e)).unwrap();
        let local = amalgam_norm(&f, &v, AmalgamKind::LocalL1(&e)).unwrap();
        prop_assert!(plain <= left * (1.0 + 1e-12));
        prop_assert!(plain <= local * (1.0 + 1e-12));
        let w = e.weight.clone();
        let strong = amalgam_norm(&f, &v, AmalgamKind::Strong(&w)).unwrap();
        let l1 = SolidSpaceSpec::l1(&w);
        prop_assert!(amalgam_norm(&f, &v, AmalgamKind::Left(&l1)).unwrap() <= strong * (1.0 + 1e-12));
    }

    #[test]
    fn trivial_window_local_max_is_modulus(f in carriers().prop_flat_map(func)) {
        let v = Neighborhood::identity(f.group());
        for side in [Side::Left, Side::Right] {
            let m = local_max(&f, &v, side);
            prop_assert!(m.sub(&f.abs()).unwrap().max_abs() == 0.0);
        }
    }

    #[test]
    fn local_max_grows_with_the_window(f in carriers().prop_flat_map(func), r in 0i64..3) {
        let g = f.group();
        let small = local_max(&f, &Neighborhood::box_radius(g, r), Side::Left);
        let large = local_max(&f, &Neighborhood::box_radius(g, r + 1), Side::Left);
        for (x, s) in small.iter() {
            prop_assert!(s.re <= large.get(x).re);
        }
    }

    #[test]
    fn translation_bound_holds(
        (f, e) in setup(),
        shift in prop::collection::vec(-5i64..=5, 2),
    ) {
        let g = f.group();
        let x = g.element(&shift[..g.dim()]).unwrap();
        for side in [Side::Left, Side::Right] {
            let moved = f.translate(&x, side).unwrap();
            let bound = match side {
                Side::Left => e.translation_norm(&g, &x, Side::Left, 4),
                // R_y f(z) = f(zy) moves mass by y^{-1}
                Side::Right => e.translation_norm(&g, &g.inverse(&x), Side::Right, 4),
            };
            prop_assert!(e.norm(&moved).unwrap() <= bound * e.norm(&f).unwrap() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn sequence_norm_with_trivial_window_is_the_space_norm(
        (g, vals, e) in carriers().prop_flat_map(|g| (Just(g), prop::collection::vec(-2.0..2.0f64, 5), space(g)))
    ) {
        let pts: Vec<Element> = (0..5).map(|k| {
            let mut c = vec![0i64; g.dim()];
            c[0] = 2 * k;
            g.element(&c).unwrap()
        }).collect();
        let nodes = RelSepSet::with_default_neighborhood(g, pts.clone()).unwrap();
        let c = DiscreteCoeffs::new(nodes, vals.iter().map(|&v| C64::new(v, 0.0)).collect()).unwrap();
        let f = GFunc::from_real(g, pts.iter().copied().zip(vals.iter().copied())).unwrap();
        let d = ed_norm(&c, &e, &Neighborhood::identity(g)).unwrap();
        prop_assert!((d - e.norm(&f).unwrap()).abs() <= 1e-12 * (1.0 + d));
        let wide = ed_norm(&c, &e, &Neighborhood::box_radius(g, 1)).unwrap();
        prop_assert!(d <= wide * (1.0 + 1e-12));
    }
}

#[test]
fn exponents_order_unweighted_norms() {
    let g = Group::lattice(1).unwrap();
    let f = GFunc::from_real(g, (0..6).map(|k| (g.element(&[k]).unwrap(), 1.0 + k as f64))).unwrap();
    let norms: Vec<f64> = [1.0, 2.0, 4.0, f64::INFINITY]
        .iter()
        .map(|&p| SolidSpaceSpec::lp(p, Weight::unit()).unwrap().norm(&f).unwrap())
        .collect();
    assert!(norms.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(norms[3], 6.0);
    assert_eq!(norms[0], 21.0);
}

#[test]
fn admissibility_constants_are_finite_for_moderate_weights() {
    let g = Group::lattice(2).unwrap();
    for w in [Weight::unit(), Weight::polynomial(1.0), Weight::polynomial(2.5)] {
        let rep = check_weight_admissible(&w, &g, 6);
        assert!(rep.positive && rep.submultiplicative && rep.symmetric, "{w:?}");
        let e = SolidSpaceSpec::lp(2.0, Weight::polynomial(0.5)).unwrap().with_reference(w.clone());
        let a = e.admissibility(&g, 4);
        assert!(a.constant > 0.0 && a.constant.is_finite(), "{w:?}: {a:?}");
        assert!(a.moderation.is_finite());
    }
}

#[test]
fn invalid_exponents_are_rejected() {
    assert!(SolidSpaceSpec::lp(0.5, Weight::unit()).is_err());
    assert!(SolidSpaceSpec::mixed(2.0, f64::NAN, Weight::unit(), 1).is_err());
}
