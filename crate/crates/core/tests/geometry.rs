use horotomo::horosphere::{contains, horosphere_from_group, same_point_set, sample_points, xi_dimension, Horosphere};
use horotomo::lorentz::{
    form, geodesic_distance, horospherical_coords, iwasawa_nak, make_a, make_k, make_n, HyperbolicPoint,
    LorentzElement, Rotation,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn j(n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::identity(n + 1, n + 1);
    for i in 0..n {
        m[(i, i)] = -1.0;
    }
    m
}

fn random_g(n: usize, seed: u64) -> LorentzElement {
    LorentzElement::random(n, 2.0, 2.0, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn vec_in(len: usize, r: f64) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-r..r, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn n_is_additive((a, b) in (2usize..=6).prop_flat_map(|n| (vec_in(n - 1, 5.0), vec_in(n - 1, 5.0)))) {
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let lhs = make_n(&a).compose(&make_n(&b));
        prop_assert!((lhs.matrix() - make_n(&sum).matrix()).amax() < 1e-12 * (1.0 + sum.iter().map(|x| x * x).sum::<f64>()));
    }

    #[test]
    fn products_preserve_the_form(n in 2usize..=6, seed in any::<u64>()) {
        let g = random_g(n, seed);
        let defect = (g.matrix().transpose() * j(n) * g.matrix() - j(n)).amax();
        prop_assert!(defect < 1e-10 * g.matrix().amax().powi(2), "{}", defect);
    }

    #[test]
    fn horospherical_points_are_on_the_sheet((v, t) in (2usize..=5).prop_flat_map(|n| (vec_in(n - 1, 10.0), -5.0..5.0f64))) {
        let p = horospherical_coords(&v, t);
        let c = p.coords();
        prop_assert!((form(c, c) - 1.0).abs() < 1e-12 * c[c.len() - 1].powi(2));
        prop_assert!(c[c.len() - 1] >= 1.0);
    }

    #[test]
    fn iwasawa_round_trip(n in 2usize..=6, seed in any::<u64>()) {
        let g = random_g(n, seed);
        let f = iwasawa_nak(&g).unwrap();
        let back = make_n(&f.v).compose(&make_a(n, f.t)).compose(&make_k(&f.k));
        prop_assert!((back.matrix() - g.matrix()).amax() < 1e-9 * g.matrix().amax());
        prop_assert!(Rotation::new(f.k.matrix().clone()).is_ok());
    }

    #[test]
    fn triangle_inequality(n in 2usize..=5, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p: Vec<HyperbolicPoint> = (0..3).map(|_| LorentzElement::random(n, 1.5, 1.5, &mut rng).origin_image()).collect();
        let d = |a: usize, b: usize| geodesic_distance(&p[a], &p[b]).unwrap();
        prop_assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-9);
    }

    #[test]
    fn flat_shift_keeps_the_horosphere(n in 3usize..=5, d_off in 0usize..3, seed in any::<u64>()) {
        let d = 1 + d_off % (n - 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = LorentzElement::random(n, 1.0, 1.0, &mut rng);
        let mut v = vec![0.0; n - 1];
        for x in &mut v[n - 1 - d..] {
            *x = rand::Rng::random_range(&mut rng, -2.0..2.0);
        }
        let a = horosphere_from_group(&g, d).unwrap();
        let b = horosphere_from_group(&g.compose(&make_n(&v)), d).unwrap();
        prop_assert!(same_point_set(&a, &b, 50, 1e-8).unwrap());
    }

    #[test]
    fn transport_is_equivariant(n in 2usize..=5, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = 1 + (seed as usize) % (n - 1);
        let xi = horosphere_from_group(&LorentzElement::random(n, 1.0, 1.0, &mut rng), d).unwrap();
        let gamma = LorentzElement::random(n, 1.0, 1.0, &mut rng);
        let moved = xi.transported(&gamma).unwrap();
        for p in sample_points(&xi, 20, &mut rng) {
            prop_assert!(contains(&moved, &gamma.apply(&p), 1e-8).unwrap());
        }
    }
}

#[test]
fn overdetermined_exactly_below_codimension_one() {
    for n in 2..=8usize {
        for d in 1..n {
            assert_eq!(xi_dimension(n, d).unwrap() > n, d < n - 1, "n = {n}, d = {d}");
        }
    }
}

#[test]
fn basic_horosphere_contains_its_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let xi = Horosphere::standard(4, 2, 0.3, vec![0.7]).unwrap();
    for p in sample_points(&xi, 30, &mut rng) {
        assert!(contains(&xi, &p, 1e-10).unwrap());
    }
    let far = horospherical_coords(&[3.0, 0.0, 0.0], 0.3);
    assert!(!contains(&xi, &far, 1e-10).unwrap());
}
