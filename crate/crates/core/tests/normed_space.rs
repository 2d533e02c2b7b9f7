use matmart::normed_space::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn specs(d: usize) -> Vec<NormSpec> {
    vec![
        NormSpec::l1(d).unwrap(),
        NormSpec::l2(d).unwrap(),
        NormSpec::linf(d).unwrap(),
        NormSpec::lp(d, 3.0).unwrap(),
    ]
}

fn random_matrix(rng: &mut ChaCha8Rng, d: usize) -> Matrix {
    Matrix::from_row_major(d, (0..d * d).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap()
}

fn svd_norm(a: &Matrix) -> f64 {
    let m = nalgebra::DMatrix::from_row_slice(a.dim(), a.dim(), a.as_slice());
    m.singular_values().max()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn vector_norm_axioms(
        x in prop::collection::vec(-5.0f64..5.0, 3),
        y in prop::collection::vec(-5.0f64..5.0, 3),
        c in -4.0f64..4.0,
    ) {
        for spec in specs(3) {
            let nx = vector_norm(&x, &spec).unwrap();
            let cx: Vec<f64> = x.iter().map(|v| c * v).collect();
            prop_assert!((vector_norm(&cx, &spec).unwrap() - c.abs() * nx).abs() <= 1e-12 * (1.0 + nx));
            let s: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            prop_assert!(vector_norm(&s, &spec).unwrap() <= nx + vector_norm(&y, &spec).unwrap() + 1e-12);
            prop_assert_eq!(nx == 0.0, x.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn operator_norm_axioms_and_submultiplicativity(seed in any::<u64>(), c in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(&mut rng, 3);
        let b = random_matrix(&mut rng, 3);
        for spec in specs(3) {
            let na = operator_norm(&a, &spec).unwrap();
            let nb = operator_norm(&b, &spec).unwrap();
            let nab = operator_norm(&a.matmul(&b).unwrap(), &spec).unwrap();
            prop_assert!(nab <= na * nb + 1e-9, "{:?}: {} > {}", spec.family(), nab, na * nb);
            let mut s = a.clone();
            s.add_assign(&b);
            prop_assert!(operator_norm(&s, &spec).unwrap() <= na + nb + 1e-9);
            let nc = operator_norm(&a.scaled(c), &spec).unwrap();
            prop_assert!((nc - c.abs() * na).abs() <= 1e-9 * (1.0 + na));
        }
        prop_assert_eq!(operator_norm(&Matrix::zeros(3), &NormSpec::l2(3).unwrap()).unwrap(), 0.0);
    }
}

#[test]
fn spectral_norm_against_svd() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for d in [1, 2, 3, 5, 8] {
        for _ in 0..50 {
            let a = random_matrix(&mut rng, d);
            let exact = svd_norm(&a);
            let ours = operator_norm(&a, &NormSpec::l2(d).unwrap()).unwrap();
            assert!((ours - exact).abs() <= 1e-6 * exact.max(1.0), "d={d}: {ours} vs {exact}");
        }
    }
}

#[test]
fn repeated_singular_values() {
    // orthogonal matrices have every singular value equal to one
    let (c, s) = (0.6, 0.8);
    let rot = Matrix::from_rows(&[vec![c, -s, 0.0], vec![s, c, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
    assert!((operator_norm(&rot, &NormSpec::l2(3).unwrap()).unwrap() - 1.0).abs() < 1e-9);
    let diag = Matrix::from_rows(&[vec![2.0, 0.0], vec![0.0, -2.0]]).unwrap();
    assert!((spectral_norm_2x2(&diag) - 2.0).abs() < 1e-12);
}

fn support(points: &[Vec<f64>], a: &[f64]) -> f64 {
    points.iter().map(|x| x.iter().zip(a).map(|(u, v)| u * v).sum::<f64>()).fold(f64::NEG_INFINITY, f64::max)
}

/// Every point of the `ℓ1` sphere in `R^3` with barycentric coordinates on
/// a lattice of step `1/m`, vertices included.
fn l1_lattice(m: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for i in 0..=m {
        for j in 0..=m - i {
            let k = m - i - j;
            let w = [i as f64 / m as f64, j as f64 / m as f64, k as f64 / m as f64];
            for signs in 0..8u32 {
                out.push((0..3).map(|t| if signs >> t & 1 == 1 { -w[t] } else { w[t] }).collect());
            }
        }
    }
    out
}

/// Lattice on the faces of `[-1, 1]^3`, corners included.
fn linf_lattice(m: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let g = |i: usize| -1.0 + 2.0 * i as f64 / m as f64;
    for axis in 0..3 {
        for side in [-1.0, 1.0] {
            for i in 0..=m {
                for j in 0..=m {
                    let mut x = vec![0.0; 3];
                    x[axis] = side;
                    x[(axis + 1) % 3] = g(i);
                    x[(axis + 2) % 3] = g(j);
                    out.push(x);
                }
            }
        }
    }
    out
}

#[test]
fn krein_milman_support_functions() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (spec, lattice) in [(NormSpec::l1(3).unwrap(), l1_lattice(60)), (NormSpec::linf(3).unwrap(), linf_lattice(128))] {
        assert!(lattice.len() >= 10_000);
        for x in &lattice {
            assert!((vector_norm(x, &spec).unwrap() - 1.0).abs() < 1e-12);
        }
        let random = SphereSampler::new(spec, 77).sample(100_000);
        let ext = extreme_points(&spec).points(0);
        for _ in 0..50 {
            let a: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let s_ext = support(&ext, &a);
            let s_lat = support(&lattice, &a);
            let s_rand = support(&random, &a);
            assert!((s_ext - s_lat).abs() <= 1e-6, "{:?}: {s_ext} vs lattice {s_lat}", spec.family());
            assert!(s_rand <= s_ext + 1e-12);
            assert!(s_rand >= 0.98 * s_ext, "{:?}: {s_rand} vs {s_ext}", spec.family());
        }
    }
}

#[test]
fn bilinear_norm_over_random_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for spec in specs(2).into_iter().map(|s| (s, 100_000)).chain(specs(3).into_iter().map(|s| (s, 1_000_000))) {
        let (spec, cloud) = spec;
        let d = spec.dim();
        let z = operator_tensor_set(&spec);
        let elements = z.elements(cloud);
        for _ in 0..100 {
            let a = random_matrix(&mut rng, d);
            let exact = operator_norm(&a, &spec).unwrap();
            let via_z = bilinear_max(&a, &elements).unwrap();
            if z.is_finite() {
                assert!((via_z - exact).abs() <= 1e-12 * exact.max(1.0), "{:?}", spec.family());
            } else {
                assert!(via_z <= exact * (1.0 + 1e-9) && via_z >= 0.99 * exact, "{:?} d={d}: {via_z} vs {exact}", spec.family());
            }
        }
    }
}

#[test]
fn tensor_l1_radius_by_family() {
    for d in 1..=4 {
        let df = d as f64;
        for spec in [NormSpec::l1(d).unwrap(), NormSpec::l2(d).unwrap(), NormSpec::linf(d).unwrap()] {
            let z = operator_tensor_set(&spec);
            assert!((z.l1_radius() - df).abs() < 1e-12, "{:?} d={d}", spec.family());
            if z.is_finite() {
                let max = z.elements(0).iter().map(|e| e.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
                assert!((max - df).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn entropy_nonincreasing_in_eps() {
    let eps = default_eps_grid();
    let fixed = ExtremePointSet::finite(NormSpec::l2(2).unwrap(), vec![vec![1.0, 0.0]]).unwrap();
    let sets = [
        operator_tensor_set(&NormSpec::l1(3).unwrap()),
        operator_tensor_set(&NormSpec::linf(2).unwrap()),
        operator_tensor_set(&NormSpec::l2(2).unwrap()),
        tensor_extreme_set(extreme_points(&NormSpec::l2(2).unwrap()), fixed).unwrap(),
    ];
    for z in &sets {
        let profile = EntropyProfile::estimate(z, &eps, DEFAULT_CLOUD_SIZE).unwrap();
        // eps ascending, entropy must not increase
        for w in profile.entropy.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }
}

#[test]
fn circle_entropic_dimension() {
    let fixed = ExtremePointSet::finite(NormSpec::l2(2).unwrap(), vec![vec![1.0, 0.0]]).unwrap();
    let z = tensor_extreme_set(extreme_points(&NormSpec::l2(2).unwrap()), fixed).unwrap();
    let profile = EntropyProfile::estimate_default(&z).unwrap();
    assert!((profile.slope - 1.0).abs() <= 0.2, "κ̂ = {}", profile.slope);
}

#[test]
fn finite_sets_have_flat_entropy_below_the_gap() {
    let z = operator_tensor_set(&NormSpec::l1(2).unwrap());
    // x ⊗ y = (−x) ⊗ (−y): 16 products, 8 distinct arrays, pairwise at distance >= 2
    let mut distinct = z.elements(0);
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    assert_eq!(distinct.len(), 8);
    let eps = matmart::grid::log_spaced(0.01, 0.3, 8);
    let p = EntropyProfile::estimate(&z, &eps, 0).unwrap();
    assert!(p.entropy.iter().all(|h| (h - 8f64.ln()).abs() < 1e-12), "{:?}", p.entropy);
    assert!(p.slope.abs() < 1e-12);
}
