use gsod_core::criticality::{
    best_rank_one_of, component_lemma_check, criticality_residual, extrema_split, span_membership, CriticalSet,
    DEFAULT_TOL_CRIT,
};
use gsod_core::oracle::{brute_force_max, finite_difference_gradient, make_fixture, random_orthogonal, svd_reference};
use gsod_core::sod::{basis_expansion_sod, reconstruct, validate, Term};
use gsod_core::solver::canonical_form;
use gsod_core::tensor::{apply_sign, inner_product, one_form};
use gsod_core::{gsod, Decomposition, DenseTensor, MultiVector, Shape, SignDistribution, SolverOptions};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn gaussian_tensor(dims: &[usize], seed: u64) -> DenseTensor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DenseTensor::from_fn(Shape::new(dims.to_vec()).unwrap(), |_| rng.sample(StandardNormal)).unwrap()
}

fn torus_point(dims: &[usize], seed: u64) -> MultiVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let parts = dims
        .iter()
        .map(|&n| {
            let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / len).collect()
        })
        .collect();
    MultiVector::new(parts).unwrap()
}

fn dims_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..=3, 1..=3)
}

fn fixture_case() -> impl Strategy<Value = (Vec<usize>, usize, u64)> {
    prop_oneof![
        (Just(vec![2, 2, 2]), 1usize..=2, any::<u64>()),
        (Just(vec![3, 3, 3]), 1usize..=3, any::<u64>()),
        (Just(vec![4, 3, 2]), 1usize..=4, any::<u64>()),
        (Just(vec![3, 3, 2]), 1usize..=3, any::<u64>()),
        (Just(vec![3, 3]), 1usize..=3, any::<u64>()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn evaluation_is_linear_in_each_mode(dims in dims_strategy(), seed in any::<u64>(), alpha in -2.0f64..2.0) {
        let a = gaussian_tensor(&dims, seed);
        let u = torus_point(&dims, seed ^ 1);
        let v = torus_point(&dims, seed ^ 2);
        for j in 0..dims.len() {
            let mut parts = u.parts().to_vec();
            parts[j] = u.part(j).iter().zip(v.part(j)).map(|(x, y)| x + alpha * y).collect();
            let mut swapped = u.parts().to_vec();
            swapped[j] = v.part(j).to_vec();
            let lhs = a.evaluate(&MultiVector::new(parts).unwrap()).unwrap();
            let rhs = a.evaluate(&u).unwrap() + alpha * a.evaluate(&MultiVector::new(swapped).unwrap()).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + a.frobenius_norm()) * 4.0);
        }
    }

    #[test]
    fn gradient_contracts_to_value(dims in dims_strategy(), seed in any::<u64>()) {
        let a = gaussian_tensor(&dims, seed);
        let u = torus_point(&dims, seed ^ 3);
        let value = a.evaluate(&u).unwrap();
        let z = a.gradient_components(&u).unwrap();
        for j in 0..dims.len() {
            let zu: f64 = z.part(j).iter().zip(u.part(j)).map(|(x, y)| x * y).sum();
            prop_assert!((zu - value).abs() <= 1e-12 * (1.0 + a.frobenius_norm()));
        }
    }

    #[test]
    fn gradient_matches_finite_differences(dims in dims_strategy(), seed in any::<u64>()) {
        let a = gaussian_tensor(&dims, seed);
        let u = torus_point(&dims, seed ^ 4);
        let z = a.gradient_components(&u).unwrap();
        let fd = finite_difference_gradient(&a, &u, 1e-6);
        for (x, y) in z.parts().iter().flatten().zip(fd.parts().iter().flatten()) {
            prop_assert!((x - y).abs() <= 1e-7);
        }
    }

    #[test]
    fn sign_distributions_act_by_parity(dims in dims_strategy(), seed in any::<u64>(), mask in any::<u64>()) {
        let a = gaussian_tensor(&dims, seed);
        let u = torus_point(&dims, seed ^ 5);
        let eps = SignDistribution::from_mask(dims.len(), mask);
        let flipped = a.evaluate(&apply_sign(&u, &eps).unwrap()).unwrap();
        prop_assert!((flipped - f64::from(eps.parity()) * a.evaluate(&u).unwrap()).abs() <= 1e-12 * (1.0 + a.frobenius_norm()));
    }

    #[test]
    fn one_form_inner_product_factorizes(dims in dims_strategy(), seed in any::<u64>()) {
        let u = torus_point(&dims, seed);
        let v = torus_point(&dims, seed ^ 6);
        let lhs = inner_product(&one_form(&u), &one_form(&v)).unwrap();
        prop_assert!((lhs - u.one_form_dot(&v)).abs() <= 1e-12);
        prop_assert!((one_form(&u).evaluate(&v).unwrap() - lhs).abs() <= 1e-12);
    }

    #[test]
    fn gsod_is_an_exact_sod(dims in dims_strategy(), seed in any::<u64>()) {
        let a = gaussian_tensor(&dims, seed);
        let res = gsod(&a, &SolverOptions::with_seed(seed)).unwrap();
        let d = &res.decomposition;
        prop_assert!(validate(d, 1e-8).is_sod);
        prop_assert!(res.rank <= a.shape().size());
        prop_assert!(reconstruct(d).distance(&a).unwrap() <= 1e-9 * a.frobenius_norm());
        prop_assert!(d.sigmas().windows(2).all(|w| w[0] >= w[1] - 1e-9 * w[0]));
    }

    #[test]
    fn first_weight_is_the_spectral_norm(dims in dims_strategy(), seed in any::<u64>()) {
        let a = gaussian_tensor(&dims, seed);
        let sigma = gsod(&a, &SolverOptions::default()).unwrap().decomposition.sigmas()[0];
        let (oracle, _) = brute_force_max(&a, 100, seed);
        prop_assert!(sigma >= oracle - 1e-9 * a.frobenius_norm(), "gsod {sigma} < oracle {oracle}");
    }

    #[test]
    fn canonical_form_ignores_order_and_even_flips(dims in dims_strategy(), seed in any::<u64>(), mask in any::<u64>()) {
        let a = gaussian_tensor(&dims, seed);
        let d = gsod(&a, &SolverOptions::default()).unwrap().decomposition;
        let p = dims.len();
        let mut terms: Vec<Term> = d.terms().to_vec();
        terms.reverse();
        for (k, t) in terms.iter_mut().enumerate() {
            let mut eps = SignDistribution::from_mask(p, mask.rotate_left(k as u32));
            if !eps.is_even() {
                let mut signs = eps.signs().to_vec();
                signs[0] = -signs[0];
                eps = SignDistribution::new(signs).unwrap();
            }
            t.factors = apply_sign(&t.factors, &eps).unwrap();
        }
        let shuffled = Decomposition::new(d.shape().clone(), terms).unwrap();
        let lhs = canonical_form(&shuffled).unwrap();
        let rhs = canonical_form(&d).unwrap();
        prop_assert_eq!(lhs.len(), rhs.len());
        for (x, y) in lhs.terms().iter().zip(rhs.terms()) {
            prop_assert_eq!(x.sigma, y.sigma);
            prop_assert_eq!(&x.factors, &y.factors);
        }
    }

    #[test]
    fn matrices_recover_singular_values(rows in 1usize..=5, cols in 1usize..=5, seed in any::<u64>()) {
        let a = gaussian_tensor(&[rows, cols], seed);
        let m = DMatrix::from_row_slice(rows, cols, a.coeffs());
        let svd = svd_reference(&m);
        let sigmas = gsod(&a, &SolverOptions::default()).unwrap().decomposition.sigmas();
        prop_assert_eq!(sigmas.len(), rows.min(cols));
        for (x, y) in sigmas.iter().zip(&svd.sigmas) {
            prop_assert!((x - y).abs() <= 1e-9, "{:?} vs {:?}", sigmas, svd.sigmas);
        }
    }

    #[test]
    fn basis_expansion_is_a_sod_no_shorter_than_gsod(dims in dims_strategy(), seed in any::<u64>()) {
        let a = gaussian_tensor(&dims, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 7);
        let q: Vec<DMatrix<f64>> = dims.iter().map(|&n| random_orthogonal(n, &mut rng)).collect();
        let d = basis_expansion_sod(&a, &q, 1e-12).unwrap();
        prop_assert!(validate(&d, 1e-8).is_sod);
        prop_assert!(reconstruct(&d).distance(&a).unwrap() <= 1e-10 * a.frobenius_norm());
        prop_assert!(d.len() >= gsod(&a, &SolverOptions::default()).unwrap().rank);
    }

    #[test]
    fn fixtures_are_recovered((dims, r, seed) in fixture_case()) {
        let f = make_fixture(&Shape::new(dims).unwrap(), r, seed).unwrap();
        let found = gsod(&f.tensor, &SolverOptions::with_seed(seed)).unwrap().decomposition;
        prop_assert_eq!(found.len(), r);
        for (x, y) in found.terms().iter().zip(f.truth.terms()) {
            prop_assert!((x.sigma - y.sigma).abs() <= 1e-8);
            for (p, q) in x.factors.parts().iter().flatten().zip(y.factors.parts().iter().flatten()) {
                prop_assert!((p - q).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn fixture_components_are_critical_both_ways((dims, r, seed) in fixture_case()) {
        let f = make_fixture(&Shape::new(dims).unwrap(), r, seed).unwrap();
        for k in 0..r {
            let lemma = component_lemma_check(&f.truth, k, &f.tensor, DEFAULT_TOL_CRIT).unwrap();
            let direct = criticality_residual(&f.tensor, &f.truth.terms()[k].factors, DEFAULT_TOL_CRIT).unwrap();
            prop_assert!(lemma && direct.is_critical);
            prop_assert!((direct.lambda - f.truth.terms()[k].sigma).abs() <= 1e-12);
        }
        let best = best_rank_one_of(&f.truth);
        prop_assert!(best.unique);
    }

    #[test]
    fn critical_sets_have_full_sign_orbits((dims, r, seed) in fixture_case()) {
        let f = make_fixture(&Shape::new(dims.clone()).unwrap(), r, seed).unwrap();
        let set = CriticalSet::from_decomposition(&f.truth, &f.tensor, DEFAULT_TOL_CRIT).unwrap();
        prop_assert_eq!(set.len(), r << dims.len());
        prop_assert!(set.max_residual() <= DEFAULT_TOL_CRIT);
        let (max, min) = extrema_split(&set);
        prop_assert_eq!(max.len(), min.len());
        prop_assert!(max.iter().all(|x| x.value > 0.0) && min.iter().all(|x| x.value < 0.0));
        for x in &set.points {
            let s = span_membership(&f.truth, &x.parts).unwrap();
            prop_assert!(s.residual <= 1e-12);
            prop_assert!((f.tensor.evaluate(&x.parts).unwrap() - x.value).abs() <= 1e-12);
        }
    }
}
