use perispec::eigen::{eigenvalues, gelfand_radius_estimate, spectrum_info};
use perispec::linalg::{mat_mul, mat_power_seq, mat_solve, operator_norm};
use perispec::poly::{char_poly, poly_roots, Polynomial};
use perispec::random;
use perispec::resolvent::{cauchy_coefficient, resolvent_direct};
use perispec::{c, CMatrix, CVector, Complex};
use proptest::prelude::*;

fn hausdorff(a: &[Complex], b: &[Complex]) -> f64 {
    let one_way = |x: &[Complex], y: &[Complex]| {
        x.iter()
            .map(|p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn operator_norm_is_submultiplicative(seed in any::<u64>(), dim in 1usize..7) {
        let mut rng = random::rng(seed);
        let a = random::disk_matrix(&mut rng, dim);
        let b = random::disk_matrix(&mut rng, dim);
        let ab = mat_mul(&a, &b).unwrap();
        prop_assert!(operator_norm(&ab).unwrap() <= operator_norm(&a).unwrap() * operator_norm(&b).unwrap() + 1e-9);
    }

    #[test]
    fn log_power_norms_are_subadditive(seed in any::<u64>(), dim in 1usize..5) {
        let mut rng = random::rng(seed);
        let a = random::disk_matrix(&mut rng, dim).scale(c(1.5, 0.0));
        let seq = mat_power_seq(&a, 40).unwrap();
        // an[n] = ln‖Aⁿ‖, with an[0] unused
        let mut an = vec![0.0];
        an.extend(seq.iter().map(|p| p.log_norm.value()));
        for n in 1..=40 {
            for m in 1..=40 - n {
                if an[n].is_finite() && an[m].is_finite() {
                    prop_assert!(an[n + m] <= an[n] + an[m] + 1e-9);
                }
            }
        }
    }

    #[test]
    fn solve_then_multiply_round_trips(seed in any::<u64>(), dim in 1usize..7, log_cond in 0.0f64..6.0) {
        let mut rng = random::rng(seed);
        let (a, _) = random::conditioned_pair(&mut rng, dim, 10f64.powf(log_cond));
        let r = random::disk_matrix(&mut rng, dim);
        let x = mat_solve(&a, &r).unwrap();
        let back = &(&a * &x) - &r;
        let na = operator_norm(&a).unwrap();
        let nr = operator_norm(&r).unwrap();
        prop_assert!(operator_norm(&back).unwrap() <= 1e-10 * (1.0 + na) * (1.0 + nr));
    }

    #[test]
    fn operator_norm_is_unitarily_invariant(seed in any::<u64>(), dim in 1usize..7) {
        let mut rng = random::rng(seed);
        let a = random::disk_matrix(&mut rng, dim);
        let u = random::unitary(&mut rng, dim);
        let ua = &u * &a;
        prop_assert!((operator_norm(&ua).unwrap() - operator_norm(&a).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn roots_reproduce_coefficients(seed in any::<u64>(), deg in 1usize..9) {
        let mut rng = random::rng(seed);
        let roots: Vec<Complex> = (0..deg).map(|_| random::unit_disk(&mut rng) * 2.0).collect();
        let p = Polynomial::from_roots(&roots);
        let found = poly_roots(&p).unwrap();
        let q = Polynomial::from_roots(&found);
        let scale = p.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (x, y) in p.coeffs.iter().zip(&q.coeffs) {
            prop_assert!((x - y).norm() <= 1e-8 * scale);
        }
    }

    #[test]
    fn spectrum_is_similarity_invariant(seed in any::<u64>(), dim in 1usize..6) {
        let mut rng = random::rng(seed);
        let a = random::disk_matrix(&mut rng, dim);
        let (v, vinv) = random::conditioned_pair(&mut rng, dim, 100.0);
        let b = &(&v * &a) * &vinv;
        let ea = spectrum_info(&a, 1e-8).unwrap().eigenvalues;
        let eb = spectrum_info(&b, 1e-8).unwrap().eigenvalues;
        prop_assert!(hausdorff(&ea, &eb) <= 1e-6, "{:?} vs {:?}", ea, eb);
    }

    #[test]
    fn gelfand_rates_dominate_eigen_radius(seed in any::<u64>(), dim in 1usize..6) {
        let mut rng = random::rng(seed);
        let a = random::disk_matrix(&mut rng, dim);
        let r = gelfand_radius_estimate(&a, 32).unwrap();
        for s in &r.samples {
            prop_assert!(s.rate.value().exp() >= r.eig_radius - 1e-9);
        }
    }

    #[test]
    fn constant_term_is_product_of_eigenvalues(seed in any::<u64>(), dim in 1usize..7) {
        let mut rng = random::rng(seed);
        let a = random::disk_matrix(&mut rng, dim);
        let chi0 = char_poly(&a).coeffs[0];
        let sign = if dim % 2 == 0 { 1.0 } else { -1.0 };
        let prod: Complex = eigenvalues(&a).unwrap().iter().product();
        prop_assert!((chi0 * sign - prod).norm() <= 1e-8 * (1.0 + prod.norm()));
    }

    #[test]
    fn first_resolvent_identity(seed in any::<u64>(), dim in 1usize..6) {
        let mut rng = random::rng(seed);
        let a = random::disk_matrix(&mut rng, dim);
        let rho = spectrum_info(&a, 1e-8).unwrap().spectral_radius;
        let l = Complex::from_polar(rho + 0.3 + random::unit_disk(&mut rng).norm(), 1.0);
        let m = Complex::from_polar(rho + 0.2, -2.0);
        let rl = resolvent_direct(&a, l).unwrap();
        let rm = resolvent_direct(&a, m).unwrap();
        let lhs = &rl - &rm;
        let rhs = (&rl * &rm).scale(m - l);
        let scale = 1.0 + operator_norm(&rl).unwrap() * operator_norm(&rm).unwrap();
        prop_assert!(operator_norm(&(&lhs - &rhs)).unwrap() <= 1e-9 * scale);
    }

    #[test]
    fn normal_resolvent_norm_is_inverse_distance(seed in any::<u64>(), dim in 1usize..6) {
        let mut rng = random::rng(seed);
        let eigs: Vec<Complex> = (0..dim).map(|_| random::unimodular(&mut rng)).collect();
        let u = random::unitary_with_spectrum(&mut rng, &eigs);
        let l = random::unit_disk(&mut rng) * 3.0;
        let dist = eigs.iter().map(|e| (e - l).norm()).fold(f64::INFINITY, f64::min);
        prop_assume!(dist > 1e-3);
        let n = operator_norm(&resolvent_direct(&u, l).unwrap()).unwrap();
        prop_assert!((n - 1.0 / dist).abs() <= 1e-9 * (1.0 / dist).max(1.0));
    }

    #[test]
    fn quadrature_is_exact_below_node_count(seed in any::<u64>(), deg in 0usize..20, k in 0usize..20) {
        let nodes = 48;
        prop_assume!(deg + k < nodes);
        let mut rng = random::rng(seed);
        let coeffs: Vec<CVector> = (0..=deg).map(|_| random::disk_vector(&mut rng, 2)).collect();
        let f = |z: Complex| {
            let mut acc = CVector::zeros(2);
            for v in coeffs.iter().rev() {
                acc = acc.scale(z);
                acc.axpy(c(1.0, 0.0), v);
            }
            acc
        };
        let got = cauchy_coefficient(f, k, 1.0, nodes).unwrap();
        let want = coeffs.get(k).cloned().unwrap_or_else(|| CVector::zeros(2));
        prop_assert!(got.distance(&want) <= 1e-12);
    }
}

#[test]
fn identity_matrix_round_trips_through_json() {
    let a = CMatrix::identity(3);
    let s = serde_json::to_string(&a).unwrap();
    assert_eq!(serde_json::from_str::<CMatrix>(&s).unwrap(), a);
}
