//! Property tests for the structural invariants: clamped degrees, grid
//! partition laws, normalization, convexity, the design-row identity, rule
//! permutation invariance, metric inequalities, and surrogate symmetries.

use proptest::prelude::*;

use anfis::dataset::{generate_surrogate, split, GridSpec, SurrogateParams};
use anfis::fis::{build_model, normalize_strengths, InputSpec};
use anfis::membership::{eval_mf, make_mf_bank, MfFamily, MfSpec, MF_FLOOR};
use anfis::metrics::{mae, r_squared, rmse};

fn family_strategy() -> impl Strategy<Value = MfFamily> {
    prop::sample::select(MfFamily::ALL.to_vec())
}

fn params_strategy(family: MfFamily) -> BoxedStrategy<Vec<f64>> {
    match family {
        MfFamily::Gbell => (0.05f64..2.0, 0.3f64..4.0, -2.0f64..2.0)
            .prop_map(|(a, b, c)| vec![a, b, c])
            .boxed(),
        MfFamily::Gauss => (0.05f64..2.0, -2.0f64..2.0)
            .prop_map(|(s, c)| vec![s, c])
            .boxed(),
        MfFamily::Gauss2 => (0.05f64..1.0, -2.0f64..1.0, 0.05f64..1.0, 0.0f64..2.0)
            .prop_map(|(s1, c1, s2, dc)| vec![s1, c1, s2, c1 + dc])
            .boxed(),
        MfFamily::Dsig => (0.5f64..30.0, -2.0f64..1.0, 0.5f64..30.0, 0.05f64..3.0)
            .prop_map(|(a1, c1, a2, dc)| vec![a1, c1, a2, c1 + dc])
            .boxed(),
        MfFamily::Psig => (0.5f64..30.0, -2.0f64..1.0, 0.5f64..30.0, 0.05f64..3.0)
            .prop_map(|(a1, c1, a2, dc)| vec![a1, c1, -a2, c1 + dc])
            .boxed(),
        MfFamily::Tri => (-2.0f64..2.0, 0.01f64..2.0, 0.01f64..2.0)
            .prop_map(|(a, w1, w2)| vec![a, a + w1, a + w1 + w2])
            .boxed(),
    }
}

fn mf_strategy() -> impl Strategy<Value = MfSpec> {
    family_strategy().prop_flat_map(|family| {
        params_strategy(family).prop_map(move |params| MfSpec::new(family, params).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn degrees_stay_clamped(mf in mf_strategy(), x in -10.0f64..10.0) {
        let v = eval_mf(&mf, x).unwrap();
        prop_assert!((MF_FLOOR..=1.0).contains(&v), "{v}");
    }

    #[test]
    fn unimodal_families_peak_at_center(
        family in prop::sample::select(vec![MfFamily::Gbell, MfFamily::Gauss, MfFamily::Tri]),
        shift in -2.0f64..2.0,
    ) {
        let params = match family {
            MfFamily::Gbell => vec![0.7, 1.5, shift],
            MfFamily::Gauss => vec![0.4, shift],
            MfFamily::Tri => vec![shift - 0.5, shift, shift + 0.8],
            _ => unreachable!(),
        };
        let mf = MfSpec::new(family, params).unwrap();
        let peak = eval_mf(&mf, shift).unwrap();
        prop_assert_eq!(peak, 1.0);
        for dx in [-0.3, -0.1, 0.05, 0.2] {
            prop_assert!(eval_mf(&mf, shift + dx).unwrap() <= peak);
        }
    }

    #[test]
    fn normalization_sums_to_one(w in prop::collection::vec(1e-9f64..1e3, 1..40)) {
        let wbar = normalize_strengths(&w).unwrap();
        let total: f64 = wbar.iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-12, "{total}");
        prop_assert!(wbar.iter().all(|v| *v > 0.0));
    }

    #[test]
    fn constant_consequents_bound_output(
        n_inputs in 1usize..4,
        mf_count in 2usize..4,
        family in family_strategy(),
        consts in prop::collection::vec(-5.0f64..5.0, 64),
        point in prop::collection::vec(0.0f64..1.0, 3),
    ) {
        let inputs: Vec<InputSpec> = (0..n_inputs)
            .map(|k| InputSpec::new(format!("x{k}"), 0.0, 1.0).unwrap())
            .collect();
        let mut model = build_model(&inputs, mf_count, family, "y").unwrap();
        for (i, row) in model.consequents.iter_mut().enumerate() {
            let n = row.len();
            row[n - 1] = consts[i % consts.len()];
        }
        let lo = model.consequents.iter().map(|r| *r.last().unwrap()).fold(f64::INFINITY, f64::min);
        let hi = model.consequents.iter().map(|r| *r.last().unwrap()).fold(f64::NEG_INFINITY, f64::max);
        let y = model.forward(&point[..n_inputs]).unwrap();
        prop_assert!(y >= lo - 1e-9 && y <= hi + 1e-9, "{y} outside [{lo}, {hi}]");
    }

    #[test]
    fn design_row_reproduces_forward(
        n_inputs in 1usize..4,
        mf_count in 2usize..4,
        family in family_strategy(),
        coeffs in prop::collection::vec(-3.0f64..3.0, 256),
        point in prop::collection::vec(-0.2f64..1.2, 3),
    ) {
        let inputs: Vec<InputSpec> = (0..n_inputs)
            .map(|k| InputSpec::new(format!("x{k}"), 0.0, 1.0).unwrap())
            .collect();
        let mut model = build_model(&inputs, mf_count, family, "y").unwrap();
        let mut it = coeffs.iter().cycle();
        for row in model.consequents.iter_mut() {
            for c in row.iter_mut() {
                *c = *it.next().unwrap();
            }
        }
        let x = &point[..n_inputs];
        let row = model.design_row(x).unwrap();
        let flat: Vec<f64> = model.consequents.iter().flatten().copied().collect();
        let dot: f64 = row.iter().zip(&flat).map(|(a, b)| a * b).sum();
        let fwd = model.forward(x).unwrap();
        let scale = fwd.abs().max(1.0);
        prop_assert!((dot - fwd).abs() <= 1e-12 * scale, "{dot} vs {fwd}");
    }

    #[test]
    fn rule_permutation_leaves_forward_unchanged(
        mf_count in 2usize..4,
        family in family_strategy(),
        coeffs in prop::collection::vec(-3.0f64..3.0, 48),
        point in prop::collection::vec(0.0f64..1.0, 2),
        seed in 0u64..1000,
    ) {
        let inputs: Vec<InputSpec> = (0..2)
            .map(|k| InputSpec::new(format!("x{k}"), 0.0, 1.0).unwrap())
            .collect();
        let mut model = build_model(&inputs, mf_count, family, "y").unwrap();
        let mut it = coeffs.iter().cycle();
        for row in model.consequents.iter_mut() {
            for c in row.iter_mut() {
                *c = *it.next().unwrap();
            }
        }
        let base = model.forward(&point).unwrap();

        // Deterministic permutation of rules together with consequent rows.
        let n = model.rules.len();
        let mut order: Vec<usize> = (0..n).collect();
        let mut state = seed.wrapping_add(1);
        for i in (1..n).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let j = (state >> 33) as usize % (i + 1);
            order.swap(i, j);
        }
        let mut permuted = model.clone();
        permuted.rules = order.iter().map(|&i| model.rules[i].clone()).collect();
        permuted.consequents = order.iter().map(|&i| model.consequents[i].clone()).collect();
        let permuted_out = permuted.forward(&point).unwrap();
        let scale = base.abs().max(1.0);
        prop_assert!((permuted_out - base).abs() <= 1e-12 * scale);
    }

    #[test]
    fn rmse_dominates_mae(v in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 1..50)) {
        let (pred, actual): (Vec<f64>, Vec<f64>) = v.into_iter().unzip();
        let r = rmse(&pred, &actual).unwrap();
        let m = mae(&pred, &actual).unwrap();
        prop_assert!(r >= m - 1e-12, "rmse {r} < mae {m}");
    }

    #[test]
    fn pearson_invariant_under_affine_prediction_maps(
        v in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..40),
        a in prop::sample::select(vec![-3.0f64, -0.5, 0.25, 2.0]),
        b in -5.0f64..5.0,
    ) {
        let (pred, actual): (Vec<f64>, Vec<f64>) = v.into_iter().unzip();
        prop_assume!(actual.iter().any(|x| (x - actual[0]).abs() > 1e-6));
        prop_assume!(pred.iter().any(|x| (x - pred[0]).abs() > 1e-6));
        let r1 = r_squared(&pred, &actual).unwrap();
        let mapped: Vec<f64> = pred.iter().map(|p| a * p + b).collect();
        let r2 = r_squared(&mapped, &actual).unwrap();
        prop_assert!((r1.pearson_sq - r2.pearson_sq).abs() <= 1e-12);
    }

    #[test]
    fn determination_bounded_and_matches_pearson_for_ls_fit(
        v in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 4..40),
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = v.into_iter().unzip();
        prop_assume!(y.iter().any(|v| (v - y[0]).abs() > 1e-3));
        prop_assume!(x.iter().any(|v| (v - x[0]).abs() > 1e-3));
        let n = x.len() as f64;
        let mx = x.iter().sum::<f64>() / n;
        let my = y.iter().sum::<f64>() / n;
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
        prop_assume!(sxx > 1e-6);
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let fitted: Vec<f64> = x.iter().map(|a| slope * a + intercept).collect();

        let r = r_squared(&fitted, &y).unwrap();
        prop_assert!(r.determination <= 1.0 + 1e-12);
        if !r.degenerate && sxy.abs() > 1e-6 {
            prop_assert!(
                (r.determination - r.pearson_sq).abs() <= 1e-9,
                "{} vs {}",
                r.determination,
                r.pearson_sq
            );
        }
    }

    #[test]
    fn surrogate_is_axisymmetric(
        r_frac in 0.0f64..1.0,
        angle1 in 0.0f64..std::f64::consts::TAU,
        angle2 in 0.0f64..std::f64::consts::TAU,
        z_frac in 0.0f64..1.0,
        v in 0.001f64..0.02,
    ) {
        let p = SurrogateParams::default();
        let r = r_frac * p.radius;
        let z = z_frac * p.height;
        let a = anfis::dataset::surrogate_dpdz(r * angle1.cos(), r * angle1.sin(), z, v, &p).unwrap();
        let b = anfis::dataset::surrogate_dpdz(r * angle2.cos(), r * angle2.sin(), z, v, &p).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.abs(), "{a} vs {b}");

        // Hydrostatic bounds for the mixture.
        let lower = -p.g * p.rho_l;
        let upper = -p.g * (0.5 * p.rho_l + 0.5 * p.rho_g);
        prop_assert!(a >= lower - 1e-9 && a <= upper + 1e-9, "{a}");
    }

    #[test]
    fn surrogate_magnitude_decreases_with_velocity(
        r_frac in 0.0f64..0.95,
        z_frac in 0.0f64..1.0,
        v in 0.001f64..0.01,
    ) {
        let p = SurrogateParams::default();
        let x = r_frac * p.radius;
        let z = z_frac * p.height;
        let slow = anfis::dataset::surrogate_dpdz(x, 0.0, z, v, &p).unwrap();
        let fast = anfis::dataset::surrogate_dpdz(x, 0.0, z, v * 1.5, &p).unwrap();
        prop_assert!(fast.abs() <= slow.abs() + 1e-12, "{slow} vs {fast}");
    }

    #[test]
    fn split_partitions_exactly(frac in 0.05f64..0.95, seed in 0u64..500) {
        let ds = generate_surrogate(
            &GridSpec { n_r: 3, n_theta: 4, n_z: 2, velocities: vec![0.005, 0.01] },
            &SurrogateParams::default(),
        ).unwrap();
        let (train, test) = split(&ds, frac, seed).unwrap();
        prop_assert_eq!(train.n_rows() + test.n_rows(), ds.n_rows());
        prop_assert_eq!(train.n_rows(), (ds.n_rows() as f64 * frac).round() as usize);

        // Union as a multiset equals the original rows.
        let mut all: Vec<Vec<u64>> = Vec::new();
        for i in 0..train.n_rows() {
            all.push(train.row(i).iter().map(|v| v.to_bits()).collect());
        }
        for i in 0..test.n_rows() {
            all.push(test.row(i).iter().map(|v| v.to_bits()).collect());
        }
        let mut orig: Vec<Vec<u64>> = (0..ds.n_rows())
            .map(|i| ds.row(i).iter().map(|v| v.to_bits()).collect())
            .collect();
        all.sort();
        orig.sort();
        prop_assert_eq!(all, orig);
    }
}

#[test]
fn bank_construction_is_deterministic() {
    for family in MfFamily::ALL {
        let a = make_mf_bank(0, (-1.5, 2.5), 5, family).unwrap();
        let b = make_mf_bank(0, (-1.5, 2.5), 5, family).unwrap();
        assert_eq!(a, b);
    }
}
