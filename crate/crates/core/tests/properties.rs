use kantorovich::group_model::GroupSpace;
use kantorovich::kernels::{Kernel, KernelFamily, Scaling};
use kantorovich::operators::{apply, OperatorSpec, Variant};
use kantorovich::orlicz::{luxemburg_norm, modular, LuxemburgConvention, PhiFunction};
use kantorovich::signal::Combination;
use kantorovich::{parse_expression, parse_piecewise, Domain, PieceSpec, PiecewiseFunction};
use proptest::prelude::*;

/// Step function with the given cut points (sorted, distinct) and levels.
fn step(cuts: &[f64], levels: &[f64]) -> PiecewiseFunction {
    assert_eq!(levels.len(), cuts.len() + 1);
    let mut pieces = vec![PieceSpec::new(&format!("x<{}", cuts[0]), &levels[0].to_string())];
    for i in 1..cuts.len() {
        pieces.push(PieceSpec::new(
            &format!("{}<=x<{}", cuts[i - 1], cuts[i]),
            &levels[i].to_string(),
        ));
    }
    pieces.push(PieceSpec::new(
        &format!("x>={}", cuts[cuts.len() - 1]),
        &levels[cuts.len()].to_string(),
    ));
    parse_piecewise(&pieces, Domain::Real).unwrap()
}

fn step_strategy() -> impl Strategy<Value = PiecewiseFunction> {
    (1usize..5)
        .prop_flat_map(|n| {
            (
                prop::collection::btree_set(-300i32..300, n),
                prop::collection::vec(-30i32..30, n + 1),
            )
        })
        .prop_map(|(cuts, levels)| {
            let cuts: Vec<f64> = cuts.into_iter().map(|c| c as f64 / 100.0).collect();
            let levels: Vec<f64> = levels.into_iter().map(|l| l as f64 / 10.0).collect();
            step(&cuts, &levels)
        })
}

fn variant_strategy() -> impl Strategy<Value = Variant> {
    prop_oneof![
        Just(Variant::SamplingKantorovich),
        Just(Variant::SamplingKantorovichSymmetric),
        Just(Variant::ConvKantorovichScaled),
        Just(Variant::ConvKantorovichUnit),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn operators_are_linear(
        f in step_strategy(),
        g in step_strategy(),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        variant in variant_strategy(),
        w in 2.0f64..20.0,
        z in -4.0f64..4.0,
    ) {
        let spec = OperatorSpec::standard(variant).with_w(w).unwrap();
        let combo = Combination::new(a, &f, b, &g).unwrap();
        let lhs = apply(&spec, &combo, z).unwrap();
        let rhs = a * apply(&spec, &f, z).unwrap() + b * apply(&spec, &g, z).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-6 * (1.0 + rhs.abs()), "{lhs} vs {rhs}");
    }

    #[test]
    fn nonnegative_kernels_preserve_order(
        f in step_strategy(),
        shift in 0.0f64..2.0,
        w in 2.0f64..20.0,
        z in -4.0f64..4.0,
    ) {
        // f + shift ≥ f pointwise; a nonnegative kernel keeps the order
        let family = KernelFamily::new(Kernel::bspline(3).unwrap(), Scaling::DilateArgument, 1).unwrap();
        let spec = OperatorSpec::new(Variant::SamplingKantorovich, family).unwrap().with_w(w).unwrap();
        let one = kantorovich::signal::constant(Domain::Real, 1.0);
        let lifted = Combination::new(1.0, &f, shift, &one).unwrap();
        let lo = apply(&spec, &f, z).unwrap();
        let hi = apply(&spec, &lifted, z).unwrap();
        prop_assert!(hi >= lo - 1e-9);
        prop_assert!((hi - lo - shift).abs() < 1e-8);
    }

    #[test]
    fn translation_covariance_of_scaled_convolution(
        f in step_strategy(),
        w in 2.0f64..20.0,
        z in -3.0f64..3.0,
        k in -5i32..5,
    ) {
        // shifting f by a lattice step of the cells shifts S_w f by the same amount
        let h = k as f64 / w;
        let spec = OperatorSpec::standard(Variant::SamplingKantorovich).with_w(w).unwrap();
        let shifted = kantorovich::signal::FnSignal::new(
            Domain::Real,
            f.breakpoints().iter().map(|b| b + h).collect(),
            |x| f.eval(x - h).unwrap(),
        );
        let a = apply(&spec, &shifted, z + h).unwrap();
        let b = apply(&spec, &f, z).unwrap();
        prop_assert!((a - b).abs() < 1e-7, "{a} vs {b}");
    }

    #[test]
    fn modular_is_monotone_and_convex_in_lambda(
        f in step_strategy(),
        l1 in 0.01f64..2.0,
        l2 in 0.01f64..2.0,
        p in 1.0f64..4.0,
    ) {
        let (lo, hi) = if l1 <= l2 { (l1, l2) } else { (l2, l1) };
        let window = (-5.0, 5.0);
        for phi in [PhiFunction::power(p).unwrap(), PhiFunction::interpolation(1.0, 1.0).unwrap()] {
            let a = modular(&phi, &f, window, lo, 1e-10).unwrap().value;
            let b = modular(&phi, &f, window, hi, 1e-10).unwrap().value;
            prop_assert!(a <= b * (1.0 + 1e-9) + 1e-12);
            // convexity with φ(0) = 0: I(μλg) ≤ μ·I(λg) for μ ≤ 1
            let mu = lo / hi;
            prop_assert!(a <= mu * b * (1.0 + 1e-9) + 1e-12);
        }
    }

    #[test]
    fn luxemburg_norm_is_homogeneous(f in step_strategy(), c in 0.1f64..5.0) {
        let window = (-5.0, 5.0);
        let phi = PhiFunction::interpolation(1.0, 1.0).unwrap();
        let zero = kantorovich::signal::constant(Domain::Real, 0.0);
        let scaled = Combination::new(c, &f, 0.0, &zero).unwrap();
        let n = luxemburg_norm(&phi, &f, window, LuxemburgConvention::Standard, 1e-11).unwrap();
        let m = luxemburg_norm(&phi, &scaled, window, LuxemburgConvention::Standard, 1e-11).unwrap();
        prop_assert!((m - c * n).abs() <= 1e-7 * (1.0 + c * n));
    }

    #[test]
    fn group_laws(a in -50.0f64..50.0, b in -50.0f64..50.0, c in -50.0f64..50.0) {
        let real = GroupSpace::RealLine;
        let ab_c = real.operate(&real.operate(&[a], &[b]).unwrap(), &[c]).unwrap();
        let a_bc = real.operate(&[a], &real.operate(&[b], &[c]).unwrap()).unwrap();
        prop_assert!((ab_c[0] - a_bc[0]).abs() <= 1e-12 * (1.0 + a.abs() + b.abs() + c.abs()));
        let pos = GroupSpace::PositiveRealsLog;
        let (x, y, u) = ((a / 10.0).exp(), (b / 10.0).exp(), (c / 10.0).exp());
        let l = pos.operate(&pos.operate(&[x], &[y]).unwrap(), &[u]).unwrap()[0];
        let r = pos.operate(&[x], &pos.operate(&[y], &[u]).unwrap()).unwrap()[0];
        prop_assert!((l - r).abs() <= 1e-13 * l);
        let e = pos.operate(&[x], &pos.inverse(&[x]).unwrap()).unwrap();
        prop_assert!((e[0] - pos.neutral()[0]).abs() < 1e-14);
        let e = real.operate(&[a], &real.inverse(&[a]).unwrap()).unwrap();
        prop_assert_eq!(e, real.neutral());
    }
}

fn expr_strategy() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("x".to_string()),
        (0u32..100).prop_map(|n| n.to_string()),
        (0u32..1000).prop_map(|n| format!("{}.{}", n / 10, n % 10)),
    ];
    leaf.prop_recursive(5, 40, 3, |inner| {
        prop_oneof![
            (inner.clone(), prop::sample::select(vec!["+", "-", "*", "/", "^"]), inner.clone())
                .prop_map(|(a, op, b)| format!("({a}){op}({b})")),
            inner.clone().prop_map(|a| format!("-({a})")),
            (prop::sample::select(vec!["exp", "ln", "sin", "cos", "abs", "sinc"]), inner)
                .prop_map(|(f, a)| format!("{f}({a})")),
        ]
    })
}

fn same(a: f64, b: f64) -> bool {
    (a.is_nan() && b.is_nan()) || a == b || (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn display_round_trips(text in expr_strategy(), x in -3.0f64..3.0) {
        let e = parse_expression(&text).unwrap();
        let again = parse_expression(&e.to_string()).unwrap();
        prop_assert_eq!(&e, &again);
        prop_assert!(same(e.eval(x), again.eval(x)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn parser_never_panics(text in "[-+*/^()x0-9.e ,sincoexplabd<>=]{0,40}") {
        if let Ok(e) = parse_expression(&text) {
            let _ = e.eval(0.5);
            let again = parse_expression(&e.to_string());
            prop_assert!(again.is_ok(), "{} printed as {}", text, e);
        }
        let _ = kantorovich::funcdsl::parse_interval(&text);
    }
}
