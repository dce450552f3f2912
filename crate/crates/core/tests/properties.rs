use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use std::sync::OnceLock;
use tractdyn::dynamics::{fast_escape_test, iterate, render_with, Classification, OrbitParams, Palette, RenderSpec};
use tractdyn::exec::Exec;
use tractdyn::functions::FunctionModel;
use tractdyn::growth::build_profile;
use tractdyn::odeorder::{newton_puiseux, order_bound, parse_equation, GaussRat};
use tractdyn::tract::{locate_tract, TractDescriptor, Window};
use tractdyn::Complex64;

fn tract(spec: &str) -> TractDescriptor {
    let m = FunctionModel::parse(spec).unwrap();
    let d = m.tract_defaults();
    locate_tract(&m, d.threshold, d.seed, Window::from_bounds(d.window, 256, 256).unwrap()).unwrap()
}

fn exp_tract() -> &'static TractDescriptor {
    static T: OnceLock<TractDescriptor> = OnceLock::new();
    T.get_or_init(|| tract("exp"))
}

fn gamma_tract() -> &'static TractDescriptor {
    static T: OnceLock<TractDescriptor> = OnceLock::new();
    T.get_or_init(|| tract("gamma_shift1"))
}

fn example1_tract() -> &'static TractDescriptor {
    static T: OnceLock<TractDescriptor> = OnceLock::new();
    T.get_or_init(|| tract("example1:lambda=1"))
}

fn rational() -> impl Strategy<Value = BigRational> {
    (-20i64..=20, 1i64..=9).prop_map(|(p, q)| BigRational::new(BigInt::from(p), BigInt::from(q)))
}

fn nonzero_gauss() -> impl Strategy<Value = GaussRat> {
    (rational(), rational())
        .prop_filter("nonzero", |(a, b)| *a != BigRational::from_integer(0.into()) || *b != BigRational::from_integer(0.into()))
        .prop_map(|(a, b)| GaussRat::new(a, b))
}

/// A differential monomial as text, e.g. `3*z^2*f*f''`.
fn monomial_text() -> impl Strategy<Value = Vec<String>> {
    (1u32..5, 0u32..3, prop::collection::vec(0usize..4, 1..4)).prop_map(|(c, zdeg, ders)| {
        let mut factors = vec![c.to_string()];
        if zdeg > 0 {
            factors.push(format!("z^{zdeg}"));
        }
        factors.extend(ders.into_iter().map(|k| format!("f{}", "'".repeat(k))));
        factors
    })
}

fn same_set<T: PartialEq>(a: &[T], b: &[T]) -> bool {
    a.len() == b.len() && a.iter().all(|x| b.contains(x))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn real_symmetric_models_commute_with_conjugation(x in -8.0f64..8.0, y in -8.0f64..8.0, which in 0usize..4) {
        let spec = ["exp", "gamma", "gamma_cos", "example1:lambda=2"][which];
        let m = FunctionModel::parse(spec).unwrap();
        let z = Complex64::new(x, y);
        prop_assume!(!m.is_near_pole(z));
        let (a, b) = (m.eval(z), m.eval(z.conj()));
        if let (Some(a), Some(b)) = (a.as_finite(), b.as_finite()) {
            prop_assert!((a.conj() - b).norm() <= 1e-9 * (1.0 + a.norm()), "{spec} at {z}: {a} vs {b}");
        }
    }

    #[test]
    fn puiseux_invariant_under_common_scaling(
        lines in prop::collection::vec((0u32..6, nonzero_gauss(), 0u32..6), 2..6),
        k in nonzero_gauss(),
    ) {
        let base = newton_puiseux(&lines);
        let scaled: Vec<_> = lines.iter().map(|(l, b, d)| (*l, &k * b, *d)).collect();
        prop_assert_eq!(base, newton_puiseux(&scaled));
    }

    #[test]
    fn puiseux_breakpoints_are_positive_and_sorted(lines in prop::collection::vec((0u32..6, nonzero_gauss(), 0u32..6), 2..6)) {
        if let Ok(ks) = newton_puiseux(&lines) {
            prop_assert!(ks.iter().all(|k| *k > BigRational::from_integer(0.into())));
            prop_assert!(ks.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn parser_is_commutative(terms in prop::collection::vec(monomial_text(), 1..5), seed in any::<u64>()) {
        let text = terms.iter().map(|f| f.join("*")).collect::<Vec<_>>().join(" + ");
        // reverse term order and rotate factors within each term
        let shuffled = terms
            .iter()
            .rev()
            .map(|f| {
                let mut f = f.clone();
                let n = f.len();
                f.rotate_left((seed as usize) % n);
                f.join("*")
            })
            .collect::<Vec<_>>()
            .join(" + ");
        let (a, b) = (parse_equation(&text), parse_equation(&shuffled));
        match (a, b) {
            (Ok(a), Ok(b)) => {
                prop_assert!(same_set(&a, &b), "{text} vs {shuffled}");
                let (ra, rb) = (order_bound(&a), order_bound(&b));
                prop_assert_eq!(ra.verdict, rb.verdict);
                prop_assert_eq!(ra.kappa_candidates, rb.kappa_candidates);
            }
            (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
        }
    }

    #[test]
    fn fast_escape_is_prefix_monotone(x in 0.5f64..8.0, y in -1.0f64..1.0, depth in 1usize..4) {
        let t = exp_tract();
        let z = Complex64::new(x, y);
        let deep = fast_escape_test(t, z, 1.0, depth).unwrap();
        if deep.passed {
            for d in 1..depth {
                prop_assert!(fast_escape_test(t, z, 1.0, d).unwrap().passed);
            }
        }
    }

    #[test]
    fn escaping_orbits_grow_from_entry(x in 2.0f64..8.0, y in -2.0f64..2.0) {
        let t = example1_tract();
        let r = iterate(t, &[], Complex64::new(x, y), &OrbitParams::default()).unwrap();
        if r.classification == Classification::EscapingInTract {
            let k = r.entry_index.unwrap();
            let lm: Vec<f64> = r.iterates.iter().skip(k).map(|v| v.log_modulus()).collect();
            prop_assert!(lm.windows(2).all(|w| w[1] >= w[0]), "{lm:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn profiles_are_convex_and_satisfy_lower_bound(lo in 8.0f64..40.0, span in 1.5f64..6.0, use_gamma in any::<bool>()) {
        let t = if use_gamma { gamma_tract() } else { exp_tract() };
        let lo = if use_gamma { lo.max(30.0) } else { lo };
        let p = build_profile(t, lo, lo * span).unwrap();
        prop_assert!(p.min_second_difference() >= -1e-6);
        prop_assert!(p.lower_bound_violations(1e-6).is_empty());
    }

    #[test]
    fn render_is_independent_of_execution(x0 in -10.0f64..0.0, y0 in -12.0f64..0.0, w in 2.0f64..8.0) {
        let window = Window::new(x0, x0 + w, y0, y0 + w, 24, 24).unwrap();
        let spec = RenderSpec::new(FunctionModel::example1(1.0), window, Palette::fig1());
        let a = render_with(&spec, Exec::Sequential).unwrap();
        let b = render_with(&spec, Exec::Parallel).unwrap();
        prop_assert_eq!(a.to_ppm(), b.to_ppm());
        prop_assert_eq!(a.histogram, b.histogram);
    }
}
