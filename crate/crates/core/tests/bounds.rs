use bgc_core::bounds::{binomial, kappa_ratio};
use bgc_core::rng::{substream, Stream};
use bgc_core::{
    comm_lower, indistinguishability_check, local_comp_lower, ratio_limit, scheme_upper_bounds,
    SchemeParams,
};
use proptest::prelude::*;

fn params(s: usize, u: usize, p: usize) -> SchemeParams {
    SchemeParams::new(s, u, 1, p, 1, 1 << 16).unwrap()
}

// ln C(n, k) summed term by term, independent of the big-integer path
fn ln_binomial(n: usize, k: usize) -> f64 {
    (0..k)
        .map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln())
        .sum()
}

#[test]
fn upper_bound_values() {
    let b = scheme_upper_bounds::<f64>(&params(2, 1, 8));
    assert_eq!((b.c, b.rounds, b.kappa), (2, 6, 12.3125));
    let b = scheme_upper_bounds::<f64>(&params(10, 1, 10_000));
    assert_eq!((b.c, b.rounds, b.kappa), (10, 140, 284.0625));
    let b = scheme_upper_bounds::<f32>(&params(10, 1, 10_000));
    assert_eq!(b.kappa, 284.0625f32);
}

#[test]
fn lower_bound_values() {
    let got = comm_lower::<f64>(&params(2, 1, 8)).unwrap();
    assert!((got - 28f64.log2() / 16.0).abs() < 1e-12);
    let got = comm_lower::<f64>(&params(10, 1, 10_000)).unwrap();
    let expected = ln_binomial(10_000, 10) / std::f64::consts::LN_2 / 16.0;
    assert!((got - expected).abs() < 1e-9 * expected);
}

#[test]
fn exact_binomial_against_pascal() {
    let mut row = vec![1u128];
    for n in 1..=100usize {
        let mut next = vec![1u128; n + 1];
        for k in 1..n {
            next[k] = row[k - 1] + row[k];
        }
        row = next;
        for (k, &v) in row.iter().enumerate() {
            assert_eq!(binomial(n, k).to_string(), v.to_string());
        }
    }
}

#[test]
fn ratio_limit_values() {
    assert_eq!(ratio_limit::<f64>(&params(9, 2, 8)).unwrap(), 64.0);
    assert_eq!(ratio_limit::<f64>(&params(10, 1, 16)).unwrap(), 32.0);
    assert_eq!(ratio_limit::<f64>(&params(10, 10, 16)).unwrap(), 32.0);
}

#[test]
fn ratio_approaches_limit_slowly() {
    // the lower bound grows like ⌊s/u⌋ log_q p while the upper grows like
    // 2 (s-u+1) log2 p, so the ratio is still far off at p = 1e6
    let p = params(10, 1, 1_000_000);
    let r = kappa_ratio::<f64>(&p).unwrap();
    let limit = ratio_limit::<f64>(&p).unwrap();
    assert!(r > limit);
    let far = params(10, 1, 1 << 50);
    let far_ratio = kappa_ratio::<f64>(&far).unwrap();
    assert!((far_ratio - limit).abs() / limit < (r - limit).abs() / limit);
}

#[test]
fn computation_ticks() {
    let ticks: Vec<usize> = (1..=11)
        .map(|u| local_comp_lower(&params(10, u, 16)))
        .collect();
    assert_eq!(ticks, vec![10, 5, 3, 2, 2, 1, 1, 1, 1, 1, 0]);
}

#[test]
fn witnesses_for_small_instances() {
    let mut rng = substream(5, Stream::Adversary, 0);
    for s in 1..=5 {
        for u in 1..=s {
            for budget in 0..s / u {
                let w = indistinguishability_check(&params(s, u, 8), budget, &mut rng).unwrap();
                assert!(w.holds(), "s={s} u={u} budget={budget}");
                assert!(!w.computed.contains(&w.flip));
                assert!(w.computed.len() <= budget);
            }
        }
    }
}

#[test]
fn smallest_converse() {
    let mut rng = substream(0, Stream::Adversary, 0);
    let w = indistinguishability_check(&params(1, 1, 2), 0, &mut rng).unwrap();
    assert!(w.holds());
    assert!(w.computed.is_empty());
    assert_eq!(w.estimates.0, w.estimates.1);
}

proptest! {
    #[test]
    fn upper_dominates_lower(s in 0usize..=12, du in 0usize..=12, exp in 1u32..=20, q in prop::sample::select(vec![2u64, 5, 256, 1 << 16])) {
        let u = 1 + du % (s + 1);
        let len = (1usize << exp).max(s / u);
        let params = SchemeParams::new(s, u, 1, len, 1, q).unwrap();
        let lower = comm_lower::<f64>(&params).unwrap();
        let upper = scheme_upper_bounds::<f64>(&params).kappa;
        prop_assert!(upper >= lower);
    }
}
