use std::collections::BTreeMap;

use bgc_core::adversary::SymmetrizationConfig;
use bgc_core::gradient::GradientVector;
use bgc_core::protocol::{EliminationReason, MatchResolution};
use bgc_core::rng::{substream, Stream};
use bgc_core::{
    check_compliance, disagreement_coverage_check, full_gradient, random_gradients, run_scheme,
    AdversaryModel, DrawPolicy, MessageStrategy, ProtocolConfig, RunOutput, SchemeParams,
    TableAttack,
};

fn run(
    params: &SchemeParams,
    model: &AdversaryModel,
    seed: u64,
    config: ProtocolConfig,
) -> (Vec<GradientVector>, Vec<usize>, RunOutput) {
    let truth = random_gradients(params, seed);
    let mut adversary = model
        .instantiate(params, &truth, substream(seed, Stream::Adversary, 0))
        .unwrap();
    let malicious = adversary.malicious().iter().copied().collect();
    let mut rng = substream(seed, Stream::Protocol, 0);
    let out = run_scheme(params, &truth, &mut adversary, config, &mut rng).unwrap();
    (truth, malicious, out)
}

fn models() -> Vec<AdversaryModel> {
    vec![
        AdversaryModel::None,
        AdversaryModel::Symmetrization(SymmetrizationConfig::per_index()),
        AdversaryModel::Symmetrization(SymmetrizationConfig::collusive()),
        AdversaryModel::Symmetrization(SymmetrizationConfig::coin_flip()),
        AdversaryModel::MessageLevel(MessageStrategy::FlipFlop),
        AdversaryModel::MessageLevel(MessageStrategy::Uniform),
        AdversaryModel::MessageLevel(MessageStrategy::Malformed),
    ]
}

#[test]
fn worked_example() {
    // four gradients 1..4; worker 0 claims -4 for the last one, so its sum is 2
    let params = SchemeParams::new(1, 1, 1, 4, 1, 1 << 16).unwrap();
    let q = params.q;
    let truth: Vec<_> = (1..=4)
        .map(|v| GradientVector::from_signed(&[v], q))
        .collect();
    let lie: Vec<_> = [1, 2, 3, -4]
        .iter()
        .map(|&v| GradientVector::from_signed(&[v], q))
        .collect();
    let model = AdversaryModel::Table(TableAttack {
        claims: BTreeMap::from([(0, lie)]),
    });
    let mut adversary = model
        .instantiate(&params, &truth, substream(0, Stream::Adversary, 0))
        .unwrap();
    let mut rng = substream(0, Stream::Protocol, 0);
    let out = run_scheme(
        &params,
        &truth,
        &mut adversary,
        ProtocolConfig::default(),
        &mut rng,
    )
    .unwrap();

    assert_eq!(out.estimate, GradientVector::from_signed(&[10], q));
    let labels: Vec<_> = out
        .transcript
        .messages
        .iter()
        .map(|m| (m.t, m.worker, m.payload.clone().unwrap()))
        .collect();
    use bgc_core::message::Message::Symbols;
    assert_eq!(
        labels,
        vec![
            (0, 0, Symbols(vec![2])),
            (0, 1, Symbols(vec![10])),
            (1, 0, Symbols(vec![3])),
            (1, 1, Symbols(vec![3])),
            (2, 0, Symbols(vec![3])),
            (2, 1, Symbols(vec![3])),
        ]
    );
    let m = &out.transcript.matches[0];
    assert_eq!(m.leaf, Some(3));
    assert_eq!(m.values, Some((q - 4, 4)));
    assert_eq!(m.resolution, MatchResolution::LocalComputation);
    assert_eq!(out.transcript.computed_indices(), vec![3]);
    assert_eq!(out.eliminated.iter().copied().collect::<Vec<_>>(), vec![0]);
    assert_eq!((out.metrics.rounds, out.metrics.local_computations), (2, 1));
    assert_eq!(out.metrics.kappa::<f64>(), 4.0);
    assert_eq!(out.metrics.total_comm::<f64>(), 6.0);
}

#[test]
fn honest_world_costs_nothing() {
    let params = SchemeParams::new(3, 2, 2, 16, 3, 5).unwrap();
    for seed in 0..20 {
        let (truth, _, out) = run(
            &params,
            &AdversaryModel::None,
            seed,
            ProtocolConfig::default(),
        );
        assert_eq!(out.estimate, full_gradient(&truth).unwrap());
        assert_eq!((out.metrics.rounds, out.metrics.local_computations), (0, 0));
        assert_eq!(out.metrics.kappa::<f64>(), 0.0);
        assert!(out.eliminated.is_empty());
        assert_eq!(out.metrics.initial_symbols, (params.n * params.d) as u64);
    }
}

#[test]
fn attack_splits_only_its_group() {
    let params = SchemeParams::new(2, 1, 2, 8, 1, 1 << 16).unwrap();
    let model = AdversaryModel::Symmetrization(SymmetrizationConfig::per_index());
    for seed in 0..20 {
        let (_, malicious, out) = run(&params, &model, seed, ProtocolConfig::default());
        let attacked = params.group_of_worker(malicious[0]);
        let groups: Vec<usize> = out.transcript.matches.iter().map(|m| m.group).collect();
        assert!(!groups.is_empty());
        assert!(groups.iter().all(|&g| g == attacked));
    }
}

#[test]
fn correctness_and_bounds_across_configurations() {
    let mut runs = 0;
    for s in 0..=4 {
        for u in 1..=s + 1 {
            for (m, len) in [(1, 4), (2, 8), (3, 5)] {
                let d = 1 + (s + u) % 3;
                let q = if (s + u + m) % 2 == 0 { 2 } else { 1 << 16 };
                let params = SchemeParams::new(s, u, m, m * len, d, q).unwrap();
                for model in models() {
                    for draw in [DrawPolicy::LowestIndex, DrawPolicy::Seeded] {
                        for seed in 0..15 {
                            let config = ProtocolConfig {
                                draw,
                                oracle_budget: None,
                            };
                            let (truth, malicious, out) = run(&params, &model, seed, config);
                            runs += 1;
                            let context = format!("{params:?} {model:?} {draw:?} seed {seed}");
                            assert!(out.complete, "{context}");
                            assert_eq!(out.estimate, full_gradient(&truth).unwrap(), "{context}");
                            assert!(
                                out.eliminated.iter().all(|j| malicious.contains(j)),
                                "{context}"
                            );
                            assert!(
                                check_compliance(&params, &out.metrics).all(),
                                "{context}: {:?}",
                                out.metrics
                            );
                            assert_eq!(out.transcript.kappa::<f64>(q), out.metrics.kappa::<f64>());
                            let refuted = out
                                .transcript
                                .eliminations
                                .iter()
                                .filter(|e| e.reason == EliminationReason::LocalComputation)
                                .count();
                            assert!(refuted >= u * out.metrics.local_computations, "{context}");
                        }
                    }
                }
            }
        }
    }
    assert_eq!(runs, 15 * 3 * 7 * 2 * 15);
}

#[test]
fn random_answers_still_reach_a_disputed_leaf() {
    let params = SchemeParams::new(3, 1, 1, 8, 2, 1 << 16).unwrap();
    let model = AdversaryModel::MessageLevel(MessageStrategy::Uniform);
    for seed in 0..1000 {
        let (_, _, out) = run(&params, &model, seed, ProtocolConfig::default());
        for m in &out.transcript.matches {
            assert!(m.rounds <= 3);
            let (a, b) = m.values.unwrap();
            assert_ne!(a, b);
        }
    }
}

#[test]
fn replication_limit_needs_no_interaction() {
    for s in 0..=5 {
        let params = SchemeParams::new(s, s + 1, 1, 8, 2, 1 << 16).unwrap();
        for model in models() {
            for seed in 0..10 {
                let (truth, _, out) = run(&params, &model, seed, ProtocolConfig::default());
                assert_eq!(out.estimate, full_gradient(&truth).unwrap());
                assert_eq!((out.metrics.rounds, out.metrics.local_computations), (0, 0));
                assert_eq!(out.metrics.kappa::<f64>(), 0.0);
                assert_eq!(*out.metrics.replication.numer(), 2 * s as u64 + 1);
            }
        }
    }
}

#[test]
fn per_index_attack_forces_one_computation_per_subset() {
    for u in 1..=4 {
        let params = SchemeParams::new(6, u, 1, 16, 1, 1 << 16).unwrap();
        let model = AdversaryModel::Symmetrization(SymmetrizationConfig::per_index());
        for seed in 0..30 {
            let truth = random_gradients(&params, seed);
            let mut adversary = model
                .instantiate(&params, &truth, substream(seed, Stream::Adversary, 0))
                .unwrap();
            let disagreement = adversary.disagreement().unwrap().clone();
            let mut rng = substream(seed, Stream::Protocol, 0);
            let out = run_scheme(
                &params,
                &truth,
                &mut adversary,
                ProtocolConfig::default(),
                &mut rng,
            )
            .unwrap();
            assert_eq!(out.metrics.local_computations, 6 / u);
            assert!(disagreement_coverage_check(&out.transcript, &disagreement));
        }
    }
}

#[test]
fn collusive_attack_needs_at_most_one_computation() {
    let params = SchemeParams::new(5, 2, 1, 8, 2, 1 << 16).unwrap();
    let model = AdversaryModel::Symmetrization(SymmetrizationConfig::collusive());
    for seed in 0..50 {
        let truth = random_gradients(&params, seed);
        let mut adversary = model
            .instantiate(&params, &truth, substream(seed, Stream::Adversary, 0))
            .unwrap();
        let disagreement = adversary.disagreement().unwrap().clone();
        let mut rng = substream(seed, Stream::Protocol, 0);
        let out = run_scheme(
            &params,
            &truth,
            &mut adversary,
            ProtocolConfig::default(),
            &mut rng,
        )
        .unwrap();
        assert!(out.metrics.local_computations <= 1);
        assert!(out
            .transcript
            .computed_indices()
            .iter()
            .all(|&i| disagreement.contains(i)));
        assert!(disagreement_coverage_check(&out.transcript, &disagreement));
    }
}

#[test]
fn oracle_budget_truncates() {
    let params = SchemeParams::new(4, 1, 1, 8, 1, 1 << 16).unwrap();
    let model = AdversaryModel::Symmetrization(SymmetrizationConfig::per_index());
    let config = ProtocolConfig {
        oracle_budget: Some(2),
        ..ProtocolConfig::default()
    };
    let (_, _, out) = run(&params, &model, 3, config);
    assert!(!out.complete);
    assert_eq!(out.metrics.local_computations, 2);
    assert_eq!(
        out.transcript.matches.last().unwrap().resolution,
        MatchResolution::Unsettled
    );
}

#[test]
fn runs_are_reproducible() {
    let params = SchemeParams::new(3, 1, 2, 16, 2, 1 << 16).unwrap();
    for model in models() {
        let config = ProtocolConfig {
            draw: DrawPolicy::Seeded,
            oracle_budget: None,
        };
        let (_, _, a) = run(&params, &model, 42, config);
        let (_, _, b) = run(&params, &model, 42, config);
        assert_eq!(a.transcript.to_jsonl(), b.transcript.to_jsonl());
        assert_eq!(a.transcript.decoder_view(), b.transcript.decoder_view());
        assert_eq!(a.metrics, b.metrics);
    }
}

#[test]
fn budget_violations_are_refused() {
    let params = SchemeParams::new(1, 1, 1, 4, 1, 1 << 16).unwrap();
    let truth = random_gradients(&params, 0);
    let table = bgc_core::ClaimedGradientTable::honest(&params, &truth);
    let model = AdversaryModel::Table(TableAttack::from_table(&table, &[0, 1]));
    assert!(model
        .instantiate(&params, &truth, substream(0, Stream::Adversary, 0))
        .is_err());
}
