//! Property suites shared by the `properties` and `acceptance` targets.
//! Each suite returns `Err` with the first counterexample it finds.
#![allow(dead_code)]

use std::collections::BTreeSet;

use feudalgain::belief::{focus_update, initial_belief, BeliefState, TurnEvidence};
use feudalgain::dialogue::{
    run_dialogue, AlwaysBye, DialogueConfig, DialoguePolicy, ScriptedOracle, SelectionMode,
};
use feudalgain::domain::{ActType, Domain, SystemAction, DONTCARE};
use feudalgain::feudal::{apply_masks, PolicyConfig, PolicySet, ReplayBuffer, Variant};
use feudalgain::neural::{dueling_combine, Activation, Head, Network, NetworkSpec, Noise};
use feudalgain::reward::{js_divergence, thresholded_gain};
use feudalgain::rng::{from_seed, DialogueRng};
use feudalgain::usersim::EnvProfile;
use ndarray::Array2;
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::Rng;

pub const JS_CASES: u32 = 1000;
pub const JS_TOL: f64 = 1e-12;
pub const TRACKER_CASES: u32 = 1000;
pub const TRACKER_TOL: f64 = 1e-9;
pub const GRADIENT_CONFIGS: usize = 24;
pub const GRADIENT_TOL: f64 = 1e-4;
pub const MASK_STATES: u32 = 10_000;

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    })
}

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    runner(cases)
        .run(&strategy, test)
        .map_err(|e| e.to_string())
}

/// Points on the simplex of dimension `n`, often with zero entries.
pub fn simplex(n: usize) -> impl Strategy<Value = Vec<f64>> {
    (
        prop::collection::vec(0.0f64..1.0, n),
        prop::collection::vec(prop::bool::weighted(0.3), n),
        0..n,
    )
        .prop_map(|(raw, zero, keep)| {
            let mut v: Vec<f64> = raw
                .iter()
                .zip(&zero)
                .enumerate()
                .map(|(i, (&x, &z))| if z && i != keep { 0.0 } else { x })
                .collect();
            if v.iter().sum::<f64>() <= 0.0 {
                v[keep] = 1.0;
            }
            let s: f64 = v.iter().sum();
            v.iter_mut().for_each(|x| *x /= s);
            v
        })
}

fn entropy_bits(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| x * x.log2())
        .sum::<f64>()
}

/// JS through the entropy identity `H(m) - (H(p) + H(q)) / 2`.
pub fn js_oracle(p: &[f64], q: &[f64]) -> f64 {
    let m: Vec<f64> = p.iter().zip(q).map(|(a, b)| (a + b) / 2.0).collect();
    entropy_bits(&m) - (entropy_bits(p) + entropy_bits(q)) / 2.0
}

pub fn js_suite() -> Result<(), String> {
    let pairs = (2usize..8).prop_flat_map(|n| (simplex(n), simplex(n)));
    run(JS_CASES, pairs, |(p, q)| {
        let pq = js_divergence(&p, &q).unwrap();
        let qp = js_divergence(&q, &p).unwrap();
        prop_assert!((pq - qp).abs() <= JS_TOL, "asymmetric: {pq} vs {qp}");
        prop_assert!((0.0..=1.0).contains(&pq));
        prop_assert!(
            (pq - js_oracle(&p, &q)).abs() <= JS_TOL,
            "oracle mismatch for {p:?} {q:?}"
        );
        prop_assert!(js_divergence(&p, &p).unwrap().abs() <= JS_TOL);
        let disjoint = p.iter().zip(&q).all(|(a, b)| *a == 0.0 || *b == 0.0);
        if disjoint {
            prop_assert!((pq - 1.0).abs() <= JS_TOL);
        }
        Ok(())
    })?;
    run(
        JS_CASES,
        (-1.0f64..2.0, -1.0f64..2.0, 0.0f64..1.0),
        |(a, b, delta)| {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(thresholded_gain(lo, delta) <= thresholded_gain(hi, delta));
            Ok(())
        },
    )
}

fn cr() -> Domain {
    Domain::cambridge_restaurants()
}

/// Random evidence for a random subset of slots; the last element is
/// whether every touched slot receives full mass.
fn evidence_strategy(domain: &Domain) -> impl Strategy<Value = TurnEvidence> {
    let onto = domain.ontology.clone();
    let n = onto.num_slots();
    let sizes: Vec<usize> = (0..n).map(|s| onto.support_len(s) - 1).collect();
    (
        prop::collection::vec(prop::bool::weighted(0.6), n),
        prop::collection::vec(prop::collection::vec(0.0f64..1.0, 8), n),
        prop::collection::vec(0.0f64..=1.0, n),
        prop::bool::weighted(0.2),
    )
        .prop_map(move |(touch, raw, total, full)| {
            let mut ev = TurnEvidence::empty();
            for s in 0..n {
                if !touch[s] {
                    continue;
                }
                let w = &raw[s][..sizes[s]];
                let z: f64 = w.iter().sum();
                if z <= 0.0 {
                    continue;
                }
                let mass = if full { 1.0 } else { total[s] };
                for (v, &x) in w.iter().enumerate() {
                    if x > 0.0 {
                        let value = onto.support_value(s, v).to_string();
                        ev.add_mass(&onto.slot(s).name, &value, mass * x / z);
                    }
                }
            }
            ev
        })
}

fn belief_strategy(domain: &Domain) -> impl Strategy<Value = BeliefState> {
    let d = domain.clone();
    prop::collection::vec(evidence_strategy(domain), 0..4).prop_map(move |evs| {
        let mut b = initial_belief(&d.ontology);
        for ev in &evs {
            b = focus_update(&d.ontology, &b, ev).unwrap();
        }
        b
    })
}

pub fn tracker_suite() -> Result<(), String> {
    let d = cr();
    let onto = d.ontology.clone();
    run(
        TRACKER_CASES,
        (belief_strategy(&d), evidence_strategy(&d)),
        |(b, ev)| {
            let next = focus_update(&onto, &b, &ev).unwrap();
            prop_assert_eq!(next.turn, b.turn + 1);
            for (s, (before, after)) in b.slots.iter().zip(&next.slots).enumerate() {
                let sum: f64 = after.probs.iter().sum();
                prop_assert!(
                    (sum - 1.0).abs() <= TRACKER_TOL,
                    "slot {} sums to {}",
                    s,
                    sum
                );
                prop_assert!(after.probs.iter().all(|&p| p >= 0.0));
                let name = &onto.slot(s).name;
                let mut q = vec![0.0; before.probs.len()];
                if let Some(m) = ev.slot_mass.get(name) {
                    for (v, &mass) in m {
                        q[onto.support_index(s, v).unwrap()] += mass;
                    }
                }
                let m: f64 = q.iter().sum();
                for i in 0..q.len() {
                    let expected = q[i] + (1.0 - m) * before.probs[i];
                    prop_assert!(
                        (after.probs[i] - expected).abs() <= TRACKER_TOL,
                        "slot {} value {}: {} vs {}",
                        s,
                        i,
                        after.probs[i],
                        expected
                    );
                }
                if (m - 1.0).abs() < 1e-12 {
                    for i in 0..q.len() {
                        prop_assert!((after.probs[i] - q[i]).abs() <= TRACKER_TOL);
                    }
                }
                prop_assert!(after.p_none() <= before.p_none() + TRACKER_TOL);
            }
            let idle = focus_update(&onto, &b, &TurnEvidence::empty()).unwrap();
            prop_assert_eq!(&idle.slots, &b.slots);
            Ok(())
        },
    )
}

fn frozen_loss(net: &mut Network, x: &Array2<f64>, c: &Array2<f64>) -> f64 {
    (&net.forward(x.view(), Noise::Frozen).unwrap() * c).sum()
}

/// Finite-difference checks over random dense/noisy networks with every
/// head and activation. Returns the number of configurations checked.
pub fn gradient_suite() -> Result<usize, String> {
    let mut rng = from_seed(2024);
    let heads = [Head::QValues, Head::Dueling, Head::PolicyAndQ];
    let acts = [Activation::Relu, Activation::Tanh];
    let h = 1e-5;
    for case in 0..GRADIENT_CONFIGS {
        let mut spec = NetworkSpec::new(
            rng.random_range(2..6),
            &(0..rng.random_range(1..3))
                .map(|_| rng.random_range(2..6))
                .collect::<Vec<_>>(),
            rng.random_range(2..5),
            heads[case % 3],
            (case / 3) % 2 == 0,
        );
        spec.activation = acts[(case / 6) % 2];
        let mut net = Network::new(spec.clone(), &mut rng);
        let x = Array2::from_shape_simple_fn((3, spec.inputs), || rng.random_range(-1.0..1.0));
        let out = net.forward(x.view(), Noise::Sample(&mut rng)).unwrap();
        let c = Array2::from_shape_simple_fn(out.raw_dim(), || rng.random_range(-1.0..1.0));
        frozen_loss(&mut net, &x, &c);
        let analytic = net.backward(&c).unwrap();
        let lens: Vec<usize> = net.params().iter().map(|p| p.len()).collect();
        for (t, &len) in lens.iter().enumerate() {
            for k in 0..len {
                let orig = net.params()[t][k];
                net.params_mut()[t][k] = orig + h;
                let up = frozen_loss(&mut net, &x, &c);
                net.params_mut()[t][k] = orig - h;
                let down = frozen_loss(&mut net, &x, &c);
                net.params_mut()[t][k] = orig;
                let numeric = (up - down) / (2.0 * h);
                let a = analytic.0[t][k];
                let diff = (a - numeric).abs();
                if diff > 1e-8 && diff / (a.abs() + numeric.abs()) >= GRADIENT_TOL {
                    return Err(format!(
                        "config {case} ({spec:?}) tensor {t}[{k}]: {a} vs {numeric}"
                    ));
                }
            }
        }
    }
    Ok(GRADIENT_CONFIGS)
}

pub fn dueling_suite() -> Result<(), String> {
    let case = (
        -5.0f64..5.0,
        prop::collection::vec(-5.0f64..5.0, 1..8),
        -5.0f64..5.0,
    );
    run(512, case, |(v, a, shift)| {
        let q = dueling_combine(v, &a);
        let mean = q.iter().sum::<f64>() / q.len() as f64;
        prop_assert!(
            (mean - v).abs() <= 1e-12,
            "mean Q {} differs from V {}",
            mean,
            v
        );
        let shifted: Vec<f64> = a.iter().map(|x| x + shift).collect();
        let q2 = dueling_combine(v, &shifted);
        for (x, y) in q.iter().zip(&q2) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
        Ok(())
    })
}

fn random_state(domain: &Domain) -> impl Strategy<Value = BeliefState> {
    let names: Vec<String> = domain
        .db
        .entities
        .iter()
        .map(|e| e.name().to_string())
        .collect();
    let req: Vec<String> = domain.ontology.requestable().to_vec();
    let n = domain.ontology.num_slots();
    let sizes: Vec<usize> = (0..n).map(|s| domain.ontology.support_len(s)).collect();
    let base = initial_belief(&domain.ontology);
    let slots = sizes.into_iter().map(simplex).collect::<Vec<_>>();
    (
        slots,
        prop::option::of(0..names.len()),
        prop::collection::vec(prop::bool::ANY, req.len()),
        0u32..25,
    )
        .prop_map(move |(dists, offered, asked, turn)| {
            let mut b = base.clone();
            for (slot, p) in b.slots.iter_mut().zip(dists) {
                slot.probs = p;
            }
            b.offered_entity = offered.map(|i| names[i].clone());
            b.requested = req
                .iter()
                .zip(&asked)
                .filter(|(_, &a)| a)
                .map(|(r, _)| r.clone())
                .collect::<BTreeSet<_>>();
            b.last_user_act = Some(ActType::Inform);
            b.turn = turn;
            b
        })
}

fn policies(domain: &Domain) -> Vec<PolicySet> {
    let cfg = PolicyConfig::default();
    [
        Variant::FEUDALGAIN,
        Variant::FEUDAL,
        Variant::FEUDAL_NN,
        Variant::FEUDAL.without_pass(),
    ]
    .into_iter()
    .enumerate()
    .map(|(i, v)| PolicySet::new(v, cfg.clone(), domain, &mut from_seed(100 + i as u64)).unwrap())
    .collect()
}

/// Masked actions are never emitted, in training or evaluation mode, by
/// any variant.
pub fn mask_suite() -> Result<(), String> {
    let d = cr();
    let mut sets = policies(&d);
    let mut rng = from_seed(77);
    let mut runner = runner(MASK_STATES);
    let strategy = random_state(&d);
    let mut failure = None;
    for i in 0..MASK_STATES {
        let b = strategy
            .new_tree(&mut runner)
            .map_err(|e| e.to_string())?
            .current();
        let mask = apply_masks(&b, true);
        let policy = &mut sets[i as usize % 4];
        for mode in [SelectionMode::Train, SelectionMode::Eval] {
            let a = policy.decide(&b, &d, true, mode, &mut rng).action;
            if !mask.allows(a) {
                failure = Some(format!("{a} emitted although masked, state {b:?}"));
            }
        }
        if failure.is_some() {
            break;
        }
    }
    failure.map_or(Ok(()), Err)
}

/// FeudalGain never emits or stores a pass action.
pub fn mode_exclusivity_suite() -> Result<(), String> {
    let d = cr();
    let env: EnvProfile = "env3".parse().unwrap();
    let dcfg = DialogueConfig::default();
    for seed in 0..4 {
        let mut cfg = PolicyConfig::default();
        cfg.dqn.batch_size = 8;
        let mut p = PolicySet::new(Variant::FEUDALGAIN, cfg, &d, &mut from_seed(seed)).unwrap();
        let mut rng = from_seed(1000 + seed);
        for _ in 0..40 {
            let ep = run_dialogue(&mut p, &env, &d, &mut rng, &dcfg, SelectionMode::Train).unwrap();
            if ep.turns.iter().any(|t| t.action == SystemAction::Pass) {
                return Err("pass emitted".into());
            }
            p.learn(&ep, &d, env.action_masks, &mut rng)
                .map_err(|e| e.to_string())?;
        }
        if p.pi_i.replay().is_empty() {
            return Err("no slot transitions were stored".into());
        }
        if p.pi_i.replay().iter().any(|t| t.action >= 3) {
            return Err("pass stored in the information policy's replay".into());
        }
    }
    Ok(())
}

pub fn query_monotone_suite() -> Result<(), String> {
    let d = cr();
    let onto = d.ontology.clone();
    let n = onto.num_slots();
    let picks = prop::collection::vec((prop::bool::ANY, 0usize..16), n);
    run(512, (picks, 0..n), |(picks, extra)| {
        let value = |s: usize, k: usize| {
            let vals = &onto.slot(s).values;
            if k == 15 {
                DONTCARE.to_string()
            } else {
                vals[k % vals.len()].clone()
            }
        };
        let mut cons: Vec<(String, String)> = Vec::new();
        for (s, &(on, k)) in picks.iter().enumerate() {
            if on && s != extra {
                cons.push((onto.slot(s).name.clone(), value(s, k)));
            }
        }
        let before = d.db.query(&onto, &cons).unwrap().len();
        cons.push((onto.slot(extra).name.clone(), value(extra, picks[extra].1)));
        let after = d.db.query(&onto, &cons).unwrap().len();
        prop_assert!(after <= before);
        Ok(())
    })
}

pub fn replay_suite() -> Result<(), String> {
    run(
        256,
        (1usize..50, prop::collection::vec(0u32..1000, 0..200)),
        |(cap, items)| {
            let mut buf = ReplayBuffer::new(cap);
            for &x in &items {
                buf.push(x);
                prop_assert!(buf.len() <= cap);
            }
            let kept: Vec<u32> = buf.iter().copied().collect();
            let start = items.len().saturating_sub(cap);
            prop_assert_eq!(kept, items[start..].to_vec());
            Ok(())
        },
    )
}

/// Permuting the slot rows permutes π_i's Q rows the same way.
pub fn slot_sharing_suite() -> Result<(), String> {
    let d = cr();
    let sets = policies(&d);
    let n = d.ontology.num_slots();
    let perms = Just((0..n).collect::<Vec<usize>>()).prop_shuffle();
    run(256, (random_state(&d), perms), |(b, perm)| {
        for p in &sets {
            let f = feudalgain::feudal::belief_features(p.layout(), &b, &d);
            let dim = f.slot_dim;
            let rows = Array2::from_shape_vec((n, dim), f.slots.clone()).unwrap();
            let mut permuted = Array2::zeros((n, dim));
            for (i, &j) in perm.iter().enumerate() {
                permuted.row_mut(i).assign(&rows.row(j));
            }
            let q = p.pi_i.q_eval(rows.view()).unwrap();
            let qp = p.pi_i.q_eval(permuted.view()).unwrap();
            for (i, &j) in perm.iter().enumerate() {
                for k in 0..q.ncols() {
                    prop_assert!((qp[[i, k]] - q[[j, k]]).abs() <= 1e-12);
                }
            }
        }
        Ok(())
    })
}

/// Episode length and return bounds for learned, scripted and trivial
/// policies on every environment; the scripted oracle never fails on a
/// noiseless environment.
pub fn episode_bounds_suite(dialogues: u64) -> Result<(), String> {
    let d = cr();
    let dcfg = DialogueConfig::default();
    for env_name in ["env1", "env2", "env3", "env4", "env5", "env6"] {
        let env: EnvProfile = env_name.parse().unwrap();
        let mut learned = PolicySet::new(
            Variant::FEUDALGAIN,
            PolicyConfig::default(),
            &d,
            &mut from_seed(5),
        )
        .unwrap();
        let mut pols: Vec<(&str, Box<dyn DialoguePolicy>)> = vec![
            ("oracle", Box::new(ScriptedOracle)),
            ("bye", Box::new(AlwaysBye)),
        ];
        let mut rng: DialogueRng = from_seed(9);
        for i in 0..dialogues {
            let ep = run_dialogue(
                &mut learned,
                &env,
                &d,
                &mut rng,
                &dcfg,
                SelectionMode::Train,
            )
            .map_err(|e| e.to_string())?;
            check_bounds(&ep, &dcfg, env_name)?;
            for (name, p) in pols.iter_mut() {
                let ep = run_dialogue(p.as_mut(), &env, &d, &mut rng, &dcfg, SelectionMode::Eval)
                    .map_err(|e| e.to_string())?;
                check_bounds(&ep, &dcfg, env_name)?;
                if *name == "oracle" && env.semantic_error_rate == 0.0 && !ep.success {
                    return Err(format!(
                        "oracle failed dialogue {i} on {env_name}: {}",
                        ep.to_json()
                    ));
                }
            }
        }
    }
    Ok(())
}

fn check_bounds(ep: &feudalgain::Episode, dcfg: &DialogueConfig, env: &str) -> Result<(), String> {
    let r = ep.total_reward();
    if ep.len() > dcfg.max_turns || ep.is_empty() || !(-25.0..=19.0).contains(&r) {
        return Err(format!("{env}: {} turns, return {r}", ep.len()));
    }
    Ok(())
}

/// Episodes are a pure function of the seed.
pub fn determinism_suite() -> Result<(), String> {
    let d = cr();
    let env: EnvProfile = "env5".parse().unwrap();
    let dcfg = DialogueConfig::default();
    run(32, any::<u64>(), |seed| {
        let trace = || {
            let mut p = PolicySet::new(
                Variant::FEUDALGAIN,
                PolicyConfig::default(),
                &d,
                &mut from_seed(seed),
            )
            .unwrap();
            run_dialogue(
                &mut p,
                &env,
                &d,
                &mut from_seed(seed),
                &dcfg,
                SelectionMode::Train,
            )
            .unwrap()
            .to_json()
        };
        prop_assert_eq!(trace(), trace());
        Ok(())
    })
}
