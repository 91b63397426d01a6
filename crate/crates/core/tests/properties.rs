use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use gptforge::embed::{dual_cone, ConeDescription};
use gptforge::embed::{embed_test, EmbedOptions};
use gptforge::lp::cone_membership;
use gptforge::quantum::{stabilizer_fragment, unitary_channel, HermitianBasis};
use gptforge::quotient::{quotient, Procedure, Signature, StatsTable};
use gptforge::zoo::qubit_stabilizer_stats;
use gptforge::{
    compose_par, compose_seq, evaluate, GptEffect, GptFragment, GptState, GptTransformation, SystemRegistry,
    SystemSpec,
};

fn vec_of(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, len)
}

fn pair_registry(da: usize, db: usize) -> (SystemRegistry, Arc<SystemSpec>, Arc<SystemSpec>) {
    let mut reg = SystemRegistry::new();
    let a = reg.register(SystemSpec::with_leading_unit("A", da).unwrap()).unwrap();
    let b = reg.register(SystemSpec::with_leading_unit("B", db).unwrap()).unwrap();
    reg.register_composite("AB", "A", "B").unwrap();
    (reg, a, b)
}

fn transform(label: &str, sys: &Arc<SystemSpec>, entries: &[f64]) -> GptTransformation {
    let d = sys.dim;
    GptTransformation::new(label, sys.clone(), sys.clone(), DMatrix::from_row_slice(d, d, entries), false).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evaluation_is_bilinear(
        s1 in vec_of(3), s2 in vec_of(3), e1 in vec_of(3), e2 in vec_of(3), t in vec_of(9),
        a in -2.0..2.0f64, b in -2.0..2.0f64,
    ) {
        let sys = Arc::new(SystemSpec::with_leading_unit("x", 3).unwrap());
        let st = |v: &[f64]| GptState::subnormalized("s", sys.clone(), DVector::from_row_slice(v)).unwrap();
        let ef = |v: &[f64]| GptEffect::new("e", sys.clone(), DVector::from_row_slice(v)).unwrap();
        let tr = transform("t", &sys, &t);
        let mixed: Vec<f64> = s1.iter().zip(&s2).map(|(x, y)| a * x + b * y).collect();
        let lhs = evaluate(&ef(&e1), &tr, &st(&mixed)).unwrap();
        let rhs = a * evaluate(&ef(&e1), &tr, &st(&s1)).unwrap() + b * evaluate(&ef(&e1), &tr, &st(&s2)).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
        let emix: Vec<f64> = e1.iter().zip(&e2).map(|(x, y)| a * x + b * y).collect();
        let lhs = evaluate(&ef(&emix), &tr, &st(&s1)).unwrap();
        let rhs = a * evaluate(&ef(&e1), &tr, &st(&s1)).unwrap() + b * evaluate(&ef(&e2), &tr, &st(&s1)).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
    }

    #[test]
    fn parallel_and_sequential_composition_interchange(
        t1 in vec_of(4), t2 in vec_of(4), s1 in vec_of(9), s2 in vec_of(9),
    ) {
        let (reg, a, b) = pair_registry(2, 3);
        let (t1, t2) = (transform("t1", &a, &t1), transform("t2", &a, &t2));
        let (s1, s2) = (transform("s1", &b, &s1), transform("s2", &b, &s2));
        let lhs = compose_seq(&compose_par(&reg, &t2, &s2).unwrap(), &compose_par(&reg, &t1, &s1).unwrap()).unwrap();
        let rhs = compose_par(&reg, &compose_seq(&t2, &t1).unwrap(), &compose_seq(&s2, &s1).unwrap()).unwrap();
        prop_assert!((lhs.mat - rhs.mat).amax() <= 1e-12);
        prop_assert_eq!(lhs.in_system.id.as_str(), "AB");
    }

    #[test]
    fn unitary_channels_preserve_the_unit(th in 0.0..6.3f64, ph in 0.0..6.3f64, la in 0.0..6.3f64) {
        use num_complex::Complex64 as C;
        let u = DMatrix::from_row_slice(2, 2, &[
            C::new((th / 2.0).cos(), 0.0),
            -C::from_polar((th / 2.0).sin(), la),
            C::from_polar((th / 2.0).sin(), ph),
            C::from_polar((th / 2.0).cos(), ph + la),
        ]);
        let basis = HermitianBasis::gell_mann(2);
        let sys = Arc::new(SystemSpec::with_leading_unit("q", 4).unwrap());
        let t = unitary_channel("u", &u, &basis, sys, 1e-9).unwrap();
        prop_assert!(t.channel_residual() <= 1e-12);
        let tt = compose_seq(&t, &t).unwrap();
        prop_assert!(tt.channel && tt.channel_residual() <= 1e-12);
    }

    #[test]
    fn double_dual_is_the_original_cone(
        dim in 2usize..5, extra in 0usize..4, seed in prop::collection::vec(-1.0..1.0f64, 40),
    ) {
        // pointed full-dimensional cones over random polytopes around (1, 0, ..)
        let n = dim + extra;
        let rays: Vec<DVector<f64>> = (0..n)
            .map(|i| DVector::from_fn(dim, |k, _| if k == 0 { 1.0 } else { seed[(i * dim + k) % 40] }))
            .chain((1..dim).map(|k| DVector::from_fn(dim, |j, _| if j == 0 { 1.0 } else if j == k { 2.0 } else { 0.0 })))
            .chain(std::iter::once(DVector::from_fn(dim, |j, _| if j == 0 { 1.0 } else { -2.0 })))
            .collect();
        let cone = ConeDescription::new(dim, rays.clone()).unwrap();
        let dual = dual_cone(&cone, 1e-10).unwrap();
        let back = dual_cone(&dual, 1e-10).unwrap();
        for r in &rays {
            prop_assert!(cone_membership(&back.rays, r, 1e-8).unwrap());
        }
        for r in &back.rays {
            prop_assert!(cone_membership(&rays, r, 1e-8).unwrap());
        }
        for f in &dual.rays {
            prop_assert!(rays.iter().all(|r| f.dot(r) >= -1e-9));
        }
    }
}

fn random_fragment(dim: usize, states: &[Vec<f64>], effects: &[Vec<f64>]) -> GptFragment {
    let mut reg = SystemRegistry::new();
    let sys = reg.register(SystemSpec::with_leading_unit("s", dim).unwrap()).unwrap();
    let mut f = GptFragment::new(reg);
    for (i, x) in states.iter().enumerate() {
        let v = DVector::from_fn(dim, |k, _| if k == 0 { 1.0 } else { x[k - 1] });
        f.states.push(GptState::new(format!("s{i}"), sys.clone(), v).unwrap());
    }
    for (i, y) in effects.iter().enumerate() {
        let l1: f64 = y.iter().map(|t| t.abs()).sum::<f64>().max(1.0);
        let e = DVector::from_fn(dim, |k, _| if k == 0 { 0.5 } else { 0.5 * y[k - 1] / l1 });
        f.effects.push(GptEffect::new(format!("e{i}"), sys.clone(), e).unwrap());
    }
    f.effects.push(GptEffect::unit(sys));
    f.with_cones_from_members()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn dropping_a_state_keeps_an_embedding(
        states in prop::collection::vec(vec_of(2), 3..6),
        effects in prop::collection::vec(vec_of(2), 2..5),
    ) {
        let full = random_fragment(3, &states, &effects);
        let out = embed_test(&full, "s", EmbedOptions::default()).unwrap();
        if out.is_feasible() {
            let sub = random_fragment(3, &states[1..], &effects);
            prop_assert!(embed_test(&sub, "s", EmbedOptions::default()).unwrap().is_feasible());
        }
    }

    #[test]
    fn quotient_ignores_order_and_context_labels(perm_seed in any::<u64>(), rename in any::<bool>()) {
        let table = qubit_stabilizer_stats().unwrap();
        let base = quotient(&table, 1e-9).unwrap();
        let mut shuffled = table.clone();
        // rotate and optionally rename contexts; tester preparations keep their context
        let k = (perm_seed % shuffled.procedures.len() as u64) as usize;
        shuffled.procedures.rotate_left(k);
        if rename {
            for p in shuffled.procedures.iter_mut().filter(|p| p.context != "tester" && p.context != "measure-Z" && p.context != "measure-X") {
                p.context = format!("{}-renamed", p.context);
            }
        }
        let q = quotient(&shuffled, 1e-9).unwrap();
        for sig in [
            |s: &Signature| matches!(s, Signature::Preparation { .. }),
            |s: &Signature| matches!(s, Signature::Effect { .. }),
            |s: &Signature| matches!(s, Signature::Transformation { .. }),
        ] {
            prop_assert_eq!(q.classes.count(sig), base.classes.count(sig));
        }
        // same partition of (id, base context) pairs
        let strip = |c: &str| c.trim_end_matches("-renamed").to_string();
        for p in &shuffled.procedures {
            for r in &shuffled.procedures {
                let same_new = q.classes.index[&p.key()] == q.classes.index[&r.key()];
                let same_old = base.classes.index[&(p.id.clone(), strip(&p.context))]
                    == base.classes.index[&(r.id.clone(), strip(&r.context))];
                prop_assert_eq!(same_new, same_old);
            }
        }
    }
}

/// Re-tabulating one representative per class gives the same classes.
#[test]
fn quotient_is_idempotent() {
    let table = qubit_stabilizer_stats().unwrap();
    let q = quotient(&table, 1e-9).unwrap();
    let reps: Vec<Procedure> = q
        .classes
        .classes
        .iter()
        .map(|c| Procedure {
            id: c.members[0].0.clone(),
            context: c.members[0].1.clone(),
            signature: c.signature.clone(),
            stats: c.stats.clone(),
            parts: vec![],
        })
        .collect();
    let again = StatsTable {
        systems: table.systems.clone(),
        procedures: reps,
        deterministic_effect_ids: vec!["discard@measure-Z".into()],
    };
    let q2 = quotient(&again, 1e-9).unwrap();
    assert_eq!(q2.classes.classes.len(), q.classes.classes.len());
    for (a, b) in q.fragment.states.iter().zip(&q2.fragment.states) {
        assert!((&a.vec - &b.vec).amax() <= 1e-12);
    }
    for c in &q2.classes.classes {
        assert_eq!(c.members.len(), 1);
    }
}

#[test]
fn prepare_measure_qubit_stabilizer_embeds() {
    let f = stabilizer_fragment(2).unwrap().prepare_measure();
    assert!(embed_test(&f, "qubit", EmbedOptions::default()).unwrap().is_feasible());
}
