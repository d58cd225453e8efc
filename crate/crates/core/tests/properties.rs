mod common;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

use zcmap::closure::{check_convergence, oracle::brute_force_paths};
use zcmap::mapper::{map_policy, verify_assignments, MapOptions};
use zcmap::policy::{
    compose_parallel, compose_serial, derive_end_to_end, Bandwidth, Context, PolicyValue, Protocol,
    QosValue, ServiceSet,
};
use zcmap::synth::{random_case, random_rules};
use zcmap::topology::{adjacency_matrix, transitivity_matrix};
use zcmap::{DevicePath, PathSet, Semiring};

use common::{closure_of, ring, universe};

fn ring_universe() -> Vec<DevicePath> {
    universe(&ring(true).astar)
}

fn path_set() -> impl Strategy<Value = PathSet> {
    let u = ring_universe();
    let len = u.len();
    proptest::sample::subsequence(u, 0..=len.min(8)).prop_map(|v| v.into_iter().collect())
}

fn services() -> impl Strategy<Value = ServiceSet> {
    let item = (0..3usize, 0u16..200, 0u16..40, any::<bool>()).prop_map(|(p, lo, w, whole)| {
        let protocol = Protocol::ALL[p];
        if whole {
            ServiceSet::protocol(protocol)
        } else {
            ServiceSet::range(protocol, lo, lo + w)
        }
    });
    proptest::collection::vec(item, 0..4).prop_map(|items| {
        items
            .iter()
            .fold(ServiceSet::empty(), |acc, s| acc.union(s))
    })
}

fn value(ctx: Context) -> BoxedStrategy<PolicyValue> {
    match ctx {
        Context::Security => services().prop_map(PolicyValue::Security).boxed(),
        Context::Measurement => services().prop_map(PolicyValue::Measurement).boxed(),
        Context::Qos => (0u64..100, services())
            .prop_map(|(mb, services)| {
                PolicyValue::Qos(QosValue {
                    bandwidth: Bandwidth::megabytes(mb),
                    services,
                })
            })
            .boxed(),
    }
}

fn context_and_values() -> impl Strategy<Value = (Context, PolicyValue, PolicyValue, PolicyValue)> {
    proptest::sample::select(Context::ALL.to_vec())
        .prop_flat_map(|ctx| (Just(ctx), value(ctx), value(ctx), value(ctx)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn union_is_a_semilattice(a in path_set(), b in path_set(), c in path_set()) {
        prop_assert_eq!(a.plus(&b).plus(&c), a.plus(&b.plus(&c)));
        prop_assert_eq!(a.plus(&b), b.plus(&a));
        prop_assert_eq!(a.plus(&a), a.clone());
        prop_assert_eq!(a.plus(&PathSet::zero()), a);
    }

    #[test]
    fn concatenation_is_a_monoid_that_distributes(a in path_set(), b in path_set(), c in path_set()) {
        prop_assert_eq!(a.times(&b).times(&c), a.times(&b.times(&c)));
        prop_assert_eq!(a.times(&PathSet::one()), a.clone());
        prop_assert_eq!(PathSet::one().times(&a), a.clone());
        prop_assert!(a.times(&PathSet::zero()).is_zero());
        prop_assert_eq!(a.times(&b.plus(&c)), a.times(&b).plus(&a.times(&c)));
        prop_assert_eq!(a.plus(&b).times(&c), a.times(&c).plus(&b.times(&c)));
    }

    #[test]
    fn products_contain_only_valid_paths(a in path_set(), b in path_set()) {
        for p in a.times(&b).iter() {
            prop_assert!(DevicePath::new(p.steps().to_vec()).is_ok(), "{}", p);
        }
    }

    #[test]
    fn composition_laws((ctx, a, b, c) in context_and_values()) {
        let ser = |x: &PolicyValue, y: &PolicyValue| compose_serial(ctx, x, y).unwrap();
        let par = |x: &PolicyValue, y: &PolicyValue| compose_parallel(ctx, x, y).unwrap();
        prop_assert_eq!(ser(&ser(&a, &b), &c), ser(&a, &ser(&b, &c)));
        prop_assert_eq!(par(&par(&a, &b), &c), par(&a, &par(&b, &c)));
        prop_assert_eq!(ser(&a, &b), ser(&b, &a));
        prop_assert_eq!(par(&a, &b), par(&b, &a));
        prop_assert_eq!(ser(&a, &ctx.serial_identity()), a.clone());
        prop_assert_eq!(par(&a, &ctx.parallel_identity()), a.clone());
        if ctx != Context::Qos {
            prop_assert_eq!(ser(&a, &a), a.clone());
            prop_assert_eq!(par(&a, &a), a.clone());
            prop_assert_eq!(ser(&a, &par(&b, &c)), par(&ser(&a, &b), &ser(&a, &c)));
        }
    }

    #[test]
    fn closure_matches_oracle_and_converges(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let (t, tr) = random_case(&mut rng);
        let (model, astar) = closure_of(&t, &tr);
        prop_assert_eq!(&astar, &brute_force_paths(&model));
        let k = check_convergence(&adjacency_matrix(&model), &transitivity_matrix(&model)).unwrap();
        prop_assert!(k < model.zone_count().max(1));
    }

    #[test]
    fn closure_cells_are_valid_paths_between_their_zones(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let (t, tr) = random_case(&mut rng);
        let (model, astar) = closure_of(&t, &tr);
        for i in 0..model.zone_count() {
            for j in 0..model.zone_count() {
                for p in astar.get(i, j).iter() {
                    prop_assert!(DevicePath::new(p.steps().to_vec()).is_ok());
                    if i == j {
                        prop_assert!(p.is_empty());
                        continue;
                    }
                    prop_assert_eq!(p.source().map(|z| z.index()), Some(i));
                    prop_assert_eq!(p.target().map(|z| z.index()), Some(j));
                    for z in p.intermediate_zones() {
                        prop_assert!(model.is_transitive(z));
                    }
                }
            }
        }
    }

    #[test]
    fn security_mapping_covers_and_reproduces_intent(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let (t, tr) = random_case(&mut rng);
        let (model, astar) = closure_of(&t, &tr);
        let rules = random_rules(&mut rng, Context::Security, &model, &astar, 5);
        let placed = map_policy(Context::Security, &rules, &astar, &model, MapOptions::default()).unwrap();
        for rule in &rules {
            let (i, j) = (model.zone_id(&rule.src).unwrap(), model.zone_id(&rule.dst).unwrap());
            let mine: Vec<_> = placed.iter().filter(|a| a.rule == *rule).collect();
            for p in astar.get(i.index(), j.index()).iter() {
                for step in p.steps() {
                    prop_assert!(mine.iter().any(|a| a.realizes(step)), "{} uncovered on {}", step, p);
                }
            }
            let derived = derive_end_to_end(
                Context::Security,
                |t| Some(if mine.iter().any(|a| a.realizes(t)) {
                    rule.value.clone()
                } else {
                    Context::Security.unassigned()
                }),
                astar.get(i.index(), j.index()),
            ).unwrap();
            prop_assert_eq!(&derived, &rule.value);
        }
        let report = verify_assignments(Context::Security, &rules, &astar, &model, &placed).unwrap();
        prop_assert_eq!(report.counts.total(), placed.len());
        prop_assert!(report.is_clean());
    }
}
