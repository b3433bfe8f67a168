use endslab::{Element, GroupOracle, GroupSpec};
use proptest::prelude::*;

fn families() -> Vec<GroupSpec> {
    vec![
        GroupSpec::CyclicFinite { m: 7 },
        GroupSpec::Z,
        GroupSpec::ZPow { k: 3 },
        GroupSpec::Free { k: 2 },
        GroupSpec::DihedralInf,
        GroupSpec::ZCrossCyclic { m: 5 },
        GroupSpec::Lamplighter { m: 2 },
        GroupSpec::Lamplighter { m: 3 },
        GroupSpec::product(GroupSpec::Free { k: 2 }, GroupSpec::DihedralInf),
        GroupSpec::product(
            GroupSpec::Lamplighter { m: 2 },
            GroupSpec::product(GroupSpec::Z, GroupSpec::CyclicFinite { m: 3 }),
        ),
    ]
}

fn word() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0usize..64, 0..14)
}

fn element(o: &GroupOracle, w: &[usize]) -> Element {
    let n = o.generators().len();
    o.evaluate_word(&w.iter().map(|i| i % n).collect::<Vec<_>>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn group_axioms(f in 0usize..10, x in word(), y in word(), z in word()) {
        let o = GroupOracle::new(families()[f].clone()).unwrap();
        let (a, b, c) = (element(&o, &x), element(&o, &y), element(&o, &z));
        let e = o.identity();
        prop_assert!(o.contains(&a));
        prop_assert_eq!(o.multiply(&o.multiply(&a, &b), &c), o.multiply(&a, &o.multiply(&b, &c)));
        prop_assert_eq!(o.multiply(&a, &e), a.clone());
        prop_assert_eq!(o.multiply(&e, &a), a.clone());
        prop_assert_eq!(o.multiply(&a, &o.invert(&a)), e.clone());
        prop_assert_eq!(o.multiply(&o.invert(&a), &a), e);
    }

    #[test]
    fn keys_are_injective(f in 0usize..10, x in word(), y in word()) {
        let o = GroupOracle::new(families()[f].clone()).unwrap();
        let (a, b) = (element(&o, &x), element(&o, &y));
        prop_assert_eq!(a == b, o.canonical_key(&a) == o.canonical_key(&b));
    }

    #[test]
    fn element_json_round_trip(f in 0usize..10, x in word()) {
        let o = GroupOracle::new(families()[f].clone()).unwrap();
        let a = element(&o, &x);
        let back: Element = serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
        prop_assert_eq!(back, a);
    }
}

#[test]
fn generating_sets_are_symmetric_and_nontrivial() {
    for spec in families() {
        let o = GroupOracle::new(spec.clone()).unwrap();
        let gens = o.generators();
        for (i, g) in gens.iter().enumerate() {
            assert_ne!(*g, o.identity(), "{spec}");
            assert_eq!(gens[o.inverse_generator(i)], o.invert(g), "{spec}");
        }
        let mut keys: Vec<_> = gens.iter().map(|g| o.canonical_key(g)).collect();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), gens.len(), "{spec}");
    }
}

#[test]
fn spec_json_round_trip() {
    for spec in families() {
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<GroupSpec>(&json).unwrap(), spec);
    }
    let spec: GroupSpec = serde_json::from_str(r#"{"family":"free","k":2}"#).unwrap();
    assert_eq!(spec, GroupSpec::Free { k: 2 });
}
