use std::collections::BTreeMap;

use hquery::value::ValueError;
use hquery::{EntityRef, Value};
use proptest::prelude::*;

fn value() -> impl Strategy<Value = Value> {
    let leaf = prop_oneof![
        Just(Value::None),
        any::<bool>().prop_map(Value::Bool),
        any::<i64>().prop_map(Value::Int),
        any::<f64>().prop_map(Value::Float),
        ".{0,6}".prop_map(Value::Str),
        ("[a-z]{1,3}", 0u64..4).prop_map(|(w, h)| Value::Entity(EntityRef::new(w, h))),
    ];
    leaf.prop_recursive(3, 24, 4, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..4).prop_map(Value::List),
            prop::collection::btree_map(".{0,3}", inner, 0..3).prop_map(Value::Dict),
        ]
    })
}

fn nan_free(v: &Value) -> bool {
    match v {
        Value::Float(f) => !f.is_nan(),
        Value::List(items) => items.iter().all(nan_free),
        Value::Dict(m) => m.values().all(nan_free),
        _ => true,
    }
}

proptest! {
    #[test]
    fn serialize_is_injective(a in value(), b in value()) {
        prop_assert_eq!(a.serialize() == b.serialize(), a == b, "{} / {}", a, b);
    }

    #[test]
    fn numeric_addition_commutes(a in -1e6f64..1e6, b in any::<i32>(), xs in prop::collection::vec(-100i64..100, 1..5)) {
        let (fa, ib) = (Value::Float(a), Value::Int(b as i64));
        prop_assert_eq!(fa.add(&ib).unwrap(), ib.add(&fa).unwrap());
        let l1 = Value::list(xs.iter().map(|&x| Value::Int(x)));
        let l2 = Value::list(xs.iter().rev().map(|&x| Value::Float(x as f64 / 2.0)));
        prop_assert_eq!(l1.add(&l2).unwrap(), l2.add(&l1).unwrap());
    }

    #[test]
    fn deep_eq_is_an_equivalence(a in value(), b in value(), c in value()) {
        prop_assume!(nan_free(&a) && nan_free(&b) && nan_free(&c));
        prop_assert!(a.deep_eq(&a));
        prop_assert_eq!(a.deep_eq(&b), b.deep_eq(&a));
        if a.deep_eq(&b) && b.deep_eq(&c) {
            prop_assert!(a.deep_eq(&c));
        }
    }
}

#[test]
fn serialize_examples() {
    let towers = Value::list([
        Value::list([Value::Int(3), Value::Int(2), Value::Int(1)]),
        Value::list([]),
        Value::list([]),
    ]);
    assert_eq!(towers.serialize(), "[[3, 2, 1], [], []]");
    let d: BTreeMap<String, Value> = [("b".to_string(), Value::Int(1)), ("a".to_string(), Value::Int(2))].into();
    assert_eq!(Value::Dict(d).serialize(), "{\"a\": 2, \"b\": 1}");
    assert_eq!(Value::Float(2.0).serialize(), "2.0");
    assert_ne!(Value::Float(2.0).serialize(), Value::Int(2).serialize());
    assert_eq!(Value::Entity(EntityRef::new("particles", 3)).serialize(), "@particles:3");
    assert_eq!(Value::None.serialize(), "none");
}

#[test]
fn truthiness_examples() {
    assert!(!Value::list([]).truthy());
    assert!(!Value::Int(0).truthy());
    assert!(Value::str("x").truthy());
}

#[test]
fn list_arithmetic() {
    let p = |x, y| Value::list([Value::Int(x), Value::Int(y)]);
    assert_eq!(p(1, -1).add(&p(3, 4)).unwrap(), p(4, 3));
    // mismatched lengths concatenate
    assert_eq!(
        p(1, 2).add(&Value::list([Value::Int(3)])).unwrap().serialize(),
        "[1, 2, 3]"
    );
    assert_eq!(Value::Int(1).div(&Value::Int(2)).unwrap(), Value::Float(0.5));
    assert_eq!(Value::Int(1).div(&Value::Int(0)), Err(ValueError::DivisionByZero));
    assert!(matches!(Value::Bool(true).add(&Value::Int(1)), Err(ValueError::TypeMismatch { .. })));
}
