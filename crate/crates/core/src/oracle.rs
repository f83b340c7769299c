//! Brute-force semantics over finite domains.
//!
//! Rules are evaluated directly on every event of a cartesian product of
//! per-attribute value lists. Nothing here uses the normaliser, so the
//! results can be used to check it.

use std::collections::BTreeMap;

use crate::compare::{compare_policies, compare_rules_with, CompareOptions, ComparisonReport};
use crate::error::{Error, Result};
use crate::intervals::ValueIndex;
use crate::model::{Event, Policy, Rule, Value, ACTION};

pub const DEFAULT_DOMAIN_CAP: u64 = 1_000_000;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AttributeDomain {
    pub values: Vec<Value>,
    pub allow_null: bool,
}

impl AttributeDomain {
    fn size(&self) -> usize {
        self.values.len() + usize::from(self.allow_null)
    }
}

/// Finite value lists per attribute.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DomainSpec {
    pub attributes: BTreeMap<String, AttributeDomain>,
    /// Largest number of events [`enumerate_events`] will produce.
    pub cap: u64,
}

impl Default for DomainSpec {
    fn default() -> Self {
        DomainSpec {
            attributes: BTreeMap::new(),
            cap: DEFAULT_DOMAIN_CAP,
        }
    }
}

impl DomainSpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_cap(mut self, cap: u64) -> Self {
        self.cap = cap;
        self
    }

    pub fn insert(&mut self, attribute: impl Into<String>, values: Vec<Value>, allow_null: bool) {
        self.attributes
            .insert(attribute.into(), AttributeDomain { values, allow_null });
    }

    /// Number of events in the product.
    pub fn size(&self) -> u128 {
        self.attributes
            .values()
            .map(|d| d.size() as u128)
            .try_fold(1u128, |acc, n| acc.checked_mul(n))
            .unwrap_or(u128::MAX)
    }

    pub fn values(&self, attribute: &str) -> Option<&[Value]> {
        self.attributes.get(attribute).map(|d| d.values.as_slice())
    }
}

/// Odometer over a [`DomainSpec`]; the last attribute varies fastest.
pub struct Events<'a> {
    domains: Vec<(&'a str, &'a AttributeDomain)>,
    digits: Vec<usize>,
    done: bool,
}

impl Iterator for Events<'_> {
    type Item = Event;

    fn next(&mut self) -> Option<Event> {
        if self.done {
            return None;
        }
        let assignment = self
            .domains
            .iter()
            .zip(&self.digits)
            .map(|((name, d), &i)| (name.to_string(), d.values.get(i).cloned()))
            .collect();
        let event = Event::new(assignment).expect("Action is never null");

        self.done = true;
        for (digit, (_, d)) in self.digits.iter_mut().zip(&self.domains).rev() {
            *digit += 1;
            if *digit < d.size() {
                self.done = false;
                break;
            }
            *digit = 0;
        }
        Some(event)
    }
}

/// Every event of the domain exactly once, in a fixed order.
pub fn enumerate_events(d: &DomainSpec) -> Result<Events<'_>> {
    let action = d
        .attributes
        .get(ACTION)
        .ok_or_else(|| Error::InvalidInput(format!("domain has no `{ACTION}` attribute")))?;
    if action.allow_null {
        return Err(Error::InvalidInput(format!("`{ACTION}` cannot be null")));
    }
    let size = d.size();
    if size > u128::from(d.cap) {
        return Err(Error::DomainTooLarge { size, cap: d.cap });
    }
    Ok(Events {
        domains: d.attributes.iter().map(|(k, v)| (k.as_str(), v)).collect(),
        digits: vec![0; d.attributes.len()],
        done: size == 0,
    })
}

fn fresh_symbols(taken: &[Value], count: usize) -> Vec<Value> {
    (1..)
        .map(|i| Value::Symbol(format!("~other{i}")))
        .filter(|v| !taken.contains(v))
        .take(count)
        .collect()
}

/// A domain in which every cell of a split against `index` has at least one
/// event, for `padding >= 1`.
///
/// Numeric attributes with cuts `v1 < .. < vk` get the cuts, `padding`
/// evenly spaced points inside each gap, and `padding` points below `v1` and
/// above `vk` at unit steps. Entity attributes get their values plus
/// `padding` fresh symbols. `Action` is always present.
pub fn domain_from_values(index: &ValueIndex, padding: usize) -> DomainSpec {
    let mut spec = DomainSpec::new();
    let steps = padding as i64;
    for (attribute, values) in index.iter() {
        let values: Vec<Value> = values.iter().cloned().collect();
        let domain = match values.first() {
            None => continue,
            Some(Value::Numeric(_)) => {
                let cuts: Vec<_> = values
                    .iter()
                    .filter_map(|v| match v {
                        Value::Numeric(d) => Some(d.clone()),
                        Value::Symbol(_) => None,
                    })
                    .collect();
                let (first, last) = (&cuts[0], &cuts[cuts.len() - 1]);
                let mut points: Vec<_> = (1..=steps).rev().map(|i| first.offset(-i)).collect();
                for pair in cuts.windows(2) {
                    points.push(pair[0].clone());
                    points.extend((1..=steps).map(|i| pair[0].lerp(&pair[1], i, steps + 1)));
                }
                points.push(last.clone());
                points.extend((1..=steps).map(|i| last.offset(i)));
                points.into_iter().map(Value::Numeric).collect()
            }
            Some(Value::Symbol(_)) => {
                let mut all = values.clone();
                all.extend(fresh_symbols(&values, padding));
                all
            }
        };
        spec.insert(attribute, domain, false);
    }
    if !spec.attributes.contains_key(ACTION) {
        spec.insert(ACTION, fresh_symbols(&[], 1), false);
    }
    spec
}

/// Relation between two event sets, decided by enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleRelation {
    pub overlap: bool,
    pub a_in_b: bool,
    pub b_in_a: bool,
    pub equivalent: bool,
    pub events: u64,
}

impl OracleRelation {
    /// Whether a [`ComparisonReport`] reaches the same verdicts.
    pub fn agrees_with(&self, report: &ComparisonReport) -> bool {
        self.overlap == report.overlap
            && self.a_in_b == report.left_in_right
            && self.b_in_a == report.right_in_left
            && self.equivalent == report.equivalent
    }
}

fn relation_by(
    d: &DomainSpec,
    mut a: impl FnMut(&Event) -> Result<bool>,
    mut b: impl FnMut(&Event) -> Result<bool>,
) -> Result<OracleRelation> {
    let mut rel = OracleRelation {
        overlap: false,
        a_in_b: true,
        b_in_a: true,
        equivalent: true,
        events: 0,
    };
    for e in enumerate_events(d)? {
        let (ma, mb) = (a(&e)?, b(&e)?);
        rel.overlap |= ma && mb;
        rel.a_in_b &= !ma || mb;
        rel.b_in_a &= !mb || ma;
        rel.events += 1;
    }
    rel.equivalent = rel.a_in_b && rel.b_in_a;
    Ok(rel)
}

/// Overlap and containment of the events matched by two rules.
pub fn oracle_relation(a: &Rule, b: &Rule, d: &DomainSpec) -> Result<OracleRelation> {
    relation_by(d, |e| a.matches(e), |e| b.matches(e))
}

/// An event is allowed when it matches a permission and no prohibition.
pub fn allowed(policy: &Policy, event: &Event) -> Result<bool> {
    for f in &policy.prohibitions {
        if f.matches(event)? {
            return Ok(false);
        }
    }
    for p in &policy.permissions {
        if p.matches(event)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Overlap and containment of the events two policies allow.
pub fn oracle_policy_relation(a: &Policy, b: &Policy, d: &DomainSpec) -> Result<OracleRelation> {
    relation_by(d, |e| allowed(a, e), |e| allowed(b, e))
}

/// Cell-based comparison next to the enumerated relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossCheck {
    pub report: ComparisonReport,
    pub oracle: OracleRelation,
    pub agree: bool,
}

/// Compares two rules both ways over `domain_from_values(V(a) ∪ V(b), 1)`.
pub fn cross_check_rules(a: &Rule, b: &Rule, cap: u64) -> Result<CrossCheck> {
    let d = domain_from_values(&ValueIndex::of_rules([a, b]), 1).with_cap(cap);
    let oracle = oracle_relation(a, b, &d)?;
    let report = compare_rules_with(a, b, &CompareOptions::default());
    Ok(CrossCheck {
        agree: oracle.agrees_with(&report),
        report,
        oracle,
    })
}

/// Compares the allowed events of two policies both ways. Obligations are
/// ignored.
pub fn cross_check_policies(a: &Policy, b: &Policy, cap: u64) -> Result<CrossCheck> {
    let index = ValueIndex::of_rules(
        a.permissions
            .iter()
            .chain(&a.prohibitions)
            .chain(&b.permissions)
            .chain(&b.prohibitions),
    );
    let d = domain_from_values(&index, 1).with_cap(cap);
    let oracle = oracle_policy_relation(a, b, &d)?;
    let report = compare_policies(a, b, &CompareOptions::default())?;
    Ok(CrossCheck {
        agree: oracle.agrees_with(&report),
        report,
        oracle,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Condition, Operator::*};

    fn nums(d: &DomainSpec, attr: &str) -> Vec<String> {
        d.values(attr)
            .unwrap()
            .iter()
            .map(Value::to_string)
            .collect()
    }

    fn index(attr: &str, cuts: &[i64]) -> ValueIndex {
        let mut v = ValueIndex::new();
        for &c in cuts {
            v.insert(attr, Value::num(c));
        }
        v
    }

    #[test]
    fn counts_events_with_and_without_null() {
        let mut d = DomainSpec::new();
        d.insert("Age", vec![Value::num(17), Value::num(18)], false);
        d.insert(ACTION, vec![Value::sym("Play")], false);
        assert_eq!(enumerate_events(&d).unwrap().count(), 2);
        d.insert("Age", vec![Value::num(17), Value::num(18)], true);
        let events: Vec<Event> = enumerate_events(&d).unwrap().collect();
        assert_eq!(events.len(), 3);
        assert_eq!(events.iter().filter(|e| e.is_null("Age")).count(), 1);
    }

    #[test]
    fn enumeration_is_exhaustive_and_ordered() {
        let mut d = DomainSpec::new();
        d.insert(ACTION, vec![Value::sym("a"), Value::sym("b")], false);
        d.insert(
            "X",
            vec![Value::num(1), Value::num(2), Value::num(3)],
            false,
        );
        let seen: Vec<String> = enumerate_events(&d)
            .unwrap()
            .map(|e| format!("{}{}", e.get(ACTION).unwrap(), e.get("X").unwrap()))
            .collect();
        assert_eq!(seen, ["a1", "a2", "a3", "b1", "b2", "b3"]);
    }

    #[test]
    fn cap_is_enforced() {
        let mut d = DomainSpec::new();
        for i in 0..7 {
            let name = if i == 0 {
                ACTION.to_string()
            } else {
                format!("A{i}")
            };
            d.insert(
                name,
                (0..10).map(|n| Value::sym(n.to_string())).collect(),
                false,
            );
        }
        assert_eq!(
            enumerate_events(&d).err(),
            Some(Error::DomainTooLarge {
                size: 10_000_000,
                cap: DEFAULT_DOMAIN_CAP
            })
        );
    }

    #[test]
    fn action_is_required_and_non_null() {
        let mut d = DomainSpec::new();
        d.insert("Age", vec![Value::num(1)], false);
        assert!(matches!(enumerate_events(&d), Err(Error::InvalidInput(_))));
        d.insert(ACTION, vec![Value::sym("x")], true);
        assert!(matches!(enumerate_events(&d), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn numeric_domains_pad_every_gap() {
        assert_eq!(
            nums(&domain_from_values(&index("Age", &[18, 65]), 1), "Age"),
            ["17", "18", "41.5", "65", "66"]
        );
        assert_eq!(
            nums(&domain_from_values(&index("x", &[0]), 1), "x"),
            ["-1", "0", "1"]
        );
        assert_eq!(
            domain_from_values(&index("Age", &[21, 33, 45]), 1)
                .values("Age")
                .unwrap()
                .len(),
            7
        );
        assert_eq!(
            nums(&domain_from_values(&index("x", &[0, 3]), 2), "x"),
            ["-2", "-1", "0", "1", "2", "3", "4", "5"]
        );
    }

    #[test]
    fn entity_domains_get_fresh_symbols() {
        let mut v = ValueIndex::new();
        v.insert(ACTION, Value::sym("read"));
        v.insert("Party", Value::sym("~other1"));
        let d = domain_from_values(&v, 1);
        assert_eq!(
            d.values(ACTION).unwrap(),
            [Value::sym("read"), Value::sym("~other1")]
        );
        assert_eq!(
            d.values("Party").unwrap(),
            [Value::sym("~other1"), Value::sym("~other2")]
        );
        assert_eq!(
            domain_from_values(&ValueIndex::new(), 1)
                .values(ACTION)
                .unwrap()
                .len(),
            1
        );
    }

    #[test]
    fn age_ranges_nest() {
        let r =
            Rule::from_conditions([Condition::num("Age", Gt, 18), Condition::num("Age", Lt, 65)]);
        let r2 =
            Rule::from_conditions([Condition::num("Age", Gt, 21), Condition::num("Age", Lt, 45)]);
        let mut d = DomainSpec::new();
        d.insert(ACTION, vec![Value::sym("Play")], false);
        d.insert("Age", (17..=66).map(Value::num).collect(), false);
        let rel = oracle_relation(&r, &r2, &d).unwrap();
        assert!(rel.b_in_a && !rel.a_in_b && rel.overlap && !rel.equivalent);
        assert_eq!(rel.events, 50);
        assert!(oracle_relation(&r, &r, &d).unwrap().equivalent);
    }

    #[test]
    fn crossing_intervals_only_overlap() {
        let l = |lo, hi| {
            Rule::from_conditions([Condition::num("l4", Gt, lo), Condition::num("l4", Lt, hi)])
        };
        let (a, b) = (l(10, 20), l(15, 30));
        let d = domain_from_values(&ValueIndex::of_rules([&a, &b]), 1);
        assert_eq!(d.values("l4").unwrap().len(), 9);
        let rel = oracle_relation(&a, &b, &d).unwrap();
        assert!(rel.overlap && !rel.a_in_b && !rel.b_in_a);
        assert!(cross_check_rules(&a, &b, DEFAULT_DOMAIN_CAP).unwrap().agree);
    }

    #[test]
    fn prohibitions_override_permissions() {
        let p = Policy {
            permissions: vec![Rule::from_conditions([Condition::num("Age", Gt, 18)])],
            prohibitions: vec![Rule::from_conditions([Condition::num("Age", Gt, 65)])],
            ..Policy::default()
        };
        let e =
            |age| Event::from_pairs([(ACTION, Value::sym("x")), ("Age", Value::num(age))]).unwrap();
        assert!(allowed(&p, &e(30)).unwrap());
        assert!(!allowed(&p, &e(70)).unwrap());
        assert!(!allowed(&p, &e(10)).unwrap());
        let narrowed = Policy {
            permissions: vec![Rule::from_conditions([
                Condition::num("Age", Gt, 18),
                Condition::num("Age", Leq, 65),
            ])],
            ..Policy::default()
        };
        let check = cross_check_policies(&p, &narrowed, DEFAULT_DOMAIN_CAP).unwrap();
        assert!(check.agree && check.oracle.equivalent);
    }
}
