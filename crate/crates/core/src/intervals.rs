//! Interval simplification and splitting.
//!
//! [`simplify`] reduces the conditions on each attribute of a simple rule to
//! at most one lower and one upper bound (or a single point), detecting
//! empty intervals. [`split`] then cuts every attribute's interval at the
//! values of a [`ValueIndex`], so that simple rules produced against the same
//! index are either identical or disjoint. [`decompose`] chains
//! normalisation, simplification and splitting.
//!
//! Splitting preserves matching only for events that are non-null on every
//! attribute of the index: an attribute the rule did not mention becomes
//! constrained by the partition cells, and a null value matches none of them.

use std::collections::{BTreeMap, BTreeSet};

use crate::decimal::Decimal;
use crate::error::{Error, Result};
use crate::model::{Condition, Kind, Operator, Rule, SimpleRule, Value};
use crate::normalize::{canonicalize, normalize, Decomposition};

/// Simplified numeric constraint on one attribute: either a single point,
/// or an open interval `(lower, upper)` where a missing bound is infinite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntervalForm {
    pub lower: Option<Decimal>,
    pub upper: Option<Decimal>,
    pub point: Option<Decimal>,
}

impl IntervalForm {
    /// Intersects numeric conditions on one attribute. `None` when the
    /// intersection is empty.
    pub fn from_conditions<'a>(
        conditions: impl IntoIterator<Item = &'a Condition>,
    ) -> Option<Self> {
        let mut lower: Option<&Decimal> = None;
        let mut upper: Option<&Decimal> = None;
        let mut point: Option<&Decimal> = None;
        for c in conditions {
            let Value::Numeric(v) = &c.value else {
                continue;
            };
            match c.op {
                Operator::Gt => lower = Some(lower.map_or(v, |l| l.max(v))),
                Operator::Lt => upper = Some(upper.map_or(v, |u| u.min(v))),
                Operator::Eq => match point {
                    Some(p) if p != v => return None,
                    _ => point = Some(v),
                },
                // Non-canonical operators never reach a simple rule.
                _ => {}
            }
        }
        if let Some(p) = point {
            let above = lower.is_none_or(|l| p > l);
            let below = upper.is_none_or(|u| p < u);
            return (above && below).then(|| IntervalForm {
                lower: None,
                upper: None,
                point: Some(p.clone()),
            });
        }
        if let (Some(l), Some(u)) = (lower, upper) {
            if l >= u {
                return None;
            }
        }
        Some(IntervalForm {
            lower: lower.cloned(),
            upper: upper.cloned(),
            point: None,
        })
    }

    pub fn to_conditions(&self, attribute: &str) -> Vec<Condition> {
        let cond = |op, d: &Decimal| Condition {
            attribute: attribute.to_string(),
            op,
            value: Value::Numeric(d.clone()),
        };
        if let Some(p) = &self.point {
            return vec![cond(Operator::Eq, p)];
        }
        let mut out = Vec::with_capacity(2);
        if let Some(u) = &self.upper {
            out.push(cond(Operator::Lt, u));
        }
        if let Some(l) = &self.lower {
            out.push(cond(Operator::Gt, l));
        }
        out
    }
}

/// Groups a simple rule's conditions by attribute, preserving order.
fn by_attribute(t: &SimpleRule) -> Vec<(&str, Vec<&Condition>)> {
    let mut groups: Vec<(&str, Vec<&Condition>)> = Vec::new();
    for c in t.conditions() {
        match groups.last_mut() {
            Some((attr, cs)) if *attr == c.attribute => cs.push(c),
            _ => groups.push((c.attribute.as_str(), vec![c])),
        }
    }
    groups
}

/// Simplified entity constraint on one attribute, or `None` if empty.
fn simplify_entity(attribute: &str, conditions: &[&Condition]) -> Option<Vec<Condition>> {
    let eqs: BTreeSet<&Value> = conditions
        .iter()
        .filter(|c| c.op == Operator::Eq)
        .map(|c| &c.value)
        .collect();
    let neqs: BTreeSet<&Value> = conditions
        .iter()
        .filter(|c| c.op == Operator::Neq)
        .map(|c| &c.value)
        .collect();
    match eqs.len() {
        0 => Some(
            neqs.into_iter()
                .map(|v| Condition {
                    attribute: attribute.to_string(),
                    op: Operator::Neq,
                    value: v.clone(),
                })
                .collect(),
        ),
        1 => {
            let v = *eqs.iter().next().unwrap();
            (!neqs.contains(v)).then(|| {
                vec![Condition {
                    attribute: attribute.to_string(),
                    op: Operator::Eq,
                    value: v.clone(),
                }]
            })
        }
        _ => None,
    }
}

/// Removes redundant bounds and detects empty constraints.
///
/// Per numeric attribute the result keeps the greatest lower bound and the
/// least upper bound, or a lone equality when one lies strictly inside them.
/// Per entity attribute an equality absorbs compatible disequalities. Any
/// empty attribute constraint turns the whole rule into `R⊥`.
pub fn simplify(t: &SimpleRule) -> SimpleRule {
    if t.is_bottom() {
        return SimpleRule::bottom();
    }
    let mut out = Vec::with_capacity(t.conditions().len());
    for (attr, conds) in by_attribute(t) {
        let simplified = match conds[0].kind() {
            Kind::Numeric => {
                IntervalForm::from_conditions(conds.iter().copied()).map(|f| f.to_conditions(attr))
            }
            Kind::Entity => simplify_entity(attr, &conds),
        };
        match simplified {
            Some(cs) => out.extend(cs),
            None => return SimpleRule::bottom(),
        }
    }
    canonicalize(out)
}

/// True when no event can match `t`.
pub fn is_empty(t: &SimpleRule) -> bool {
    t.is_bottom() || simplify(t).is_bottom()
}

/// Per-attribute sorted set of right operands, used as interval cut points.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValueIndex {
    values: BTreeMap<String, BTreeSet<Value>>,
}

impl ValueIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, attribute: impl Into<String>, value: Value) -> bool {
        self.values
            .entry(attribute.into())
            .or_default()
            .insert(value)
    }

    pub fn add_condition(&mut self, c: &Condition) -> bool {
        self.insert(c.attribute.clone(), c.value.clone())
    }

    pub fn add_rule(&mut self, rule: &Rule) {
        rule.for_each_condition(&mut |c| {
            self.add_condition(c);
        });
    }

    pub fn add_simple(&mut self, t: &SimpleRule) {
        for c in t.conditions() {
            self.add_condition(c);
        }
    }

    /// Adds every value of `other`; returns the values that were new.
    pub fn merge(&mut self, other: &ValueIndex) -> ValueIndex {
        let mut added = ValueIndex::new();
        for (attr, vs) in &other.values {
            for v in vs {
                if self.insert(attr.clone(), v.clone()) {
                    added.insert(attr.clone(), v.clone());
                }
            }
        }
        added
    }

    pub fn of_rules<'a>(rules: impl IntoIterator<Item = &'a Rule>) -> Self {
        let mut index = ValueIndex::new();
        for r in rules {
            index.add_rule(r);
        }
        index
    }

    pub fn of_simple_rules<'a>(rules: impl IntoIterator<Item = &'a SimpleRule>) -> Self {
        let mut index = ValueIndex::new();
        for r in rules {
            index.add_simple(r);
        }
        index
    }

    /// Attributes with at least one value (`Λ`).
    pub fn attributes(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    /// Values recorded for an attribute (`V(R, λ)`), in ascending order.
    pub fn values(&self, attribute: &str) -> impl Iterator<Item = &Value> {
        self.values.get(attribute).into_iter().flatten()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &BTreeSet<Value>)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn is_empty(&self) -> bool {
        self.values.values().all(BTreeSet::is_empty)
    }

    pub fn len(&self) -> usize {
        self.values.values().map(BTreeSet::len).sum()
    }

    pub fn contains(&self, attribute: &str, value: &Value) -> bool {
        self.values
            .get(attribute)
            .is_some_and(|vs| vs.contains(value))
    }

    pub fn is_superset_of(&self, other: &ValueIndex) -> bool {
        other
            .iter()
            .all(|(attr, vs)| vs.iter().all(|v| self.contains(attr, v)))
    }

    /// The kind of an attribute's values, if all agree.
    pub fn kind_of(&self, attribute: &str) -> Option<Kind> {
        let mut kinds = self.values(attribute).map(Value::kind);
        let first = kinds.next()?;
        kinds.all(|k| k == first).then_some(first)
    }
}

/// Union of the right operands of `rules`, per attribute.
pub fn build_value_index<'a>(rules: impl IntoIterator<Item = &'a Rule>) -> ValueIndex {
    ValueIndex::of_rules(rules)
}

fn cond(attribute: &str, op: Operator, value: Value) -> Condition {
    Condition {
        attribute: attribute.to_string(),
        op,
        value,
    }
}

/// Cells covering `(lower, upper)` cut at `cuts`, which lie strictly inside.
fn numeric_cells(
    attribute: &str,
    lower: Option<&Decimal>,
    upper: Option<&Decimal>,
    cuts: &[&Decimal],
) -> Vec<Vec<Condition>> {
    let bounded = |lo: Option<&Decimal>, hi: Option<&Decimal>| {
        let mut cell = Vec::with_capacity(2);
        if let Some(h) = hi {
            cell.push(cond(attribute, Operator::Lt, Value::Numeric(h.clone())));
        }
        if let Some(l) = lo {
            cell.push(cond(attribute, Operator::Gt, Value::Numeric(l.clone())));
        }
        cell
    };
    let mut cells = Vec::with_capacity(2 * cuts.len() + 1);
    let mut lo = lower;
    for &cut in cuts {
        cells.push(bounded(lo, Some(cut)));
        cells.push(vec![cond(
            attribute,
            Operator::Eq,
            Value::Numeric(cut.clone()),
        )]);
        lo = Some(cut);
    }
    cells.push(bounded(lo, upper));
    cells
}

/// Alternatives replacing the constraint of `t` on one attribute.
fn attribute_cells(t: &SimpleRule, attribute: &str, index: &ValueIndex) -> Vec<Vec<Condition>> {
    let current: Vec<&Condition> = t.conditions_on(attribute).collect();
    let kind = current
        .first()
        .map(|c| c.kind())
        .or_else(|| index.kind_of(attribute));
    let unchanged = || vec![current.iter().map(|&c| c.clone()).collect::<Vec<_>>()];

    match kind {
        Some(Kind::Numeric) => {
            let Some(form) = IntervalForm::from_conditions(current.iter().copied()) else {
                return unchanged();
            };
            if form.point.is_some() {
                return unchanged();
            }
            let cuts: Vec<&Decimal> = index
                .values(attribute)
                .filter_map(|v| match v {
                    Value::Numeric(d) => Some(d),
                    Value::Symbol(_) => None,
                })
                .filter(|d| form.lower.as_ref().is_none_or(|l| *d > l))
                .filter(|d| form.upper.as_ref().is_none_or(|u| *d < u))
                .collect();
            if cuts.is_empty() {
                return unchanged();
            }
            numeric_cells(attribute, form.lower.as_ref(), form.upper.as_ref(), &cuts)
        }
        Some(Kind::Entity) => {
            if current.iter().any(|c| c.op == Operator::Eq) {
                return unchanged();
            }
            let excluded: BTreeSet<&Value> = current.iter().map(|c| &c.value).collect();
            let remaining: Vec<&Value> = index
                .values(attribute)
                .filter(|v| matches!(v, Value::Symbol(_)) && !excluded.contains(v))
                .collect();
            if remaining.is_empty() {
                return unchanged();
            }
            let mut cells: Vec<Vec<Condition>> = remaining
                .iter()
                .map(|&v| vec![cond(attribute, Operator::Eq, v.clone())])
                .collect();
            let rest = excluded
                .into_iter()
                .chain(remaining)
                .map(|v| cond(attribute, Operator::Neq, v.clone()))
                .collect();
            cells.push(rest);
            cells
        }
        None => unchanged(),
    }
}

fn split_simplified(t: &SimpleRule, index: &ValueIndex) -> BTreeSet<SimpleRule> {
    let mut partial: Vec<Vec<Condition>> = vec![t
        .conditions()
        .iter()
        .filter(|c| !index.values.contains_key(&c.attribute))
        .cloned()
        .collect()];
    for attr in index.attributes() {
        let cells = attribute_cells(t, attr, index);
        let mut next = Vec::with_capacity(partial.len() * cells.len());
        for prefix in &partial {
            for cell in &cells {
                let mut conj = prefix.clone();
                conj.extend(cell.iter().cloned());
                next.push(conj);
            }
        }
        partial = next;
    }
    partial
        .into_iter()
        .map(|conj| simplify(&canonicalize(conj)))
        .filter(|r| !r.is_bottom())
        .collect()
}

/// Splits a simplified simple rule at the values of `index`.
///
/// Attributes the rule leaves unconstrained are covered by the full
/// partition induced by the index values. Numeric intervals are cut at the
/// index values strictly inside them; points are never cut. Entity
/// disequalities are split off against the remaining index values.
pub fn split(t: &SimpleRule, index: &ValueIndex) -> Result<Decomposition> {
    if t.is_bottom() {
        return Err(Error::InvalidInput("cannot split the false rule".into()));
    }
    if simplify(t) != *t {
        return Err(Error::InvalidInput(format!("rule `{t}` is not simplified")));
    }
    Ok(Decomposition {
        origin: None,
        rules: split_simplified(t, index),
    })
}

/// Normalises a rule, simplifies each disjunct, splits it against `index`
/// and keeps the non-empty results.
pub fn decompose(rule: &Rule, index: &ValueIndex) -> Decomposition {
    let normal = normalize(rule);
    let mut rules = BTreeSet::new();
    for t in normal.iter() {
        let simple = simplify(t);
        if simple.is_bottom() {
            continue;
        }
        rules.extend(split_simplified(&simple, index));
    }
    Decomposition {
        origin: normal.origin,
        rules,
    }
}
