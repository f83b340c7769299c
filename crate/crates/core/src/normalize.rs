//! Rule regularisation: merge a rule's constraints into one expression,
//! rewrite it to canonical operators, expand to disjunctive normal form and
//! collect the disjuncts as canonical [`SimpleRule`]s.
//!
//! Rewriting runs in a fixed order: exclusive-or expansion, negation
//! pushing (using the negated operator reformulations), elimination of
//! `≤`, `≥` and numeric `≠`, then distribution of `∧` over `∨`.

use std::collections::BTreeSet;

use crate::model::{Condition, ConstraintExpr, Kind, Operator, Rule, SimpleRule};

/// The set of simple rules in a rule's disjunctive normal form.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Decomposition {
    /// Label of the rule this decomposition came from.
    pub origin: Option<String>,
    pub rules: BTreeSet<SimpleRule>,
}

impl Decomposition {
    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &SimpleRule> {
        self.rules.iter()
    }
}

/// Joins the constraints of a rule into a single conjunction. A single
/// constraint is returned as is; an empty rule yields the empty (always
/// true) conjunction.
pub fn merge_constraints(rule: &Rule) -> ConstraintExpr {
    match rule.constraints.as_slice() {
        [single] => single.clone(),
        many => ConstraintExpr::And(many.to_vec()),
    }
}

fn leaf(attribute: &str, op: Operator, value: &crate::model::Value) -> ConstraintExpr {
    ConstraintExpr::Leaf(Condition {
        attribute: attribute.to_string(),
        op,
        value: value.clone(),
    })
}

fn either(a: ConstraintExpr, b: ConstraintExpr) -> ConstraintExpr {
    ConstraintExpr::Or(vec![a, b])
}

/// A condition rewritten to canonical operators.
fn rewrite_condition(c: &Condition) -> ConstraintExpr {
    let (attr, v) = (c.attribute.as_str(), &c.value);
    match (c.op, c.kind()) {
        (Operator::Leq, _) => either(leaf(attr, Operator::Lt, v), leaf(attr, Operator::Eq, v)),
        (Operator::Geq, _) => either(leaf(attr, Operator::Gt, v), leaf(attr, Operator::Eq, v)),
        (Operator::Neq, Kind::Numeric) => {
            either(leaf(attr, Operator::Lt, v), leaf(attr, Operator::Gt, v))
        }
        _ => ConstraintExpr::Leaf(c.clone()),
    }
}

/// The negation of a condition rewritten to canonical operators.
fn rewrite_negated_condition(c: &Condition) -> ConstraintExpr {
    let (attr, v) = (c.attribute.as_str(), &c.value);
    match (c.op, c.kind()) {
        (Operator::Eq, Kind::Numeric) => {
            either(leaf(attr, Operator::Lt, v), leaf(attr, Operator::Gt, v))
        }
        (Operator::Eq, Kind::Entity) => leaf(attr, Operator::Neq, v),
        (Operator::Neq, _) => leaf(attr, Operator::Eq, v),
        (Operator::Lt, _) => either(leaf(attr, Operator::Gt, v), leaf(attr, Operator::Eq, v)),
        (Operator::Gt, _) => either(leaf(attr, Operator::Lt, v), leaf(attr, Operator::Eq, v)),
        (Operator::Geq, _) => leaf(attr, Operator::Lt, v),
        (Operator::Leq, _) => leaf(attr, Operator::Gt, v),
    }
}

fn push(expr: &ConstraintExpr, negated: bool) -> ConstraintExpr {
    match expr {
        ConstraintExpr::Leaf(c) if negated => rewrite_negated_condition(c),
        ConstraintExpr::Leaf(c) => rewrite_condition(c),
        ConstraintExpr::And(xs) => {
            let children = xs.iter().map(|x| push(x, negated)).collect();
            if negated {
                ConstraintExpr::Or(children)
            } else {
                ConstraintExpr::And(children)
            }
        }
        ConstraintExpr::Or(xs) => {
            let children = xs.iter().map(|x| push(x, negated)).collect();
            if negated {
                ConstraintExpr::And(children)
            } else {
                ConstraintExpr::Or(children)
            }
        }
        ConstraintExpr::Not(x) => push(x, !negated),
        ConstraintExpr::Xor(a, b) => {
            // a ⊕ b ≡ (a ∧ ¬b) ∨ (b ∧ ¬a)
            let expanded = ConstraintExpr::Or(vec![
                ConstraintExpr::And(vec![(**a).clone(), ConstraintExpr::not((**b).clone())]),
                ConstraintExpr::And(vec![(**b).clone(), ConstraintExpr::not((**a).clone())]),
            ]);
            push(&expanded, negated)
        }
    }
}

/// Rewrites an expression so it only contains leaves, conjunctions and
/// disjunctions over canonical operators: `=`, `<`, `>` on numeric
/// attributes and `=`, `≠` on entity attributes.
pub fn reformulate(expr: &ConstraintExpr) -> ConstraintExpr {
    push(expr, false)
}

/// Disjunctive normal form of an expression as a list of conjunctions.
///
/// Intended for reformulated input; any `Not` or `Xor` subtree met on the
/// way is reformulated first, so the result is always over canonical
/// operators. No simplification beyond distribution is done.
pub fn to_dnf(expr: &ConstraintExpr) -> Vec<Vec<Condition>> {
    match expr {
        ConstraintExpr::Leaf(c) if c.op.is_canonical_for(c.kind()) => vec![vec![c.clone()]],
        ConstraintExpr::Leaf(_) | ConstraintExpr::Not(_) | ConstraintExpr::Xor(..) => {
            to_dnf(&reformulate(expr))
        }
        ConstraintExpr::Or(xs) => xs.iter().flat_map(to_dnf).collect(),
        ConstraintExpr::And(xs) => {
            let mut acc: Vec<Vec<Condition>> = vec![Vec::new()];
            for x in xs {
                let terms = to_dnf(x);
                let mut next = Vec::with_capacity(acc.len() * terms.len());
                for prefix in &acc {
                    for term in &terms {
                        let mut conj = prefix.clone();
                        conj.extend(term.iter().cloned());
                        next.push(conj);
                    }
                }
                acc = next;
                if acc.is_empty() {
                    break;
                }
            }
            acc
        }
    }
}

/// Sorts and deduplicates a conjunction of canonical conditions.
///
/// Two different equalities on the same entity attribute cannot both hold,
/// so such conjunctions collapse to `R⊥`. Numeric contradictions are left
/// to interval simplification.
pub fn canonicalize(conditions: impl IntoIterator<Item = Condition>) -> SimpleRule {
    let set: BTreeSet<Condition> = conditions.into_iter().collect();
    let mut sorted: Vec<Condition> = set.into_iter().collect();
    sorted.dedup();
    let conflicting = sorted.windows(2).any(|w| {
        w[0].attribute == w[1].attribute
            && w[0].kind() == Kind::Entity
            && w[0].op == Operator::Eq
            && w[1].op == Operator::Eq
    });
    if conflicting {
        SimpleRule::bottom()
    } else {
        SimpleRule::from_sorted(sorted)
    }
}

/// Computes the decomposition of a rule: the canonical simple rules of its
/// regularised disjunctive normal form. Canonically equal disjuncts are
/// merged; unsatisfiable ones are kept (see [`crate::intervals::decompose`]
/// for the filtered form).
pub fn normalize(rule: &Rule) -> Decomposition {
    let merged = merge_constraints(rule);
    let rules = to_dnf(&reformulate(&merged))
        .into_iter()
        .map(canonicalize)
        .collect();
    Decomposition {
        origin: rule.label.clone(),
        rules,
    }
}
