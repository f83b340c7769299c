//! Overlap, containment and equivalence of rules and policies, decided by
//! set operations on decompositions computed against a shared value index.
//!
//! Cells produced against the same index are either identical or disjoint,
//! so comparing two rules reduces to comparing their cell sets by canonical
//! equality. The same holds for whole rule sets, which is what makes the
//! prohibition-free rewrite `⟨NS(P) \ NS(F), ∅, O⟩` possible.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::intervals::{decompose, ValueIndex};
use crate::model::{Policy, Rule, SimpleRule};

pub const DEFAULT_WITNESS_CAP: usize = 20;

/// Union of the decompositions of a set of rules (`NS(R, V)`).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NormalisedRuleSet {
    pub cells: BTreeSet<SimpleRule>,
    /// The index the cells were split against.
    pub value_index: ValueIndex,
    /// Values that had to be added to the supplied index so that it covers
    /// every right operand of the rules.
    pub added: ValueIndex,
}

/// Decomposes every rule against `index`, first extending the index with any
/// right operand of `rules` it is missing.
pub fn ns<'a>(
    rules: impl IntoIterator<Item = &'a Rule> + Clone,
    index: &ValueIndex,
) -> NormalisedRuleSet {
    let mut value_index = index.clone();
    let added = value_index.merge(&ValueIndex::of_rules(rules.clone()));
    let mut cells = BTreeSet::new();
    for r in rules {
        cells.extend(decompose(r, &value_index).rules);
    }
    NormalisedRuleSet {
        cells,
        value_index,
        added,
    }
}

/// A bounded sample of cells plus the full count.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Witness {
    pub cells: Vec<SimpleRule>,
    pub total: usize,
}

impl Witness {
    fn of<'a>(cells: impl Iterator<Item = &'a SimpleRule>, cap: usize) -> Self {
        let mut total = 0;
        let mut kept = Vec::new();
        for c in cells {
            if kept.len() < cap {
                kept.push(c.clone());
            }
            total += 1;
        }
        Witness { cells: kept, total }
    }

    pub fn is_truncated(&self) -> bool {
        self.total > self.cells.len()
    }
}

/// How obligations were handled when comparing policies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObligationCheck {
    /// Neither policy has obligations.
    None,
    /// Obligations were compared syntactically; the verdicts on permissions
    /// hold modulo obligations.
    Syntactic { equal: bool },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComparisonReport {
    pub overlap: bool,
    pub left_in_right: bool,
    pub right_in_left: bool,
    pub equivalent: bool,
    pub shared: Witness,
    pub left_only: Witness,
    pub right_only: Witness,
    pub obligations: ObligationCheck,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CompareOptions {
    pub witness_cap: usize,
    /// Refuse to compare policies that carry obligations.
    pub strict_obligations: bool,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions {
            witness_cap: DEFAULT_WITNESS_CAP,
            strict_obligations: false,
        }
    }
}

/// Compares two cell sets built against the same index.
pub fn compare_cells(
    left: &BTreeSet<SimpleRule>,
    right: &BTreeSet<SimpleRule>,
    witness_cap: usize,
) -> ComparisonReport {
    let shared = Witness::of(left.intersection(right), witness_cap);
    let left_only = Witness::of(left.difference(right), witness_cap);
    let right_only = Witness::of(right.difference(left), witness_cap);
    let left_in_right = left_only.total == 0;
    let right_in_left = right_only.total == 0;
    ComparisonReport {
        overlap: shared.total > 0,
        left_in_right,
        right_in_left,
        equivalent: left_in_right && right_in_left,
        shared,
        left_only,
        right_only,
        obligations: ObligationCheck::None,
    }
}

pub fn compare_rules(a: &Rule, b: &Rule) -> ComparisonReport {
    compare_rules_with(a, b, &CompareOptions::default())
}

/// Decomposes both rules against `V(a) ∪ V(b)` and compares the cell sets.
pub fn compare_rules_with(a: &Rule, b: &Rule, options: &CompareOptions) -> ComparisonReport {
    let index = ValueIndex::of_rules([a, b]);
    let left = decompose(a, &index).rules;
    let right = decompose(b, &index).rules;
    compare_cells(&left, &right, options.witness_cap)
}

/// Index over the permissions and prohibitions of a policy.
pub fn policy_value_index(policy: &Policy) -> ValueIndex {
    ValueIndex::of_rules(policy.permissions.iter().chain(&policy.prohibitions))
}

/// `⟨NS(P, V), NS(F, V), O⟩` with `V` the operands of `P` and `F` merged
/// into `index`. Obligations are carried over unchanged.
pub fn normalize_policy(policy: &Policy, index: &ValueIndex) -> Policy {
    let mut v = index.clone();
    v.merge(&policy_value_index(policy));
    Policy {
        schema: policy.schema.clone(),
        permissions: cells_to_rules(&ns(&policy.permissions, &v).cells),
        prohibitions: cells_to_rules(&ns(&policy.prohibitions, &v).cells),
        obligations: policy.obligations.clone(),
    }
}

fn cells_to_rules(cells: &BTreeSet<SimpleRule>) -> Vec<Rule> {
    cells.iter().filter_map(SimpleRule::to_rule).collect()
}

/// Permitted cells minus prohibited cells over a shared index.
fn permitted_cells(policy: &Policy, index: &ValueIndex) -> BTreeSet<SimpleRule> {
    let permitted = ns(&policy.permissions, index).cells;
    let prohibited = ns(&policy.prohibitions, index).cells;
    permitted.difference(&prohibited).cloned().collect()
}

/// Rewrites a policy into permissions only, for prohibition-by-default
/// validity: `⟨NS(P, V) \ NS(F, V), ∅, O⟩`.
pub fn rewrite_drop_prohibitions(policy: &Policy) -> Policy {
    let index = policy_value_index(policy);
    Policy {
        schema: policy.schema.clone(),
        permissions: cells_to_rules(&permitted_cells(policy, &index)),
        prohibitions: Vec::new(),
        obligations: policy.obligations.clone(),
    }
}

/// Rewrites a policy into prohibitions only, for permission-by-default
/// validity: `⟨∅, NS(F, V) \ NS(P, V), O⟩`.
pub fn rewrite_drop_permissions(policy: &Policy) -> Policy {
    let index = policy_value_index(policy);
    let prohibited = ns(&policy.prohibitions, &index).cells;
    let permitted = ns(&policy.permissions, &index).cells;
    let remaining: BTreeSet<SimpleRule> = prohibited.difference(&permitted).cloned().collect();
    Policy {
        schema: policy.schema.clone(),
        permissions: Vec::new(),
        prohibitions: cells_to_rules(&remaining),
        obligations: policy.obligations.clone(),
    }
}

/// Compares the permitted cell sets of two policies under
/// prohibition-by-default semantics, using one index for both sides.
pub fn compare_policies(
    a: &Policy,
    b: &Policy,
    options: &CompareOptions,
) -> Result<ComparisonReport> {
    let has_obligations = !a.obligations.is_empty() || !b.obligations.is_empty();
    if has_obligations && options.strict_obligations {
        return Err(Error::ObligationsUnsupported);
    }
    let mut index = policy_value_index(a);
    index.merge(&policy_value_index(b));
    let left = permitted_cells(a, &index);
    let right = permitted_cells(b, &index);
    let mut report = compare_cells(&left, &right, options.witness_cap);
    if has_obligations {
        report.obligations = ObligationCheck::Syntactic {
            equal: a.obligations == b.obligations,
        };
    }
    Ok(report)
}
