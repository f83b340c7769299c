//! Normalisation of ODRL-style usage policies into disjoint simple rules.
//!
//! A rule's constraint expression is rewritten into disjunctive normal form
//! over `=`, `<`, `>` (numeric) and `=`, `≠` (entity) conditions, each
//! disjunct is reduced to one interval per attribute, and the intervals are
//! split at every value mentioned by the rules under comparison. Cells built
//! against the same value index are either identical or disjoint, so
//! overlap, containment and equivalence become set operations.
//!
//! ```
//! use odrl_normalize::{compare_rules, Condition, Operator, Rule};
//!
//! let adults = Rule::from_conditions([Condition::num("Age", Operator::Gt, 18), Condition::num("Age", Operator::Lt, 65)]);
//! let middle = Rule::from_conditions([Condition::num("Age", Operator::Gt, 21), Condition::num("Age", Operator::Lt, 45)]);
//! let report = compare_rules(&middle, &adults);
//! assert!(report.left_in_right && !report.right_in_left);
//! ```

pub mod cli;
pub mod compare;
pub mod decimal;
pub mod error;
pub mod ingest;
pub mod intervals;
pub mod model;
pub mod normalize;
pub mod oracle;
pub mod report;

pub use compare::{
    compare_policies, compare_rules, compare_rules_with, normalize_policy, ns,
    rewrite_drop_permissions, rewrite_drop_prohibitions, CompareOptions, ComparisonReport,
};
pub use decimal::Decimal;
pub use error::{Error, Result};
pub use ingest::odrl::import_odrl_subset;
pub use ingest::{parse_policy, parse_world, serialize_policy};
pub use intervals::{build_value_index, decompose, simplify, split, ValueIndex};
pub use model::{
    validate_world, Condition, ConstraintExpr, DefaultSemantics, Event, Kind, Operator, Policy,
    Rule, Schema, SimpleRule, ValidityReport, Value, World,
};
pub use normalize::{canonicalize, normalize, Decomposition};
pub use oracle::{domain_from_values, enumerate_events, oracle_relation, DomainSpec};

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
struct ReadmeDoctests;
