#![allow(dead_code)]

use odrl_normalize::{Condition, ConstraintExpr, Kind, Operator, Policy, Rule, Schema, Value};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Attribute name, kind and the operands rules may use.
pub struct Pool {
    pub attributes: &'static [(&'static str, Kind, &'static [&'static str])],
}

/// Four attributes, three operands each.
pub const RULES: Pool = Pool {
    attributes: &[
        ("Action", Kind::Entity, &["play", "read", "write"]),
        ("Age", Kind::Numeric, &["18", "21", "65"]),
        ("Party", Kind::Entity, &["alice", "bob", "carol"]),
        ("Price", Kind::Numeric, &["-1", "0", "2.5"]),
    ],
};

/// Smaller pool so that every world of two events can be enumerated.
pub const POLICIES: Pool = Pool {
    attributes: &[
        ("Action", Kind::Entity, &["read", "write"]),
        ("Age", Kind::Numeric, &["18", "65"]),
        ("Party", Kind::Entity, &["alice"]),
    ],
};

impl Pool {
    pub fn schema(&self) -> Schema {
        self.attributes
            .iter()
            .map(|(name, kind, _)| (name.to_string(), *kind))
            .collect()
    }

    /// A condition picked by indices, each taken modulo the available choices.
    pub fn leaf(&self, attribute: usize, op: usize, value: usize) -> Condition {
        let (name, kind, values) = self.attributes[attribute % self.attributes.len()];
        let raw = values[value % values.len()];
        let (op, value) = match kind {
            Kind::Numeric => (
                Operator::ALL[op % Operator::ALL.len()],
                Value::Numeric(raw.parse().unwrap()),
            ),
            Kind::Entity => ([Operator::Eq, Operator::Neq][op % 2], Value::sym(raw)),
        };
        Condition::new(name, op, value).unwrap()
    }
}

/// Random expression of at most `depth` levels and `budget` leaves.
pub fn random_expr(
    rng: &mut ChaCha8Rng,
    pool: &Pool,
    depth: usize,
    budget: &mut usize,
) -> ConstraintExpr {
    if depth <= 1 || *budget <= 1 || rng.gen_bool(0.4) {
        *budget = budget.saturating_sub(1);
        return pool
            .leaf(
                rng.gen_range(0..64),
                rng.gen_range(0..64),
                rng.gen_range(0..64),
            )
            .into();
    }
    match rng.gen_range(0..4) {
        0 | 1 => {
            let n = rng.gen_range(2..=3);
            let children = (0..n)
                .map(|_| random_expr(rng, pool, depth - 1, budget))
                .collect();
            if rng.gen_bool(0.5) {
                ConstraintExpr::all(children)
            } else {
                ConstraintExpr::any(children)
            }
        }
        2 => ConstraintExpr::not(random_expr(rng, pool, depth - 1, budget)),
        _ => {
            let a = random_expr(rng, pool, depth - 1, budget);
            let b = random_expr(rng, pool, depth - 1, budget);
            ConstraintExpr::xor(a, b)
        }
    }
}

/// Rule of one to three constraints, expression depth at most 4, at most 8
/// leaves in total.
pub fn random_rule(rng: &mut ChaCha8Rng, pool: &Pool) -> Rule {
    let mut budget = 8;
    let n = rng.gen_range(1..=3);
    Rule::new(
        (0..n)
            .map(|_| random_expr(rng, pool, 4, &mut budget))
            .collect(),
    )
}

/// Up to three permissions and two prohibitions, no obligations.
pub fn random_policy(rng: &mut ChaCha8Rng, pool: &Pool) -> Policy {
    let permissions = (0..rng.gen_range(0..=3))
        .map(|_| random_rule(rng, pool))
        .collect();
    let prohibitions = (0..rng.gen_range(0..=2))
        .map(|_| random_rule(rng, pool))
        .collect();
    Policy {
        schema: pool.schema(),
        permissions,
        prohibitions,
        obligations: Vec::new(),
    }
}

pub fn fixture(name: &str) -> String {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}
