//! Policy data model and match semantics.
//!
//! A [`Rule`] is a conjunctive set of [`ConstraintExpr`]s, each a boolean
//! tree over atomic [`Condition`]s. Rules are evaluated against [`Event`]s,
//! which map attribute names to (possibly null) values. A [`Policy`] groups
//! permissions, prohibitions and obligations, and a [`World`] of events is
//! checked against it by [`validate_world`].
//!
//! Conditions over a null or absent attribute evaluate to false.

use std::collections::BTreeMap;
use std::fmt;

use crate::decimal::Decimal;
use crate::error::{Error, Result};

/// Reserved attribute holding the action of an event. It is never null.
pub const ACTION: &str = "Action";

/// Right operand of a condition, or the value of an event attribute.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Numeric(Decimal),
    /// Opaque identifier. Distinct strings denote distinct entities.
    Symbol(String),
}

impl Value {
    pub fn num(n: i64) -> Self {
        Value::Numeric(Decimal::from(n))
    }

    pub fn sym(s: impl Into<String>) -> Self {
        Value::Symbol(s.into())
    }

    pub fn kind(&self) -> Kind {
        match self {
            Value::Numeric(_) => Kind::Numeric,
            Value::Symbol(_) => Kind::Entity,
        }
    }
}

impl From<Decimal> for Value {
    fn from(d: Decimal) -> Self {
        Value::Numeric(d)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Numeric(d) => write!(f, "{d}"),
            Value::Symbol(s) => f.write_str(s),
        }
    }
}

/// Declared kind of an attribute.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Numeric,
    Entity,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Numeric => "numeric",
            Kind::Entity => "entity",
        }
    }
}

/// Attribute name to kind.
pub type Schema = BTreeMap<String, Kind>;

/// Comparison operator. The declaration order is the canonical rank used
/// when sorting conditions (`=` < `<` < `>` < `≠`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Operator {
    Eq,
    Lt,
    Gt,
    Neq,
    Leq,
    Geq,
}

impl Operator {
    pub const ALL: [Operator; 6] = [
        Operator::Eq,
        Operator::Lt,
        Operator::Gt,
        Operator::Neq,
        Operator::Leq,
        Operator::Geq,
    ];

    /// Keyword used in the JSON policy format.
    pub fn keyword(self) -> &'static str {
        match self {
            Operator::Eq => "eq",
            Operator::Neq => "neq",
            Operator::Lt => "lt",
            Operator::Gt => "gt",
            Operator::Leq => "leq",
            Operator::Geq => "geq",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Operator> {
        Operator::ALL.into_iter().find(|op| op.keyword() == s)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Operator::Eq => "=",
            Operator::Neq => "≠",
            Operator::Lt => "<",
            Operator::Gt => ">",
            Operator::Leq => "≤",
            Operator::Geq => "≥",
        }
    }

    pub fn allowed_for(self, kind: Kind) -> bool {
        match kind {
            Kind::Numeric => true,
            Kind::Entity => matches!(self, Operator::Eq | Operator::Neq),
        }
    }

    /// Operators that may appear in a [`SimpleRule`].
    pub fn is_canonical_for(self, kind: Kind) -> bool {
        match kind {
            Kind::Numeric => matches!(self, Operator::Eq | Operator::Lt | Operator::Gt),
            Kind::Entity => matches!(self, Operator::Eq | Operator::Neq),
        }
    }
}

/// Atomic comparison `(attribute op value)`.
///
/// Field order matters: the derived ordering is the canonical condition
/// order (attribute, operator rank, value).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Condition {
    pub attribute: String,
    pub op: Operator,
    pub value: Value,
}

impl Condition {
    /// Builds a condition, rejecting operators that are illegal for the
    /// value's kind (ordering comparisons on entities).
    pub fn new(attribute: impl Into<String>, op: Operator, value: Value) -> Result<Self> {
        let attribute = attribute.into();
        if !op.allowed_for(value.kind()) {
            return Err(Error::schema(format!(
                "operator `{}` is not allowed on entity attribute `{attribute}`",
                op.keyword()
            )));
        }
        Ok(Condition {
            attribute,
            op,
            value,
        })
    }

    /// Numeric condition shorthand; infallible since every operator is legal.
    pub fn num(attribute: impl Into<String>, op: Operator, n: i64) -> Self {
        Condition {
            attribute: attribute.into(),
            op,
            value: Value::num(n),
        }
    }

    /// Entity condition shorthand. Panics on an ordering operator.
    pub fn sym(attribute: impl Into<String>, op: Operator, s: impl Into<String>) -> Self {
        Condition::new(attribute, op, Value::sym(s)).expect("entity conditions only take = or ≠")
    }

    pub fn kind(&self) -> Kind {
        self.value.kind()
    }

    pub fn evaluate(&self, event: &Event) -> Result<bool> {
        let Some(actual) = event.get(&self.attribute) else {
            return Ok(false);
        };
        match (actual, &self.value) {
            (Value::Numeric(a), Value::Numeric(b)) => Ok(match self.op {
                Operator::Eq => a == b,
                Operator::Neq => a != b,
                Operator::Lt => a < b,
                Operator::Gt => a > b,
                Operator::Leq => a <= b,
                Operator::Geq => a >= b,
            }),
            (Value::Symbol(a), Value::Symbol(b)) => match self.op {
                Operator::Eq => Ok(a == b),
                Operator::Neq => Ok(a != b),
                op => Err(Error::schema(format!(
                    "operator `{}` is not allowed on entity attribute `{}`",
                    op.keyword(),
                    self.attribute
                ))),
            },
            (actual, expected) => Err(Error::TypeMismatch {
                attribute: self.attribute.clone(),
                expected: expected.kind().as_str(),
                found: actual.kind().as_str(),
            }),
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({} {} {})",
            self.attribute,
            self.op.symbol(),
            self.value
        )
    }
}

/// Boolean combination of conditions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConstraintExpr {
    Leaf(Condition),
    /// Conjunction. The empty conjunction is the always-true expression.
    And(Vec<ConstraintExpr>),
    /// Disjunction. The empty disjunction is the always-false expression.
    Or(Vec<ConstraintExpr>),
    Not(Box<ConstraintExpr>),
    Xor(Box<ConstraintExpr>, Box<ConstraintExpr>),
}

impl ConstraintExpr {
    /// Conjunction that collapses a single child to itself.
    pub fn all(mut children: Vec<ConstraintExpr>) -> Self {
        if children.len() == 1 {
            children.pop().unwrap()
        } else {
            ConstraintExpr::And(children)
        }
    }

    /// Disjunction that collapses a single child to itself.
    pub fn any(mut children: Vec<ConstraintExpr>) -> Self {
        if children.len() == 1 {
            children.pop().unwrap()
        } else {
            ConstraintExpr::Or(children)
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(inner: ConstraintExpr) -> Self {
        ConstraintExpr::Not(Box::new(inner))
    }

    pub fn xor(a: ConstraintExpr, b: ConstraintExpr) -> Self {
        ConstraintExpr::Xor(Box::new(a), Box::new(b))
    }

    pub fn evaluate(&self, event: &Event) -> Result<bool> {
        match self {
            ConstraintExpr::Leaf(c) => c.evaluate(event),
            ConstraintExpr::And(xs) => {
                for x in xs {
                    if !x.evaluate(event)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            ConstraintExpr::Or(xs) => {
                for x in xs {
                    if x.evaluate(event)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            ConstraintExpr::Not(x) => Ok(!x.evaluate(event)?),
            ConstraintExpr::Xor(a, b) => Ok(a.evaluate(event)? != b.evaluate(event)?),
        }
    }

    /// Visits every leaf condition, left to right.
    pub fn for_each_condition<'a>(&'a self, f: &mut impl FnMut(&'a Condition)) {
        match self {
            ConstraintExpr::Leaf(c) => f(c),
            ConstraintExpr::And(xs) | ConstraintExpr::Or(xs) => {
                xs.iter().for_each(|x| x.for_each_condition(f))
            }
            ConstraintExpr::Not(x) => x.for_each_condition(f),
            ConstraintExpr::Xor(a, b) => {
                a.for_each_condition(f);
                b.for_each_condition(f);
            }
        }
    }
}

impl From<Condition> for ConstraintExpr {
    fn from(c: Condition) -> Self {
        ConstraintExpr::Leaf(c)
    }
}

impl fmt::Display for ConstraintExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn join(f: &mut fmt::Formatter<'_>, xs: &[ConstraintExpr], sep: &str) -> fmt::Result {
            f.write_str("(")?;
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    f.write_str(sep)?;
                }
                write!(f, "{x}")?;
            }
            f.write_str(")")
        }
        match self {
            ConstraintExpr::Leaf(c) => write!(f, "{c}"),
            ConstraintExpr::And(xs) if xs.is_empty() => f.write_str("⊤"),
            ConstraintExpr::Or(xs) if xs.is_empty() => f.write_str("⊥"),
            ConstraintExpr::And(xs) => join(f, xs, " ∧ "),
            ConstraintExpr::Or(xs) => join(f, xs, " ∨ "),
            ConstraintExpr::Not(x) => write!(f, "¬{x}"),
            ConstraintExpr::Xor(a, b) => write!(f, "({a} ⊕ {b})"),
        }
    }
}

/// A permission, prohibition or obligation: constraints evaluated
/// conjunctively. An empty rule matches every event.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Rule {
    pub label: Option<String>,
    pub constraints: Vec<ConstraintExpr>,
}

impl Rule {
    pub fn new(constraints: Vec<ConstraintExpr>) -> Self {
        Rule {
            label: None,
            constraints,
        }
    }

    pub fn labelled(label: impl Into<String>, constraints: Vec<ConstraintExpr>) -> Self {
        Rule {
            label: Some(label.into()),
            constraints,
        }
    }

    /// Rule made of plain conditions.
    pub fn from_conditions(conditions: impl IntoIterator<Item = Condition>) -> Self {
        Rule::new(conditions.into_iter().map(ConstraintExpr::Leaf).collect())
    }

    pub fn matches(&self, event: &Event) -> Result<bool> {
        for c in &self.constraints {
            if !c.evaluate(event)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn for_each_condition<'a>(&'a self, f: &mut impl FnMut(&'a Condition)) {
        for c in &self.constraints {
            c.for_each_condition(f);
        }
    }
}

/// Canonical conjunction of conditions with canonical operators only.
///
/// Conditions are sorted by (attribute, operator rank, value) and
/// deduplicated, so two simple rules are the same rule exactly when they
/// compare equal. The bottom form `R⊥` carries no conditions and matches
/// nothing; the empty non-bottom form matches everything.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SimpleRule {
    bottom: bool,
    conditions: Vec<Condition>,
}

impl SimpleRule {
    pub fn bottom() -> Self {
        SimpleRule {
            bottom: true,
            conditions: Vec::new(),
        }
    }

    /// The unconstrained simple rule.
    pub fn top() -> Self {
        SimpleRule {
            bottom: false,
            conditions: Vec::new(),
        }
    }

    /// Callers guarantee `conditions` is sorted, duplicate-free and canonical.
    pub(crate) fn from_sorted(conditions: Vec<Condition>) -> Self {
        debug_assert!(conditions.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(conditions.iter().all(|c| c.op.is_canonical_for(c.kind())));
        SimpleRule {
            bottom: false,
            conditions,
        }
    }

    pub fn is_bottom(&self) -> bool {
        self.bottom
    }

    pub fn conditions(&self) -> &[Condition] {
        &self.conditions
    }

    /// Conditions on one attribute (`C(R, λ)`).
    pub fn conditions_on<'a>(&'a self, attribute: &'a str) -> impl Iterator<Item = &'a Condition> {
        self.conditions
            .iter()
            .filter(move |c| c.attribute == attribute)
    }

    pub fn matches(&self, event: &Event) -> Result<bool> {
        if self.bottom {
            return Ok(false);
        }
        for c in &self.conditions {
            if !c.evaluate(event)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The rule whose constraints are this simple rule's conditions.
    /// `R⊥` has no such form.
    pub fn to_rule(&self) -> Option<Rule> {
        if self.bottom {
            return None;
        }
        Some(Rule::from_conditions(self.conditions.iter().cloned()))
    }
}

impl fmt::Display for SimpleRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bottom {
            return f.write_str("⊥");
        }
        if self.conditions.is_empty() {
            return f.write_str("⊤");
        }
        for (i, c) in self.conditions.iter().enumerate() {
            if i > 0 {
                f.write_str(" ∧ ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// A policy `⟨P, F, O⟩` over a declared attribute schema.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Policy {
    pub schema: Schema,
    pub permissions: Vec<Rule>,
    pub prohibitions: Vec<Rule>,
    pub obligations: Vec<Rule>,
}

impl Policy {
    pub fn rules(&self) -> impl Iterator<Item = &Rule> {
        self.permissions
            .iter()
            .chain(&self.prohibitions)
            .chain(&self.obligations)
    }

    /// Checks that every condition names a declared attribute, carries a
    /// value of that attribute's kind, and uses an operator legal for it.
    pub fn check_schema(&self) -> Result<()> {
        let mut failure = None;
        for rule in self.rules() {
            rule.for_each_condition(&mut |c| {
                if failure.is_none() {
                    failure = check_condition(&self.schema, c).err();
                }
            });
        }
        failure.map_or(Ok(()), Err)
    }

    /// Finds a rule by label among permissions, prohibitions and obligations.
    pub fn rule_by_label(&self, label: &str) -> Option<&Rule> {
        self.rules().find(|r| r.label.as_deref() == Some(label))
    }
}

pub(crate) fn check_condition(schema: &Schema, c: &Condition) -> Result<()> {
    let Some(&kind) = schema.get(&c.attribute) else {
        return Err(Error::schema(format!(
            "attribute `{}` is not declared in the schema",
            c.attribute
        )));
    };
    if c.kind() != kind {
        return Err(Error::schema(format!(
            "attribute `{}` is {} but is compared against a {} value",
            c.attribute,
            kind.as_str(),
            c.kind().as_str()
        )));
    }
    if !c.op.allowed_for(kind) {
        return Err(Error::schema(format!(
            "operator `{}` is not allowed on entity attribute `{}`",
            c.op.keyword(),
            c.attribute
        )));
    }
    Ok(())
}

/// Attribute valuation. The action is mandatory; any other attribute may be
/// null or absent, which are treated alike.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Event {
    values: BTreeMap<String, Option<Value>>,
}

impl Event {
    pub fn new(values: BTreeMap<String, Option<Value>>) -> Result<Self> {
        match values.get(ACTION) {
            Some(Some(_)) => Ok(Event { values }),
            Some(None) => Err(Error::schema("event has a null `Action`")),
            None => Err(Error::schema("event has no `Action`")),
        }
    }

    /// Convenience constructor from non-null pairs.
    pub fn from_pairs<K: Into<String>>(
        pairs: impl IntoIterator<Item = (K, Value)>,
    ) -> Result<Self> {
        Event::new(
            pairs
                .into_iter()
                .map(|(k, v)| (k.into(), Some(v)))
                .collect(),
        )
    }

    pub fn get(&self, attribute: &str) -> Option<&Value> {
        self.values.get(attribute).and_then(Option::as_ref)
    }

    pub fn is_null(&self, attribute: &str) -> bool {
        self.get(attribute).is_none()
    }

    pub fn assignments(&self) -> &BTreeMap<String, Option<Value>> {
        &self.values
    }
}

/// A state of the world: a finite collection of events.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct World {
    pub events: Vec<Event>,
}

impl World {
    pub fn new(events: Vec<Event>) -> Self {
        World { events }
    }
}

/// How events that match neither permissions nor prohibitions are treated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DefaultSemantics {
    /// Unmatched events are implicitly prohibited: every event needs a
    /// permission and no event may match a prohibition.
    #[default]
    Prohibit,
    /// Unmatched events are implicitly permitted: an event is a violation
    /// only when it matches a prohibition and no permission.
    Permit,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidityReport {
    pub semantics: DefaultSemantics,
    /// Every event is matched by some permission. Always true under
    /// [`DefaultSemantics::Permit`], where permissions only lift prohibitions.
    pub events_permitted: bool,
    /// Index of the first event without a permission.
    pub unpermitted_event: Option<usize>,
    pub no_event_prohibited: bool,
    /// First `(event, prohibition)` index pair in violation.
    pub prohibited: Option<(usize, usize)>,
    pub obligations_met: bool,
    /// Index of the first obligation no event satisfies.
    pub unmet_obligation: Option<usize>,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.events_permitted && self.no_event_prohibited && self.obligations_met
    }
}

fn first_match(rules: &[Rule], event: &Event) -> Result<Option<usize>> {
    for (i, r) in rules.iter().enumerate() {
        if r.matches(event)? {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

/// Checks a world against a policy under the given default semantics.
pub fn validate_world(
    policy: &Policy,
    world: &World,
    semantics: DefaultSemantics,
) -> Result<ValidityReport> {
    let mut unpermitted_event = None;
    let mut prohibited = None;
    for (ei, event) in world.events.iter().enumerate() {
        let permitted = first_match(&policy.permissions, event)?.is_some();
        if semantics == DefaultSemantics::Prohibit && !permitted && unpermitted_event.is_none() {
            unpermitted_event = Some(ei);
        }
        if prohibited.is_none() {
            let lifted = semantics == DefaultSemantics::Permit && permitted;
            if !lifted {
                if let Some(fi) = first_match(&policy.prohibitions, event)? {
                    prohibited = Some((ei, fi));
                }
            }
        }
    }

    let mut unmet_obligation = None;
    'obligations: for (oi, obligation) in policy.obligations.iter().enumerate() {
        for event in &world.events {
            if obligation.matches(event)? {
                continue 'obligations;
            }
        }
        unmet_obligation = Some(oi);
        break;
    }

    Ok(ValidityReport {
        semantics,
        events_permitted: unpermitted_event.is_none(),
        unpermitted_event,
        no_event_prohibited: prohibited.is_none(),
        prohibited,
        obligations_met: unmet_obligation.is_none(),
        unmet_obligation,
    })
}
