//! JSON policy, event, world and value-set documents.
//!
//! A policy document looks like:
//!
//! ```json
//! {
//!   "attributes": { "Action": "entity", "Age": "numeric" },
//!   "permissions": [
//!     { "label": "adult",
//!       "constraints": [
//!         { "left": "Action", "op": "eq", "right": "Play" },
//!         { "or": [ { "left": "Age", "op": "geq", "right": 18 },
//!                   { "not": { "left": "Age", "op": "lt", "right": 65 } } ] } ] }
//!   ],
//!   "prohibitions": [],
//!   "obligations": []
//! }
//! ```
//!
//! Leaves use the operators `eq`, `neq`, `lt`, `gt`, `leq` and `geq`.
//! Compound expressions are `{"and": [..]}`, `{"or": [..]}`, `{"not": x}`
//! and `{"xor": [a, b]}`. Numbers are read as exact decimals.

pub mod odrl;

use std::collections::BTreeMap;
use std::str::FromStr;

use serde_json::{Map, Number, Value as Json};

use crate::decimal::Decimal;
use crate::error::{Error, Result};
use crate::intervals::ValueIndex;
use crate::model::{
    check_condition, Condition, ConstraintExpr, Event, Kind, Operator, Policy, Rule, Schema,
    SimpleRule, Value, World,
};
use crate::normalize::canonicalize;

/// Operator names from set comparisons and class membership, which the
/// policy model does not support.
const EXCLUDED_OPERATORS: &[&str] = &[
    "in", "notin", "nin", "isA", "isa", "eq_type", "type", "hasPart", "isPartOf", "isAllOf",
    "isAnyOf", "isNoneOf", "subset", "superset", "equiv",
];

pub(crate) fn parse_json(text: &str) -> Result<Json> {
    Ok(serde_json::from_str(text)?)
}

pub(crate) fn render(json: &Json) -> String {
    let mut out = serde_json::to_string_pretty(json).expect("JSON values always serialise");
    out.push('\n');
    out
}

fn expect_object<'a>(json: &'a Json, what: &str) -> Result<&'a Map<String, Json>> {
    json.as_object()
        .ok_or_else(|| Error::schema(format!("{what} must be a JSON object")))
}

fn expect_array<'a>(json: &'a Json, what: &str) -> Result<&'a Vec<Json>> {
    json.as_array()
        .ok_or_else(|| Error::schema(format!("{what} must be a JSON array")))
}

fn reject_unknown_keys(obj: &Map<String, Json>, allowed: &[&str], what: &str) -> Result<()> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(Error::schema(format!("unknown key `{k}` in {what}"))),
        None => Ok(()),
    }
}

pub(crate) fn decimal_of(n: &Number) -> Result<Decimal> {
    Decimal::from_str(&n.to_string())
}

pub(crate) fn number_of(d: &Decimal) -> Json {
    Json::Number(Number::from_str(&d.to_string()).expect("plain decimals are valid JSON numbers"))
}

pub(crate) fn value_to_json(v: &Value) -> Json {
    match v {
        Value::Numeric(d) => number_of(d),
        Value::Symbol(s) => Json::String(s.clone()),
    }
}

/// Reads a scalar value; `None` for JSON null.
fn value_of(json: &Json, what: &str) -> Result<Option<Value>> {
    match json {
        Json::Null => Ok(None),
        Json::Number(n) => Ok(Some(Value::Numeric(decimal_of(n)?))),
        Json::String(s) => Ok(Some(Value::Symbol(s.clone()))),
        _ => Err(Error::schema(format!(
            "{what} must be a number, a string or null"
        ))),
    }
}

pub(crate) fn parse_operator(name: &str) -> Result<Operator> {
    if let Some(op) = Operator::from_keyword(name) {
        return Ok(op);
    }
    if EXCLUDED_OPERATORS.contains(&name) {
        return Err(Error::schema(format!(
            "operator `{name}` is not supported: set constraints and class membership are excluded"
        )));
    }
    Err(Error::schema(format!("unknown operator `{name}`")))
}

fn parse_kind(json: &Json, attribute: &str) -> Result<Kind> {
    match json.as_str() {
        Some("numeric") => Ok(Kind::Numeric),
        Some("entity") => Ok(Kind::Entity),
        _ => Err(Error::schema(format!(
            "attribute `{attribute}` must be declared \"numeric\" or \"entity\""
        ))),
    }
}

fn parse_expr(json: &Json, schema: &Schema) -> Result<ConstraintExpr> {
    let obj = expect_object(json, "a constraint")?;
    if obj.contains_key("left") || obj.contains_key("op") || obj.contains_key("right") {
        reject_unknown_keys(obj, &["left", "op", "right"], "a condition")?;
        let left = obj
            .get("left")
            .and_then(Json::as_str)
            .ok_or_else(|| Error::schema("a condition needs a string `left`"))?;
        let op = obj
            .get("op")
            .and_then(Json::as_str)
            .ok_or_else(|| Error::schema(format!("condition on `{left}` needs a string `op`")))?;
        let op = parse_operator(op)?;
        let right = obj
            .get("right")
            .ok_or_else(|| Error::schema(format!("condition on `{left}` needs a `right`")))?;
        let value = value_of(right, "`right`")?
            .ok_or_else(|| Error::schema(format!("condition on `{left}` has a null `right`")))?;
        let condition = Condition {
            attribute: left.to_string(),
            op,
            value,
        };
        check_condition(schema, &condition)?;
        return Ok(ConstraintExpr::Leaf(condition));
    }
    if obj.len() != 1 {
        return Err(Error::schema(
            "a compound constraint has exactly one of `and`, `or`, `not`, `xor`",
        ));
    }
    let (key, inner) = obj.iter().next().unwrap();
    let operands = |name: &str| -> Result<Vec<ConstraintExpr>> {
        let items = expect_array(inner, &format!("`{name}`"))?;
        if items.is_empty() {
            return Err(Error::schema(format!(
                "`{name}` needs at least one operand"
            )));
        }
        items.iter().map(|x| parse_expr(x, schema)).collect()
    };
    match key.as_str() {
        "and" => Ok(ConstraintExpr::all(operands("and")?)),
        "or" => Ok(ConstraintExpr::any(operands("or")?)),
        "not" => Ok(ConstraintExpr::not(parse_expr(inner, schema)?)),
        "xor" => {
            let mut xs = operands("xor")?;
            if xs.len() != 2 {
                return Err(Error::schema("`xor` takes exactly two operands"));
            }
            let b = xs.pop().unwrap();
            let a = xs.pop().unwrap();
            Ok(ConstraintExpr::xor(a, b))
        }
        other => Err(Error::schema(format!("unknown constraint key `{other}`"))),
    }
}

fn parse_rule(json: &Json, schema: &Schema) -> Result<Rule> {
    let obj = expect_object(json, "a rule")?;
    reject_unknown_keys(obj, &["label", "constraints"], "a rule")?;
    let label = match obj.get("label") {
        None | Some(Json::Null) => None,
        Some(Json::String(s)) => Some(s.clone()),
        Some(_) => return Err(Error::schema("rule `label` must be a string")),
    };
    let constraints = match obj.get("constraints") {
        None => Vec::new(),
        Some(cs) => expect_array(cs, "`constraints`")?
            .iter()
            .map(|c| parse_expr(c, schema))
            .collect::<Result<_>>()?,
    };
    Ok(Rule { label, constraints })
}

fn parse_rules(obj: &Map<String, Json>, key: &str, schema: &Schema) -> Result<Vec<Rule>> {
    match obj.get(key) {
        None => Ok(Vec::new()),
        Some(rules) => expect_array(rules, &format!("`{key}`"))?
            .iter()
            .map(|r| parse_rule(r, schema))
            .collect(),
    }
}

/// Reads a policy document, checking every condition against the declared
/// attributes. Single-operand `and`/`or` collapse to their operand.
pub fn parse_policy(text: &str) -> Result<Policy> {
    policy_from_json(&parse_json(text)?)
}

pub fn policy_from_json(json: &Json) -> Result<Policy> {
    let obj = expect_object(json, "a policy document")?;
    reject_unknown_keys(
        obj,
        &["attributes", "permissions", "prohibitions", "obligations"],
        "a policy document",
    )?;
    let mut schema = Schema::new();
    if let Some(attrs) = obj.get("attributes") {
        for (name, kind) in expect_object(attrs, "`attributes`")? {
            schema.insert(name.clone(), parse_kind(kind, name)?);
        }
    }
    let permissions = parse_rules(obj, "permissions", &schema)?;
    let prohibitions = parse_rules(obj, "prohibitions", &schema)?;
    let obligations = parse_rules(obj, "obligations", &schema)?;
    Ok(Policy {
        schema,
        permissions,
        prohibitions,
        obligations,
    })
}

pub fn condition_to_json(c: &Condition) -> Json {
    let mut obj = Map::new();
    obj.insert("left".into(), Json::String(c.attribute.clone()));
    obj.insert("op".into(), Json::String(c.op.keyword().into()));
    obj.insert("right".into(), value_to_json(&c.value));
    Json::Object(obj)
}

pub fn expr_to_json(expr: &ConstraintExpr) -> Json {
    let wrap = |key: &str, inner: Json| {
        let mut obj = Map::new();
        obj.insert(key.into(), inner);
        Json::Object(obj)
    };
    match expr {
        ConstraintExpr::Leaf(c) => condition_to_json(c),
        ConstraintExpr::And(xs) => wrap("and", Json::Array(xs.iter().map(expr_to_json).collect())),
        ConstraintExpr::Or(xs) => wrap("or", Json::Array(xs.iter().map(expr_to_json).collect())),
        ConstraintExpr::Not(x) => wrap("not", expr_to_json(x)),
        ConstraintExpr::Xor(a, b) => {
            wrap("xor", Json::Array(vec![expr_to_json(a), expr_to_json(b)]))
        }
    }
}

pub fn rule_to_json(rule: &Rule) -> Json {
    let mut obj = Map::new();
    if let Some(label) = &rule.label {
        obj.insert("label".into(), Json::String(label.clone()));
    }
    obj.insert(
        "constraints".into(),
        Json::Array(rule.constraints.iter().map(expr_to_json).collect()),
    );
    Json::Object(obj)
}

pub fn policy_to_json(policy: &Policy) -> Json {
    let rules = |rs: &[Rule]| Json::Array(rs.iter().map(rule_to_json).collect());
    let mut attrs = Map::new();
    for (name, kind) in &policy.schema {
        attrs.insert(name.clone(), Json::String(kind.as_str().into()));
    }
    let mut obj = Map::new();
    obj.insert("attributes".into(), Json::Object(attrs));
    obj.insert("permissions".into(), rules(&policy.permissions));
    obj.insert("prohibitions".into(), rules(&policy.prohibitions));
    obj.insert("obligations".into(), rules(&policy.obligations));
    Json::Object(obj)
}

/// Deterministic rendering: sorted keys, rule order preserved.
pub fn serialize_policy(policy: &Policy) -> String {
    render(&policy_to_json(policy))
}

/// A simple rule as a list of leaf conditions. `R⊥` renders as `null`.
pub fn simple_rule_to_json(t: &SimpleRule) -> Json {
    if t.is_bottom() {
        return Json::Null;
    }
    Json::Array(t.conditions().iter().map(condition_to_json).collect())
}

/// Reads back a rule whose constraints are all canonical leaves.
pub fn simple_rule_from_rule(rule: &Rule) -> Result<SimpleRule> {
    let mut conditions = Vec::with_capacity(rule.constraints.len());
    for c in &rule.constraints {
        match c {
            ConstraintExpr::Leaf(cond) if cond.op.is_canonical_for(cond.kind()) => {
                conditions.push(cond.clone())
            }
            other => {
                return Err(Error::InvalidInput(format!(
                    "`{other}` is not a canonical simple condition"
                )))
            }
        }
    }
    Ok(canonicalize(conditions))
}

pub fn event_from_json(json: &Json) -> Result<Event> {
    let obj = expect_object(json, "an event")?;
    let mut values = BTreeMap::new();
    for (k, v) in obj {
        values.insert(k.clone(), value_of(v, &format!("event value `{k}`"))?);
    }
    Event::new(values)
}

pub fn parse_event(text: &str) -> Result<Event> {
    event_from_json(&parse_json(text)?)
}

/// A world is a JSON array of events, or an object with an `events` array.
pub fn parse_world(text: &str) -> Result<World> {
    let json = parse_json(text)?;
    let events = match &json {
        Json::Array(items) => items,
        Json::Object(obj) => {
            reject_unknown_keys(obj, &["events"], "a world")?;
            expect_array(
                obj.get("events")
                    .ok_or_else(|| Error::schema("a world object needs `events`"))?,
                "`events`",
            )?
        }
        _ => return Err(Error::schema("a world must be an array of events")),
    };
    Ok(World::new(
        events.iter().map(event_from_json).collect::<Result<_>>()?,
    ))
}

pub fn event_to_json(event: &Event) -> Json {
    let mut obj = Map::new();
    for (k, v) in event.assignments() {
        obj.insert(k.clone(), v.as_ref().map_or(Json::Null, value_to_json));
    }
    Json::Object(obj)
}

pub fn world_to_json(world: &World) -> Json {
    Json::Array(world.events.iter().map(event_to_json).collect())
}

/// Reads a value-set document: attribute name to an array of values, all of
/// one kind per attribute.
pub fn parse_value_set(text: &str) -> Result<ValueIndex> {
    let json = parse_json(text)?;
    let obj = expect_object(&json, "a value set")?;
    let mut index = ValueIndex::new();
    for (attr, values) in obj {
        let mut kind = None;
        for v in expect_array(values, &format!("values of `{attr}`"))? {
            let value = value_of(v, &format!("a value of `{attr}`"))?
                .ok_or_else(|| Error::schema(format!("null value for `{attr}`")))?;
            if *kind.get_or_insert(value.kind()) != value.kind() {
                return Err(Error::schema(format!(
                    "values of `{attr}` mix numbers and strings"
                )));
            }
            index.insert(attr.clone(), value);
        }
    }
    Ok(index)
}

pub fn value_set_to_json(index: &ValueIndex) -> Json {
    let mut obj = Map::new();
    for (attr, values) in index.iter() {
        obj.insert(
            attr.into(),
            Json::Array(values.iter().map(value_to_json).collect()),
        );
    }
    Json::Object(obj)
}

/// Checks that every attribute of a value set is declared with a matching kind.
pub fn check_value_set(schema: &Schema, index: &ValueIndex) -> Result<()> {
    for (attr, values) in index.iter() {
        let declared = schema.get(attr).ok_or_else(|| {
            Error::schema(format!("value set names undeclared attribute `{attr}`"))
        })?;
        if values.iter().any(|v| v.kind() != *declared) {
            return Err(Error::schema(format!(
                "value set for `{attr}` does not match its declared kind {}",
                declared.as_str()
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Operator::*;

    const MOVIE: &str = r#"{
      "attributes": {"Action": "entity", "Asset": "entity", "Age": "numeric", "Payment": "numeric"},
      "permissions": [{
        "label": "R",
        "constraints": [
          {"left": "Action", "op": "eq", "right": "Play"},
          {"left": "Asset", "op": "eq", "right": "Movie"},
          {"or": [
            {"and": [{"left": "Age", "op": "geq", "right": 18}, {"left": "Payment", "op": "eq", "right": 10}]},
            {"and": [{"left": "Age", "op": "lt", "right": 18}, {"left": "Payment", "op": "eq", "right": 5}]}
          ]}
        ]
      }],
      "prohibitions": [],
      "obligations": []
    }"#;

    #[test]
    fn parses_movie_rule() {
        let p = parse_policy(MOVIE).unwrap();
        let r = &p.permissions[0];
        assert_eq!(r.constraints.len(), 3);
        match &r.constraints[2] {
            ConstraintExpr::Or(xs) => {
                assert_eq!(xs.len(), 2);
                assert!(xs
                    .iter()
                    .all(|x| matches!(x, ConstraintExpr::And(ys) if ys.len() == 2)));
            }
            other => panic!("expected or, got {other:?}"),
        }
    }

    #[test]
    fn empty_policy() {
        let p = parse_policy(
            r#"{"attributes":{},"permissions":[],"prohibitions":[],"obligations":[]}"#,
        )
        .unwrap();
        assert_eq!(p, Policy::default());
        assert_eq!(
            serialize_policy(&p),
            "{\n  \"attributes\": {},\n  \"obligations\": [],\n  \"permissions\": [],\n  \"prohibitions\": []\n}\n"
        );
    }

    #[test]
    fn set_operator_error_names_the_exclusion() {
        let err = parse_policy(
            r#"{"attributes":{"Loc":"entity"},"permissions":[{"constraints":[{"left":"Loc","op":"in","right":"Park"}]}]}"#,
        )
        .unwrap_err();
        match err {
            Error::Schema(msg) => assert!(msg.contains("set constraints"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn schema_errors() {
        let undeclared = r#"{"attributes":{},"permissions":[{"constraints":[{"left":"Age","op":"gt","right":1}]}]}"#;
        assert!(matches!(parse_policy(undeclared), Err(Error::Schema(_))));
        let entity_lt = r#"{"attributes":{"P":"entity"},"permissions":[{"constraints":[{"left":"P","op":"lt","right":"a"}]}]}"#;
        assert!(matches!(parse_policy(entity_lt), Err(Error::Schema(_))));
        let string_for_number = r#"{"attributes":{"Age":"numeric"},"permissions":[{"constraints":[{"left":"Age","op":"gt","right":"18"}]}]}"#;
        assert!(matches!(
            parse_policy(string_for_number),
            Err(Error::Schema(_))
        ));
        let bad_op = r#"{"attributes":{"Age":"numeric"},"permissions":[{"constraints":[{"left":"Age","op":"approx","right":1}]}]}"#;
        assert!(matches!(parse_policy(bad_op), Err(Error::Schema(_))));
        let unknown_key = r#"{"attributes":{},"rules":[]}"#;
        assert!(matches!(parse_policy(unknown_key), Err(Error::Schema(_))));
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = parse_policy("{\n  \"attributes\": {,}\n}").unwrap_err();
        match err {
            Error::Parse { line, column, .. } => {
                assert_eq!(line, 2);
                assert!(column > 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn singleton_and_or_collapse() {
        let p = parse_policy(
            r#"{"attributes":{"A":"numeric"},"permissions":[{"constraints":[{"and":[{"or":[{"left":"A","op":"eq","right":1}]}]}]}]}"#,
        )
        .unwrap();
        assert_eq!(
            p.permissions[0].constraints[0],
            ConstraintExpr::Leaf(Condition::num("A", Eq, 1))
        );
    }

    #[test]
    fn exact_and_scientific_numbers() {
        let p = parse_policy(
            r#"{"attributes":{"A":"numeric"},"permissions":[{"constraints":[{"left":"A","op":"gt","right":1.5e3},{"left":"A","op":"lt","right":0.1000000000000000000000000001}]}]}"#,
        )
        .unwrap();
        let text = serialize_policy(&p);
        assert!(text.contains("1500"), "{text}");
        assert!(text.contains("0.1000000000000000000000000001"), "{text}");
        assert_eq!(parse_policy(&text).unwrap(), p);
    }

    #[test]
    fn movie_round_trip() {
        let p = parse_policy(MOVIE).unwrap();
        assert_eq!(parse_policy(&serialize_policy(&p)).unwrap(), p);
    }

    #[test]
    fn events() {
        let alice = parse_event(
            r#"{"Action":"Read","Party":"Alice","Asset":"Document D","Day":"Monday","Pages":5}"#,
        )
        .unwrap();
        assert_eq!(alice.get("Pages"), Some(&Value::num(5)));
        assert_eq!(alice.get("Party"), Some(&Value::sym("Alice")));
        let bob = parse_event(r#"{"Action":"Edit","Pages":null}"#).unwrap();
        assert!(bob.is_null("Pages"));
        assert!(matches!(
            parse_event(r#"{"Action":null}"#),
            Err(Error::Schema(_))
        ));
        assert!(matches!(
            parse_event(r#"{"Action":"x","P":[1]}"#),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn worlds_and_value_sets() {
        let w = parse_world(r#"[{"Action":"a"},{"Action":"b","N":3}]"#).unwrap();
        assert_eq!(w.events.len(), 2);
        let w2 = parse_world(r#"{"events":[{"Action":"a"}]}"#).unwrap();
        assert_eq!(w2.events.len(), 1);
        let v = parse_value_set(r#"{"Age":[65,18,18],"Party":["Bob","Alice"]}"#).unwrap();
        let ages: Vec<String> = v.values("Age").map(|x| x.to_string()).collect();
        assert_eq!(ages, ["18", "65"]);
        assert!(parse_value_set(r#"{"Age":[1,"x"]}"#).is_err());
        let mut schema = Schema::new();
        schema.insert("Age".into(), Kind::Numeric);
        assert!(check_value_set(&schema, &v).is_err());
        schema.insert("Party".into(), Kind::Entity);
        assert!(check_value_set(&schema, &v).is_ok());
    }

    #[test]
    fn simple_rule_json_round_trip() {
        let t = canonicalize([
            Condition::num("Age", Gt, 18),
            Condition::sym("Action", Eq, "Play"),
        ]);
        let rule = t.to_rule().unwrap();
        let back = simple_rule_from_rule(&rule).unwrap();
        assert_eq!(back, t);
        assert_eq!(simple_rule_to_json(&SimpleRule::bottom()), Json::Null);
        let not_simple = Rule::from_conditions([Condition::num("Age", Geq, 18)]);
        assert!(simple_rule_from_rule(&not_simple).is_err());
    }
}
