//! Import of a restricted ODRL 2.2 JSON-LD subset.
//!
//! Supported: `permission`, `prohibition` and `obligation` rules (also at
//! policy level for `target`, `assignee`, `assigner` and `action`, which are
//! inherited by every rule), constraint lists of
//! `leftOperand`/`operator`/`rightOperand` with the operators `eq`, `neq`,
//! `lt`, `gt`, `lteq`, `gteq`, and the logical constraints `and`, `or` and
//! `xone`. Terms may carry the `odrl:` prefix or the full ODRL namespace.
//! No remote context is fetched.
//!
//! Core components become equality conditions on the reserved attributes
//! `Action`, `Asset`, `Assignee` and `Assigner`. Several values for one
//! component become a disjunction. Anything else (set operators, class
//! membership, duties, refinements, units, date literals) is rejected with
//! [`Error::UnsupportedFeature`] naming the offending term.

use serde_json::{Map, Value as Json};

use super::{decimal_of, parse_json};
use crate::error::{Error, Result};
use crate::model::{
    Condition, ConstraintExpr, Kind, Operator, Policy, Rule, Schema, Value, ACTION,
};

const ODRL_NS: &str = "http://www.w3.org/ns/odrl/2/";

const METADATA_KEYS: &[&str] = &["@context", "@type", "@id", "uid", "type", "profile"];

const COMPONENTS: &[(&str, &str)] = &[
    ("action", ACTION),
    ("target", "Asset"),
    ("assignee", "Assignee"),
    ("assigner", "Assigner"),
];

const NUMERIC_TYPES: &[&str] = &[
    "integer",
    "int",
    "long",
    "short",
    "decimal",
    "double",
    "float",
    "nonNegativeInteger",
    "positiveInteger",
    "negativeInteger",
    "nonPositiveInteger",
    "unsignedInt",
    "unsignedLong",
];

/// Strips the `odrl:` prefix or the ODRL namespace from a term.
fn local(term: &str) -> &str {
    term.strip_prefix("odrl:")
        .or_else(|| term.strip_prefix(ODRL_NS))
        .unwrap_or(term)
}

fn xsd_local(term: &str) -> &str {
    term.strip_prefix("xsd:")
        .or_else(|| term.strip_prefix("http://www.w3.org/2001/XMLSchema#"))
        .unwrap_or(term)
}

/// Object entries with prefixes removed from keys.
fn entries(obj: &Map<String, Json>) -> impl Iterator<Item = (&str, &Json)> {
    obj.iter().map(|(k, v)| (local(k), v))
}

fn get<'a>(obj: &'a Map<String, Json>, key: &str) -> Option<&'a Json> {
    entries(obj).find(|(k, _)| *k == key).map(|(_, v)| v)
}

/// One or many: arrays and `@list` wrappers are flattened.
fn items(json: &Json) -> Vec<&Json> {
    match json {
        Json::Array(xs) => xs.iter().collect(),
        Json::Object(obj) if obj.contains_key("@list") => items(&obj["@list"]),
        other => vec![other],
    }
}

struct Importer {
    schema: Schema,
}

impl Importer {
    fn declare(&mut self, attribute: &str, kind: Kind) -> Result<()> {
        match self.schema.get(attribute) {
            Some(&k) if k != kind => Err(Error::schema(format!(
                "attribute `{attribute}` is used both as {} and {}",
                k.as_str(),
                kind.as_str()
            ))),
            _ => {
                self.schema.insert(attribute.to_string(), kind);
                Ok(())
            }
        }
    }

    /// IRI of a component value (`"play"`, `{"@id": ..}`, `{"uid": ..}`).
    fn component_iri(&self, key: &str, json: &Json) -> Result<String> {
        match json {
            Json::String(s) => Ok(local(s).to_string()),
            Json::Object(obj) => {
                for (k, _) in entries(obj) {
                    if matches!(k, "refinement" | "source" | "includedIn" | "implies") {
                        return Err(Error::unsupported(
                            k,
                            format!("`{k}` on `{key}` is outside the supported subset"),
                        ));
                    }
                }
                let iri = get(obj, "@id")
                    .or_else(|| get(obj, "uid"))
                    .or_else(|| get(obj, "rdf:value").and_then(|v| v.get("@id")))
                    .and_then(Json::as_str)
                    .ok_or_else(|| Error::schema(format!("`{key}` has no identifier")))?;
                Ok(local(iri).to_string())
            }
            _ => Err(Error::schema(format!(
                "`{key}` must be an IRI or an object"
            ))),
        }
    }

    fn component(&mut self, key: &str, attribute: &str, json: &Json) -> Result<ConstraintExpr> {
        self.declare(attribute, Kind::Entity)?;
        let alternatives = items(json)
            .into_iter()
            .map(|v| {
                Ok(ConstraintExpr::Leaf(Condition {
                    attribute: attribute.to_string(),
                    op: Operator::Eq,
                    value: Value::Symbol(self.component_iri(key, v)?),
                }))
            })
            .collect::<Result<Vec<_>>>()?;
        if alternatives.is_empty() {
            return Err(Error::schema(format!("`{key}` is empty")));
        }
        Ok(ConstraintExpr::any(alternatives))
    }

    fn operator(&self, json: &Json) -> Result<Operator> {
        let name = match json {
            Json::String(s) => s.as_str(),
            Json::Object(obj) => get(obj, "@id")
                .and_then(Json::as_str)
                .ok_or_else(|| Error::schema("operator object has no `@id`"))?,
            _ => return Err(Error::schema("operator must be an IRI")),
        };
        match local(name) {
            "eq" => Ok(Operator::Eq),
            "neq" => Ok(Operator::Neq),
            "lt" => Ok(Operator::Lt),
            "gt" => Ok(Operator::Gt),
            "lteq" => Ok(Operator::Leq),
            "gteq" => Ok(Operator::Geq),
            op @ ("isA" | "hasPart" | "isPartOf" | "isAllOf" | "isAnyOf" | "isNoneOf") => Err(
                Error::unsupported(op, "set and class-membership operators are not supported"),
            ),
            other => Err(Error::unsupported(other, "unknown operator")),
        }
    }

    fn right_operand(&self, json: &Json) -> Result<Value> {
        match json {
            Json::Number(n) => Ok(Value::Numeric(decimal_of(n)?)),
            Json::String(s) => Ok(Value::Symbol(local(s).to_string())),
            Json::Array(_) => Err(Error::unsupported(
                "rightOperand",
                "set-valued right operands are not supported",
            )),
            Json::Object(obj) => {
                if let Some(id) = get(obj, "@id").and_then(Json::as_str) {
                    return Ok(Value::Symbol(local(id).to_string()));
                }
                if obj.contains_key("@list") || obj.contains_key("@set") {
                    return Err(Error::unsupported(
                        "rightOperand",
                        "set-valued right operands are not supported",
                    ));
                }
                let raw = obj
                    .get("@value")
                    .ok_or_else(|| Error::schema("rightOperand object has no `@value`"))?;
                let ty = obj.get("@type").and_then(Json::as_str).map(xsd_local);
                match ty {
                    Some(t) if NUMERIC_TYPES.contains(&t) => {
                        let text = match raw {
                            Json::Number(n) => n.to_string(),
                            Json::String(s) => s.clone(),
                            _ => {
                                return Err(Error::schema(
                                    "numeric literal must be a number or string",
                                ))
                            }
                        };
                        Ok(Value::Numeric(text.parse()?))
                    }
                    Some(t @ ("date" | "dateTime" | "time" | "duration" | "dateTimeStamp")) => {
                        Err(Error::unsupported(
                            format!("xsd:{t}"),
                            "temporal literals must be encoded as numbers before import",
                        ))
                    }
                    _ => match raw {
                        Json::Number(n) => Ok(Value::Numeric(decimal_of(n)?)),
                        Json::String(s) => Ok(Value::Symbol(s.clone())),
                        _ => Err(Error::schema("unsupported `@value`")),
                    },
                }
            }
            _ => Err(Error::schema(
                "rightOperand must be a number, string or object",
            )),
        }
    }

    fn constraint(&mut self, json: &Json) -> Result<ConstraintExpr> {
        let obj = json
            .as_object()
            .ok_or_else(|| Error::schema("constraint must be an object"))?;
        for logical in ["and", "or", "xone"] {
            if let Some(list) = get(obj, logical) {
                let operands = items(list)
                    .into_iter()
                    .map(|c| self.constraint(c))
                    .collect::<Result<Vec<_>>>()?;
                if operands.is_empty() {
                    return Err(Error::schema(format!("`{logical}` has no operands")));
                }
                return Ok(match logical {
                    "and" => ConstraintExpr::all(operands),
                    "or" => ConstraintExpr::any(operands),
                    _ => exactly_one(operands),
                });
            }
        }
        for (k, _) in entries(obj) {
            match k {
                "leftOperand" | "operator" | "rightOperand" | "dataType" => {}
                k if METADATA_KEYS.contains(&k) => {}
                other => {
                    return Err(Error::unsupported(
                        other,
                        "constraint term outside the supported subset",
                    ))
                }
            }
        }
        let left = get(obj, "leftOperand")
            .ok_or_else(|| Error::schema("constraint has no `leftOperand`"))?;
        let left = match left {
            Json::String(s) => local(s).to_string(),
            Json::Object(o) => get(o, "@id")
                .and_then(Json::as_str)
                .map(|s| local(s).to_string())
                .ok_or_else(|| Error::schema("leftOperand object has no `@id`"))?,
            _ => return Err(Error::schema("leftOperand must be an IRI")),
        };
        let op = self.operator(
            get(obj, "operator").ok_or_else(|| Error::schema("constraint has no `operator`"))?,
        )?;
        let value = self.right_operand(
            get(obj, "rightOperand")
                .ok_or_else(|| Error::schema("constraint has no `rightOperand`"))?,
        )?;
        self.declare(&left, value.kind())?;
        Ok(ConstraintExpr::Leaf(Condition::new(left, op, value)?))
    }

    fn rule(
        &mut self,
        json: &Json,
        inherited: &[(&'static str, &'static str, Json)],
    ) -> Result<Rule> {
        let obj = json
            .as_object()
            .ok_or_else(|| Error::schema("rule must be an object"))?;
        let mut constraints = Vec::new();
        let mut label = None;
        for (k, v) in entries(obj) {
            match k {
                "uid" | "@id" => label = v.as_str().map(str::to_string),
                "@type" | "type" | "constraint" => {}
                k if COMPONENTS.iter().any(|(key, _)| *key == k) => {}
                other => {
                    return Err(Error::unsupported(
                        other,
                        "rule term outside the supported subset",
                    ))
                }
            }
        }
        for &(key, attribute) in COMPONENTS {
            let own = get(obj, key);
            let value = own.or_else(|| {
                inherited
                    .iter()
                    .find(|(k, _, _)| *k == key)
                    .map(|(_, _, v)| v)
            });
            if let Some(v) = value {
                constraints.push(self.component(key, attribute, v)?);
            }
        }
        if let Some(cs) = get(obj, "constraint") {
            for c in items(cs) {
                constraints.push(self.constraint(c)?);
            }
        }
        Ok(Rule { label, constraints })
    }
}

/// Exactly one operand holds. Two operands give the binary exclusive-or.
fn exactly_one(mut operands: Vec<ConstraintExpr>) -> ConstraintExpr {
    match operands.len() {
        1 => operands.pop().unwrap(),
        2 => {
            let b = operands.pop().unwrap();
            let a = operands.pop().unwrap();
            ConstraintExpr::xor(a, b)
        }
        n => ConstraintExpr::Or(
            (0..n)
                .map(|i| {
                    ConstraintExpr::And(
                        operands
                            .iter()
                            .enumerate()
                            .map(|(j, x)| {
                                if i == j {
                                    x.clone()
                                } else {
                                    ConstraintExpr::not(x.clone())
                                }
                            })
                            .collect(),
                    )
                })
                .collect(),
        ),
    }
}

/// Imports an ODRL JSON-LD policy restricted to the supported subset.
pub fn import_odrl_subset(text: &str) -> Result<Policy> {
    let json = parse_json(text)?;
    let obj = json
        .as_object()
        .ok_or_else(|| Error::schema("ODRL policy must be a JSON object"))?;

    let mut inherited = Vec::new();
    for (k, v) in entries(obj) {
        match k {
            "permission" | "prohibition" | "obligation" => {}
            k if METADATA_KEYS.contains(&k) => {}
            k => match COMPONENTS.iter().find(|(key, _)| *key == k) {
                Some(&(key, attribute)) => inherited.push((key, attribute, v.clone())),
                None => {
                    return Err(Error::unsupported(
                        k,
                        "policy term outside the supported subset",
                    ))
                }
            },
        }
    }

    let mut importer = Importer {
        schema: Schema::new(),
    };
    let mut rules_of = |key: &str| -> Result<Vec<Rule>> {
        match get(obj, key) {
            None => Ok(Vec::new()),
            Some(rs) => items(rs)
                .into_iter()
                .map(|r| importer.rule(r, &inherited))
                .collect(),
        }
    };
    let permissions = rules_of("permission")?;
    let prohibitions = rules_of("prohibition")?;
    let obligations = rules_of("obligation")?;
    let policy = Policy {
        schema: importer.schema,
        permissions,
        prohibitions,
        obligations,
    };
    policy.check_schema()?;
    Ok(policy)
}
