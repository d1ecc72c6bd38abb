use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A message carried on a channel.
///
/// The tick is not a value: time progress is the boundary between the
/// intervals of a [`TimedStream`](super::TimedStream).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Enum(String),
    Record(BTreeMap<String, Value>),
}

impl Value {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(n) => write!(f, "{n}"),
            Value::Enum(lit) => f.write_str(lit),
            Value::Record(fields) => {
                f.write_str("{")?;
                for (i, (name, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{name} = {v}")?;
                }
                f.write_str("}")
            }
        }
    }
}

/// A resolved message type. Every shape has a finite domain.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Type {
    Int { lo: i64, hi: i64 },
    Bool,
    Enum { name: String, literals: Vec<String> },
    Record { name: String, fields: Vec<(String, Type)> },
}

impl Type {
    pub fn conforms(&self, value: &Value) -> bool {
        match (self, value) {
            (Type::Int { lo, hi }, Value::Int(n)) => lo <= n && n <= hi,
            (Type::Bool, Value::Bool(_)) => true,
            (Type::Enum { literals, .. }, Value::Enum(lit)) => literals.contains(lit),
            (Type::Record { fields, .. }, Value::Record(values)) => {
                fields.len() == values.len()
                    && fields
                        .iter()
                        .all(|(name, ty)| values.get(name).is_some_and(|v| ty.conforms(v)))
            }
            _ => false,
        }
    }

    /// Number of values in the domain, saturating.
    pub fn cardinality(&self) -> u64 {
        match self {
            Type::Int { lo, hi } => (hi - lo).unsigned_abs().saturating_add(1),
            Type::Bool => 2,
            Type::Enum { literals, .. } => literals.len() as u64,
            Type::Record { fields, .. } => fields
                .iter()
                .fold(1u64, |acc, (_, ty)| acc.saturating_mul(ty.cardinality())),
        }
    }

    /// Enumerates the domain in ascending value order.
    pub fn values(&self) -> Vec<Value> {
        match self {
            Type::Int { lo, hi } => (*lo..=*hi).map(Value::Int).collect(),
            Type::Bool => vec![Value::Bool(false), Value::Bool(true)],
            Type::Enum { literals, .. } => literals.iter().cloned().map(Value::Enum).collect(),
            Type::Record { fields, .. } => {
                let mut out = vec![BTreeMap::new()];
                for (name, ty) in fields {
                    let domain = ty.values();
                    out = out
                        .into_iter()
                        .flat_map(|partial| {
                            domain.iter().map(move |v| {
                                let mut next = partial.clone();
                                next.insert(name.clone(), v.clone());
                                next
                            })
                        })
                        .collect();
                }
                let mut values: Vec<Value> = out.into_iter().map(Value::Record).collect();
                values.sort();
                values
            }
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Int { lo, hi } => write!(f, "int[{lo}..{hi}]"),
            Type::Bool => f.write_str("bool"),
            Type::Enum { name, .. } | Type::Record { name, .. } => f.write_str(name),
        }
    }
}

/// A type expression as written in a model: either an inline shape or a
/// reference to a named datatype.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TypeExpr {
    Int { lo: i64, hi: i64 },
    Bool,
    Named(String),
}

impl fmt::Display for TypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeExpr::Int { lo, hi } => write!(f, "int[{lo}..{hi}]"),
            TypeExpr::Bool => f.write_str("bool"),
            TypeExpr::Named(name) => f.write_str(name),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TypeShape {
    IntRange { lo: i64, hi: i64 },
    Enumeration(Vec<String>),
    Record(Vec<(String, TypeExpr)>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DataTypeDef {
    pub name: String,
    pub shape: TypeShape,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TypeDefError {
    #[error("unknown datatype `{0}`")]
    Unknown(String),
    #[error("datatype `{0}` refers to itself")]
    Recursive(String),
    #[error("datatype `{0}` has an empty enumeration")]
    EmptyEnumeration(String),
    #[error("datatype `{name}` repeats `{item}`")]
    Duplicate { name: String, item: String },
    #[error("integer range {lo}..{hi} is empty")]
    EmptyRange { lo: i64, hi: i64 },
}

/// Resolves type expressions against a set of datatype definitions.
#[derive(Debug, Clone, Default)]
pub struct TypeTable {
    defs: BTreeMap<String, DataTypeDef>,
}

impl TypeTable {
    pub fn new<'a>(defs: impl IntoIterator<Item = &'a DataTypeDef>) -> Self {
        let mut table = BTreeMap::new();
        for def in defs {
            table.entry(def.name.clone()).or_insert_with(|| def.clone());
        }
        TypeTable { defs: table }
    }

    pub fn get(&self, name: &str) -> Option<&DataTypeDef> {
        self.defs.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.defs.keys().map(String::as_str)
    }

    pub fn resolve(&self, expr: &TypeExpr) -> Result<Type, TypeDefError> {
        self.resolve_in(expr, &mut Vec::new())
    }

    pub fn resolve_def(&self, name: &str) -> Result<Type, TypeDefError> {
        self.resolve(&TypeExpr::Named(name.to_string()))
    }

    fn resolve_in(&self, expr: &TypeExpr, stack: &mut Vec<String>) -> Result<Type, TypeDefError> {
        match expr {
            TypeExpr::Int { lo, hi } => {
                if lo > hi {
                    return Err(TypeDefError::EmptyRange { lo: *lo, hi: *hi });
                }
                Ok(Type::Int { lo: *lo, hi: *hi })
            }
            TypeExpr::Bool => Ok(Type::Bool),
            TypeExpr::Named(name) => {
                if stack.contains(name) {
                    return Err(TypeDefError::Recursive(name.clone()));
                }
                let def = self
                    .defs
                    .get(name)
                    .ok_or_else(|| TypeDefError::Unknown(name.clone()))?;
                stack.push(name.clone());
                let ty = match &def.shape {
                    TypeShape::IntRange { lo, hi } => {
                        self.resolve_in(&TypeExpr::Int { lo: *lo, hi: *hi }, stack)?
                    }
                    TypeShape::Enumeration(literals) => {
                        if literals.is_empty() {
                            return Err(TypeDefError::EmptyEnumeration(name.clone()));
                        }
                        if let Some(dup) = first_duplicate(literals.iter()) {
                            return Err(TypeDefError::Duplicate {
                                name: name.clone(),
                                item: dup.clone(),
                            });
                        }
                        Type::Enum {
                            name: name.clone(),
                            literals: literals.clone(),
                        }
                    }
                    TypeShape::Record(fields) => {
                        if let Some(dup) = first_duplicate(fields.iter().map(|(f, _)| f)) {
                            return Err(TypeDefError::Duplicate {
                                name: name.clone(),
                                item: dup.clone(),
                            });
                        }
                        let mut resolved = Vec::with_capacity(fields.len());
                        for (field, fexpr) in fields {
                            resolved.push((field.clone(), self.resolve_in(fexpr, stack)?));
                        }
                        Type::Record {
                            name: name.clone(),
                            fields: resolved,
                        }
                    }
                };
                stack.pop();
                Ok(ty)
            }
        }
    }
}

fn first_duplicate<'a, T: Ord + 'a>(items: impl Iterator<Item = &'a T>) -> Option<&'a T> {
    let mut seen = std::collections::BTreeSet::new();
    items.into_iter().find(|item| !seen.insert(*item))
}

/// A typed channel identifier.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChannelId {
    pub name: String,
    pub msg_type: Type,
}

impl ChannelId {
    pub fn new(name: impl Into<String>, msg_type: Type) -> Self {
        ChannelId {
            name: name.into(),
            msg_type,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> TypeTable {
        TypeTable::new(&[
            DataTypeDef {
                name: "Bit".into(),
                shape: TypeShape::IntRange { lo: 0, hi: 1 },
            },
            DataTypeDef {
                name: "Pair".into(),
                shape: TypeShape::Record(vec![
                    ("hi".into(), TypeExpr::Named("Bit".into())),
                    ("lo".into(), TypeExpr::Named("Bit".into())),
                ]),
            },
            DataTypeDef {
                name: "Loop".into(),
                shape: TypeShape::Record(vec![("next".into(), TypeExpr::Named("Loop".into()))]),
            },
            DataTypeDef {
                name: "Color".into(),
                shape: TypeShape::Enumeration(vec!["Red".into(), "Red".into()]),
            },
        ])
    }

    #[test]
    fn record_domain_is_product() {
        let ty = table().resolve_def("Pair").unwrap();
        assert_eq!(ty.cardinality(), 4);
        let values = ty.values();
        assert_eq!(values.len(), 4);
        assert!(values.iter().all(|v| ty.conforms(v)));
    }

    #[test]
    fn recursive_and_duplicate_definitions_rejected() {
        let t = table();
        assert_eq!(
            t.resolve_def("Loop"),
            Err(TypeDefError::Recursive("Loop".into()))
        );
        assert!(matches!(
            t.resolve_def("Color"),
            Err(TypeDefError::Duplicate { .. })
        ));
        assert_eq!(
            t.resolve(&TypeExpr::Int { lo: 3, hi: 1 }),
            Err(TypeDefError::EmptyRange { lo: 3, hi: 1 })
        );
    }

    #[test]
    fn int_range_conformance() {
        let ty = Type::Int { lo: 0, hi: 9 };
        assert!(ty.conforms(&Value::Int(9)));
        assert!(!ty.conforms(&Value::Int(12)));
        assert!(!ty.conforms(&Value::Bool(true)));
    }
}
