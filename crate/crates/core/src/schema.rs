//! Relation schema: the 36 relation types plus `unanswerable`.
//!
//! The registry is loaded from an embedded data file and is the single source
//! of truth for label names, numeric ids, inverse links, argument-class
//! constraints and the reference trigger ratios.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Version tag of the embedded relation table.
pub const SCHEMA_VERSION: &str = "dialogre-relations/1";

/// Number of proper relation types (everything except `unanswerable`).
pub const NUM_RELATIONS: usize = 36;

const EMBEDDED_SCHEMA: &str = include_str!("../data/relations.json");

static REGISTRY: LazyLock<Schema> = LazyLock::new(|| {
    Schema::from_json(EMBEDDED_SCHEMA).expect("embedded relation table is well formed")
});

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchemaError {
    #[error("unknown relation label `{0}`")]
    UnknownLabel(String),
    #[error("unknown argument class `{0}`")]
    UnknownClass(String),
    #[error("malformed relation table: {0}")]
    Malformed(String),
}

/// Argument class of a subject or object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ArgClass {
    #[serde(rename = "PER")]
    Per,
    #[serde(rename = "GPE")]
    Gpe,
    #[serde(rename = "ORG")]
    Org,
    #[serde(rename = "NAME")]
    Name,
    #[serde(rename = "STRING")]
    String,
    #[serde(rename = "VALUE")]
    Value,
}

impl ArgClass {
    pub const ALL: [ArgClass; 6] = [
        ArgClass::Per,
        ArgClass::Gpe,
        ArgClass::Org,
        ArgClass::Name,
        ArgClass::String,
        ArgClass::Value,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ArgClass::Per => "PER",
            ArgClass::Gpe => "GPE",
            ArgClass::Org => "ORG",
            ArgClass::Name => "NAME",
            ArgClass::String => "STRING",
            ArgClass::Value => "VALUE",
        }
    }

    /// Classes that denote a named entity.
    pub fn is_entity(self) -> bool {
        matches!(
            self,
            ArgClass::Per | ArgClass::Gpe | ArgClass::Org | ArgClass::Name
        )
    }

    /// Whether an argument of this class can fill an object slot declared as
    /// `slot`. Typed entities (PER, GPE, ORG) are names, so they fill a NAME
    /// slot as well as their own.
    pub fn fills(self, slot: ArgClass) -> bool {
        self == slot || (slot == ArgClass::Name && self.is_entity())
    }
}

impl fmt::Display for ArgClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ArgClass {
    type Err = SchemaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ArgClass::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| SchemaError::UnknownClass(s.to_string()))
    }
}

/// Numeric relation id, `1..=37`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RelationId(u8);

impl RelationId {
    pub const UNANSWERABLE: RelationId = RelationId(37);

    pub fn new(id: u8) -> Option<Self> {
        (1..=37).contains(&id).then_some(RelationId(id))
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn is_unanswerable(self) -> bool {
        self == Self::UNANSWERABLE
    }

    /// The schema entry for this id.
    pub fn relation(self) -> &'static RelationType {
        Schema::embedded().get(self)
    }

    pub fn name(self) -> &'static str {
        &self.relation().name
    }
}

impl fmt::Display for RelationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One row of the relation table.
///
/// Field order is the dump order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationType {
    pub id: RelationId,
    pub name: String,
    pub subject_class: ArgClass,
    pub object_classes: Vec<ArgClass>,
    pub inverse_id: Option<RelationId>,
    pub trigger_ratio: Option<f64>,
}

impl RelationType {
    pub fn is_symmetric(&self) -> bool {
        self.inverse_id == Some(self.id)
    }
}

/// Registry of relation types indexed by id and by name.
#[derive(Debug, Clone, PartialEq)]
pub struct Schema {
    types: Vec<RelationType>,
    by_name: HashMap<String, RelationId>,
}

impl Schema {
    /// The registry shipped with the crate.
    pub fn embedded() -> &'static Schema {
        &REGISTRY
    }

    /// Parses and validates a relation table in the dump format.
    pub fn from_json(src: &str) -> Result<Schema, SchemaError> {
        let types: Vec<RelationType> =
            serde_json::from_str(src).map_err(|e| SchemaError::Malformed(e.to_string()))?;
        Schema::from_types(types)
    }

    fn from_types(types: Vec<RelationType>) -> Result<Schema, SchemaError> {
        let bad = |msg: String| Err(SchemaError::Malformed(msg));
        if types.len() != NUM_RELATIONS + 1 {
            return bad(format!("expected 37 entries, found {}", types.len()));
        }
        let mut by_name = HashMap::with_capacity(types.len());
        for (pos, t) in types.iter().enumerate() {
            if usize::from(t.id.0) != pos + 1 {
                return bad(format!("entry {} has id {}", pos + 1, t.id.0));
            }
            if t.object_classes.is_empty() {
                return bad(format!("{} has no object classes", t.name));
            }
            if by_name.insert(t.name.clone(), t.id).is_some() {
                return bad(format!("duplicate name {}", t.name));
            }
            if let Some(r) = t.trigger_ratio {
                if !(0.0..=100.0).contains(&r) {
                    return bad(format!("{} has trigger ratio {r}", t.name));
                }
            }
        }
        let last = &types[NUM_RELATIONS];
        if last.name != "unanswerable" || last.inverse_id.is_some() || last.trigger_ratio.is_some() {
            return bad("id 37 must be `unanswerable` with no inverse and no ratio".into());
        }
        for t in &types[..NUM_RELATIONS] {
            if !matches!(t.subject_class, ArgClass::Per | ArgClass::Gpe | ArgClass::Org) {
                return bad(format!("{} has subject class {}", t.name, t.subject_class));
            }
            if let Some(inv) = t.inverse_id {
                if inv.is_unanswerable() {
                    return bad(format!("{} is inverse to unanswerable", t.name));
                }
                if types[usize::from(inv.0) - 1].inverse_id != Some(t.id) {
                    return bad(format!("inverse of {} is not an involution", t.name));
                }
            }
        }
        Ok(Schema { types, by_name })
    }

    /// Byte-stable JSON dump of the table.
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(&self.types).expect("schema serializes");
        out.push('\n');
        out
    }

    pub fn lookup(&self, name: &str) -> Result<&RelationType, SchemaError> {
        self.by_name
            .get(name)
            .map(|&id| self.get(id))
            .ok_or_else(|| SchemaError::UnknownLabel(name.to_string()))
    }

    pub fn id_of(&self, name: &str) -> Result<RelationId, SchemaError> {
        self.lookup(name).map(|t| t.id)
    }

    pub fn get(&self, id: RelationId) -> &RelationType {
        &self.types[usize::from(id.0) - 1]
    }

    /// All 37 entries in id order.
    pub fn entries(&self) -> &[RelationType] {
        &self.types
    }

    /// The 36 proper relation types in id order.
    pub fn relations(&self) -> &[RelationType] {
        &self.types[..NUM_RELATIONS]
    }

    pub fn inverse(&self, id: RelationId) -> Option<RelationId> {
        self.get(id).inverse_id
    }

    /// True if at least one of the 36 relation types admits the pair.
    pub fn any_relation_admits(&self, subject: ArgClass, object: ArgClass) -> bool {
        self.relations()
            .iter()
            .any(|r| type_constraint_ok(subject, object, r))
    }
}

/// Argument-class constraint of a single relation type.
pub fn type_constraint_ok(subject: ArgClass, object: ArgClass, relation: &RelationType) -> bool {
    subject == relation.subject_class && relation.object_classes.iter().any(|&slot| object.fills(slot))
}

/// A set of relation ids stored as a bitmask.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct LabelSet(u64);

impl LabelSet {
    pub const EMPTY: LabelSet = LabelSet(0);

    /// The 36 proper relation types.
    pub fn all_relations() -> LabelSet {
        LabelSet(((1u64 << NUM_RELATIONS) - 1) << 1)
    }

    pub fn insert(&mut self, id: RelationId) -> bool {
        let bit = 1u64 << id.0;
        let fresh = self.0 & bit == 0;
        self.0 |= bit;
        fresh
    }

    pub fn remove(&mut self, id: RelationId) {
        self.0 &= !(1u64 << id.0);
    }

    pub fn contains(self, id: RelationId) -> bool {
        self.0 & (1u64 << id.0) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn intersection(self, other: LabelSet) -> LabelSet {
        LabelSet(self.0 & other.0)
    }

    pub fn difference(self, other: LabelSet) -> LabelSet {
        LabelSet(self.0 & !other.0)
    }

    pub fn union(self, other: LabelSet) -> LabelSet {
        LabelSet(self.0 | other.0)
    }

    pub fn is_subset(self, other: LabelSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Ids in ascending order.
    pub fn iter(self) -> impl Iterator<Item = RelationId> {
        (1u8..=37).filter(move |&i| self.0 & (1u64 << i) != 0).map(RelationId)
    }
}

impl FromIterator<RelationId> for LabelSet {
    fn from_iter<I: IntoIterator<Item = RelationId>>(iter: I) -> Self {
        let mut set = LabelSet::EMPTY;
        for id in iter {
            set.insert(id);
        }
        set
    }
}
