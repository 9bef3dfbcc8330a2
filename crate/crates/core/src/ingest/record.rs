use std::borrow::Cow;
use std::collections::{BTreeMap, HashMap};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::ids::{Ident, Pid, Qid, INSTANCE_OF, TYPE_PROPERTIES};

/// Default label resolution order.
pub const DEFAULT_LANGUAGE_CHAIN: [&str; 4] = ["en", "en-us", "en-gb", "mul"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Datatype {
    EntityRef,
    String,
    Time,
    Quantity,
    Coordinate,
    Other,
}

/// A claim or qualifier value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Value {
    Entity { id: Qid },
    String { value: String },
    Time { value: String },
    Quantity {
        amount: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        unit: Option<Qid>,
    },
    Coordinate { latitude: f64, longitude: f64 },
    /// Anything not parsed structurally, kept as raw JSON (or the snak type
    /// for `somevalue` / `novalue` snaks).
    Other { raw: String },
}

impl Value {
    pub fn datatype(&self) -> Datatype {
        match self {
            Value::Entity { .. } => Datatype::EntityRef,
            Value::String { .. } => Datatype::String,
            Value::Time { .. } => Datatype::Time,
            Value::Quantity { .. } => Datatype::Quantity,
            Value::Coordinate { .. } => Datatype::Coordinate,
            Value::Other { .. } => Datatype::Other,
        }
    }

    pub fn entity(&self) -> Option<Qid> {
        match self {
            Value::Entity { id } => Some(*id),
            _ => None,
        }
    }
}

impl From<Qid> for Value {
    fn from(id: Qid) -> Self {
        Value::Entity { id }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClaimValue {
    pub value: Value,
    /// Qualifier property → values, in dump order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub qualifiers: Vec<(Pid, Vec<Value>)>,
}

impl ClaimValue {
    pub fn new(value: impl Into<Value>) -> Self {
        ClaimValue { value: value.into(), qualifiers: Vec::new() }
    }

    pub fn with_qualifier(mut self, p: Pid, v: impl Into<Value>) -> Self {
        let v = v.into();
        match self.qualifiers.iter_mut().find(|(q, _)| *q == p) {
            Some((_, vs)) => vs.push(v),
            None => self.qualifiers.push((p, vec![v])),
        }
        self
    }
}

/// One entity from the dump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntityRecord {
    pub id: Ident,
    #[serde(default)]
    pub labels: BTreeMap<String, String>,
    #[serde(default)]
    pub descriptions: BTreeMap<String, String>,
    /// Property → values, both in dump order.
    #[serde(default)]
    pub claims: IndexMap<Pid, Vec<ClaimValue>>,
}

impl EntityRecord {
    pub fn new(id: Qid) -> Self {
        EntityRecord {
            id: Ident::Item(id),
            labels: BTreeMap::new(),
            descriptions: BTreeMap::new(),
            claims: IndexMap::new(),
        }
    }

    /// Parse one entity in dump JSON layout, keeping every language.
    pub fn from_dump_json(line: &str) -> crate::Result<Self> {
        parse_entity_line(line.trim().trim_end_matches(','), None).map_err(|e| crate::Error::Parse {
            file: "<entity>".into(),
            line: None,
            message: match e {
                LineError::Json => "not valid dump JSON".into(),
                LineError::BadId => "malformed entity or property id".into(),
            },
        })
    }

    pub fn item(&self) -> Option<Qid> {
        match self.id {
            Ident::Item(q) => Some(q),
            Ident::Property(_) => None,
        }
    }

    pub fn with_label(mut self, lang: &str, label: &str) -> Self {
        self.labels.insert(lang.to_string(), label.to_string());
        self
    }

    pub fn with_description(mut self, lang: &str, text: &str) -> Self {
        self.descriptions.insert(lang.to_string(), text.to_string());
        self
    }

    pub fn with_claim(mut self, p: Pid, c: ClaimValue) -> Self {
        self.claims.entry(p).or_default().push(c);
        self
    }

    pub fn claim_count(&self) -> usize {
        self.claims.values().map(Vec::len).sum()
    }

    /// Entity-valued objects of `p`.
    pub fn entity_values(&self, p: Pid) -> impl Iterator<Item = Qid> + '_ {
        self.claims
            .get(&p)
            .into_iter()
            .flatten()
            .filter_map(|c| c.value.entity())
    }

    /// Values of the type-assertion properties (instance of, subclass of).
    pub fn type_values(&self) -> impl Iterator<Item = Qid> + '_ {
        TYPE_PROPERTIES.iter().flat_map(move |p| self.entity_values(*p))
    }

    pub fn is_instance_of(&self, t: Qid) -> bool {
        self.entity_values(INSTANCE_OF).any(|v| v == t)
    }
}

/// First language of `chain` present in `labels`.
pub fn resolve_label<'a, S: AsRef<str>>(labels: &'a BTreeMap<String, String>, chain: &[S]) -> Option<&'a str> {
    chain
        .iter()
        .find_map(|lang| labels.get(lang.as_ref()))
        .map(String::as_str)
}

// ---- dump JSON layout ------------------------------------------------------

#[derive(Deserialize)]
struct RawEntity<'a> {
    #[serde(borrow)]
    id: Cow<'a, str>,
    #[serde(default, borrow)]
    labels: Option<HashMap<Cow<'a, str>, &'a RawValue>>,
    #[serde(default, borrow)]
    descriptions: Option<HashMap<Cow<'a, str>, &'a RawValue>>,
    #[serde(default, borrow)]
    claims: Option<IndexMap<Cow<'a, str>, Vec<RawStatement<'a>>>>,
}

#[derive(Deserialize)]
struct RawLang {
    value: String,
}

#[derive(Deserialize)]
struct RawStatement<'a> {
    #[serde(borrow)]
    mainsnak: RawSnak<'a>,
    #[serde(default, borrow)]
    qualifiers: Option<IndexMap<Cow<'a, str>, Vec<RawSnak<'a>>>>,
}

#[derive(Deserialize)]
struct RawSnak<'a> {
    #[serde(default, borrow)]
    snaktype: Option<Cow<'a, str>>,
    #[serde(default, borrow)]
    datavalue: Option<RawDataValue<'a>>,
}

#[derive(Deserialize)]
struct RawDataValue<'a> {
    #[serde(rename = "type", borrow)]
    kind: Cow<'a, str>,
    #[serde(borrow)]
    value: &'a RawValue,
}

#[derive(Deserialize)]
struct RawEntityId<'a> {
    #[serde(rename = "entity-type", default, borrow)]
    entity_type: Option<Cow<'a, str>>,
    #[serde(default, borrow)]
    id: Option<Cow<'a, str>>,
    #[serde(rename = "numeric-id", default)]
    numeric_id: Option<u64>,
}

#[derive(Deserialize)]
struct RawTime {
    time: String,
}

#[derive(Deserialize)]
struct RawQuantity<'a> {
    amount: String,
    #[serde(default, borrow)]
    unit: Option<Cow<'a, str>>,
}

#[derive(Deserialize)]
struct RawCoordinate {
    latitude: f64,
    longitude: f64,
}

fn convert_snak(snak: &RawSnak<'_>) -> Value {
    let Some(dv) = &snak.datavalue else {
        let raw = snak.snaktype.as_deref().unwrap_or("novalue").to_string();
        return Value::Other { raw };
    };
    let raw = dv.value.get();
    let other = || Value::Other { raw: raw.to_string() };
    match dv.kind.as_ref() {
        "wikibase-entityid" => match serde_json::from_str::<RawEntityId>(raw) {
            Ok(e) if e.entity_type.as_deref().unwrap_or("item") == "item" => {
                let id = match (&e.id, e.numeric_id) {
                    (Some(id), _) => id.parse::<Qid>().ok(),
                    (None, Some(n)) => Some(Qid(n)),
                    _ => None,
                };
                id.map(Value::from).unwrap_or_else(other)
            }
            _ => other(),
        },
        "string" => serde_json::from_str::<String>(raw)
            .map(|value| Value::String { value })
            .unwrap_or_else(|_| other()),
        "time" => serde_json::from_str::<RawTime>(raw)
            .map(|t| Value::Time { value: t.time })
            .unwrap_or_else(|_| other()),
        "quantity" => serde_json::from_str::<RawQuantity>(raw)
            .map(|q| Value::Quantity {
                amount: q.amount,
                unit: q
                    .unit
                    .as_deref()
                    .and_then(|u| u.rsplit('/').next())
                    .and_then(|u| u.parse().ok()),
            })
            .unwrap_or_else(|_| other()),
        "globecoordinate" => serde_json::from_str::<RawCoordinate>(raw)
            .map(|c| Value::Coordinate { latitude: c.latitude, longitude: c.longitude })
            .unwrap_or_else(|_| other()),
        _ => other(),
    }
}

fn languages(
    raw: Option<HashMap<Cow<'_, str>, &RawValue>>,
    keep: Option<&[String]>,
) -> Result<BTreeMap<String, String>, serde_json::Error> {
    let mut out = BTreeMap::new();
    for (lang, v) in raw.into_iter().flatten() {
        if keep.is_some_and(|k| !k.iter().any(|l| l == lang.as_ref())) {
            continue;
        }
        let l: RawLang = serde_json::from_str(v.get())?;
        out.insert(lang.into_owned(), l.value);
    }
    Ok(out)
}

/// Why a dump line could not be turned into a record.
#[derive(Debug)]
pub(crate) enum LineError {
    Json,
    BadId,
}

/// Parse one dump line. `keep_languages` limits which label/description
/// languages are retained; `None` keeps all.
pub(crate) fn parse_entity_line(line: &str, keep_languages: Option<&[String]>) -> Result<EntityRecord, LineError> {
    let raw: RawEntity = serde_json::from_str(line).map_err(|_| LineError::Json)?;
    let id: Ident = raw.id.parse().map_err(|_| LineError::BadId)?;
    let labels = languages(raw.labels, keep_languages).map_err(|_| LineError::Json)?;
    let descriptions = languages(raw.descriptions, keep_languages).map_err(|_| LineError::Json)?;

    let mut claims: IndexMap<Pid, Vec<ClaimValue>> = IndexMap::new();
    for (p, statements) in raw.claims.into_iter().flatten() {
        let Ok(pid) = p.parse::<Pid>() else {
            return Err(LineError::BadId);
        };
        let values = claims.entry(pid).or_default();
        for st in statements {
            let mut qualifiers: Vec<(Pid, Vec<Value>)> = Vec::new();
            for (qp, snaks) in st.qualifiers.into_iter().flatten() {
                let Ok(qpid) = qp.parse::<Pid>() else {
                    return Err(LineError::BadId);
                };
                qualifiers.push((qpid, snaks.iter().map(convert_snak).collect()));
            }
            values.push(ClaimValue { value: convert_snak(&st.mainsnak), qualifiers });
        }
    }
    Ok(EntityRecord { id, labels, descriptions, claims })
}

fn snak_json(p: Pid, v: &Value) -> serde_json::Value {
    use serde_json::json;
    let datavalue = match v {
        Value::Entity { id } => json!({
            "type": "wikibase-entityid",
            "value": {"entity-type": "item", "numeric-id": id.0, "id": id.to_string()}
        }),
        Value::String { value } => json!({"type": "string", "value": value}),
        Value::Time { value } => json!({
            "type": "time",
            "value": {"time": value, "timezone": 0, "before": 0, "after": 0, "precision": 11,
                      "calendarmodel": "http://www.wikidata.org/entity/Q1985727"}
        }),
        Value::Quantity { amount, unit } => json!({
            "type": "quantity",
            "value": {"amount": amount, "unit": unit
                .map(|u| format!("http://www.wikidata.org/entity/{u}"))
                .unwrap_or_else(|| "1".to_string())}
        }),
        Value::Coordinate { latitude, longitude } => json!({
            "type": "globecoordinate",
            "value": {"latitude": latitude, "longitude": longitude, "precision": 0.0001,
                      "globe": "http://www.wikidata.org/entity/Q2"}
        }),
        Value::Other { raw } => {
            if raw == "somevalue" || raw == "novalue" {
                return json!({"snaktype": raw, "property": p.to_string()});
            }
            let parsed: serde_json::Value = serde_json::from_str(raw).unwrap_or(serde_json::Value::String(raw.clone()));
            json!({"type": "unknown", "value": parsed})
        }
    };
    json!({"snaktype": "value", "property": p.to_string(), "datavalue": datavalue})
}

/// Render a record in the dump's entity layout (one JSON object, no newline).
pub fn to_dump_json(record: &EntityRecord) -> String {
    use serde_json::{json, Map};
    let lang_map = |m: &BTreeMap<String, String>| -> Map<String, serde_json::Value> {
        m.iter()
            .map(|(l, v)| (l.clone(), json!({"language": l, "value": v})))
            .collect()
    };
    let mut claims = Map::new();
    for (p, values) in &record.claims {
        let statements: Vec<_> = values
            .iter()
            .map(|c| {
                let mut st = json!({"mainsnak": snak_json(*p, &c.value), "type": "statement", "rank": "normal"});
                if !c.qualifiers.is_empty() {
                    let q: Map<String, serde_json::Value> = c
                        .qualifiers
                        .iter()
                        .map(|(qp, vs)| (qp.to_string(), vs.iter().map(|v| snak_json(*qp, v)).collect()))
                        .collect();
                    st["qualifiers"] = serde_json::Value::Object(q);
                }
                st
            })
            .collect();
        claims.insert(p.to_string(), serde_json::Value::Array(statements));
    }
    let kind = match record.id {
        Ident::Item(_) => "item",
        Ident::Property(_) => "property",
    };
    json!({
        "type": kind,
        "id": record.id.to_string(),
        "labels": lang_map(&record.labels),
        "descriptions": lang_map(&record.descriptions),
        "claims": claims,
    })
    .to_string()
}
