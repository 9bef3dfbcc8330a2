use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::marker::PhantomData;
use std::path::Path;

use indexmap::IndexSet;
use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer};

use super::{Annotation, CategoryDef, Indicator, ModuleDef, ModuleKind, SchemaConfig};
use crate::error::{Error, Result};

/// Name of the manifest listing category files in priority order.
pub const PRIORITY_FILE: &str = "priority.yaml";

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPriority {
    #[serde(default)]
    version: Option<String>,
    categories: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCategory {
    #[serde(default)]
    category: Option<String>,
    #[serde(default)]
    gates: Option<Vec<String>>,
    #[serde(default)]
    core_properties: Option<Vec<String>>,
    #[serde(default)]
    modules: Option<Entries<RawModule>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModule {
    #[serde(rename = "type")]
    kind: ModuleKind,
    #[serde(default)]
    indicators: Option<Entries<Option<Vec<String>>>>,
    #[serde(default)]
    value_props: Option<Vec<String>>,
}

/// A YAML mapping read as an ordered list of entries, keeping duplicate keys
/// so they can be reported instead of silently collapsed.
struct Entries<T>(Vec<(String, T)>);

impl<'de, T: Deserialize<'de>> Deserialize<'de> for Entries<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V<T>(PhantomData<T>);
        impl<'de, T: Deserialize<'de>> Visitor<'de> for V<T> {
            type Value = Entries<T>;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a mapping")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> std::result::Result<Self::Value, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, T>()? {
                    out.push((k, v));
                }
                Ok(Entries(out))
            }
            fn visit_unit<E>(self) -> std::result::Result<Self::Value, E> {
                Ok(Entries(Vec::new()))
            }
        }
        d.deserialize_any(V(PhantomData))
    }
}

fn parse_error(file: &Path, e: serde_yaml::Error) -> Error {
    Error::Parse {
        file: file.to_path_buf(),
        line: e.location().map(|l| l.line()),
        message: e.to_string(),
    }
}

/// Load a schema directory: `priority.yaml` plus one `<category>.yaml` per
/// listed category.
pub fn load_schema(dir: impl AsRef<Path>) -> Result<SchemaConfig> {
    let dir = dir.as_ref();
    let manifest_path = dir.join(PRIORITY_FILE);
    let text = fs::read_to_string(&manifest_path).map_err(Error::io(&manifest_path))?;
    let manifest: RawPriority = serde_yaml::from_str(&text).map_err(|e| parse_error(&manifest_path, e))?;
    if manifest.categories.is_empty() {
        return Err(Error::Structure(format!("{} lists no categories", manifest_path.display())));
    }

    let mut seen = HashSet::new();
    let mut schema = SchemaConfig {
        version: manifest.version.unwrap_or_default(),
        ..SchemaConfig::default()
    };
    for id in &manifest.categories {
        if !seen.insert(id.as_str()) {
            return Err(Error::Structure(format!("duplicate category `{id}` in {PRIORITY_FILE}")));
        }
        let file_name = format!("{id}.yaml");
        let path = dir.join(&file_name);
        let text = fs::read_to_string(&path).map_err(Error::io(&path))?;
        let (category, annotations) = parse_category(id, &file_name, &text).map_err(|e| match e {
            Error::Parse { line, message, .. } => Error::Parse { file: path.clone(), line, message },
            other => other,
        })?;
        schema.categories.push(category);
        schema.annotations.extend(annotations);
    }
    Ok(schema)
}

/// Parse one category file. `file_name` is recorded on annotations.
pub fn parse_category(id: &str, file_name: &str, text: &str) -> Result<(CategoryDef, Vec<Annotation>)> {
    let raw: RawCategory = serde_yaml::from_str(text).map_err(|e| parse_error(Path::new(file_name), e))?;
    if let Some(declared) = &raw.category {
        if declared != id {
            return Err(Error::Structure(format!(
                "{file_name} declares category `{declared}` but is listed as `{id}`"
            )));
        }
    }

    let mut modules = Vec::new();
    let mut names = HashSet::new();
    for (name, m) in raw.modules.map(|e| e.0).unwrap_or_default() {
        if !names.insert(name.clone()) {
            return Err(Error::Structure(format!("duplicate module `{name}` in category `{id}`")));
        }
        let indicators = m
            .indicators
            .map(|e| e.0)
            .unwrap_or_default()
            .into_iter()
            .map(|(property, values)| Indicator {
                property,
                values: values.unwrap_or_default().into_iter().collect::<IndexSet<_>>(),
            })
            .collect();
        modules.push(ModuleDef {
            name,
            kind: m.kind,
            indicators,
            value_props: m.value_props.unwrap_or_default(),
        });
    }

    let category = CategoryDef {
        id: id.to_string(),
        gate_values: raw.gates.unwrap_or_default().into_iter().collect(),
        core_properties: raw.core_properties.unwrap_or_default(),
        modules,
    };
    Ok((category, scan_annotations(file_name, text)))
}

/// Collect `ID  # label` pairs line by line. Ids are recognised as the
/// whole of a list item or mapping key; anything else on the line is ignored.
fn scan_annotations(file_name: &str, text: &str) -> Vec<Annotation> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let (code, comment) = match line.find('#') {
            Some(pos) => (&line[..pos], Some(line[pos + 1..].trim())),
            None => (line, None),
        };
        let mut token = code.trim();
        if let Some(rest) = token.strip_prefix('-') {
            token = rest.trim_start();
        }
        if let Some(rest) = token.strip_suffix(':') {
            token = rest.trim_end();
        }
        let token = token.trim_matches(|c| c == '"' || c == '\'');
        if !looks_like_id(token) {
            continue;
        }
        out.push(Annotation {
            id: token.to_string(),
            label: comment.filter(|c| !c.is_empty()).map(str::to_string),
            file: file_name.to_string(),
            line: idx + 1,
        });
    }
    out
}

fn looks_like_id(token: &str) -> bool {
    let mut chars = token.chars();
    matches!(chars.next(), Some('Q' | 'P'))
        && token.len() > 1
        && chars.as_str().chars().next().is_some_and(|c| c.is_ascii_digit())
        && token.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

#[cfg(test)]
mod tests {
    use super::*;

    const CORP: &str = "\
gates:
  - Q6881511  # enterprise
core_properties:
  - P571  # inception
modules:
  corporation:
    type: intrinsic
    indicators:
      P31:  # instance of
        - Q6881511  # enterprise
      P1128:  # employees
    value_props:
      - P1128  # employees
";

    #[test]
    fn parses_presence_and_value_indicators() {
        let (c, ann) = parse_category("organizations", "organizations.yaml", CORP).unwrap();
        let m = c.module("corporation").unwrap();
        assert_eq!(m.kind, ModuleKind::Intrinsic);
        assert_eq!(m.indicators.len(), 2);
        assert!(m.indicators[0].values.contains("Q6881511"));
        assert!(m.indicators[1].is_presence());
        assert_eq!(ann.len(), 6);
        assert_eq!(ann[0].label.as_deref(), Some("enterprise"));
        assert_eq!(ann[0].line, 2);
    }

    #[test]
    fn duplicate_module_is_structural() {
        let text = "gates: [Q1]\nmodules:\n  a:\n    type: intrinsic\n  a:\n    type: relational\n";
        assert!(matches!(parse_category("x", "x.yaml", text), Err(Error::Structure(_))));
    }

    #[test]
    fn malformed_yaml_reports_line() {
        let text = "gates:\n  - Q1\nmodules:\n  a:\n    type: [unclosed\n";
        match parse_category("x", "x.yaml", text) {
            Err(Error::Parse { line: Some(l), .. }) => assert!(l >= 5, "line {l}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_module_kind_is_parse_error() {
        let text = "gates: [Q1]\nmodules:\n  a:\n    type: sideways\n";
        assert!(matches!(parse_category("x", "x.yaml", text), Err(Error::Parse { .. })));
    }

    #[test]
    fn unannotated_id_is_recorded_without_label() {
        let ann = scan_annotations("f", "gates:\n  - Q5\n  - Q6  #   \n  - Q7 # seven\n");
        let labels: Vec<_> = ann.iter().map(|a| a.label.as_deref()).collect();
        assert_eq!(labels, vec![None, None, Some("seven")]);
    }
}
