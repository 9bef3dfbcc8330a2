use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{CategoryDef, SchemaConfig, PRIORITY_FILE};
use crate::error::{Error, Result};

fn scalar(s: &str) -> String {
    let plain = !s.is_empty()
        && s.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
        && !matches!(s, "null" | "true" | "false" | "yes" | "no" | "on" | "off" | "~")
        && s.parse::<f64>().is_err();
    if plain {
        s.to_string()
    } else {
        serde_json::to_string(s).expect("string serialization")
    }
}

fn id_line(out: &mut String, indent: &str, prefix: &str, id: &str, suffix: &str, schema: &SchemaConfig) {
    let _ = write!(out, "{indent}{prefix}{}{suffix}", scalar(id));
    if let Some(label) = schema.annotated_label(id) {
        let label = label.replace(['\n', '\r'], " ");
        let _ = write!(out, "  # {label}");
    }
    out.push('\n');
}

/// Render one category file, annotating every id with its known label.
pub fn category_to_yaml(category: &CategoryDef, schema: &SchemaConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "category: {}", scalar(&category.id));
    out.push_str("gates:\n");
    for g in &category.gate_values {
        id_line(&mut out, "  ", "- ", g, "", schema);
    }
    if category.core_properties.is_empty() {
        out.push_str("core_properties: []\n");
    } else {
        out.push_str("core_properties:\n");
        for p in &category.core_properties {
            id_line(&mut out, "  ", "- ", p, "", schema);
        }
    }
    if category.modules.is_empty() {
        out.push_str("modules: {}\n");
        return out;
    }
    out.push_str("modules:\n");
    for m in &category.modules {
        let _ = writeln!(out, "  {}:", scalar(&m.name));
        let _ = writeln!(out, "    type: {}", m.kind);
        if m.indicators.is_empty() {
            out.push_str("    indicators: {}\n");
        } else {
            out.push_str("    indicators:\n");
            for ind in &m.indicators {
                id_line(&mut out, "      ", "", &ind.property, ":", schema);
                for v in &ind.values {
                    id_line(&mut out, "        ", "- ", v, "", schema);
                }
            }
        }
        if m.value_props.is_empty() {
            out.push_str("    value_props: []\n");
        } else {
            out.push_str("    value_props:\n");
            for p in &m.value_props {
                id_line(&mut out, "      ", "- ", p, "", schema);
            }
        }
    }
    out
}

pub fn priority_to_yaml(schema: &SchemaConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "version: {}", serde_json::to_string(&schema.version).expect("string"));
    out.push_str("categories:\n");
    for c in &schema.categories {
        let _ = writeln!(out, "  - {}", scalar(&c.id));
    }
    out
}

/// Write `schema` as a schema directory loadable by [`super::load_schema`].
/// Category files not listed in the schema are left untouched.
pub fn write_schema(schema: &SchemaConfig, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(Error::io(dir))?;
    for c in &schema.categories {
        let path = dir.join(format!("{}.yaml", c.id));
        fs::write(&path, category_to_yaml(c, schema)).map_err(Error::io(&path))?;
    }
    let path = dir.join(PRIORITY_FILE);
    fs::write(&path, priority_to_yaml(schema)).map_err(Error::io(&path))
}
