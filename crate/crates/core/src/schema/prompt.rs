use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{ModuleKind, SchemaConfig};

const EXAMPLES_PER_CATEGORY: usize = 5;

const HEADER: &str = "You are an entity extraction system. Given a text passage, extract all named entities and classify each one into a category, then assign relevant tags.";

const OUTPUT_FORMAT: &str = r#"### Output Format

Return a JSON object:
{
  "entities": [
    {
      "entity": "Albert Einstein",
      "category": "Person",
      "tags": ["education", "award"],
      "context": "mentioned as Nobel Prize-winning physicist at Princeton"
    }
  ]
}

### Instructions

1. Extract all named entities from the text
2. Classify each into exactly one category
3. Assign tags only when relevant in the given context
4. Include the context field to explain tag assignments
"#;

/// Build the schema-guided extraction prompt.
///
/// `display` maps category ids to the names shown to the model; categories
/// missing from it fall back to their id. Entity-type examples come from the
/// inline labels of each category's gate values, and the tag list of a
/// category is the names of its relational modules in declaration order.
pub fn generate_extraction_prompt(schema: &SchemaConfig, display: &BTreeMap<String, String>) -> String {
    let name = |id: &str| display.get(id).cloned().unwrap_or_else(|| id.to_string());

    let rows: Vec<(String, String)> = schema
        .categories
        .iter()
        .map(|c| {
            let examples: Vec<&str> = c
                .gate_values
                .iter()
                .take(EXAMPLES_PER_CATEGORY)
                .map(|g| schema.annotated_label(g).unwrap_or(g))
                .collect();
            (name(&c.id), examples.join(", "))
        })
        .collect();

    let w0 = rows.iter().map(|r| r.0.chars().count()).chain(["Category".len()]).max().unwrap_or(0);
    let h1 = "Entity Types (examples)";
    let w1 = rows.iter().map(|r| r.1.chars().count()).chain([h1.len()]).max().unwrap_or(0);

    let mut out = String::new();
    out.push_str(HEADER);
    out.push_str("\n\n### Entity Categories\n\nUse the following taxonomy to classify each extracted entity:\n\n");
    let _ = writeln!(out, "| {:<w0$} | {:<w1$} |", "Category", h1);
    let _ = writeln!(out, "|{}|{}|", "-".repeat(w0 + 2), "-".repeat(w1 + 2));
    for (cat, ex) in &rows {
        let _ = writeln!(out, "| {cat:<w0$} | {ex:<w1$} |");
    }

    out.push_str("\n### Tags\n\nFor each category, assign tags from the list below if relevant to that entity under the original context -- not based on general world knowledge.\n\n");
    for c in &schema.categories {
        let tags: Vec<&str> = c
            .modules
            .iter()
            .filter(|m| m.kind == ModuleKind::Relational)
            .map(|m| m.name.as_str())
            .collect();
        if tags.is_empty() {
            let _ = writeln!(out, "- {}:", name(&c.id));
        } else {
            let _ = writeln!(out, "- {}: {}", name(&c.id), tags.join(", "));
        }
    }
    out.push('\n');
    out.push_str(OUTPUT_FORMAT);
    out
}
