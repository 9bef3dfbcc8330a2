use super::engine::RoutedClaim;
use crate::ids::Ident;
use crate::ingest::Value;

/// Display form of a value. Entity refs go through `lookup`; dates drop the
/// leading sign and a midnight time part.
pub fn render_value(v: &Value, lookup: &mut impl FnMut(Ident) -> String) -> String {
    match v {
        Value::Entity { id } => lookup(Ident::Item(*id)),
        Value::String { value } => value.clone(),
        Value::Time { value } => {
            let t = value.strip_prefix('+').unwrap_or(value);
            t.strip_suffix("T00:00:00Z").unwrap_or(t).to_string()
        }
        Value::Quantity { amount, unit } => {
            let a = amount.strip_prefix('+').unwrap_or(amount);
            match unit {
                Some(u) => format!("{a} {}", lookup(Ident::Item(*u))),
                None => a.to_string(),
            }
        }
        Value::Coordinate { latitude, longitude } => format!("{latitude}, {longitude}"),
        Value::Other { raw } => raw.clone(),
    }
}

/// `"<subject>'s <property> is <value> (<qualifier>: <value>; ...)."`
pub fn render_sentence(claim: &RoutedClaim, subject: &str) -> String {
    let mut s = format!("{subject}'s {} is {}", claim.property_label, claim.value_label);
    if !claim.qualifiers.is_empty() {
        s.push_str(" (");
        for (i, q) in claim.qualifiers.iter().enumerate() {
            if i > 0 {
                s.push_str("; ");
            }
            s.push_str(&q.property_label);
            s.push_str(": ");
            s.push_str(&q.value_label);
        }
        s.push(')');
    }
    s.push('.');
    s
}
