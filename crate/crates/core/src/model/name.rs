use super::ModelError;

/// Canonical form of a variable name: trimmed, lowercased, with every run of
/// whitespace and underscores collapsed to a single `_`.
pub fn canonicalize_name(raw: &str) -> Result<String, ModelError> {
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        return Err(ModelError::EmptyName);
    }
    let mut out = String::with_capacity(trimmed.len());
    let mut pending_sep = false;
    for ch in trimmed.chars() {
        if ch.is_whitespace() || ch == '_' {
            pending_sep = true;
            continue;
        }
        if pending_sep && !out.is_empty() {
            out.push('_');
        }
        pending_sep = false;
        out.extend(ch.to_lowercase());
    }
    // A name made only of underscores has no other characters to keep.
    if out.is_empty() {
        out.push('_');
    }
    Ok(out)
}
