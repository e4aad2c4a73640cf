use serde_json::Value;

use super::SchemaError;

/// Pulls the JSON payload out of raw model text: strips markdown fences,
/// then takes the whole text if it parses, else the first balanced `{...}`
/// object that parses.
pub fn extract_json_payload(raw_model_text: &str) -> Result<Value, SchemaError> {
    let text = strip_code_fences(raw_model_text.trim());
    if let Ok(v) = serde_json::from_str::<Value>(text) {
        return Ok(v);
    }
    let mut from = 0;
    while let Some(offset) = text[from..].find('{') {
        let start = from + offset;
        if let Some(end) = balanced_object_end(&text[start..]) {
            if let Ok(v) = serde_json::from_str::<Value>(&text[start..start + end]) {
                return Ok(v);
            }
        }
        from = start + 1;
    }
    Err(SchemaError::NoJsonFound)
}

fn strip_code_fences(s: &str) -> &str {
    let Some(open) = s.find("```") else {
        return s;
    };
    let after = &s[open + 3..];
    // skip an info string such as `json`
    let body_start = after.find('\n').map(|i| i + 1).unwrap_or(0);
    let body = &after[body_start..];
    match body.find("```") {
        Some(close) => body[..close].trim(),
        None => body.trim(),
    }
}

/// Byte length of the balanced object starting at `s[0] == '{'`, honoring
/// string literals and escapes.
fn balanced_object_end(s: &str) -> Option<usize> {
    let mut depth = 0usize;
    let mut in_str = false;
    let mut escaped = false;
    for (i, ch) in s.char_indices() {
        if in_str {
            if escaped {
                escaped = false;
            } else if ch == '\\' {
                escaped = true;
            } else if ch == '"' {
                in_str = false;
            }
            continue;
        }
        match ch {
            '"' => in_str = true,
            '{' | '[' => depth += 1,
            '}' | ']' => {
                depth = depth.checked_sub(1)?;
                if depth == 0 {
                    return Some(i + 1);
                }
            }
            _ => {}
        }
    }
    None
}
