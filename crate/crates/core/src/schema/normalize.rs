use super::types::TemporalUnit;

/// Tokens that mean "no value", compared case-insensitively after trimming.
pub const NA_SENTINELS: [&str; 5] = ["", "na", "null", "unknown", "none"];

const MONTHS: [&str; 12] = [
    "january",
    "february",
    "march",
    "april",
    "may",
    "june",
    "july",
    "august",
    "september",
    "october",
    "november",
    "december",
];

/// Result of normalizing a raw field: the canonical value (if any) and a
/// warning when the input was present but could not be parsed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalized<T> {
    pub value: Option<T>,
    pub warning: Option<String>,
}

impl<T> Normalized<T> {
    fn absent() -> Self {
        Normalized {
            value: None,
            warning: None,
        }
    }
}

pub fn is_na_sentinel(raw: &str) -> bool {
    let t = raw.trim();
    NA_SENTINELS.iter().any(|s| t.eq_ignore_ascii_case(s))
}

pub fn normalize_geo_field(raw: &str) -> Option<String> {
    if is_na_sentinel(raw) {
        None
    } else {
        Some(raw.trim().to_string())
    }
}

/// Parses a model- or dataset-emitted temporal string into its canonical
/// integer. Comma-separated lists yield their first parseable element.
pub fn normalize_temporal_field(raw: &str, unit: TemporalUnit) -> Normalized<i32> {
    if is_na_sentinel(raw) {
        return Normalized::absent();
    }
    for piece in raw.split(',') {
        if is_na_sentinel(piece) {
            continue;
        }
        if let Some(v) = parse_piece(piece.trim(), unit) {
            return Normalized {
                value: Some(v),
                warning: None,
            };
        }
    }
    Normalized {
        value: None,
        warning: Some(format!(
            "temporal: could not parse {unit} from {:?}",
            raw.trim()
        )),
    }
}

/// Canonical string for a temporal value; the inverse of
/// [`normalize_temporal_field`] on legal values.
pub fn render_temporal_field(value: i32, unit: TemporalUnit) -> String {
    match unit {
        TemporalUnit::Century | TemporalUnit::Day => ordinal(value),
        TemporalUnit::Decade => format!("{value}s"),
        TemporalUnit::Year => value.to_string(),
        TemporalUnit::Month => match usize::try_from(value - 1).ok().and_then(|i| MONTHS.get(i)) {
            Some(name) => capitalize(name),
            None => value.to_string(),
        },
    }
}

fn ordinal(n: i32) -> String {
    let suffix = match (n.rem_euclid(100), n.rem_euclid(10)) {
        (11..=13, _) => "th",
        (_, 1) => "st",
        (_, 2) => "nd",
        (_, 3) => "rd",
        _ => "th",
    };
    format!("{n}{suffix}")
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn parse_piece(piece: &str, unit: TemporalUnit) -> Option<i32> {
    let lower = piece.to_ascii_lowercase();
    let text = lower.strip_prefix("the ").unwrap_or(&lower).trim();
    if unit == TemporalUnit::Month {
        if let Some(m) = month_from_name(text) {
            return Some(m);
        }
    }
    let text = match unit {
        TemporalUnit::Century => text
            .strip_suffix("century")
            .map(str::trim_end)
            .unwrap_or(text),
        _ => text,
    };
    let digits_end = text
        .find(|c: char| !c.is_ascii_digit())
        .unwrap_or(text.len());
    if digits_end == 0 {
        return None;
    }
    let number: i32 = text[..digits_end].parse().ok()?;
    let suffix = &text[digits_end..];
    let suffix_ok = match unit {
        TemporalUnit::Century | TemporalUnit::Day => {
            matches!(suffix, "" | "st" | "nd" | "rd" | "th")
        }
        TemporalUnit::Decade => matches!(suffix, "" | "s" | "'s"),
        TemporalUnit::Year | TemporalUnit::Month => suffix.is_empty(),
    };
    if !suffix_ok {
        return None;
    }
    let in_range = match unit {
        TemporalUnit::Century => number >= 1,
        TemporalUnit::Month => (1..=12).contains(&number),
        TemporalUnit::Day => (1..=31).contains(&number),
        TemporalUnit::Decade | TemporalUnit::Year => true,
    };
    in_range.then_some(number)
}

fn month_from_name(text: &str) -> Option<i32> {
    let text = text.trim_end_matches('.');
    if text.len() < 3 {
        return None;
    }
    MONTHS
        .iter()
        .position(|m| {
            *m == text
                || (text.len() == 3 && m.starts_with(text))
                || (text == "sept" && *m == "september")
        })
        .map(|i| i as i32 + 1)
}
