use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ontology::text::normalize_phrase;

/// Relevance cut-offs for one ontology.
///
/// Text form, one `key=value` per line (`#` starts a comment line):
///
/// ```text
/// relevance_limit=1.0
/// term_relevance_limit.default=0.2
/// term_relevance_limit.wicket keeper=0.5
/// ```
///
/// Absent keys default to `0.0`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Limits {
    pub relevance_limit: f64,
    pub term_default: f64,
    /// Keyed by normalized term phrase.
    pub term_overrides: BTreeMap<String, f64>,
}

const RELEVANCE_KEY: &str = "relevance_limit";
const TERM_PREFIX: &str = "term_relevance_limit.";
const TERM_DEFAULT_KEY: &str = "term_relevance_limit.default";

impl Limits {
    pub fn uniform(relevance_limit: f64, term_limit: f64) -> Self {
        Limits {
            relevance_limit,
            term_default: term_limit,
            term_overrides: BTreeMap::new(),
        }
    }

    pub fn with_override(mut self, term: &str, limit: f64) -> Self {
        self.term_overrides.insert(normalize_phrase(term), limit);
        self
    }

    /// Limit applying to the normalized `term`.
    pub fn term_limit(&self, term: &str) -> f64 {
        self.term_overrides.get(term).copied().unwrap_or(self.term_default)
    }

    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        let mut limits = Limits::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(source_name, line_no, "expected key=value"))?;
            let key = key.trim();
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::parse(source_name, line_no, format!("not a number: {:?}", value.trim())))?;
            if !value.is_finite() || value < 0.0 {
                return Err(Error::parse(
                    source_name,
                    line_no,
                    format!("limit must be a finite value >= 0, got {value}"),
                ));
            }
            if key == RELEVANCE_KEY {
                limits.relevance_limit = value;
            } else if key == TERM_DEFAULT_KEY {
                limits.term_default = value;
            } else if let Some(term) = key.strip_prefix(TERM_PREFIX) {
                let term = normalize_phrase(term);
                if term.is_empty() {
                    return Err(Error::parse(source_name, line_no, "empty term in limit key"));
                }
                limits.term_overrides.insert(term, value);
            } else {
                return Err(Error::parse(source_name, line_no, format!("unknown key {key:?}")));
            }
        }
        Ok(limits)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Limits::parse(&text, &path.display().to_string())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{RELEVANCE_KEY}={}", self.relevance_limit);
        let _ = writeln!(out, "{TERM_DEFAULT_KEY}={}", self.term_default);
        for (term, v) in &self.term_overrides {
            let _ = writeln!(out, "{TERM_PREFIX}{term}={v}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_defaults_and_overrides() {
        let text = "# cut-offs\nrelevance_limit=1.5\nterm_relevance_limit.default=0.2\nterm_relevance_limit.Wicket Keeper=0.75\n";
        let l = Limits::parse(text, "limits").unwrap();
        assert_eq!(l.relevance_limit, 1.5);
        assert_eq!(l.term_limit("cricket"), 0.2);
        assert_eq!(l.term_limit("wicket keeper"), 0.75);
        assert_eq!(Limits::parse(&l.to_text(), "again").unwrap(), l);
    }

    #[test]
    fn missing_keys_default_to_zero() {
        let l = Limits::parse("", "empty").unwrap();
        assert_eq!(l, Limits::default());
    }

    #[test]
    fn rejects_bad_lines() {
        let err = Limits::parse("relevance_limit=1\nbogus", "l").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        assert!(Limits::parse("relevance_limit=-1", "l").is_err());
        assert!(Limits::parse("relevance_limit=nan", "l").is_err());
        assert!(Limits::parse("colour=3", "l").is_err());
    }
}
