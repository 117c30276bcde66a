//! Flat `key = value` text files: ASCII, LF line endings, `#` comments,
//! fixed field order on write. Parsing is strict: every key must be
//! consumed, and leftovers are reported by name.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Ordered writer.
#[derive(Debug, Default, Clone)]
pub struct KvWriter {
    out: String,
}

impl KvWriter {
    pub fn new(format_tag: &str) -> Self {
        let mut w = Self::default();
        w.set("format", format_tag);
        w
    }

    pub fn comment(&mut self, text: &str) {
        let _ = writeln!(self.out, "# {text}");
    }

    pub fn set(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.out, "{key} = {value}");
    }

    pub fn set_f64(&mut self, key: &str, value: f64) {
        // shortest round-trip representation, deterministic
        let _ = writeln!(self.out, "{key} = {value:?}");
    }

    pub fn into_string(self) -> String {
        self.out
    }
}

/// Strict reader over parsed pairs.
#[derive(Debug)]
pub struct KvReader {
    pairs: Vec<(String, String)>,
    consumed: BTreeSet<usize>,
}

impl KvReader {
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse(format!(
                    "line {}: expected 'key = value', got '{raw}'",
                    lineno + 1
                )));
            };
            pairs.push((key.trim().to_string(), value.trim().to_string()));
        }
        Ok(Self { pairs, consumed: BTreeSet::new() })
    }

    fn take(&mut self, key: &str) -> Option<String> {
        for (idx, (k, v)) in self.pairs.iter().enumerate() {
            if k == key && !self.consumed.contains(&idx) {
                self.consumed.insert(idx);
                return Some(v.clone());
            }
        }
        None
    }

    pub fn optional(&mut self, key: &str) -> Option<String> {
        self.take(key)
    }

    pub fn required(&mut self, key: &str) -> Result<String> {
        self.take(key)
            .ok_or_else(|| Error::Parse(format!("missing required key '{key}'")))
    }

    pub fn required_f64(&mut self, key: &str) -> Result<f64> {
        let v = self.required(key)?;
        v.parse()
            .map_err(|_| Error::Parse(format!("key '{key}': bad number '{v}'")))
    }

    pub fn optional_f64(&mut self, key: &str) -> Result<Option<f64>> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Parse(format!("key '{key}': bad number '{v}'"))),
        }
    }

    pub fn required_usize(&mut self, key: &str) -> Result<usize> {
        let v = self.required(key)?;
        v.parse()
            .map_err(|_| Error::Parse(format!("key '{key}': bad integer '{v}'")))
    }

    pub fn optional_usize(&mut self, key: &str) -> Result<Option<usize>> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Parse(format!("key '{key}': bad integer '{v}'"))),
        }
    }

    /// Triple of whitespace-separated values, e.g. "0.5 0.5 0.5".
    pub fn required_triple_f64(&mut self, key: &str) -> Result<[f64; 3]> {
        let v = self.required(key)?;
        parse_triple_f64(key, &v)
    }

    pub fn required_triple_usize(&mut self, key: &str) -> Result<[usize; 3]> {
        let v = self.required(key)?;
        let parts: Vec<&str> = v.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("key '{key}': expected 3 integers, got '{v}'")));
        }
        let mut out = [0usize; 3];
        for (o, p) in out.iter_mut().zip(parts) {
            *o = p
                .parse()
                .map_err(|_| Error::Parse(format!("key '{key}': bad integer '{p}'")))?;
        }
        Ok(out)
    }

    /// Indexed family `prefix.<i>.suffix`; returns how many consecutive
    /// indices exist starting at 0 (checking the probe key).
    pub fn count_indexed(&self, prefix: &str, probe_suffix: &str) -> usize {
        let mut count = 0;
        loop {
            let key = format!("{prefix}.{count}.{probe_suffix}");
            if self.pairs.iter().any(|(k, _)| *k == key) {
                count += 1;
            } else {
                return count;
            }
        }
    }

    /// Error on any unconsumed key (strict parsing).
    pub fn finish(self) -> Result<()> {
        let leftover: Vec<&str> = self
            .pairs
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.consumed.contains(i))
            .map(|(_, (k, _))| k.as_str())
            .collect();
        if leftover.is_empty() {
            Ok(())
        } else {
            Err(Error::Parse(format!("unknown key(s): {}", leftover.join(", "))))
        }
    }
}

pub fn parse_triple_f64(key: &str, v: &str) -> Result<[f64; 3]> {
    let parts: Vec<&str> = v.split_whitespace().collect();
    if parts.len() != 3 {
        return Err(Error::Parse(format!("key '{key}': expected 3 numbers, got '{v}'")));
    }
    let mut out = [0.0; 3];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p
            .parse()
            .map_err(|_| Error::Parse(format!("key '{key}': bad number '{p}'")))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn write_then_parse_round_trip() {
        let mut w = KvWriter::new("test-v1");
        w.comment("a comment");
        w.set("alpha", 3);
        w.set_f64("beta", 0.1 + 0.2);
        let text = w.into_string();
        assert!(text.ends_with('\n'));
        assert!(!text.contains('\r'));

        let mut r = KvReader::parse(&text).unwrap();
        assert_eq!(r.required("format").unwrap(), "test-v1");
        assert_eq!(r.required_usize("alpha").unwrap(), 3);
        assert_eq!(r.required_f64("beta").unwrap(), 0.1 + 0.2);
        r.finish().unwrap();
    }

    #[test]
    fn unknown_keys_are_named() {
        let mut r = KvReader::parse("a = 1\nmystery = 2\n").unwrap();
        let _ = r.required("a").unwrap();
        let err = r.finish().unwrap_err();
        assert!(err.to_string().contains("mystery"), "{err}");
    }

    #[test]
    fn missing_and_malformed_keys_error() {
        let mut r = KvReader::parse("x = not_a_number\n").unwrap();
        assert!(r.required_f64("x").is_err());
        let mut r = KvReader::parse("").unwrap();
        assert!(r.required("absent").is_err());
        assert!(KvReader::parse("just a line").is_err());
    }

    #[test]
    fn triples_parse() {
        let mut r = KvReader::parse("c = 0.5 0.25 1\nidx = 1 2 3\n").unwrap();
        assert_eq!(r.required_triple_f64("c").unwrap(), [0.5, 0.25, 1.0]);
        assert_eq!(r.required_triple_usize("idx").unwrap(), [1, 2, 3]);
    }
}
