use serde::{Deserialize, Serialize};
use thiserror::Error;

/// English section titles, in required order.
pub const SECTION_TITLES: [&str; 5] = [
    "Cluster Overview",
    "Strengths",
    "Weaknesses",
    "Bridge Role Type",
    "City-Specific Context",
];

/// Accepted header spellings per section, compared case-insensitively.
const ALIASES: [&[&str]; 5] = [
    &["cluster overview", "overview", "クラスタ概要", "クラスター概要", "概要"],
    &["strengths", "strength", "強み"],
    &["weaknesses", "weakness", "弱み"],
    &["bridge role type", "role type", "bridge role", "role", "橋梁の役割タイプ", "役割タイプ", "役割"],
    &["city-specific context", "city specific context", "city context", "都市固有の文脈", "都市特有の文脈", "地域特性"],
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SectionError {
    #[error("missing section {0:?}")]
    Missing(&'static str),
    #[error("section {0:?} is empty")]
    Empty(&'static str),
    #[error("section {0:?} is out of order")]
    OutOfOrder(&'static str),
}

impl SectionError {
    pub fn section(&self) -> &'static str {
        match self {
            SectionError::Missing(s) | SectionError::Empty(s) | SectionError::OutOfOrder(s) => s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sections {
    pub overview: String,
    pub strengths: String,
    pub weaknesses: String,
    pub role: String,
    pub city_context: String,
}

impl Sections {
    pub fn bodies(&self) -> [&str; 5] {
        [&self.overview, &self.strengths, &self.weaknesses, &self.role, &self.city_context]
    }

    /// Total body length in characters.
    pub fn char_count(&self) -> usize {
        self.bodies().iter().map(|b| b.chars().count()).sum()
    }
}

/// Strips markdown hashes, emphasis, list numbering and brackets. Returns
/// the section index and any text after a trailing colon.
fn parse_header(line: &str) -> Option<(usize, &str)> {
    let mut s = line.trim().trim_start_matches('#').trim();
    s = s.trim_start_matches("**").trim_end_matches("**").trim();
    // "1.", "1)", "(1)", "1:" numbering, ASCII or full-width digits.
    let digits = s.find(|c: char| !(c.is_ascii_digit() || ('０'..='９').contains(&c) || c == '(' || c == '（'));
    if let Some(d) = digits.filter(|&d| d > 0) {
        let rest = &s[d..];
        if let Some(r) = rest.strip_prefix(['.', ')', ':', '）', '．']) {
            s = r.trim();
        }
    }
    s = s.trim_start_matches("**").trim();
    let (title, tail) = if let Some(r) = s.strip_prefix('【') {
        let end = r.find('】')?;
        (&r[..end], &r[end + '】'.len_utf8()..])
    } else if let Some(r) = s.strip_prefix('[') {
        let end = r.find(']')?;
        (&r[..end], &r[end + 1..])
    } else {
        match s.find([':', '：']) {
            Some(i) => (&s[..i], &s[i..]),
            None => (s, ""),
        }
    };
    let title = title.trim().trim_end_matches("**").trim().to_lowercase();
    let tail = tail.trim_start_matches("**").trim();
    let tail = tail.strip_prefix([':', '：']).unwrap_or(tail).trim();
    ALIASES
        .iter()
        .position(|a| a.contains(&title.as_str()))
        .map(|i| (i, tail))
}

/// Splits a reply into the five sections, in order, each non-empty.
pub fn validate_sections(text: &str) -> Result<Sections, SectionError> {
    let mut found: Vec<(usize, String)> = Vec::new();
    for line in text.lines() {
        match parse_header(line) {
            Some((idx, tail)) => found.push((idx, tail.to_string())),
            None => {
                if let Some((_, body)) = found.last_mut() {
                    if !body.is_empty() {
                        body.push('\n');
                    }
                    body.push_str(line);
                }
            }
        }
    }
    let order: Vec<usize> = found.iter().map(|f| f.0).collect();
    for (expected, title) in SECTION_TITLES.iter().enumerate() {
        match order.get(expected) {
            Some(&i) if i == expected => {}
            _ if order.contains(&expected) => return Err(SectionError::OutOfOrder(title)),
            _ => return Err(SectionError::Missing(title)),
        }
    }
    if order.len() > 5 {
        return Err(SectionError::OutOfOrder(SECTION_TITLES[order[5]]));
    }
    let bodies: Vec<String> = found.into_iter().map(|(_, b)| b.trim().to_string()).collect();
    if let Some(i) = bodies.iter().position(String::is_empty) {
        return Err(SectionError::Empty(SECTION_TITLES[i]));
    }
    let [overview, strengths, weaknesses, role, city_context]: [String; 5] = bodies.try_into().unwrap();
    Ok(Sections { overview, strengths, weaknesses, role, city_context })
}
