//! Extracting a ranked id list from free-form model output.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use crate::catalog::ContentId;
use crate::decision::RankedList;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("no bracketed array in response")]
    NoArray,
    #[error("array element {0:?} is not a content id")]
    NonInteger(String),
}

/// Innermost `[...]` groups in order of appearance.
fn bracket_groups(text: &str) -> impl Iterator<Item = &str> {
    let mut rest = text;
    core::iter::from_fn(move || loop {
        let close = rest.find(']')?;
        let open = rest[..close].rfind('[');
        let body = open.map(|o| &rest[o + 1..close]);
        rest = &rest[close + 1..];
        if let Some(body) = body {
            return Some(body);
        }
    })
}

fn parse_group(body: &str) -> Result<Vec<ContentId>, ParseError> {
    if body.trim().is_empty() {
        return Ok(Vec::new());
    }
    body.split(',')
        .map(|tok| {
            let tok = tok.trim().trim_matches('"');
            tok.parse::<u32>()
                .map(ContentId)
                .map_err(|_| ParseError::NonInteger(tok.to_string()))
        })
        .collect()
}

/// Returns the first bracketed array whose elements are all integers,
/// fenced or bare. Order and repeats are kept.
pub fn parse_ranked_list(text: &str) -> Result<RankedList, ParseError> {
    let mut first_err = None;
    for body in bracket_groups(text) {
        match parse_group(body) {
            Ok(ids) => return Ok(RankedList(ids)),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    Err(first_err.unwrap_or(ParseError::NoArray))
}

/// Renders a list as a JSON array.
pub fn render_list(list: &RankedList) -> String {
    let mut s = String::from("[");
    for (n, f) in list.0.iter().enumerate() {
        let _ = write!(s, "{}{}", if n == 0 { "" } else { ", " }, f);
    }
    s.push(']');
    s
}
