//! Parser and canonical serializer for the line-oriented `.cpn` text format,
//! the sole persistence format for nets.
//!
//! ```text
//! # comment to end of line; blank lines ignored
//! document      := { feature-decl } { cpt-block }
//! feature-decl  := "feature" IDENT ":" IDENT { "," IDENT }
//! cpt-block     := "cpt" IDENT ":" { relation-line }
//! relation-line := "-" condition ":" ordering
//! condition     := "T" | assignment { "&" assignment }
//! assignment    := IDENT "=" IDENT          # feature = value
//! ordering      := level { ">" level }
//! level         := IDENT { "~" IDENT }
//! IDENT         := [A-Za-z_][A-Za-z0-9_]*
//! ```
//!
//! `T` denotes the empty condition. Both syntax errors (bad token, unknown
//! operator) and semantic errors (unknown feature or value, duplicate
//! declaration) carry a 1-based line/column [`SourceLocation`].
//!
//! [`serialize`] emits the canonical form: features in declaration order,
//! relations in CPT order, condition features in lexical order, level values
//! in lexical order, one relation per line, LF line endings. Parsing canonical
//! text and re-serializing reproduces it byte for byte.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::model::{Condition, CpNet, InvalidNet, PreferenceRelation};

/// 1-based position of a token in the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceLocation {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for SourceLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{location}: {message}")]
pub struct ParseError {
    pub location: SourceLocation,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError {
            location: SourceLocation { line, column },
            message: message.into(),
        }
    }
}

/// Parses a `.cpn` document into a net.
pub fn parse(text: &str) -> Result<CpNet, ParseError> {
    let mut net = CpNet::new();
    // name of the cpt block currently being filled
    let mut current_cpt: Option<String> = None;
    let mut cpt_section_started = false;
    let mut declared_cpts: BTreeSet<String> = BTreeSet::new();

    for (index, raw_line) in text.lines().enumerate() {
        let line_no = index + 1;
        let line = strip_comment(raw_line);
        if line.trim().is_empty() {
            continue;
        }
        let mut cursor = Cursor::new(line, line_no);
        cursor.skip_ws();
        if cursor.peek() == Some('-') {
            cursor.bump();
            let Some(owner) = current_cpt.as_deref() else {
                return Err(cursor.error_at(
                    1,
                    "relation line outside a cpt block (expected `cpt <feature>:` first)",
                ));
            };
            let rel = parse_relation_body(&mut cursor, &net, owner)?;
            net.add_relation(owner, rel)
                .expect("relation was checked against the net during parsing");
            continue;
        }
        let (keyword, keyword_col) = cursor.ident("`feature`, `cpt`, or `-`")?;
        match keyword.as_str() {
            "feature" => {
                if cpt_section_started {
                    return Err(cursor.error_at(
                        keyword_col,
                        "feature declarations must precede all cpt blocks",
                    ));
                }
                parse_feature_decl(&mut cursor, &mut net)?;
            }
            "cpt" => {
                let (name, name_col) = cursor.ident("a feature name")?;
                cursor.expect(':')?;
                cursor.expect_end()?;
                if !net.has_feature(&name) {
                    return Err(cursor.error_at(name_col, format!("unknown feature `{name}`")));
                }
                if !declared_cpts.insert(name.clone()) {
                    return Err(cursor.error_at(
                        name_col,
                        format!("duplicate cpt block for feature `{name}`"),
                    ));
                }
                cpt_section_started = true;
                current_cpt = Some(name);
            }
            other => {
                return Err(cursor.error_at(
                    keyword_col,
                    format!("expected `feature`, `cpt`, or `-`, found `{other}`"),
                ));
            }
        }
    }
    Ok(net)
}

/// Serializes a valid net to its canonical text.
pub fn serialize(net: &CpNet) -> Result<String, InvalidNet> {
    let report = net.validate();
    if !report.is_empty() {
        return Err(InvalidNet { report });
    }
    let mut out = String::new();
    for feature in net.features() {
        out.push_str("feature ");
        out.push_str(feature.name());
        out.push_str(": ");
        out.push_str(&feature.domain().join(", "));
        out.push('\n');
    }
    for feature in net.features() {
        let cpt = net
            .cpt(feature.name())
            .expect("cpt exists for every feature");
        if cpt.is_empty() {
            continue;
        }
        out.push_str("cpt ");
        out.push_str(feature.name());
        out.push_str(":\n");
        for rel in cpt.relations() {
            out.push_str("- ");
            out.push_str(&render_condition_spaced(rel.condition()));
            out.push_str(" : ");
            out.push_str(&crate::model::render_levels(rel.levels()));
            out.push('\n');
        }
    }
    Ok(out)
}

fn render_condition_spaced(condition: &Condition) -> String {
    if condition.is_top() {
        return "T".to_owned();
    }
    condition
        .assignments()
        .map(|(f, v)| format!("{f}={v}"))
        .collect::<Vec<_>>()
        .join(" & ")
}

/// Parses a bare `condition : ordering` string into a relation, without
/// checking it against any net. Used for trace files and tests.
pub fn parse_relation(text: &str) -> Result<PreferenceRelation, ParseError> {
    let mut cursor = Cursor::new(text, 1);
    let (condition, _) = parse_condition_tokens(&mut cursor)?;
    cursor.expect(':')?;
    let (levels, _) = parse_ordering_tokens(&mut cursor)?;
    cursor.expect_end()?;
    PreferenceRelation::new(condition, levels).map_err(|e| ParseError::new(1, 1, e.to_string()))
}

/// Parses a bare condition (`T` or `A=a1&B=b2`), without net checks.
pub fn parse_condition(text: &str) -> Result<Condition, ParseError> {
    let mut cursor = Cursor::new(text, 1);
    let (condition, _) = parse_condition_tokens(&mut cursor)?;
    cursor.expect_end()?;
    Ok(condition)
}

/// Parses a bare ordering (`a1 > a2 ~ a3`), without net checks.
pub fn parse_ordering(text: &str) -> Result<Vec<BTreeSet<String>>, ParseError> {
    let mut cursor = Cursor::new(text, 1);
    let (levels, _) = parse_ordering_tokens(&mut cursor)?;
    cursor.expect_end()?;
    Ok(levels)
}

// ---------------------------------------------------------------------------
// Line-level parsing
// ---------------------------------------------------------------------------

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_feature_decl(cursor: &mut Cursor, net: &mut CpNet) -> Result<(), ParseError> {
    let (name, name_col) = cursor.ident("a feature name")?;
    cursor.expect(':')?;
    let mut domain: Vec<String> = Vec::new();
    loop {
        let (value, value_col) = cursor.ident("a domain value")?;
        if domain.contains(&value) {
            return Err(cursor.error_at(
                value_col,
                format!("duplicate value `{value}` in the domain of `{name}`"),
            ));
        }
        domain.push(value);
        cursor.skip_ws();
        match cursor.peek() {
            Some(',') => {
                cursor.bump();
            }
            None => break,
            Some(other) => {
                return Err(
                    cursor.error_here(format!("expected `,` or end of line, found `{other}`"))
                );
            }
        }
    }
    if net.has_feature(&name) {
        return Err(cursor.error_at(name_col, format!("feature `{name}` is already declared")));
    }
    net.add_feature(name, domain)
        .expect("declaration was checked during parsing");
    Ok(())
}

fn parse_relation_body(
    cursor: &mut Cursor,
    net: &CpNet,
    owner: &str,
) -> Result<PreferenceRelation, ParseError> {
    let (condition, assignment_cols) = parse_condition_tokens(cursor)?;
    for (feature, value, col) in &assignment_cols {
        if feature == owner {
            return Err(cursor.error_at(
                *col,
                format!("relation for `{owner}` conditions on its own feature"),
            ));
        }
        match net.feature(feature) {
            None => {
                return Err(cursor.error_at(*col, format!("unknown feature `{feature}`")));
            }
            Some(declared) if !declared.has_value(value) => {
                return Err(cursor.error_at(
                    *col,
                    format!("value `{value}` is not in the domain of `{feature}`"),
                ));
            }
            Some(_) => {}
        }
    }
    cursor.expect(':')?;
    let (levels, value_cols) = parse_ordering_tokens(cursor)?;
    cursor.expect_end()?;
    let domain = net
        .feature(owner)
        .expect("cpt header checked the feature exists");
    for (value, col) in &value_cols {
        if !domain.has_value(value) {
            return Err(cursor.error_at(
                *col,
                format!("value `{value}` is not in the domain of `{owner}`"),
            ));
        }
    }
    PreferenceRelation::new(condition, levels).map_err(|e| cursor.error_at(1, e.to_string()))
}

type AssignmentTokens = Vec<(String, String, usize)>;

/// Parses `T` or `IDENT=IDENT { & IDENT=IDENT }`, returning the condition and
/// the column of each assignment for error reporting.
fn parse_condition_tokens(
    cursor: &mut Cursor,
) -> Result<(Condition, AssignmentTokens), ParseError> {
    let (first, first_col) = cursor.ident("a condition (`T` or `feature=value`)")?;
    cursor.skip_ws();
    if first == "T" && cursor.peek() != Some('=') {
        return Ok((Condition::top(), Vec::new()));
    }
    let mut tokens: AssignmentTokens = Vec::new();
    let mut feature = first;
    let mut feature_col = first_col;
    loop {
        cursor.expect('=')?;
        let (value, _) = cursor.ident("a condition value")?;
        if tokens.iter().any(|(f, _, _)| *f == feature) {
            return Err(cursor.error_at(
                feature_col,
                format!("condition assigns feature `{feature}` more than once"),
            ));
        }
        tokens.push((feature, value, feature_col));
        cursor.skip_ws();
        if cursor.peek() == Some('&') {
            cursor.bump();
            let (next, next_col) = cursor.ident("a condition feature")?;
            feature = next;
            feature_col = next_col;
        } else {
            break;
        }
    }
    let condition =
        Condition::from_assignments(tokens.iter().map(|(f, v, _)| (f.clone(), v.clone())))
            .expect("duplicate assignments were rejected above");
    Ok((condition, tokens))
}

type ValueTokens = Vec<(String, usize)>;

/// Parses `level { > level }` with `level := IDENT { ~ IDENT }`, returning the
/// levels and the column of each value.
fn parse_ordering_tokens(
    cursor: &mut Cursor,
) -> Result<(Vec<BTreeSet<String>>, ValueTokens), ParseError> {
    let mut levels: Vec<BTreeSet<String>> = Vec::new();
    let mut tokens: ValueTokens = Vec::new();
    let mut level: BTreeSet<String> = BTreeSet::new();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    loop {
        let (value, col) = cursor.ident("a value")?;
        if !seen.insert(value.clone()) {
            return Err(cursor.error_at(
                col,
                format!("value `{value}` appears more than once in the relation"),
            ));
        }
        level.insert(value.clone());
        tokens.push((value, col));
        cursor.skip_ws();
        match cursor.peek() {
            Some('~') => {
                cursor.bump();
            }
            Some('>') => {
                cursor.bump();
                levels.push(std::mem::take(&mut level));
            }
            None => break,
            Some(other) => {
                return Err(cursor.error_here(format!(
                    "expected `>`, `~`, or end of line, found `{other}`"
                )));
            }
        }
    }
    levels.push(level);
    Ok((levels, tokens))
}

// ---------------------------------------------------------------------------
// Character cursor
// ---------------------------------------------------------------------------

struct Cursor {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl Cursor {
    fn new(text: &str, line: usize) -> Self {
        Cursor {
            chars: text.chars().collect(),
            pos: 0,
            line,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn column(&self) -> usize {
        self.pos + 1
    }

    fn error_here(&self, message: impl Into<String>) -> ParseError {
        ParseError::new(self.line, self.column(), message)
    }

    fn error_at(&self, column: usize, message: impl Into<String>) -> ParseError {
        ParseError::new(self.line, column, message)
    }

    fn expect(&mut self, wanted: char) -> Result<(), ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c == wanted => {
                self.bump();
                Ok(())
            }
            Some(c) => Err(self.error_here(format!("expected `{wanted}`, found `{c}`"))),
            None => Err(self.error_here(format!("expected `{wanted}`, found end of line"))),
        }
    }

    fn expect_end(&mut self) -> Result<(), ParseError> {
        self.skip_ws();
        match self.peek() {
            None => Ok(()),
            Some(c) => Err(self.error_here(format!("unexpected `{c}` after a complete line"))),
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, usize), ParseError> {
        self.skip_ws();
        let start = self.column();
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
            Some(c) => {
                return Err(self.error_here(format!("expected {what}, found `{c}`")));
            }
            None => {
                return Err(self.error_here(format!("expected {what}, found end of line")));
            }
        }
        let mut ident = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                ident.push(c);
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok((ident, start))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    const CHAIN: &str = "\
feature A: a1, a2, a3
feature B: b1, b2
feature C: c1, c2
cpt A:
- T : a1 > a2 > a3
cpt B:
- A=a1 : b1 > b2
- A=a2 : b2 > b1
- A=a3 : b1 > b2
cpt C:
- B=b1 : c1 > c2
- B=b2 : c2 > c1
";

    #[test]
    fn parses_three_feature_chain() {
        let net = parse(CHAIN).unwrap();
        assert_eq!(net.features().len(), 3);
        assert_eq!(
            net.derived_parents("B").unwrap(),
            BTreeSet::from(["A".to_owned()])
        );
        assert_eq!(
            net.derived_parents("C").unwrap(),
            BTreeSet::from(["B".to_owned()])
        );
        assert!(net.validate().is_empty());
    }

    #[test]
    fn canonical_text_is_a_fixpoint() {
        let once = serialize(&parse(CHAIN).unwrap()).unwrap();
        let twice = serialize(&parse(&once).unwrap()).unwrap();
        assert_eq!(once, twice);
        assert_eq!(once, CHAIN); // CHAIN is written canonically
    }

    #[test]
    fn parses_indifference_level() {
        let net =
            parse("feature A: a1, a5\nfeature B: b1, b2\ncpt A:\n- B=b1 : a1 ~ a5\n").unwrap();
        let rel = &net.cpt("A").unwrap().relations()[0];
        assert_eq!(rel.levels().len(), 1);
        assert_eq!(rel.levels()[0].len(), 2);
    }

    #[test]
    fn rejects_duplicate_value_in_relation() {
        let err = parse("feature A: a1\ncpt A:\n- T : a1 > a1\n").unwrap_err();
        assert_eq!(err.location.line, 3);
        assert!(err.message.contains("more than once"), "{}", err.message);
    }

    #[test]
    fn rejects_unknown_value_with_location() {
        let err = parse("feature A: a1, a2\ncpt A:\n- T : a1 > a9\n").unwrap_err();
        assert_eq!(err.location.line, 3);
        assert_eq!(err.location.column, 12);
        assert!(err.message.contains("a9"));
    }

    #[test]
    fn rejects_unknown_operator() {
        let err = parse("feature A: a1, a2\ncpt A:\n- T : a1 < a2\n").unwrap_err();
        assert_eq!(err.location.line, 3);
        assert!(err.message.contains('<'));
    }

    #[test]
    fn rejects_self_condition() {
        let err = parse("feature A: a1, a2\ncpt A:\n- A=a1 : a1 > a2\n").unwrap_err();
        assert!(err.message.contains("its own feature"));
    }

    #[test]
    fn rejects_feature_decl_after_cpt_block() {
        let err = parse("feature A: a1\ncpt A:\nfeature B: b1\n").unwrap_err();
        assert_eq!(err.location.line, 3);
    }

    #[test]
    fn rejects_relation_outside_block() {
        let err = parse("feature A: a1\n- T : a1\n").unwrap_err();
        assert_eq!(err.location.line, 2);
        assert!(err.message.contains("outside a cpt block"));
    }

    #[test]
    fn rejects_duplicate_cpt_block() {
        let err = parse("feature A: a1, a2\ncpt A:\ncpt A:\n").unwrap_err();
        assert!(err.message.contains("duplicate cpt block"));
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let net =
            parse("# a test net\n\nfeature A: a1, a2  # two values\n\ncpt A:\n- T : a1 > a2\n")
                .unwrap();
        assert_eq!(net.features().len(), 1);
    }

    #[test]
    fn multi_feature_conditions_parse_and_serialize() {
        let text = "feature A: a1, a2\nfeature B: b1, b2\nfeature C: c1, c2\ncpt C:\n- A=a1 & B=b2 : c1 > c2\n";
        let net = parse(text).unwrap();
        assert_eq!(serialize(&net).unwrap(), text);
    }

    #[test]
    fn condition_feature_named_t_is_not_top() {
        let net = parse("feature T: t1\nfeature A: a1, a2\ncpt A:\n- T=t1 : a1 > a2\n").unwrap();
        let rel = &net.cpt("A").unwrap().relations()[0];
        assert!(!rel.condition().is_top());
        assert_eq!(rel.condition().value_of("T"), Some("t1"));
    }

    #[test]
    fn empty_net_serializes_to_empty_document() {
        let net = parse("").unwrap();
        assert!(net.is_empty());
        assert_eq!(serialize(&net).unwrap(), "");
    }

    #[test]
    fn serializer_refuses_contradictory_net() {
        let net = parse("feature A: a1, a2\ncpt A:\n- T : a1 > a2\n- T : a2 > a1\n").unwrap();
        assert!(serialize(&net).is_err());
    }

    #[test]
    fn bare_relation_parser_roundtrips() {
        let rel = parse_relation("B=b1 : a5 > a1 ~ a2 > a3").unwrap();
        assert_eq!(rel.to_string(), "B=b1 : a5 > a1 ~ a2 > a3");
        assert!(parse_relation("B=b1 : a1 > a1").is_err());
    }
}
