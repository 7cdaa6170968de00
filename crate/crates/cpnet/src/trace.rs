//! Text format for merge traces: one event per line, stable across runs.
//!
//! ```text
//! FEATURE_ADDED  <feature> -           -
//! COMPLETE_MERGE <feature> <condition> <ordering>
//! PARTIAL_INSERT <feature> <condition> <value> @ <index>
//! TIE_CREATED    <feature> <condition> <value> ~ <v1,v2,...>
//! SKIPPED        <feature> <condition> <value> infeasible above=<v> below=<v>
//! NOOP           <feature> <condition> -
//! CYCLE          -         -           <f1,f2,...>
//! ```
//!
//! Conditions are rendered compactly (`T`, `B=b1`, `A=a1&B=b2`) so each line
//! splits on whitespace into event, feature, condition, and detail. This is
//! the format `enrich --trace` writes and `check` reads back.

use crate::format::{parse_condition, parse_ordering, ParseError, SourceLocation};
use crate::merge::{MergeTrace, TraceEvent};
use crate::model::{render_levels, PreferenceRelation};

/// Renders a trace, cycles last.
pub fn render_trace(trace: &MergeTrace) -> String {
    let mut out = String::new();
    for event in &trace.events {
        out.push_str(&render_event(event));
        out.push('\n');
    }
    for cycle in &trace.cycles {
        out.push_str(&format!("CYCLE - - {}\n", cycle.join(",")));
    }
    out
}

fn render_event(event: &TraceEvent) -> String {
    match event {
        TraceEvent::FeatureAdded { feature } => format!("FEATURE_ADDED {feature} - -"),
        TraceEvent::CompleteMerge { feature, relation } => format!(
            "COMPLETE_MERGE {feature} {} {}",
            relation.condition(),
            render_levels(relation.levels())
        ),
        TraceEvent::PartialInsert {
            feature,
            condition,
            value,
            index,
        } => format!("PARTIAL_INSERT {feature} {condition} {value} @ {index}"),
        TraceEvent::TieCreated {
            feature,
            condition,
            value,
            tied_with,
        } => format!(
            "TIE_CREATED {feature} {condition} {value} ~ {}",
            tied_with.iter().cloned().collect::<Vec<_>>().join(",")
        ),
        TraceEvent::Skipped {
            feature,
            condition,
            value,
            above_bound,
            below_bound,
        } => format!(
            "SKIPPED {feature} {condition} {value} infeasible above={above_bound} below={below_bound}"
        ),
        TraceEvent::NoOp { feature, condition } => format!("NOOP {feature} {condition} -"),
    }
}

/// Parses a trace rendered by [`render_trace`].
pub fn parse_trace(text: &str) -> Result<MergeTrace, ParseError> {
    let mut trace = MergeTrace::default();
    for (index, raw_line) in text.lines().enumerate() {
        let line_no = index + 1;
        let line = raw_line.trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() < 4 {
            return Err(error(line_no, "expected `EVENT feature condition detail`"));
        }
        let feature = tokens[1].to_owned();
        let condition = || parse_condition(tokens[2]).map_err(|e| error(line_no, e.message));
        match tokens[0] {
            "FEATURE_ADDED" => trace.events.push(TraceEvent::FeatureAdded { feature }),
            "COMPLETE_MERGE" => {
                let levels = parse_ordering(&tokens[3..].join(" "))
                    .map_err(|e| error(line_no, e.message))?;
                let relation = PreferenceRelation::new(condition()?, levels)
                    .map_err(|e| error(line_no, e.to_string()))?;
                trace
                    .events
                    .push(TraceEvent::CompleteMerge { feature, relation });
            }
            "PARTIAL_INSERT" => {
                let [value, at, index_token] = detail3(&tokens, line_no)?;
                expect_token(at, "@", line_no)?;
                let index: usize = index_token
                    .parse()
                    .map_err(|_| error(line_no, "expected a numeric insert index"))?;
                trace.events.push(TraceEvent::PartialInsert {
                    feature,
                    condition: condition()?,
                    value: value.to_owned(),
                    index,
                });
            }
            "TIE_CREATED" => {
                let [value, tilde, csv] = detail3(&tokens, line_no)?;
                expect_token(tilde, "~", line_no)?;
                trace.events.push(TraceEvent::TieCreated {
                    feature,
                    condition: condition()?,
                    value: value.to_owned(),
                    tied_with: csv.split(',').map(str::to_owned).collect(),
                });
            }
            "SKIPPED" => {
                if tokens.len() != 7 || tokens[4] != "infeasible" {
                    return Err(error(
                        line_no,
                        "expected `SKIPPED feature condition value infeasible above=_ below=_`",
                    ));
                }
                let above_bound = strip_prefix(tokens[5], "above=", line_no)?;
                let below_bound = strip_prefix(tokens[6], "below=", line_no)?;
                trace.events.push(TraceEvent::Skipped {
                    feature,
                    condition: condition()?,
                    value: tokens[3].to_owned(),
                    above_bound,
                    below_bound,
                });
            }
            "NOOP" => trace.events.push(TraceEvent::NoOp {
                feature,
                condition: condition()?,
            }),
            "CYCLE" => trace
                .cycles
                .push(tokens[3].split(',').map(str::to_owned).collect()),
            other => {
                return Err(error(line_no, format!("unknown trace event `{other}`")));
            }
        }
    }
    Ok(trace)
}

fn detail3<'a>(tokens: &[&'a str], line_no: usize) -> Result<[&'a str; 3], ParseError> {
    if tokens.len() != 6 {
        return Err(error(line_no, "expected three detail tokens"));
    }
    Ok([tokens[3], tokens[4], tokens[5]])
}

fn expect_token(found: &str, wanted: &str, line_no: usize) -> Result<(), ParseError> {
    if found == wanted {
        Ok(())
    } else {
        Err(error(
            line_no,
            format!("expected `{wanted}`, found `{found}`"),
        ))
    }
}

fn strip_prefix(token: &str, prefix: &str, line_no: usize) -> Result<String, ParseError> {
    token
        .strip_prefix(prefix)
        .map(str::to_owned)
        .ok_or_else(|| {
            error(
                line_no,
                format!("expected `{prefix}<value>`, found `{token}`"),
            )
        })
}

fn error(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        location: SourceLocation { line, column: 1 },
        message: message.into(),
    }
}
