//! The scenario file format.
//!
//! A file is a two-line header followed by the record log of one complex,
//! one record per line.  Rendering writes the canonical form: single
//! spaces, `\n` endings, records in application order.  Parsing replays
//! the records line by line, so every construction error carries the
//! position of the offending line.  `#` starts a comment; blank lines are
//! skipped.  Entity names never contain whitespace or `#`, which keeps
//! tokenization trivial.
//!
//! Record syntax:
//!
//! ```text
//! version 1
//! field qsqrt2i
//! ambient <name>
//! flag all_separatrices_incomplete <true|false>
//! step <k> point <point> <dicritical|nondicritical>
//! step <k> curve <curve>
//! germ <id> at <point-spec>
//! trace <id> in <component> [degree <d>] at <point-spec> [at <point-spec> ...]
//! point <point-spec>
//! land <curve> with <curve>
//! index <curve> side <component> (a,b,c,d)
//! restricted <curve> at <point> (a,b,c,d)
//! singstar <level> <entity>
//! ```
//!
//! A point spec is a point name, `on <curve>` or `inside <component>`.
//! Scalar coordinates are rationals written `p` or `p/q`.  An `index`
//! value that is a positive rational is rejected at parse time: no
//! admissible index is one.

use std::fmt;

use crate::complex::{Complex, PSpec, Record};
use crate::scalar::Scalar;

pub const FORMAT_VERSION: u32 = 1;
const FIELD_TAG: &str = "qsqrt2i";

/// A rejected file, located by line, column and the token under the
/// cursor.  Both syntax errors and record-replay errors (unknown entity,
/// duplicate assignment, malformed step) are reported this way.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub token: String,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}, column {}: {} (at {:?})",
            self.line, self.column, self.message, self.token
        )
    }
}

impl std::error::Error for ParseError {}

/// One content line, tokenized with 1-based column positions.
struct Cursor<'a> {
    line: usize,
    tokens: Vec<(usize, &'a str)>,
    pos: usize,
    end_column: usize,
}

impl<'a> Cursor<'a> {
    fn new(line: usize, text: &'a str) -> Cursor<'a> {
        let content = match text.find('#') {
            Some(cut) => &text[..cut],
            None => text,
        };
        let mut tokens = Vec::new();
        let mut column = 1usize;
        for piece in content.split_inclusive(char::is_whitespace) {
            let token = piece.trim_end_matches(char::is_whitespace);
            if !token.is_empty() {
                tokens.push((column, token));
            }
            column += piece.chars().count();
        }
        Cursor { line, tokens, pos: 0, end_column: column }
    }

    fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    fn err(&self, column: usize, token: &str, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            column,
            token: token.to_string(),
            message: message.into(),
        }
    }

    /// Error at the current cursor position; past the last token it points
    /// at the end of the line.
    fn err_here(&self, message: impl Into<String>) -> ParseError {
        match self.tokens.get(self.pos) {
            Some(&(column, token)) => self.err(column, token, message),
            None => self.err(self.end_column, "<end of line>", message),
        }
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str), ParseError> {
        match self.tokens.get(self.pos) {
            Some(&entry) => {
                self.pos += 1;
                Ok(entry)
            }
            None => Err(self.err_here(format!("expected {}", what))),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        let (column, token) = self.next(&format!("keyword {:?}", kw))?;
        if token == kw {
            Ok(())
        } else {
            Err(self.err(column, token, format!("expected keyword {:?}", kw)))
        }
    }

    fn integer(&mut self, what: &str) -> Result<u32, ParseError> {
        let (column, token) = self.next(what)?;
        token
            .parse::<u32>()
            .map_err(|_| self.err(column, token, format!("expected {}, found a non-integer", what)))
    }

    fn peek(&self) -> Option<&'a str> {
        self.tokens.get(self.pos).map(|&(_, t)| t)
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        if self.pos == self.tokens.len() {
            Ok(())
        } else {
            Err(self.err_here("unexpected trailing tokens"))
        }
    }

    fn point_spec(&mut self) -> Result<PSpec, ParseError> {
        let (_, token) = self.next("a point spec")?;
        match token {
            "on" => {
                let (_, curve) = self.next("a curve name after `on`")?;
                Ok(PSpec::OnCurve(curve.to_string()))
            }
            "inside" => {
                let (_, comp) = self.next("a component name after `inside`")?;
                Ok(PSpec::Inside(comp.to_string()))
            }
            name => Ok(PSpec::Named(name.to_string())),
        }
    }

    /// The remaining tokens glued back together as one scalar literal, so
    /// `(1, 0, 0, 0)` and `(1,0,0,0)` read the same.
    fn scalar(&mut self) -> Result<(usize, Scalar), ParseError> {
        let (column, first) = self.next("a scalar (a,b,c,d)")?;
        let mut literal = first.to_string();
        while let Some(&(_, token)) = self.tokens.get(self.pos) {
            self.pos += 1;
            literal.push_str(token);
        }
        match literal.parse::<Scalar>() {
            Ok(value) => Ok((column, value)),
            Err(e) => Err(self.err(column, &literal, e)),
        }
    }
}

fn spec_text(spec: &PSpec) -> String {
    match spec {
        PSpec::Named(name) => name.clone(),
        PSpec::OnCurve(curve) => format!("on {}", curve),
        PSpec::Inside(comp) => format!("inside {}", comp),
    }
}

fn record_line(record: &Record) -> String {
    match record {
        Record::Ambient { name } => format!("ambient {}", name),
        Record::Flag { all_separatrices_incomplete } => {
            format!("flag all_separatrices_incomplete {}", all_separatrices_incomplete)
        }
        Record::StepPoint { level, point, dicritical } => format!(
            "step {} point {} {}",
            level,
            point,
            if *dicritical { "dicritical" } else { "nondicritical" }
        ),
        Record::StepCurve { level, curve } => format!("step {} curve {}", level, curve),
        Record::Germ { id, at } => format!("germ {} at {}", id, spec_text(at)),
        Record::Trace { id, comp, degree, at } => {
            let mut line = format!("trace {} in {}", id, comp);
            if let Some(d) = degree {
                line.push_str(&format!(" degree {}", d));
            }
            for spec in at {
                line.push_str(&format!(" at {}", spec_text(spec)));
            }
            line
        }
        Record::FreshPoint { spec } => format!("point {}", spec_text(spec)),
        Record::Land { curve, with } => format!("land {} with {}", curve, with),
        Record::Index { curve, side, value } => {
            format!("index {} side {} {}", curve, side, value.render())
        }
        Record::Restricted { curve, point, value } => {
            format!("restricted {} at {} {}", curve, point, value.render())
        }
        Record::SingStar { level, entity } => format!("singstar {} {}", level, entity),
    }
}

/// Canonical text of a complex: header plus its record log.
pub fn render_scenario(cx: &Complex) -> String {
    let mut out = String::new();
    out.push_str(&format!("version {}\n", FORMAT_VERSION));
    out.push_str(&format!("field {}\n", FIELD_TAG));
    for record in cx.records() {
        out.push_str(&record_line(record));
        out.push('\n');
    }
    out
}

enum Expect {
    Version,
    Field,
    Ambient,
    Records,
}

/// Rebuilds the complex described by `text`, replaying each record as it
/// is read.
pub fn parse_scenario(text: &str) -> Result<Complex, ParseError> {
    let mut expect = Expect::Version;
    let mut cx: Option<Complex> = None;
    let mut lines = 0usize;
    for (n, raw) in text.lines().enumerate() {
        lines = n + 1;
        let mut cur = Cursor::new(n + 1, raw);
        if cur.is_empty() {
            continue;
        }
        match expect {
            Expect::Version => {
                cur.keyword("version")?;
                let v = cur.integer("a format version")?;
                if v != FORMAT_VERSION {
                    return Err(cur.err_here(format!(
                        "unsupported format version {}, expected {}",
                        v, FORMAT_VERSION
                    )));
                }
                cur.finish()?;
                expect = Expect::Field;
            }
            Expect::Field => {
                cur.keyword("field")?;
                let (column, tag) = cur.next("a field tag")?;
                if tag != FIELD_TAG {
                    return Err(cur.err(
                        column,
                        tag,
                        format!("field-tag mismatch: this build computes over {}", FIELD_TAG),
                    ));
                }
                cur.finish()?;
                expect = Expect::Ambient;
            }
            Expect::Ambient => {
                cur.keyword("ambient")?;
                let (_, name) = cur.next("an ambient name")?;
                cur.finish()?;
                cx = Some(Complex::new_ambient(name));
                expect = Expect::Records;
            }
            Expect::Records => {
                let record = parse_record(&mut cur)?;
                let complex = cx.as_mut().expect("records follow the ambient line");
                if let Err(e) = complex.apply(record) {
                    let (column, token) = cur.tokens[0];
                    return Err(cur.err(column, token, e.to_string()));
                }
            }
        }
    }
    match cx {
        Some(cx) => Ok(cx),
        None => Err(ParseError {
            line: lines + 1,
            column: 1,
            token: "<end of file>".to_string(),
            message: "truncated file: expected the version, field and ambient header".to_string(),
        }),
    }
}

fn parse_record(cur: &mut Cursor) -> Result<Record, ParseError> {
    let (column, keyword) = cur.next("a record keyword")?;
    let record = match keyword {
        "version" | "field" | "ambient" => {
            return Err(cur.err(column, keyword, "header line after the header"));
        }
        "flag" => {
            cur.keyword("all_separatrices_incomplete")?;
            let (c, token) = cur.next("true or false")?;
            let value = match token {
                "true" => true,
                "false" => false,
                other => return Err(cur.err(c, other, "expected true or false")),
            };
            Record::Flag { all_separatrices_incomplete: value }
        }
        "step" => {
            let level = cur.integer("a step number")?;
            let (c, kind) = cur.next("point or curve")?;
            match kind {
                "point" => {
                    let (_, point) = cur.next("a point name")?;
                    let (c2, which) = cur.next("dicritical or nondicritical")?;
                    let dicritical = match which {
                        "dicritical" => true,
                        "nondicritical" => false,
                        other => {
                            return Err(cur.err(c2, other, "expected dicritical or nondicritical"))
                        }
                    };
                    Record::StepPoint { level, point: point.to_string(), dicritical }
                }
                "curve" => {
                    let (_, curve) = cur.next("a curve name")?;
                    Record::StepCurve { level, curve: curve.to_string() }
                }
                other => return Err(cur.err(c, other, "expected point or curve")),
            }
        }
        "germ" => {
            let (_, id) = cur.next("a germ id")?;
            cur.keyword("at")?;
            let at = cur.point_spec()?;
            Record::Germ { id: id.to_string(), at }
        }
        "trace" => {
            let (_, id) = cur.next("a trace id")?;
            cur.keyword("in")?;
            let (_, comp) = cur.next("a component name")?;
            let degree = if cur.peek() == Some("degree") {
                cur.next("degree")?;
                Some(cur.integer("a degree")?)
            } else {
                None
            };
            let mut at = Vec::new();
            cur.keyword("at")?;
            at.push(cur.point_spec()?);
            while cur.peek() == Some("at") {
                cur.next("at")?;
                at.push(cur.point_spec()?);
            }
            Record::Trace { id: id.to_string(), comp: comp.to_string(), degree, at }
        }
        "point" => Record::FreshPoint { spec: cur.point_spec()? },
        "land" => {
            let (_, curve) = cur.next("a curve name")?;
            cur.keyword("with")?;
            let (_, with) = cur.next("a curve name")?;
            Record::Land { curve: curve.to_string(), with: with.to_string() }
        }
        "index" => {
            let (_, curve) = cur.next("a curve name")?;
            cur.keyword("side")?;
            let (_, side) = cur.next("a component name")?;
            let (c, value) = cur.scalar()?;
            if value.classify().is_none() && !value.is_zero() {
                return Err(cur.err(c, &value.render(), "positive rational index"));
            }
            Record::Index { curve: curve.to_string(), side: side.to_string(), value }
        }
        "restricted" => {
            let (_, curve) = cur.next("a curve name")?;
            cur.keyword("at")?;
            let (_, point) = cur.next("a point name")?;
            let (_, value) = cur.scalar()?;
            Record::Restricted { curve: curve.to_string(), point: point.to_string(), value }
        }
        "singstar" => {
            let level = cur.integer("a level")?;
            let (_, entity) = cur.next("an entity name")?;
            Record::SingStar { level, entity: entity.to_string() }
        }
        other => return Err(cur.err(column, other, "unknown record")),
    };
    cur.finish()?;
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::EntityRef;

    fn two_plane_fixture() -> Complex {
        let mut cx = Complex::new_ambient("T");
        cx.set_flag(false).unwrap();
        cx.mark_singular(EntityRef::Point(cx.origin())).unwrap();
        cx.blow_up_point(cx.origin(), false).unwrap();
        let e1 = match cx.lookup("E1").unwrap() {
            EntityRef::Component(e) => e,
            _ => unreachable!(),
        };
        let z = cx.declare_point(PSpec::Inside("E1".to_string())).unwrap();
        let spec = PSpec::Named(cx.point(z).name.clone());
        let t1 = cx.declare_trace("T1", e1, None, vec![spec]).unwrap();
        cx.assign_index(t1, e1, Scalar::from_integer(-1)).unwrap();
        cx.mark_singular(EntityRef::Point(z)).unwrap();
        cx.blow_up_point(z, false).unwrap();
        cx
    }

    #[test]
    fn render_parse_round_trip() {
        let cx = two_plane_fixture();
        let text = render_scenario(&cx);
        let back = parse_scenario(&text).unwrap();
        assert_eq!(cx.records(), back.records());
        assert_eq!(render_scenario(&back), text);
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let text = "\
# a scenario
version 1

field qsqrt2i
ambient T  # trailing comment
flag all_separatrices_incomplete false
";
        let cx = parse_scenario(text).unwrap();
        assert_eq!(cx.ambient_name(), "T");
        assert!(!cx.all_separatrices_incomplete());
    }

    #[test]
    fn field_tag_mismatch_is_located() {
        let text = "version 1\nfield galois\nambient T\n";
        let err = parse_scenario(text).unwrap_err();
        assert_eq!((err.line, err.column), (2, 7));
        assert_eq!(err.token, "galois");
        assert!(err.message.contains("field-tag mismatch"));
    }

    #[test]
    fn truncated_file_reports_the_end() {
        let err = parse_scenario("version 1\nfield qsqrt2i\n").unwrap_err();
        assert_eq!(err.line, 3);
        assert_eq!(err.token, "<end of file>");
        assert!(err.message.contains("truncated"));
    }

    #[test]
    fn missing_token_points_past_the_line() {
        let text = "version 1\nfield qsqrt2i\nambient T\ngerm G1 at\n";
        let err = parse_scenario(text).unwrap_err();
        assert_eq!(err.line, 4);
        assert_eq!(err.column, 11);
        assert_eq!(err.token, "<end of line>");
        assert!(err.message.contains("expected a point spec"));
    }

    #[test]
    fn unknown_entity_is_a_located_replay_error() {
        let text = "version 1\nfield qsqrt2i\nambient T\nsingstar 0 Q\n";
        let err = parse_scenario(text).unwrap_err();
        assert_eq!(err.line, 4);
        assert!(err.message.contains("unknown entity"));
    }

    #[test]
    fn duplicate_assignment_is_a_located_replay_error() {
        let base = render_scenario(&two_plane_fixture());
        let dup = format!("{}index T1 side E1 (-1,0,0,0)\n", base);
        let err = parse_scenario(&dup).unwrap_err();
        assert_eq!(err.line, base.lines().count() + 1);
        assert!(err.message.contains("duplicate index assignment"));
    }

    #[test]
    fn positive_rational_index_is_rejected_at_parse_time() {
        let base = render_scenario(&two_plane_fixture());
        let bad = base.replace("index T1 side E1 (-1,0,0,0)", "index T1 side E1 (1,0,0,0)");
        assert_ne!(base, bad);
        let err = parse_scenario(&bad).unwrap_err();
        assert_eq!(err.message, "positive rational index");
        assert_eq!(err.token, "(1,0,0,0)");
    }

    #[test]
    fn scalar_with_spaces_parses_as_one_literal() {
        let base = render_scenario(&two_plane_fixture());
        let spaced = base.replace("(-1,0,0,0)", "( -1 , 0 , 0 , 0 )");
        let cx = parse_scenario(&spaced).unwrap();
        assert_eq!(cx.records(), two_plane_fixture().records());
    }

    #[test]
    fn unknown_record_is_rejected() {
        let text = "version 1\nfield qsqrt2i\nambient T\nblowup O\n";
        let err = parse_scenario(text).unwrap_err();
        assert_eq!((err.line, err.column), (4, 1));
        assert_eq!(err.message, "unknown record");
    }
}
