//! Parsing and serialization of GeoLingua programs.
//!
//! Two interchangeable surface forms are supported:
//!
//! * plain text (`.geo`): section headers (`shapes:`, `dependence:`,
//!   `length constraint:`, `angle constraint:`), one statement per line;
//! * JSON (`.json`): an object with exactly those four keys, each an array
//!   of statement strings.
//!
//! Parsing is head-directed: the keyword fixes the expected argument kinds
//! (see [`Head::signature`]), so diagnostics can name the slot that failed.
//! Whitespace inside argument lists and trailing commas are tolerated;
//! everything else is strict.

use crate::ast::*;
use thiserror::Error;

/// Byte range in the parsed source.
pub type Span = (usize, usize);

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ParseError {
    #[error("{context}syntax error at byte {}..{}: {message}", span.0, span.1)]
    Syntax {
        span: Span,
        message: String,
        context: String,
    },
    #[error("{context}unknown statement '{head}' at byte {}..{}", span.0, span.1)]
    UnknownStatement {
        head: String,
        span: Span,
        context: String,
    },
    #[error("{context}{head} expects {expected} argument(s), found {found}")]
    Arity {
        head: Head,
        expected: usize,
        found: usize,
        context: String,
    },
    #[error("malformed program JSON: {0}")]
    JsonShape(String),
}

impl ParseError {
    fn with_context(mut self, ctx: &str) -> ParseError {
        let prefix = format!("{ctx}: ");
        match &mut self {
            ParseError::Syntax { context, .. }
            | ParseError::UnknownStatement { context, .. }
            | ParseError::Arity { context, .. } => *context = prefix,
            ParseError::JsonShape(_) => {}
        }
        self
    }
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    /// Run of uppercase letters and primes: point/entity names, also `Ratio`
    /// and other head-like words (classified by the parser).
    Word(String),
    /// Run of lowercase letters: `sin`, `minor`, `equal`, ...
    LowerWord(String),
    Number(f64),
    LParen,
    RParen,
    Comma,
    Plus,
    Minus,
    Rel(Relation),
}

#[derive(Debug, Clone)]
struct SpannedTok {
    tok: Tok,
    span: Span,
}

fn lex(src: &str, base: usize) -> Result<Vec<SpannedTok>, ParseError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let start = i;
        let c = src[i..].chars().next().unwrap();
        let err = |msg: String, at: usize, len: usize| ParseError::Syntax {
            span: (base + at, base + at + len),
            message: msg,
            context: String::new(),
        };
        match c {
            c if c.is_whitespace() => {
                i += c.len_utf8();
                continue;
            }
            '(' => {
                toks.push(SpannedTok { tok: Tok::LParen, span: (base + i, base + i + 1) });
                i += 1;
            }
            ')' => {
                toks.push(SpannedTok { tok: Tok::RParen, span: (base + i, base + i + 1) });
                i += 1;
            }
            ',' => {
                toks.push(SpannedTok { tok: Tok::Comma, span: (base + i, base + i + 1) });
                i += 1;
            }
            '+' => {
                toks.push(SpannedTok { tok: Tok::Plus, span: (base + i, base + i + 1) });
                i += 1;
            }
            '-' => {
                toks.push(SpannedTok { tok: Tok::Minus, span: (base + i, base + i + 1) });
                i += 1;
            }
            '=' => {
                // Accept both `=` and `==`.
                let len = if bytes.get(i + 1) == Some(&b'=') { 2 } else { 1 };
                toks.push(SpannedTok { tok: Tok::Rel(Relation::Eq), span: (base + i, base + i + len) });
                i += len;
            }
            '>' => {
                let (rel, len) = if bytes.get(i + 1) == Some(&b'=') {
                    (Relation::Ge, 2)
                } else {
                    (Relation::Gt, 1)
                };
                toks.push(SpannedTok { tok: Tok::Rel(rel), span: (base + i, base + i + len) });
                i += len;
            }
            '<' => {
                let (rel, len) = if bytes.get(i + 1) == Some(&b'=') {
                    (Relation::Le, 2)
                } else {
                    (Relation::Lt, 1)
                };
                toks.push(SpannedTok { tok: Tok::Rel(rel), span: (base + i, base + i + len) });
                i += len;
            }
            '≥' => {
                toks.push(SpannedTok { tok: Tok::Rel(Relation::Ge), span: (base + i, base + i + c.len_utf8()) });
                i += c.len_utf8();
            }
            '≤' => {
                toks.push(SpannedTok { tok: Tok::Rel(Relation::Le), span: (base + i, base + i + c.len_utf8()) });
                i += c.len_utf8();
            }
            '0'..='9' | '.' => {
                let mut j = i;
                let mut seen_dot = false;
                while j < bytes.len() {
                    match bytes[j] {
                        b'0'..=b'9' => j += 1,
                        b'.' if !seen_dot => {
                            seen_dot = true;
                            j += 1;
                        }
                        _ => break,
                    }
                }
                let text = &src[i..j];
                let value: f64 = text
                    .parse()
                    .map_err(|_| err(format!("invalid number '{text}'"), i, j - i))?;
                toks.push(SpannedTok { tok: Tok::Number(value), span: (base + i, base + j) });
                i = j;
            }
            'A'..='Z' => {
                // A word may mix upper and lower case (statement heads,
                // `Ratio`); pure-uppercase-and-prime runs are entity names.
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_alphabetic() || bytes[j] == b'\'') {
                    j += 1;
                }
                toks.push(SpannedTok { tok: Tok::Word(src[i..j].to_string()), span: (base + i, base + j) });
                i = j;
            }
            'a'..='z' => {
                let mut j = i;
                while j < bytes.len() && bytes[j].is_ascii_lowercase() {
                    j += 1;
                }
                toks.push(SpannedTok { tok: Tok::LowerWord(src[i..j].to_string()), span: (base + i, base + j) });
                i = j;
            }
            other => {
                return Err(err(format!("unexpected character '{other}'"), start, other.len_utf8()));
            }
        }
    }
    Ok(toks)
}

// ---------------------------------------------------------------------------
// Statement parser
// ---------------------------------------------------------------------------

struct Cursor {
    toks: Vec<SpannedTok>,
    pos: usize,
    end: usize,
}

impl Cursor {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn span(&self) -> Span {
        self.toks
            .get(self.pos)
            .map(|t| t.span)
            .unwrap_or((self.end, self.end))
    }

    fn next(&mut self) -> Option<SpannedTok> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            span: self.span(),
            message: message.into(),
            context: String::new(),
        }
    }
}

fn entity_from_word(word: &str, span: Span) -> Result<EntityName, ParseError> {
    let mut points = Vec::new();
    let mut chars = word.chars().peekable();
    while let Some(c) = chars.next() {
        if !c.is_ascii_uppercase() {
            return Err(ParseError::Syntax {
                span,
                message: format!("expected point names (uppercase letters), found '{word}'"),
                context: String::new(),
            });
        }
        let mut primes = 0u8;
        while chars.peek() == Some(&'\'') {
            chars.next();
            primes += 1;
        }
        points.push(PointName::new(c, primes));
    }
    if points.is_empty() {
        return Err(ParseError::Syntax {
            span,
            message: "empty entity name".into(),
            context: String::new(),
        });
    }
    Ok(EntityName(points))
}

fn parse_number(cur: &mut Cursor) -> Result<f64, ParseError> {
    let negative = cur.eat(&Tok::Minus);
    match cur.next() {
        Some(SpannedTok { tok: Tok::Number(n), .. }) => Ok(if negative { -n } else { n }),
        other => Err(ParseError::Syntax {
            span: other.map(|t| t.span).unwrap_or_else(|| (cur.end, cur.end)),
            message: "expected a number".into(),
            context: String::new(),
        }),
    }
}

fn parse_expression(cur: &mut Cursor, entity_len: usize) -> Result<Expression, ParseError> {
    let parenthesized = cur.eat(&Tok::LParen);
    let mut terms = Vec::new();
    let mut sign = if cur.eat(&Tok::Minus) { -1.0 } else { 1.0 };
    loop {
        let span = cur.span();
        let operand = match cur.next() {
            Some(SpannedTok { tok: Tok::Word(w), span }) => {
                let entity = entity_from_word(&w, span)?;
                if entity.len() != entity_len {
                    return Err(ParseError::Syntax {
                        span,
                        message: format!(
                            "expression term '{entity}' must name {entity_len} points"
                        ),
                        context: String::new(),
                    });
                }
                Operand::Entity(entity)
            }
            Some(SpannedTok { tok: Tok::Number(n), .. }) => Operand::Number(n),
            _ => {
                return Err(ParseError::Syntax {
                    span,
                    message: "expected an entity name or number in expression".into(),
                    context: String::new(),
                })
            }
        };
        terms.push((sign, operand));
        if cur.eat(&Tok::Plus) {
            sign = 1.0;
        } else if cur.eat(&Tok::Minus) {
            sign = -1.0;
        } else {
            break;
        }
    }
    if parenthesized && !cur.eat(&Tok::RParen) {
        return Err(cur.error("expected ')' to close expression"));
    }
    if !parenthesized && terms.len() != 1 {
        return Err(cur.error("multi-term expressions must be parenthesized"));
    }
    Ok(Expression { terms })
}

fn parse_argument(cur: &mut Cursor, spec: ArgSpec, head: Head) -> Result<Argument, ParseError> {
    match spec {
        ArgSpec::Point => {
            let span = cur.span();
            match cur.next() {
                Some(SpannedTok { tok: Tok::Word(w), span }) => {
                    let entity = entity_from_word(&w, span)?;
                    if entity.len() != 1 {
                        return Err(ParseError::Syntax {
                            span,
                            message: format!("'{entity}' is not a single point name"),
                            context: String::new(),
                        });
                    }
                    Ok(Argument::Point(entity.0[0]))
                }
                _ => Err(ParseError::Syntax {
                    span,
                    message: "expected a point name".into(),
                    context: String::new(),
                }),
            }
        }
        ArgSpec::Entity { min, max } => {
            let span = cur.span();
            match cur.next() {
                Some(SpannedTok { tok: Tok::Word(w), span }) => {
                    let entity = entity_from_word(&w, span)?;
                    if entity.len() < min || entity.len() > max {
                        let want = if min == max {
                            format!("exactly {min}")
                        } else {
                            format!("at least {min}")
                        };
                        return Err(ParseError::Syntax {
                            span,
                            message: format!(
                                "{head} expects an entity of {want} points, '{entity}' has {}",
                                entity.len()
                            ),
                            context: String::new(),
                        });
                    }
                    Ok(Argument::Entity(entity))
                }
                _ => Err(ParseError::Syntax {
                    span,
                    message: "expected an entity name".into(),
                    context: String::new(),
                }),
            }
        }
        ArgSpec::PointOrSegment => {
            let span = cur.span();
            match cur.next() {
                Some(SpannedTok { tok: Tok::Word(w), span }) => {
                    let entity = entity_from_word(&w, span)?;
                    match entity.len() {
                        1 => Ok(Argument::Point(entity.0[0])),
                        2 => Ok(Argument::Entity(entity)),
                        n => Err(ParseError::Syntax {
                            span,
                            message: format!(
                                "expected a circle center or 2-point arc name, '{entity}' has {n} points"
                            ),
                            context: String::new(),
                        }),
                    }
                }
                _ => Err(ParseError::Syntax {
                    span,
                    message: "expected a circle center or arc name".into(),
                    context: String::new(),
                }),
            }
        }
        ArgSpec::Number => parse_number(cur).map(Argument::Number),
        ArgSpec::Ratio => {
            let span = cur.span();
            match cur.next() {
                Some(SpannedTok { tok: Tok::Word(w), .. }) if w == "Ratio" => {
                    if !cur.eat(&Tok::LParen) {
                        return Err(cur.error("expected '(' after Ratio"));
                    }
                    let a = parse_number(cur)?;
                    if !cur.eat(&Tok::Comma) {
                        return Err(cur.error("expected ',' in Ratio"));
                    }
                    let b = parse_number(cur)?;
                    cur.eat(&Tok::Comma);
                    if !cur.eat(&Tok::RParen) {
                        return Err(cur.error("expected ')' to close Ratio"));
                    }
                    Ok(Argument::Ratio(a, b))
                }
                _ => Err(ParseError::Syntax {
                    span,
                    message: "expected Ratio(value1,value2)".into(),
                    context: String::new(),
                }),
            }
        }
        ArgSpec::Relation => {
            let span = cur.span();
            match cur.next() {
                Some(SpannedTok { tok: Tok::Rel(rel), .. }) => Ok(Argument::Relation(rel)),
                Some(SpannedTok { tok: Tok::LowerWord(w), .. }) if w == "equal" => {
                    Ok(Argument::Relation(Relation::Eq))
                }
                _ => Err(ParseError::Syntax {
                    span,
                    message: "expected a relation (=, >, >=, <, <= or 'equal')".into(),
                    context: String::new(),
                }),
            }
        }
        ArgSpec::Expr { entity_len } => {
            parse_expression(cur, entity_len).map(Argument::Expr)
        }
        ArgSpec::Trig => {
            let span = cur.span();
            match cur.next() {
                Some(SpannedTok { tok: Tok::LowerWord(w), span }) => match w.as_str() {
                    "sin" => Ok(Argument::Trig(TrigFn::Sin)),
                    "cos" => Ok(Argument::Trig(TrigFn::Cos)),
                    "tan" => Ok(Argument::Trig(TrigFn::Tan)),
                    other => Err(ParseError::Syntax {
                        span,
                        message: format!("unknown trig function '{other}'"),
                        context: String::new(),
                    }),
                },
                _ => Err(ParseError::Syntax {
                    span,
                    message: "expected sin, cos or tan".into(),
                    context: String::new(),
                }),
            }
        }
        ArgSpec::ArcType => {
            let span = cur.span();
            match cur.next() {
                Some(SpannedTok { tok: Tok::Number(n), span }) => {
                    if n == 0.0 {
                        Ok(Argument::Arc(ArcType::Unspecified))
                    } else {
                        Err(ParseError::Syntax {
                            span,
                            message: format!("arc type must be minor, major or 0, found {n}"),
                            context: String::new(),
                        })
                    }
                }
                Some(SpannedTok { tok: Tok::LowerWord(w), span }) => match w.as_str() {
                    "minor" => Ok(Argument::Arc(ArcType::Minor)),
                    "major" => Ok(Argument::Arc(ArcType::Major)),
                    other => Err(ParseError::Syntax {
                        span,
                        message: format!("arc type must be minor, major or 0, found '{other}'"),
                        context: String::new(),
                    }),
                },
                _ => Err(ParseError::Syntax {
                    span,
                    message: "expected an arc type (minor, major or 0)".into(),
                    context: String::new(),
                }),
            }
        }
    }
}

/// Parse one statement from a source slice (`base` is the byte offset of the
/// slice inside the overall input, for spans).
pub fn parse_statement(src: &str, base: usize) -> Result<Statement, ParseError> {
    let toks = lex(src, base)?;
    let end = base + src.len();
    let mut cur = Cursor { toks, pos: 0, end };

    let (head, head_span) = match cur.next() {
        Some(SpannedTok { tok: Tok::Word(w), span }) => match Head::from_name(&w) {
            Some(h) => (h, span),
            None => {
                return Err(ParseError::UnknownStatement {
                    head: w,
                    span,
                    context: String::new(),
                })
            }
        },
        Some(SpannedTok { tok: Tok::LowerWord(w), span }) => {
            return Err(ParseError::UnknownStatement {
                head: w,
                span,
                context: String::new(),
            })
        }
        _ => {
            return Err(ParseError::Syntax {
                span: (base, end),
                message: "expected a statement keyword".into(),
                context: String::new(),
            })
        }
    };
    let _ = head_span;

    if !cur.eat(&Tok::LParen) {
        return Err(cur.error(format!("expected '(' after {head}")));
    }

    let spec = head.signature();
    let mut args = Vec::with_capacity(spec.len());
    for (i, &arg_spec) in spec.iter().enumerate() {
        if cur.peek() == Some(&Tok::RParen) {
            return Err(ParseError::Arity {
                head,
                expected: spec.len(),
                found: i,
                context: String::new(),
            });
        }
        args.push(parse_argument(&mut cur, arg_spec, head)?);
        if i + 1 < spec.len() && !cur.eat(&Tok::Comma) {
            if cur.peek() == Some(&Tok::RParen) {
                return Err(ParseError::Arity {
                    head,
                    expected: spec.len(),
                    found: i + 1,
                    context: String::new(),
                });
            }
            return Err(cur.error("expected ',' between arguments"));
        }
    }
    // Trailing comma before the closing paren is tolerated.
    cur.eat(&Tok::Comma);
    if !cur.eat(&Tok::RParen) {
        // Count the extra arguments for the arity report.
        let mut extra = 0;
        let mut depth = 0usize;
        while let Some(tok) = cur.peek() {
            match tok {
                Tok::LParen => depth += 1,
                Tok::RParen if depth > 0 => depth -= 1,
                Tok::RParen => break,
                Tok::Comma if depth == 0 => extra += 1,
                _ => {}
            }
            cur.next();
        }
        return Err(ParseError::Arity {
            head,
            expected: spec.len(),
            found: spec.len() + extra + 1,
            context: String::new(),
        });
    }
    if cur.peek().is_some() {
        return Err(cur.error("unexpected trailing input after statement"));
    }
    Ok(Statement::new(head, args))
}

// ---------------------------------------------------------------------------
// Program parsing: text and JSON forms
// ---------------------------------------------------------------------------

/// Parse the plain-text program form.
pub fn parse_text(source: &str) -> Result<FormalProgram, ParseError> {
    let mut program = FormalProgram {
        source_text: source.to_string(),
        ..Default::default()
    };
    let mut current: Option<Section> = None;
    let mut seen = Vec::new();

    let mut offset = 0;
    for raw_line in source.split('\n') {
        let line_start = offset;
        offset += raw_line.len() + 1;
        let line = raw_line.trim_end_matches('\r');
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(header) = trimmed.strip_suffix(':') {
            if let Some(section) = Section::from_key(header.trim()) {
                if seen.contains(&section) {
                    return Err(ParseError::Syntax {
                        span: (line_start, line_start + line.len()),
                        message: format!("duplicate section header '{}:'", section.key()),
                        context: String::new(),
                    });
                }
                seen.push(section);
                current = Some(section);
                continue;
            }
        }
        let section = current.ok_or_else(|| ParseError::Syntax {
            span: (line_start, line_start + line.len()),
            message: "expected a section header before statements".into(),
            context: String::new(),
        })?;
        let leading = line.len() - line.trim_start().len();
        let stmt = parse_statement(trimmed, line_start + leading)?;
        if stmt.head.section() != section {
            return Err(ParseError::Syntax {
                span: (line_start + leading, line_start + line.len()),
                message: format!(
                    "{} belongs in the '{}' section, found under '{}'",
                    stmt.head,
                    stmt.head.section().key(),
                    section.key()
                ),
                context: String::new(),
            });
        }
        program.section_mut(section).push(stmt);
    }
    Ok(program)
}

/// Parse the four-key JSON interchange form.
pub fn parse_json(source: &str) -> Result<FormalProgram, ParseError> {
    let value: serde_json::Value = serde_json::from_str(source)
        .map_err(|e| ParseError::JsonShape(format!("invalid JSON: {e}")))?;
    let obj = value
        .as_object()
        .ok_or_else(|| ParseError::JsonShape("top level must be an object".into()))?;

    let expected: Vec<&str> = Section::ALL.iter().map(|s| s.key()).collect();
    let missing: Vec<&str> = expected
        .iter()
        .copied()
        .filter(|k| !obj.contains_key(*k))
        .collect();
    let extra: Vec<&String> = obj.keys().filter(|k| !expected.contains(&k.as_str())).collect();
    if !missing.is_empty() || !extra.is_empty() {
        let mut parts = Vec::new();
        if !missing.is_empty() {
            parts.push(format!("missing key(s) {missing:?}"));
        }
        if !extra.is_empty() {
            parts.push(format!("unexpected key(s) {extra:?}"));
        }
        return Err(ParseError::JsonShape(parts.join("; ")));
    }

    let mut program = FormalProgram {
        source_text: source.to_string(),
        ..Default::default()
    };
    for section in Section::ALL {
        let arr = obj[section.key()]
            .as_array()
            .ok_or_else(|| ParseError::JsonShape(format!("'{}' must be an array", section.key())))?;
        for (index, item) in arr.iter().enumerate() {
            let text = item.as_str().ok_or_else(|| {
                ParseError::JsonShape(format!(
                    "'{}' [{}] must be a statement string",
                    section.key(),
                    index
                ))
            })?;
            let ctx = format!("{}[{}]", section.key(), index);
            let stmt = parse_statement(text.trim(), 0).map_err(|e| e.with_context(&ctx))?;
            if stmt.head.section() != section {
                return Err(ParseError::Syntax {
                    span: (0, text.len()),
                    message: format!(
                        "{} belongs in the '{}' section",
                        stmt.head,
                        stmt.head.section().key()
                    ),
                    context: format!("{ctx}: "),
                });
            }
            program.section_mut(section).push(stmt);
        }
    }
    Ok(program)
}

/// Canonical plain-text form. `parse_text(serialize(p))` reproduces `p`
/// structurally for every valid program.
pub fn serialize(program: &FormalProgram) -> String {
    let mut out = String::new();
    for section in Section::ALL {
        out.push_str(section.key());
        out.push_str(":\n");
        for stmt in program.section(section) {
            out.push_str(&stmt.to_string());
            out.push('\n');
        }
    }
    out
}

/// The four-key JSON value for a program, statements in canonical text form.
pub fn to_json_value(program: &FormalProgram) -> serde_json::Value {
    let mut map = serde_json::Map::new();
    for section in Section::ALL {
        let arr: Vec<serde_json::Value> = program
            .section(section)
            .iter()
            .map(|s| serde_json::Value::String(s.to_string()))
            .collect();
        map.insert(section.key().to_string(), serde_json::Value::Array(arr));
    }
    serde_json::Value::Object(map)
}

/// Pretty-printed four-key JSON form.
pub fn to_json_string(program: &FormalProgram) -> String {
    let mut s = serde_json::to_string_pretty(&to_json_value(program)).expect("JSON encoding");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entity(s: &str) -> EntityName {
        entity_from_word(s, (0, 0)).unwrap()
    }

    #[test]
    fn parses_square_statement() {
        let program = parse_text("shapes:\nSquare(ABCD)").unwrap();
        assert_eq!(
            program.shapes,
            vec![Statement::new(Head::Square, vec![Argument::Entity(entity("ABCD"))])]
        );
        assert!(program.dependence.is_empty());
    }

    #[test]
    fn parses_empty_sections() {
        let program = parse_text("shapes:\n").unwrap();
        assert!(program.is_empty());
        let full = parse_text("shapes:\ndependence:\nlength constraint:\nangle constraint:\n").unwrap();
        assert!(full.is_empty());
    }

    #[test]
    fn parses_angle_constraint() {
        let program = parse_text("angle constraint:\nAngle(ABC,60)").unwrap();
        assert_eq!(
            program.angle_constraints,
            vec![Statement::new(
                Head::Angle,
                vec![Argument::Entity(entity("ABC")), Argument::Number(60.0)]
            )]
        );
    }

    #[test]
    fn rejects_unknown_head() {
        let err = parse_text("shapes:\nBlob(X)").unwrap_err();
        assert!(matches!(err, ParseError::UnknownStatement { ref head, .. } if head == "Blob"));
    }

    #[test]
    fn rejects_wrong_section() {
        let err = parse_text("dependence:\nSquare(ABCD)").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { .. }), "{err}");
    }

    #[test]
    fn reports_arity_errors() {
        let err = parse_text("shapes:\nCircle(O)").unwrap_err();
        assert!(
            matches!(err, ParseError::Arity { head: Head::Circle, expected: 2, found: 1, .. }),
            "{err:?}"
        );
        let err = parse_text("shapes:\nCircle(O,5,7)").unwrap_err();
        assert!(
            matches!(err, ParseError::Arity { head: Head::Circle, expected: 2, found: 3, .. }),
            "{err:?}"
        );
    }

    #[test]
    fn tolerates_whitespace_and_trailing_comma() {
        let program = parse_text("dependence:\n  PointAtArc( P , AB , minor , ) ").unwrap();
        assert_eq!(
            program.dependence,
            vec![Statement::new(
                Head::PointAtArc,
                vec![
                    Argument::Point(PointName::new('P', 0)),
                    Argument::Entity(entity("AB")),
                    Argument::Arc(ArcType::Minor),
                ]
            )]
        );
    }

    #[test]
    fn parses_expressions_and_relations() {
        let program =
            parse_text("length constraint:\nLengthAddandSub((AB+BC-5),=,(AC))").unwrap();
        let stmt = &program.length_constraints[0];
        assert_eq!(stmt.head, Head::LengthAddandSub);
        assert_eq!(
            stmt.args[0],
            Argument::Expr(Expression {
                terms: vec![
                    (1.0, Operand::Entity(entity("AB"))),
                    (1.0, Operand::Entity(entity("BC"))),
                    (-1.0, Operand::Number(5.0)),
                ]
            })
        );
        assert_eq!(stmt.args[1], Argument::Relation(Relation::Eq));

        // Bare right-hand side (perimeter form) and the word 'equal'.
        let program =
            parse_text("length constraint:\nLengthAddandSub((AB+BC+CA),equal,12)").unwrap();
        let stmt = &program.length_constraints[0];
        assert_eq!(stmt.args[1], Argument::Relation(Relation::Eq));
        assert_eq!(
            stmt.args[2],
            Argument::Expr(Expression { terms: vec![(1.0, Operand::Number(12.0))] })
        );
    }

    #[test]
    fn parses_primed_points() {
        let program = parse_text("shapes:\nPolygon(A'B'C)").unwrap();
        let Argument::Entity(e) = &program.shapes[0].args[0] else {
            panic!()
        };
        assert_eq!(e.0[0], PointName::new('A', 1));
        assert_eq!(e.0[2], PointName::new('C', 0));
        assert_eq!(e.to_string(), "A'B'C");
    }

    #[test]
    fn json_and_text_agree() {
        let json = r#"{"shapes":["Polygon(ABC)"],"dependence":[],"length constraint":[],"angle constraint":[]}"#;
        let from_json = parse_json(json).unwrap();
        let from_text = parse_text("shapes:\nPolygon(ABC)").unwrap();
        assert_eq!(from_json, from_text);
    }

    #[test]
    fn json_shape_errors() {
        let err = parse_json(r#"{"shapes":[]}"#).unwrap_err();
        assert!(matches!(err, ParseError::JsonShape(_)), "{err}");
        let err = parse_json(
            r#"{"shapes":[],"dependence":[],"length constraint":[],"angle constraint":[],"extra":[]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, ParseError::JsonShape(_)));
        let err = parse_json(
            r#"{"shapes":["Blob(X)"],"dependence":[],"length constraint":[],"angle constraint":[]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("shapes[0]"), "{err}");
    }

    #[test]
    fn empty_json_program() {
        let program = parse_json(
            r#"{"shapes":[],"dependence":[],"length constraint":[],"angle constraint":[]}"#,
        )
        .unwrap();
        assert!(program.is_empty());
    }

    #[test]
    fn serialize_canonical_form() {
        let program = parse_text("shapes:\nSquare(ABCD)").unwrap();
        assert_eq!(
            serialize(&program),
            "shapes:\nSquare(ABCD)\ndependence:\nlength constraint:\nangle constraint:\n"
        );
        let empty = FormalProgram::default();
        assert_eq!(
            serialize(&empty),
            "shapes:\ndependence:\nlength constraint:\nangle constraint:\n"
        );
    }

    #[test]
    fn round_trips_table_exemplars() {
        let exemplars = [
            "shapes:\nCircle(O,5)",
            "shapes:\nPolygon(ABC)",
            "shapes:\nParallelogram(ABCD)",
            "shapes:\nRhombus(ABCD)",
            "shapes:\nSquare(ABCD)",
            "shapes:\nRectangle(ABCD)",
            "shapes:\nSector(AOB,60,5)",
            "shapes:\nStringOfCircle(O,AB)",
            "shapes:\nInscribedPolygon(O,ABC)",
            "shapes:\nCircumscribedPolygon(O,ABC)",
            "dependence:\nPointAtLine(D,BC,0)",
            "dependence:\nPointAtLine(D,BC,0.5)",
            "dependence:\nLineIntersect(AC,BD,E)",
            "dependence:\nPointAtArc(P,AB,minor)",
            "dependence:\nPointAtArc(P,O,0)",
            "dependence:\nExtensionLine(AB,C)",
            "dependence:\nTangent(O,A,P)",
            "dependence:\nDoPerpendicular(P,BC,H)",
            "dependence:\nPointInShape(P,ABC,0)",
            "length constraint:\nLength(AB,5)",
            "length constraint:\nLengthRatio(AB,CD,Ratio(2,1))",
            "length constraint:\nArcRatio(AB,CD,Ratio(1,2))",
            "length constraint:\nLengthAddandSub((AB+BC),=,(AC))",
            "length constraint:\nPointLineDistance(P,BC,3)",
            "length constraint:\nConnectPoints(AC)",
            "angle constraint:\nParallel(AB,CD,0)",
            "angle constraint:\nPerpendicular(AB,CD,90)",
            "angle constraint:\nAngle(ABC,60)",
            "angle constraint:\nTriFunction(sin,ABC,0.5)",
            "angle constraint:\nAngleRatio(ABC,DEF,Ratio(2,1))",
            "angle constraint:\nAngleAddandSub((ABC+BCD),=,(180))",
        ];
        for src in exemplars {
            let program = parse_text(src).unwrap_or_else(|e| panic!("{src}: {e}"));
            let round = parse_text(&serialize(&program)).unwrap();
            assert_eq!(program, round, "round trip of {src}");
            let json_round = parse_json(&to_json_string(&program)).unwrap();
            assert_eq!(program, json_round, "json round trip of {src}");
        }
    }
}
