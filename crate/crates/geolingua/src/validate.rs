//! Semantic validation of parsed programs.
//!
//! Validation never fails: it returns a [`ValidationReport`] listing every
//! rule violation as data. The report is the predicate behind the
//! autoformalization filter and the precondition of the scene compiler.
//!
//! Checked rules: closed keyword set and section placement, arity and
//! argument kinds (programs can be built programmatically, so these are
//! re-checked even though the parser enforces them), declared-point
//! references, duplicate introductions, and degenerate numeric literals
//! (non-positive ratio components, radii and length targets, angle targets
//! outside (0,180], trig values outside the function's range).

use crate::ast::*;
use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// Where a diagnostic points: a statement, or nowhere (program-level).
#[derive(Debug, Clone, PartialEq)]
pub enum Location {
    Statement(Origin),
    Program,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub location: Location,
    pub message: String,
    /// Stable rule identifier, e.g. `"undeclared-point"`.
    pub rule: &'static str,
}

/// Outcome of [`validate`]. `ok` is true iff no error-severity diagnostic
/// exists.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub diagnostics: Vec<Diagnostic>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.diagnostics
            .iter()
            .all(|d| d.severity != Severity::Error)
    }

    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics
            .iter()
            .filter(|d| d.severity == Severity::Error)
    }

    fn error(&mut self, origin: Origin, rule: &'static str, message: String) {
        self.diagnostics.push(Diagnostic {
            severity: Severity::Error,
            location: Location::Statement(origin),
            message,
            rule,
        });
    }
}

/// Which point names a statement introduces and which it merely references,
/// given the set of points already known. Shared by the validator and the
/// scene compiler so the two can never disagree on declaration semantics.
///
/// Shape statements introduce vertices that are not yet known and reference
/// the rest; derived corners of metric templates (Square, Rectangle, Rhombus,
/// Parallelogram) and all dependence-point declarations must be new.
/// `Tangent(O,T,P)` introduces whichever of `T`/`P` is not yet known
/// (both, when neither is).
pub fn statement_roles(
    stmt: &Statement,
    known: &BTreeSet<PointName>,
) -> (Vec<PointName>, Vec<PointName>) {
    let mut intro = Vec::new();
    let mut refs = Vec::new();
    let intro_if_new = |p: PointName, intro: &mut Vec<PointName>, refs: &mut Vec<PointName>| {
        if known.contains(&p) || intro.contains(&p) {
            refs.push(p);
        } else {
            intro.push(p);
        }
    };

    let entity = |i: usize| -> &[PointName] {
        match stmt.args.get(i) {
            Some(Argument::Entity(e)) => e.points(),
            _ => &[],
        }
    };
    let point = |i: usize| -> Option<PointName> {
        match stmt.args.get(i) {
            Some(Argument::Point(p)) => Some(*p),
            _ => None,
        }
    };

    match stmt.head {
        Head::Circle => {
            if let Some(p) = point(0) {
                intro_if_new(p, &mut intro, &mut refs);
            }
        }
        Head::Polygon => {
            for &p in entity(0) {
                intro_if_new(p, &mut intro, &mut refs);
            }
        }
        Head::Square | Head::Rectangle | Head::Rhombus | Head::Parallelogram => {
            // Anchors may pre-exist; derived corners must be new.
            let anchors: &[usize] = match stmt.head {
                Head::Parallelogram => &[0, 1, 3],
                _ => &[0, 1],
            };
            for (i, &p) in entity(0).iter().enumerate() {
                if anchors.contains(&i) {
                    intro_if_new(p, &mut intro, &mut refs);
                } else {
                    intro.push(p); // duplicates flagged by the caller
                }
            }
        }
        Head::Sector => {
            for &p in entity(0) {
                intro_if_new(p, &mut intro, &mut refs);
            }
        }
        Head::StringOfCircle | Head::InscribedPolygon => {
            if let Some(center) = point(0) {
                intro_if_new(center, &mut intro, &mut refs);
            }
            // Points already known as free are upgraded to on-circle
            // dependents by the compiler, so they count as references here.
            for &p in entity(1) {
                intro_if_new(p, &mut intro, &mut refs);
            }
        }
        Head::CircumscribedPolygon => {
            if let Some(center) = point(0) {
                intro.push(center);
            }
            for &p in entity(1) {
                intro_if_new(p, &mut intro, &mut refs);
            }
        }
        Head::PointAtLine | Head::PointAtArc | Head::PointInShape => {
            if let Some(p) = point(0) {
                intro.push(p);
            }
            match &stmt.args[1] {
                Argument::Entity(e) => refs.extend(e.points().iter().copied()),
                Argument::Point(p) => refs.push(*p),
                _ => {}
            }
        }
        Head::LineIntersect => {
            refs.extend(entity(0).iter().copied());
            refs.extend(entity(1).iter().copied());
            if let Some(p) = point(2) {
                intro.push(p);
            }
        }
        Head::ExtensionLine => {
            refs.extend(entity(0).iter().copied());
            if let Some(p) = point(1) {
                intro.push(p);
            }
        }
        Head::Tangent => {
            if let Some(center) = point(0) {
                refs.push(center);
            }
            if let (Some(t), Some(p)) = (point(1), point(2)) {
                if known.contains(&t) {
                    refs.push(t);
                    // With both ends known there is nothing to construct;
                    // the duplicate introduction surfaces that.
                    intro.push(p);
                } else if known.contains(&p) {
                    refs.push(p);
                    intro.push(t);
                } else {
                    intro.push(t);
                    intro.push(p);
                }
            }
        }
        Head::DoPerpendicular => {
            if let Some(p) = point(0) {
                refs.push(p);
            }
            refs.extend(entity(1).iter().copied());
            if let Some(foot) = point(2) {
                intro.push(foot);
            }
        }
        // Constraint statements only reference.
        _ => {
            for arg in &stmt.args {
                match arg {
                    Argument::Point(p) => refs.push(*p),
                    Argument::Entity(e) => refs.extend(e.points().iter().copied()),
                    Argument::Expr(expr) => {
                        for (_, op) in &expr.terms {
                            if let Operand::Entity(e) = op {
                                refs.extend(e.points().iter().copied());
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
    }
    (intro, refs)
}

/// Validate a program. Total: never aborts on any program that parsed.
pub fn validate(program: &FormalProgram) -> ValidationReport {
    let mut report = ValidationReport::default();

    // Structural checks (arity/kind), for programmatically built programs.
    for (origin, stmt) in program.statements() {
        if stmt.head.section() != origin.section {
            report.error(
                origin,
                "section",
                format!(
                    "{} belongs in the '{}' section",
                    stmt.head,
                    stmt.head.section().key()
                ),
            );
        }
        check_signature(stmt, origin, &mut report);
        check_numbers(stmt, origin, &mut report);
    }

    // Pass 1: simulate introductions in order, flagging duplicates.
    let mut known: BTreeSet<PointName> = BTreeSet::new();
    let mut statement_refs: Vec<(Origin, Vec<PointName>)> = Vec::new();
    for (origin, stmt) in program.statements() {
        let (intro, refs) = statement_roles(stmt, &known);
        let mut seen_here: BTreeSet<PointName> = BTreeSet::new();
        for p in &intro {
            if known.contains(p) || !seen_here.insert(*p) {
                report.error(
                    origin,
                    "duplicate-point",
                    format!("point {p} is already defined"),
                );
            }
        }
        known.extend(intro);
        statement_refs.push((origin, refs));
    }

    // Pass 2: references checked against the full introduction set, so
    // forward references are fine as long as the point exists somewhere.
    for (origin, refs) in statement_refs {
        let mut reported: BTreeSet<PointName> = BTreeSet::new();
        for p in refs {
            if !known.contains(&p) && reported.insert(p) {
                report.error(origin, "undeclared-point", format!("undeclared point {p}"));
            }
        }
    }

    report
}

fn check_signature(stmt: &Statement, origin: Origin, report: &mut ValidationReport) {
    let spec = stmt.head.signature();
    if stmt.args.len() != spec.len() {
        report.error(
            origin,
            "arity",
            format!(
                "{} expects {} argument(s), found {}",
                stmt.head,
                spec.len(),
                stmt.args.len()
            ),
        );
        return;
    }
    for (i, (arg, &kind)) in stmt.args.iter().zip(spec).enumerate() {
        let ok = match (kind, arg) {
            (ArgSpec::Point, Argument::Point(_)) => true,
            (ArgSpec::Entity { min, max }, Argument::Entity(e)) => {
                e.len() >= min && e.len() <= max
            }
            (ArgSpec::PointOrSegment, Argument::Point(_)) => true,
            (ArgSpec::PointOrSegment, Argument::Entity(e)) => e.len() == 2,
            (ArgSpec::Number, Argument::Number(_)) => true,
            (ArgSpec::Ratio, Argument::Ratio(..)) => true,
            (ArgSpec::Relation, Argument::Relation(_)) => true,
            (ArgSpec::Expr { entity_len }, Argument::Expr(e)) => e.terms.iter().all(|(_, op)| {
                match op {
                    Operand::Entity(ent) => ent.len() == entity_len,
                    Operand::Number(_) => true,
                }
            }),
            (ArgSpec::Trig, Argument::Trig(_)) => true,
            (ArgSpec::ArcType, Argument::Arc(_)) => true,
            _ => false,
        };
        if !ok {
            report.error(
                origin,
                "arg-kind",
                format!(
                    "{} argument {} must be a {}",
                    stmt.head,
                    i + 1,
                    kind.describe()
                ),
            );
        }
    }
}

fn check_numbers(stmt: &Statement, origin: Origin, report: &mut ValidationReport) {
    let number = |i: usize| -> Option<f64> {
        match stmt.args.get(i) {
            Some(Argument::Number(n)) => Some(*n),
            _ => None,
        }
    };
    let check_ratio = |i: usize, report: &mut ValidationReport| {
        if let Some(Argument::Ratio(a, b)) = stmt.args.get(i) {
            if *a <= 0.0 || *b <= 0.0 {
                report.error(
                    origin,
                    "ratio-positive",
                    format!("ratio components must be strictly positive, found Ratio({a},{b})"),
                );
            }
        }
    };
    match stmt.head {
        Head::Circle => {
            if let Some(r) = number(1) {
                if r <= 0.0 {
                    report.error(origin, "radius-positive", format!("radius must be > 0, found {r}"));
                }
            }
        }
        Head::Sector => {
            if let Some(a) = number(1) {
                if a <= 0.0 || a >= 360.0 {
                    report.error(
                        origin,
                        "sector-angle",
                        format!("sector angle must lie in (0,360), found {a}"),
                    );
                }
            }
            if let Some(r) = number(2) {
                if r <= 0.0 {
                    report.error(origin, "radius-positive", format!("radius must be > 0, found {r}"));
                }
            }
        }
        Head::PointAtLine => {
            if let Some(r) = number(2) {
                if r < 0.0 {
                    report.error(
                        origin,
                        "ratio-range",
                        format!("position ratio must be >= 0 (0 means a free position), found {r}"),
                    );
                }
            }
        }
        Head::Length | Head::PointLineDistance => {
            if let Some(v) = number(stmt.args.len().saturating_sub(1)) {
                if v <= 0.0 {
                    report.error(
                        origin,
                        "length-positive",
                        format!("target length must be > 0, found {v}"),
                    );
                }
            }
        }
        Head::LengthRatio | Head::ArcRatio | Head::AngleRatio => check_ratio(2, report),
        Head::Angle => {
            if let Some(v) = number(1) {
                if v <= 0.0 || v > 180.0 {
                    report.error(
                        origin,
                        "angle-range",
                        format!("angle out of range (0,180], found {v}"),
                    );
                }
            }
        }
        Head::Parallel => {
            if let Some(v) = number(2) {
                if v != 0.0 {
                    report.error(
                        origin,
                        "fixed-arg",
                        format!("Parallel's third argument must be 0, found {v}"),
                    );
                }
            }
        }
        Head::Perpendicular => {
            if let Some(v) = number(2) {
                if v != 90.0 {
                    report.error(
                        origin,
                        "fixed-arg",
                        format!("Perpendicular's third argument must be 90, found {v}"),
                    );
                }
            }
        }
        Head::PointInShape => {
            if let Some(v) = number(2) {
                if v != 0.0 {
                    report.error(
                        origin,
                        "fixed-arg",
                        format!("PointInShape's third argument must be 0, found {v}"),
                    );
                }
            }
        }
        Head::TriFunction => {
            if let (Some(Argument::Trig(f)), Some(v)) = (stmt.args.first(), number(2)) {
                let ok = match f {
                    TrigFn::Sin => v > 0.0 && v <= 1.0,
                    TrigFn::Cos => v > -1.0 && v < 1.0,
                    TrigFn::Tan => v > 0.0,
                };
                if !ok {
                    report.error(
                        origin,
                        "trig-range",
                        format!("{f} value {v} is outside the representable angle range"),
                    );
                }
            }
        }
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_text;

    #[test]
    fn valid_square_program() {
        let program = parse_text("shapes:\nSquare(ABCD)\nangle constraint:\nAngle(ABC,90)").unwrap();
        let report = validate(&program);
        assert!(report.ok(), "{:?}", report.diagnostics);
        assert!(report.diagnostics.is_empty());
    }

    #[test]
    fn flags_undeclared_point() {
        let program = parse_text("shapes:\nPolygon(ABC)\nangle constraint:\nAngle(ABE,60)").unwrap();
        let report = validate(&program);
        assert!(!report.ok());
        assert!(report
            .errors()
            .any(|d| d.rule == "undeclared-point" && d.message.contains('E')));
    }

    #[test]
    fn flags_angle_out_of_range() {
        let program = parse_text("shapes:\nPolygon(ABC)\nangle constraint:\nAngle(ABC,200)").unwrap();
        let report = validate(&program);
        assert!(!report.ok());
        assert!(report
            .errors()
            .any(|d| d.rule == "angle-range" && d.message.contains("(0,180]")));
    }

    #[test]
    fn flags_degenerate_literals() {
        let cases = [
            ("shapes:\nCircle(O,0)", "radius-positive"),
            ("shapes:\nCircle(O,-2)", "radius-positive"),
            (
                "shapes:\nPolygon(ABCD)\nlength constraint:\nLengthRatio(AB,CD,Ratio(0,1))",
                "ratio-positive",
            ),
            (
                "shapes:\nPolygon(ABC)\nangle constraint:\nTriFunction(sin,ABC,1.5)",
                "trig-range",
            ),
            (
                "shapes:\nPolygon(ABC)\nangle constraint:\nParallel(AB,BC,5)",
                "fixed-arg",
            ),
            ("shapes:\nPolygon(ABC)\nlength constraint:\nLength(AB,0)", "length-positive"),
        ];
        for (src, rule) in cases {
            let program = parse_text(src).unwrap();
            let report = validate(&program);
            assert!(
                report.errors().any(|d| d.rule == rule),
                "{src} should violate {rule}: {:?}",
                report.diagnostics
            );
        }
    }

    #[test]
    fn flags_duplicate_introduction() {
        let program =
            parse_text("shapes:\nPolygon(ABC)\ndependence:\nPointAtLine(A,BC,0.5)").unwrap();
        let report = validate(&program);
        assert!(report.errors().any(|d| d.rule == "duplicate-point"));
    }

    #[test]
    fn forward_references_are_allowed() {
        // D's host BC is introduced by a later statement order inside the
        // dependence section; existence is what matters.
        let program = parse_text(
            "shapes:\nPolygon(ABC)\ndependence:\nPointAtLine(D,EC,0.5)\nPointAtLine(E,AB,0.5)",
        )
        .unwrap();
        let report = validate(&program);
        assert!(report.ok(), "{:?}", report.diagnostics);
    }

    #[test]
    fn validation_is_total_on_constructed_programs() {
        // Wrong arity and wrong kinds, built by hand.
        let mut program = FormalProgram::default();
        program.shapes.push(Statement::new(Head::Circle, vec![]));
        program.angle_constraints.push(Statement::new(
            Head::Angle,
            vec![Argument::Number(60.0), Argument::Number(60.0)],
        ));
        let report = validate(&program);
        assert!(!report.ok());
        assert!(report.errors().any(|d| d.rule == "arity"));
        assert!(report.errors().any(|d| d.rule == "arg-kind"));
    }
}
