//! Abstract syntax for GeoLingua programs.
//!
//! A program is four ordered statement lists (shapes, dependence, length
//! constraints, angle constraints). Every statement is a keyword head plus a
//! fixed argument signature; the keyword set is closed and each head belongs
//! to exactly one section. [`Head::signature`] is the single source of truth
//! for arity and argument kinds — the parser, the validator and the prompt
//! framework are all generated from it.

use serde::{Deserialize, Serialize};
use std::fmt;

/// The four statement sections of a program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Section {
    #[serde(rename = "shapes")]
    Shapes,
    #[serde(rename = "dependence")]
    Dependence,
    #[serde(rename = "length constraint")]
    LengthConstraint,
    #[serde(rename = "angle constraint")]
    AngleConstraint,
}

impl Section {
    pub const ALL: [Section; 4] = [
        Section::Shapes,
        Section::Dependence,
        Section::LengthConstraint,
        Section::AngleConstraint,
    ];

    /// Section header in the plain-text format and key in the JSON format.
    pub fn key(self) -> &'static str {
        match self {
            Section::Shapes => "shapes",
            Section::Dependence => "dependence",
            Section::LengthConstraint => "length constraint",
            Section::AngleConstraint => "angle constraint",
        }
    }

    pub fn from_key(key: &str) -> Option<Section> {
        Section::ALL.into_iter().find(|s| s.key() == key)
    }
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// Location of a statement inside a program, used in diagnostics and to tie
/// compiled constraints back to their source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Origin {
    pub section: Section,
    pub index: usize,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.section.key(), self.index)
    }
}

/// A point name: one uppercase ASCII letter with optional prime marks
/// (`A`, `B'`, `C''`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PointName {
    pub letter: char,
    pub primes: u8,
}

impl PointName {
    pub fn new(letter: char, primes: u8) -> PointName {
        PointName { letter, primes }
    }
}

impl fmt::Display for PointName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter)?;
        for _ in 0..self.primes {
            write!(f, "'")?;
        }
        Ok(())
    }
}

/// A concatenation of point names: `AB` is a segment, `ABC` an angle (vertex
/// in the middle) or a triangle, `ABCD` a quadrilateral.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntityName(pub Vec<PointName>);

impl EntityName {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn points(&self) -> &[PointName] {
        &self.0
    }
}

impl fmt::Display for EntityName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

/// Comparison operator in relational constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Eq,
    Gt,
    Ge,
    Lt,
    Le,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Eq => "=",
            Relation::Gt => ">",
            Relation::Ge => ">=",
            Relation::Lt => "<",
            Relation::Le => "<=",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Trigonometric function selector for `TriFunction`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrigFn {
    Sin,
    Cos,
    Tan,
}

impl TrigFn {
    pub fn name(self) -> &'static str {
        match self {
            TrigFn::Sin => "sin",
            TrigFn::Cos => "cos",
            TrigFn::Tan => "tan",
        }
    }
}

impl fmt::Display for TrigFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Arc selector for `PointAtArc`. `0` in the source form means "unspecified":
/// the whole circle when the host is a circle center, the minor arc when the
/// host is an arc name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArcType {
    Unspecified,
    Minor,
    Major,
}

impl fmt::Display for ArcType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArcType::Unspecified => f.write_str("0"),
            ArcType::Minor => f.write_str("minor"),
            ArcType::Major => f.write_str("major"),
        }
    }
}

/// One term of a sum expression: a measured entity or a numeric literal.
#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    Entity(EntityName),
    Number(f64),
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Entity(e) => write!(f, "{e}"),
            Operand::Number(n) => write!(f, "{n}"),
        }
    }
}

/// Signed sum of entities and numbers, e.g. `(AB+BC-5)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    /// (sign, operand) pairs; sign is +1.0 or -1.0.
    pub terms: Vec<(f64, Operand)>,
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, (sign, op)) in self.terms.iter().enumerate() {
            if *sign < 0.0 {
                write!(f, "-")?;
            } else if i > 0 {
                write!(f, "+")?;
            }
            write!(f, "{op}")?;
        }
        write!(f, ")")
    }
}

/// A statement argument. The kind is fixed per head by [`Head::signature`].
#[derive(Debug, Clone, PartialEq)]
pub enum Argument {
    Point(PointName),
    Entity(EntityName),
    Number(f64),
    Ratio(f64, f64),
    Relation(Relation),
    Expr(Expression),
    Trig(TrigFn),
    Arc(ArcType),
}

impl fmt::Display for Argument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Argument::Point(p) => write!(f, "{p}"),
            Argument::Entity(e) => write!(f, "{e}"),
            Argument::Number(n) => write!(f, "{n}"),
            Argument::Ratio(a, b) => write!(f, "Ratio({a},{b})"),
            Argument::Relation(r) => write!(f, "{r}"),
            Argument::Expr(e) => write!(f, "{e}"),
            Argument::Trig(t) => write!(f, "{t}"),
            Argument::Arc(a) => write!(f, "{a}"),
        }
    }
}

/// Expected kind of one argument slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArgSpec {
    /// A single point name.
    Point,
    /// An entity name whose length must lie in `[min, max]`.
    Entity { min: usize, max: usize },
    /// A point name or a two-point entity (host of `PointAtArc`).
    PointOrSegment,
    /// A real number.
    Number,
    /// A `Ratio(a,b)` literal.
    Ratio,
    /// A relation operator (`=`, `>`, `>=", `<`, `<=`, or the word `equal`).
    Relation,
    /// A parenthesized signed sum, or a bare entity/number; entities must
    /// have the given length (2 = segment, 3 = angle).
    Expr { entity_len: usize },
    /// `sin`, `cos` or `tan`.
    Trig,
    /// `minor`, `major` or `0`.
    ArcType,
}

impl ArgSpec {
    /// Human-readable kind name for diagnostics and the prompt framework.
    pub fn describe(self) -> String {
        match self {
            ArgSpec::Point => "point name".into(),
            ArgSpec::Entity { min, max } if min == max => format!("{min}-point name"),
            ArgSpec::Entity { min, .. } => format!("name of {min} or more points"),
            ArgSpec::PointOrSegment => "circle center or 2-point arc name".into(),
            ArgSpec::Number => "number".into(),
            ArgSpec::Ratio => "Ratio(value1,value2)".into(),
            ArgSpec::Relation => "relation (=, >, >=, <, <=)".into(),
            ArgSpec::Expr { entity_len: 2 } => "sum of segments/numbers".into(),
            ArgSpec::Expr { .. } => "sum of angles/numbers".into(),
            ArgSpec::Trig => "sin, cos or tan".into(),
            ArgSpec::ArcType => "arc type (minor, major or 0)".into(),
        }
    }
}

const MANY: usize = 26 * 8;

macro_rules! heads {
    ($( $variant:ident, $name:literal, $section:ident, [$($spec:expr),*]; )*) => {
        /// The closed set of statement keywords.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum Head {
            $( $variant, )*
        }

        impl Head {
            pub const ALL: &'static [Head] = &[ $( Head::$variant, )* ];

            pub fn name(self) -> &'static str {
                match self {
                    $( Head::$variant => $name, )*
                }
            }

            pub fn from_name(name: &str) -> Option<Head> {
                match name {
                    $( $name => Some(Head::$variant), )*
                    _ => None,
                }
            }

            /// Section this head belongs to.
            pub fn section(self) -> Section {
                match self {
                    $( Head::$variant => Section::$section, )*
                }
            }

            /// Ordered argument kinds for this head.
            pub fn signature(self) -> &'static [ArgSpec] {
                match self {
                    $( Head::$variant => &[ $($spec),* ], )*
                }
            }
        }
    };
}

heads! {
    Circle, "Circle", Shapes, [ArgSpec::Point, ArgSpec::Number];
    Polygon, "Polygon", Shapes, [ArgSpec::Entity { min: 3, max: MANY }];
    Parallelogram, "Parallelogram", Shapes, [ArgSpec::Entity { min: 4, max: 4 }];
    Rhombus, "Rhombus", Shapes, [ArgSpec::Entity { min: 4, max: 4 }];
    Square, "Square", Shapes, [ArgSpec::Entity { min: 4, max: 4 }];
    Rectangle, "Rectangle", Shapes, [ArgSpec::Entity { min: 4, max: 4 }];
    Sector, "Sector", Shapes, [ArgSpec::Entity { min: 3, max: 3 }, ArgSpec::Number, ArgSpec::Number];
    StringOfCircle, "StringOfCircle", Shapes, [ArgSpec::Point, ArgSpec::Entity { min: 2, max: 2 }];
    InscribedPolygon, "InscribedPolygon", Shapes, [ArgSpec::Point, ArgSpec::Entity { min: 3, max: MANY }];
    CircumscribedPolygon, "CircumscribedPolygon", Shapes, [ArgSpec::Point, ArgSpec::Entity { min: 3, max: MANY }];

    PointAtLine, "PointAtLine", Dependence, [ArgSpec::Point, ArgSpec::Entity { min: 2, max: 2 }, ArgSpec::Number];
    LineIntersect, "LineIntersect", Dependence, [ArgSpec::Entity { min: 2, max: 2 }, ArgSpec::Entity { min: 2, max: 2 }, ArgSpec::Point];
    PointAtArc, "PointAtArc", Dependence, [ArgSpec::Point, ArgSpec::PointOrSegment, ArgSpec::ArcType];
    ExtensionLine, "ExtensionLine", Dependence, [ArgSpec::Entity { min: 2, max: 2 }, ArgSpec::Point];
    Tangent, "Tangent", Dependence, [ArgSpec::Point, ArgSpec::Point, ArgSpec::Point];
    DoPerpendicular, "DoPerpendicular", Dependence, [ArgSpec::Point, ArgSpec::Entity { min: 2, max: 2 }, ArgSpec::Point];
    PointInShape, "PointInShape", Dependence, [ArgSpec::Point, ArgSpec::Entity { min: 3, max: MANY }, ArgSpec::Number];

    Length, "Length", LengthConstraint, [ArgSpec::Entity { min: 2, max: 2 }, ArgSpec::Number];
    LengthRatio, "LengthRatio", LengthConstraint, [ArgSpec::Entity { min: 2, max: 2 }, ArgSpec::Entity { min: 2, max: 2 }, ArgSpec::Ratio];
    ArcRatio, "ArcRatio", LengthConstraint, [ArgSpec::Entity { min: 2, max: 2 }, ArgSpec::Entity { min: 2, max: 2 }, ArgSpec::Ratio];
    LengthAddandSub, "LengthAddandSub", LengthConstraint, [ArgSpec::Expr { entity_len: 2 }, ArgSpec::Relation, ArgSpec::Expr { entity_len: 2 }];
    PointLineDistance, "PointLineDistance", LengthConstraint, [ArgSpec::Point, ArgSpec::Entity { min: 2, max: 2 }, ArgSpec::Number];
    ConnectPoints, "ConnectPoints", LengthConstraint, [ArgSpec::Entity { min: 2, max: 2 }];

    Parallel, "Parallel", AngleConstraint, [ArgSpec::Entity { min: 2, max: 2 }, ArgSpec::Entity { min: 2, max: 2 }, ArgSpec::Number];
    Perpendicular, "Perpendicular", AngleConstraint, [ArgSpec::Entity { min: 2, max: 2 }, ArgSpec::Entity { min: 2, max: 2 }, ArgSpec::Number];
    Angle, "Angle", AngleConstraint, [ArgSpec::Entity { min: 3, max: 3 }, ArgSpec::Number];
    TriFunction, "TriFunction", AngleConstraint, [ArgSpec::Trig, ArgSpec::Entity { min: 3, max: 3 }, ArgSpec::Number];
    AngleRatio, "AngleRatio", AngleConstraint, [ArgSpec::Entity { min: 3, max: 3 }, ArgSpec::Entity { min: 3, max: 3 }, ArgSpec::Ratio];
    AngleAddandSub, "AngleAddandSub", AngleConstraint, [ArgSpec::Expr { entity_len: 3 }, ArgSpec::Relation, ArgSpec::Expr { entity_len: 3 }];
}

impl fmt::Display for Head {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One parsed statement: keyword head plus typed arguments.
#[derive(Debug, Clone, PartialEq)]
pub struct Statement {
    pub head: Head,
    pub args: Vec<Argument>,
}

impl Statement {
    pub fn new(head: Head, args: Vec<Argument>) -> Statement {
        Statement { head, args }
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.head)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// A parsed GeoLingua program: the four statement sections plus the original
/// source (kept for diagnostics only — it does not take part in equality).
#[derive(Debug, Clone, Default)]
pub struct FormalProgram {
    pub shapes: Vec<Statement>,
    pub dependence: Vec<Statement>,
    pub length_constraints: Vec<Statement>,
    pub angle_constraints: Vec<Statement>,
    pub source_text: String,
}

impl FormalProgram {
    pub fn section(&self, section: Section) -> &[Statement] {
        match section {
            Section::Shapes => &self.shapes,
            Section::Dependence => &self.dependence,
            Section::LengthConstraint => &self.length_constraints,
            Section::AngleConstraint => &self.angle_constraints,
        }
    }

    pub fn section_mut(&mut self, section: Section) -> &mut Vec<Statement> {
        match section {
            Section::Shapes => &mut self.shapes,
            Section::Dependence => &mut self.dependence,
            Section::LengthConstraint => &mut self.length_constraints,
            Section::AngleConstraint => &mut self.angle_constraints,
        }
    }

    /// All statements with their origins, in section order.
    pub fn statements(&self) -> impl Iterator<Item = (Origin, &Statement)> {
        Section::ALL.into_iter().flat_map(move |section| {
            self.section(section)
                .iter()
                .enumerate()
                .map(move |(index, stmt)| (Origin { section, index }, stmt))
        })
    }

    pub fn is_empty(&self) -> bool {
        Section::ALL.iter().all(|&s| self.section(s).is_empty())
    }
}

impl PartialEq for FormalProgram {
    fn eq(&self, other: &Self) -> bool {
        self.shapes == other.shapes
            && self.dependence == other.dependence
            && self.length_constraints == other.length_constraints
            && self.angle_constraints == other.angle_constraints
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn head_names_round_trip() {
        for &head in Head::ALL {
            assert_eq!(Head::from_name(head.name()), Some(head));
        }
        assert_eq!(Head::from_name("Blob"), None);
    }

    #[test]
    fn every_head_has_nonempty_signature() {
        for &head in Head::ALL {
            assert!(!head.signature().is_empty(), "{head}");
        }
    }

    #[test]
    fn display_forms() {
        let p = PointName::new('A', 1);
        assert_eq!(p.to_string(), "A'");
        let e = EntityName(vec![PointName::new('A', 0), PointName::new('B', 0)]);
        assert_eq!(e.to_string(), "AB");
        let expr = Expression {
            terms: vec![
                (1.0, Operand::Entity(e.clone())),
                (-1.0, Operand::Number(5.0)),
            ],
        };
        assert_eq!(expr.to_string(), "(AB-5)");
        let stmt = Statement::new(
            Head::LengthRatio,
            vec![
                Argument::Entity(e.clone()),
                Argument::Entity(e),
                Argument::Ratio(2.0, 1.0),
            ],
        );
        assert_eq!(stmt.to_string(), "LengthRatio(AB,AB,Ratio(2,1))");
    }

    #[test]
    fn reference_doc_covers_every_head() {
        let doc = include_str!("../../../docs/geolingua.md");
        for &head in Head::ALL {
            assert!(
                doc.contains(head.name()),
                "docs/geolingua.md does not mention {}",
                head.name()
            );
        }
    }

    #[test]
    fn program_equality_ignores_source_text() {
        let a = FormalProgram {
            source_text: "x".into(),
            ..Default::default()
        };
        let b = FormalProgram {
            source_text: "y".into(),
            ..Default::default()
        };
        assert_eq!(a, b);
    }
}
