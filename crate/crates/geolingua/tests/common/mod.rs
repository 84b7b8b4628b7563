//! Shared test helpers: a table-driven random program generator and the
//! convergence-corpus fixtures.
#![allow(dead_code)] // each test target uses a different subset

use geolingua::ast::*;
use rand::Rng;

pub fn random_point(rng: &mut impl Rng) -> PointName {
    PointName::new(
        (b'A' + rng.random_range(0..26u8)) as char,
        rng.random_range(0..3u8),
    )
}

pub fn random_entity(len: usize, rng: &mut impl Rng) -> EntityName {
    EntityName((0..len).map(|_| random_point(rng)).collect())
}

fn random_positive(rng: &mut impl Rng) -> f64 {
    match rng.random_range(0..3u8) {
        0 => rng.random_range(1..=100i32) as f64,
        1 => rng.random_range(1..=100_000i64) as f64 / 100.0,
        _ => rng.random_range(1e-3..1e3),
    }
}

fn random_number(head: Head, slot: usize, rng: &mut impl Rng) -> f64 {
    match (head, slot) {
        (Head::Parallel, 2) => 0.0,
        (Head::Perpendicular, 2) => 90.0,
        (Head::PointInShape, 2) => 0.0,
        (Head::Angle, 1) => rng.random_range(1..=180i32) as f64,
        (Head::Sector, 1) => rng.random_range(1..=359i32) as f64,
        (Head::TriFunction, 2) => rng.random_range(1..=99i32) as f64 / 100.0,
        (Head::PointAtLine, 2) => {
            if rng.random_bool(0.3) {
                0.0
            } else {
                rng.random_range(1..=150i32) as f64 / 100.0
            }
        }
        _ => random_positive(rng),
    }
}

fn random_expression(entity_len: usize, rng: &mut impl Rng) -> Expression {
    let n = rng.random_range(1..=3usize);
    Expression {
        terms: (0..n)
            .map(|i| {
                let sign = if i > 0 && rng.random_bool(0.3) { -1.0 } else { 1.0 };
                let operand = if rng.random_bool(0.7) {
                    Operand::Entity(random_entity(entity_len, rng))
                } else {
                    Operand::Number(random_positive(rng))
                };
                (sign, operand)
            })
            .collect(),
    }
}

fn random_argument(head: Head, slot: usize, spec: ArgSpec, rng: &mut impl Rng) -> Argument {
    match spec {
        ArgSpec::Point => Argument::Point(random_point(rng)),
        ArgSpec::Entity { min, max } => {
            let len = rng.random_range(min..=max.min(min + 4));
            Argument::Entity(random_entity(len, rng))
        }
        ArgSpec::PointOrSegment => {
            if rng.random_bool(0.5) {
                Argument::Point(random_point(rng))
            } else {
                Argument::Entity(random_entity(2, rng))
            }
        }
        ArgSpec::Number => Argument::Number(random_number(head, slot, rng)),
        ArgSpec::Ratio => Argument::Ratio(random_positive(rng), random_positive(rng)),
        ArgSpec::Relation => {
            let rels = [Relation::Eq, Relation::Gt, Relation::Ge, Relation::Lt, Relation::Le];
            Argument::Relation(rels[rng.random_range(0..rels.len())])
        }
        ArgSpec::Expr { entity_len } => Argument::Expr(random_expression(entity_len, rng)),
        ArgSpec::Trig => {
            let fns = [TrigFn::Sin, TrigFn::Cos, TrigFn::Tan];
            Argument::Trig(fns[rng.random_range(0..fns.len())])
        }
        ArgSpec::ArcType => {
            let kinds = [ArcType::Unspecified, ArcType::Minor, ArcType::Major];
            Argument::Arc(kinds[rng.random_range(0..kinds.len())])
        }
    }
}

pub fn random_statement(head: Head, rng: &mut impl Rng) -> Statement {
    let args = head
        .signature()
        .iter()
        .enumerate()
        .map(|(slot, &spec)| random_argument(head, slot, spec, rng))
        .collect();
    Statement::new(head, args)
}

/// A syntactically valid random program drawn from the closed grammar.
pub fn random_program(rng: &mut impl Rng) -> FormalProgram {
    let mut program = FormalProgram::default();
    for _ in 0..rng.random_range(1..=8usize) {
        let head = Head::ALL[rng.random_range(0..Head::ALL.len())];
        program.section_mut(head.section()).push(random_statement(head, rng));
    }
    program
}

/// The hand-authored convergence corpus: every shape family and every
/// dependence/constraint statement head appears in at least one scene.
pub const CORPUS: &[(&str, &str)] = &[
    ("square_diagonal", include_str!("../fixtures/square_diagonal.geo")),
    ("triangle_angles", include_str!("../fixtures/triangle_angles.geo")),
    ("midpoint_parallel", include_str!("../fixtures/midpoint_parallel.geo")),
    ("inscribed_triangle", include_str!("../fixtures/inscribed_triangle.geo")),
    ("perpendicular_foot", include_str!("../fixtures/perpendicular_foot.geo")),
    ("chord", include_str!("../fixtures/chord.geo")),
    ("sector_arc", include_str!("../fixtures/sector_arc.geo")),
    ("tangent", include_str!("../fixtures/tangent.geo")),
    ("point_in_shape", include_str!("../fixtures/point_in_shape.geo")),
    ("length_sum", include_str!("../fixtures/length_sum.geo")),
    ("angle_ratio", include_str!("../fixtures/angle_ratio.geo")),
    ("trig_constraint", include_str!("../fixtures/trig_constraint.geo")),
    ("rectangle_ratio", include_str!("../fixtures/rectangle_ratio.geo")),
    ("rhombus_angle", include_str!("../fixtures/rhombus_angle.geo")),
    ("parallelogram_diagonals", include_str!("../fixtures/parallelogram_diagonals.geo")),
    ("extension", include_str!("../fixtures/extension.geo")),
    ("incircle", include_str!("../fixtures/incircle.geo")),
    ("cyclic_quad", include_str!("../fixtures/cyclic_quad.geo")),
];
