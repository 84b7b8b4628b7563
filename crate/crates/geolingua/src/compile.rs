//! Lowering of validated programs into scenes.
//!
//! Shape statements with metric regularity compile to minimal free
//! parameterizations plus derived corners instead of implicit constraints:
//! a square is two anchor points, a rectangle two anchors and a height
//! scalar, a rhombus two anchors and an interior-angle scalar, a
//! parallelogram three free corners. Relational statements compile to
//! scalar constraints; `ConnectPoints` adds a drawable segment only.
//!
//! Compilation runs in two passes over the statements: the first collects
//! point introductions (sharing [`statement_roles`] with the validator so
//! declaration semantics cannot diverge), the second builds resolvers,
//! circles, segments and constraints. Dependent points are then ordered
//! topologically; cycles are reported with the offending point names.

use crate::ast::*;
use crate::scene::*;
use crate::validate::statement_roles;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum CompileError {
    #[error("{origin}: unsupported construction: {message}")]
    UnsupportedConstruction { origin: Origin, message: String },
    #[error("cyclic dependence between points {}", points.join(", "))]
    CyclicDependency { points: Vec<String> },
    #[error("{origin}: {what} is already defined")]
    DuplicateDefinition { origin: Origin, what: String },
    #[error("{origin}: no circle is centered at {center}")]
    NoSuchCircle { origin: Origin, center: String },
    #[error("{origin}: undeclared point {point}")]
    Undeclared { origin: Origin, point: String },
}

#[derive(Debug, Clone)]
enum Def {
    /// Declared but not yet given a definition (pass 1 placeholder).
    Pending,
    Free { hint: InitHint },
    Dependent { resolver: Resolver, origin: Origin },
}

struct Builder {
    names: Vec<PointName>,
    ids: BTreeMap<PointName, PointId>,
    defs: Vec<Def>,
    /// Scalar parameters, in creation order; these occupy the head of the
    /// final parameter list so resolver references stay stable.
    scalars: Vec<FreeParam>,
    circles: Vec<Circle>,
    circle_of_center: BTreeMap<PointId, CircleId>,
    on_circle: Vec<(CircleId, PointId)>,
    arcs: Vec<ArcSpec>,
    segments: Vec<Seg>,
    seg_keys: BTreeSet<(PointId, PointId)>,
    constraints: Vec<Constraint>,
    dependent_order: Vec<PointId>,
}

impl Builder {
    fn new() -> Builder {
        Builder {
            names: Vec::new(),
            ids: BTreeMap::new(),
            defs: Vec::new(),
            scalars: Vec::new(),
            circles: Vec::new(),
            circle_of_center: BTreeMap::new(),
            on_circle: Vec::new(),
            arcs: Vec::new(),
            segments: Vec::new(),
            seg_keys: BTreeSet::new(),
            constraints: Vec::new(),
            dependent_order: Vec::new(),
        }
    }

    fn declare(&mut self, name: PointName) -> PointId {
        *self.ids.entry(name).or_insert_with(|| {
            self.names.push(name);
            self.defs.push(Def::Pending);
            self.names.len() - 1
        })
    }

    fn id(&self, name: PointName, origin: Origin) -> Result<PointId, CompileError> {
        self.ids.get(&name).copied().ok_or(CompileError::Undeclared {
            origin,
            point: name.to_string(),
        })
    }

    fn scalar(&mut self, name: String, role: ScalarRole) -> ScalarSource {
        let (lo, hi) = role.range();
        self.scalars.push(FreeParam {
            name,
            kind: ParamKind::Scalar { role, lo, hi },
            hint: InitHint::None,
        });
        ScalarSource::Param(self.scalars.len() - 1)
    }

    fn fixed_scalar(&mut self, name: String, role: ScalarRole, value: f64) -> ScalarSource {
        self.scalars.push(FreeParam {
            name,
            kind: ParamKind::Scalar { role, lo: value, hi: value },
            hint: InitHint::None,
        });
        ScalarSource::Param(self.scalars.len() - 1)
    }

    /// Give a pending point a free definition; leave existing definitions.
    fn define_free(&mut self, id: PointId, hint: InitHint) {
        if matches!(self.defs[id], Def::Pending) {
            self.defs[id] = Def::Free { hint };
        }
    }

    fn define_dependent(
        &mut self,
        id: PointId,
        resolver: Resolver,
        origin: Origin,
    ) -> Result<(), CompileError> {
        match self.defs[id] {
            Def::Pending => {
                self.defs[id] = Def::Dependent { resolver, origin };
                self.dependent_order.push(id);
                Ok(())
            }
            _ => Err(CompileError::DuplicateDefinition {
                origin,
                what: format!("point {}", self.names[id]),
            }),
        }
    }

    /// Put an existing or new point onto a circle. A point previously
    /// defined as free is upgraded to an on-circle dependent (covers
    /// redundant forms like `Polygon(ABC)` followed by
    /// `InscribedPolygon(O,ABC)`); a point that already has a constructive
    /// definition is a duplicate.
    fn place_on_circle(
        &mut self,
        id: PointId,
        circle: CircleId,
        angle: AngleSource,
        origin: Origin,
    ) -> Result<(), CompileError> {
        match self.defs[id] {
            Def::Pending | Def::Free { .. } => {
                self.defs[id] = Def::Dependent {
                    resolver: Resolver::OnCircle { circle, angle },
                    origin,
                };
                self.dependent_order.push(id);
                self.on_circle.push((circle, id));
                Ok(())
            }
            Def::Dependent { .. } => Err(CompileError::DuplicateDefinition {
                origin,
                what: format!("point {}", self.names[id]),
            }),
        }
    }

    fn add_segment(&mut self, a: PointId, b: PointId) {
        let key = (a.min(b), a.max(b));
        if a != b && self.seg_keys.insert(key) {
            self.segments.push(Seg(a, b));
        }
    }

    /// Circle centered at `center`, creating one with a free radius when none
    /// exists. `fixed_radius` comes from an explicit `Circle` statement.
    fn ensure_circle(
        &mut self,
        center: PointId,
        fixed_radius: Option<f64>,
        draw: bool,
        origin: Origin,
    ) -> Result<CircleId, CompileError> {
        if let Some(&existing) = self.circle_of_center.get(&center) {
            if fixed_radius.is_some() {
                return Err(CompileError::DuplicateDefinition {
                    origin,
                    what: format!("circle centered at {}", self.names[center]),
                });
            }
            if draw {
                self.circles[existing].draw = true;
            }
            return Ok(existing);
        }
        let name = format!("r:{}", self.names[center]);
        let radius = match fixed_radius {
            Some(v) => self.fixed_scalar(name, ScalarRole::Radius, v),
            None => self.scalar(name, ScalarRole::Radius),
        };
        let ScalarSource::Param(param) = radius else { unreachable!() };
        self.circles.push(Circle {
            center,
            radius: RadiusSource::Param(param),
            draw,
        });
        let id = self.circles.len() - 1;
        self.circle_of_center.insert(center, id);
        Ok(id)
    }

    /// Circle on which both endpoints of an arc name lie.
    fn circle_of_arc(&self, a: PointId, b: PointId) -> Option<CircleId> {
        (0..self.circles.len()).find(|&c| {
            self.on_circle.contains(&(c, a)) && self.on_circle.contains(&(c, b))
        })
    }

    fn seg(&self, e: &EntityName, origin: Origin) -> Result<Seg, CompileError> {
        Ok(Seg(self.id(e.0[0], origin)?, self.id(e.0[1], origin)?))
    }

    fn ang(&self, e: &EntityName, origin: Origin) -> Result<Ang, CompileError> {
        Ok(Ang(
            self.id(e.0[0], origin)?,
            self.id(e.0[1], origin)?,
            self.id(e.0[2], origin)?,
        ))
    }
}

fn rel_op(rel: Relation) -> RelOp {
    match rel {
        Relation::Eq => RelOp::Eq,
        Relation::Gt => RelOp::Gt,
        Relation::Ge => RelOp::Ge,
        Relation::Lt => RelOp::Lt,
        Relation::Le => RelOp::Le,
    }
}

/// Ring placement angles for the vertices of an `n`-gon, counterclockwise
/// starting from the top.
fn ring_angle(i: usize, n: usize) -> f64 {
    90.0 + 360.0 * i as f64 / n as f64
}

/// Compile a validated program into a scene.
pub fn compile(program: &FormalProgram) -> Result<Scene, CompileError> {
    let mut b = Builder::new();

    // Pass 1: declare every introduced point, in statement order. The
    // introduction logic is shared with the validator.
    let mut known: BTreeSet<PointName> = BTreeSet::new();
    let mut intros_per_stmt: Vec<(Origin, Vec<PointName>)> = Vec::new();
    for (origin, stmt) in program.statements() {
        let (intro, _) = statement_roles(stmt, &known);
        for &p in &intro {
            if known.contains(&p) {
                return Err(CompileError::DuplicateDefinition {
                    origin,
                    what: format!("point {p}"),
                });
            }
            known.insert(p);
            b.declare(p);
        }
        intros_per_stmt.push((origin, intro));
    }

    // Pass 2: build definitions, circles, segments and constraints.
    for ((origin, stmt), (_, intros)) in program.statements().zip(&intros_per_stmt) {
        compile_statement(&mut b, origin, stmt, intros)?;
    }

    // Any point still pending was introduced but never defined; treat it as
    // free (can only happen for programmatically built programs).
    for id in 0..b.defs.len() {
        b.define_free(id, InitHint::None);
    }

    finalize(b)
}

fn compile_statement(
    b: &mut Builder,
    origin: Origin,
    stmt: &Statement,
    intros: &[PointName],
) -> Result<(), CompileError> {
    let entity = |i: usize| -> &EntityName {
        match &stmt.args[i] {
            Argument::Entity(e) => e,
            _ => unreachable!("argument kinds are checked before compilation"),
        }
    };
    let point = |i: usize| -> PointName {
        match &stmt.args[i] {
            Argument::Point(p) => *p,
            _ => unreachable!("argument kinds are checked before compilation"),
        }
    };
    let number = |i: usize| -> f64 {
        match &stmt.args[i] {
            Argument::Number(n) => *n,
            _ => unreachable!("argument kinds are checked before compilation"),
        }
    };
    let ratio = |i: usize| -> (f64, f64) {
        match &stmt.args[i] {
            Argument::Ratio(a, b) => (*a, *b),
            _ => unreachable!("argument kinds are checked before compilation"),
        }
    };

    match stmt.head {
        // -- shapes ----------------------------------------------------
        Head::Circle => {
            let center = b.id(point(0), origin)?;
            b.define_free(center, InitHint::Center);
            b.ensure_circle(center, Some(number(1)), true, origin)?;
        }
        Head::Polygon => {
            let pts: Vec<PointId> = entity(0)
                .points()
                .iter()
                .map(|&p| b.id(p, origin))
                .collect::<Result<_, _>>()?;
            let n = pts.len();
            for (i, &id) in pts.iter().enumerate() {
                b.define_free(id, InitHint::Ring(ring_angle(i, n)));
            }
            for i in 0..n {
                b.add_segment(pts[i], pts[(i + 1) % n]);
            }
        }
        Head::Square | Head::Rectangle | Head::Rhombus => {
            let pts: Vec<PointId> = entity(0)
                .points()
                .iter()
                .map(|&p| b.id(p, origin))
                .collect::<Result<_, _>>()?;
            let (a, bb, c, d) = (pts[0], pts[1], pts[2], pts[3]);
            b.define_free(a, InitHint::Ring(ring_angle(0, 4)));
            b.define_free(bb, InitHint::Ring(ring_angle(1, 4)));
            let (rc, rd) = match stmt.head {
                Head::Square => (
                    Resolver::SquareCorner { a, b: bb, opposite_of: SquareSide::B },
                    Resolver::SquareCorner { a, b: bb, opposite_of: SquareSide::A },
                ),
                Head::Rectangle => {
                    let h = b.scalar(format!("h:{}", entity(0)), ScalarRole::Height);
                    (
                        Resolver::RectCorner { a, b: bb, h, opposite_of: SquareSide::B },
                        Resolver::RectCorner { a, b: bb, h, opposite_of: SquareSide::A },
                    )
                }
                _ => {
                    let phi = b.scalar(format!("phi:{}", entity(0)), ScalarRole::ShapeAngle);
                    (
                        Resolver::RhombusCorner { a, b: bb, phi, opposite_of: SquareSide::B },
                        Resolver::RhombusCorner { a, b: bb, phi, opposite_of: SquareSide::A },
                    )
                }
            };
            b.define_dependent(c, rc, origin)?;
            b.define_dependent(d, rd, origin)?;
            for i in 0..4 {
                b.add_segment(pts[i], pts[(i + 1) % 4]);
            }
        }
        Head::Parallelogram => {
            let pts: Vec<PointId> = entity(0)
                .points()
                .iter()
                .map(|&p| b.id(p, origin))
                .collect::<Result<_, _>>()?;
            let (a, bb, c, d) = (pts[0], pts[1], pts[2], pts[3]);
            b.define_free(a, InitHint::Ring(ring_angle(0, 4)));
            b.define_free(bb, InitHint::Ring(ring_angle(1, 4)));
            b.define_free(d, InitHint::Ring(ring_angle(3, 4)));
            b.define_dependent(c, Resolver::ParallelogramCorner { a, b: bb, d }, origin)?;
            for i in 0..4 {
                b.add_segment(pts[i], pts[(i + 1) % 4]);
            }
        }
        Head::Sector => {
            // Sector named like an angle: vertex (middle letter) is the
            // center, outer letters are the arc endpoints.
            let name = entity(0);
            let sweep = number(1);
            let radius = number(2);
            let first = b.id(name.0[0], origin)?;
            let center = b.id(name.0[1], origin)?;
            let second = b.id(name.0[2], origin)?;
            b.define_free(center, InitHint::Center);
            let circle = b.ensure_circle(center, Some(radius), false, origin)?;
            let theta = b.scalar(format!("theta:{name}"), ScalarRole::CircleAngle);
            let ScalarSource::Param(theta) = theta else { unreachable!() };
            b.place_on_circle(first, circle, AngleSource::Param(theta), origin)?;
            b.place_on_circle(second, circle, AngleSource::ParamPlus(theta, sweep), origin)?;
            b.add_segment(center, first);
            b.add_segment(center, second);
            b.arcs.push(ArcSpec {
                circle,
                start: AngleSource::Param(theta),
                sweep_deg: sweep,
            });
        }
        Head::StringOfCircle => {
            let center = b.id(point(0), origin)?;
            b.define_free(center, InitHint::Center);
            let circle = b.ensure_circle(center, None, true, origin)?;
            let ends: Vec<PointId> = entity(1)
                .points()
                .iter()
                .map(|&p| b.id(p, origin))
                .collect::<Result<_, _>>()?;
            for (&id, p) in ends.iter().zip(entity(1).points()) {
                let theta = b.scalar(format!("theta:{p}"), ScalarRole::CircleAngle);
                let ScalarSource::Param(theta) = theta else { unreachable!() };
                b.place_on_circle(id, circle, AngleSource::Param(theta), origin)?;
            }
            b.add_segment(ends[0], ends[1]);
        }
        Head::InscribedPolygon => {
            let center = b.id(point(0), origin)?;
            b.define_free(center, InitHint::Center);
            let circle = b.ensure_circle(center, None, true, origin)?;
            let pts: Vec<PointId> = entity(1)
                .points()
                .iter()
                .map(|&p| b.id(p, origin))
                .collect::<Result<_, _>>()?;
            for (&id, p) in pts.iter().zip(entity(1).points()) {
                let theta = b.scalar(format!("theta:{p}"), ScalarRole::CircleAngle);
                let ScalarSource::Param(theta) = theta else { unreachable!() };
                b.place_on_circle(id, circle, AngleSource::Param(theta), origin)?;
            }
            let n = pts.len();
            for i in 0..n {
                b.add_segment(pts[i], pts[(i + 1) % n]);
            }
        }
        Head::CircumscribedPolygon => {
            let polygon = entity(1);
            if polygon.len() != 3 {
                return Err(CompileError::UnsupportedConstruction {
                    origin,
                    message: format!(
                        "inscribed circles are only supported for triangles, {polygon} has {} vertices",
                        polygon.len()
                    ),
                });
            }
            let pts: Vec<PointId> = polygon
                .points()
                .iter()
                .map(|&p| b.id(p, origin))
                .collect::<Result<_, _>>()?;
            for (i, &id) in pts.iter().enumerate() {
                b.define_free(id, InitHint::Ring(ring_angle(i, 3)));
            }
            let center = b.id(point(0), origin)?;
            let (a, bb, c) = (pts[0], pts[1], pts[2]);
            b.define_dependent(center, Resolver::Incenter { a, b: bb, c }, origin)?;
            b.circles.push(Circle {
                center,
                radius: RadiusSource::Incircle { a, b: bb, c },
                draw: true,
            });
            b.circle_of_center.insert(center, b.circles.len() - 1);
            for i in 0..3 {
                b.add_segment(pts[i], pts[(i + 1) % 3]);
            }
        }

        // -- dependence ------------------------------------------------
        Head::PointAtLine => {
            let target = b.id(point(0), origin)?;
            let host = b.seg(entity(1), origin)?;
            let r = number(2);
            let t = if r == 0.0 {
                b.scalar(format!("t:{}", point(0)), ScalarRole::LineParam)
            } else {
                ScalarSource::Const(r)
            };
            b.define_dependent(target, Resolver::OnLine { a: host.0, b: host.1, t }, origin)?;
            b.add_segment(host.0, host.1);
        }
        Head::LineIntersect => {
            let s1 = b.seg(entity(0), origin)?;
            let s2 = b.seg(entity(1), origin)?;
            let target = b.id(point(2), origin)?;
            b.define_dependent(
                target,
                Resolver::Intersection { a: s1.0, b: s1.1, c: s2.0, d: s2.1 },
                origin,
            )?;
            b.add_segment(s1.0, s1.1);
            b.add_segment(s2.0, s2.1);
        }
        Head::PointAtArc => {
            let target = b.id(point(0), origin)?;
            match &stmt.args[1] {
                Argument::Point(center) => {
                    let center = b.id(*center, origin)?;
                    let circle = b
                        .circle_of_center
                        .get(&center)
                        .copied()
                        .ok_or_else(|| CompileError::NoSuchCircle {
                            origin,
                            center: b.names[center].to_string(),
                        })?;
                    let theta = b.scalar(format!("theta:{}", point(0)), ScalarRole::CircleAngle);
                    let ScalarSource::Param(theta) = theta else { unreachable!() };
                    b.place_on_circle(target, circle, AngleSource::Param(theta), origin)?;
                }
                Argument::Entity(arc) => {
                    let from = b.id(arc.0[0], origin)?;
                    let to = b.id(arc.0[1], origin)?;
                    let circle = b.circle_of_arc(from, to).ok_or_else(|| {
                        CompileError::UnsupportedConstruction {
                            origin,
                            message: format!("arc {arc} does not lie on a known circle"),
                        }
                    })?;
                    let major = matches!(stmt.args[2], Argument::Arc(ArcType::Major));
                    let t = b.scalar(format!("s:{}", point(0)), ScalarRole::ArcParam);
                    b.define_dependent(
                        target,
                        Resolver::OnArc { circle, from, to, t, major },
                        origin,
                    )?;
                    b.on_circle.push((circle, target));
                }
                _ => unreachable!("argument kinds are checked before compilation"),
            }
        }
        Head::ExtensionLine => {
            let host = b.seg(entity(0), origin)?;
            let target = b.id(point(1), origin)?;
            let t = b.scalar(format!("t:{}", point(1)), ScalarRole::ExtensionParam);
            b.define_dependent(target, Resolver::OnLine { a: host.0, b: host.1, t }, origin)?;
            b.add_segment(host.0, host.1);
            b.add_segment(host.1, target);
        }
        Head::Tangent => {
            let center = b.id(point(0), origin)?;
            let circle = b
                .circle_of_center
                .get(&center)
                .copied()
                .ok_or_else(|| CompileError::NoSuchCircle {
                    origin,
                    center: b.names[center].to_string(),
                })?;
            let tangency = b.id(point(1), origin)?;
            let end = b.id(point(2), origin)?;
            let t_new = intros.contains(&point(1));
            let p_new = intros.contains(&point(2));
            match (t_new, p_new) {
                (true, true) => {
                    // Neither end is known: put the tangency point on the
                    // circle and hang the tangent end off it.
                    let theta = b.scalar(format!("theta:{}", point(1)), ScalarRole::CircleAngle);
                    let ScalarSource::Param(theta) = theta else { unreachable!() };
                    b.place_on_circle(tangency, circle, AngleSource::Param(theta), origin)?;
                    let len = b.scalar(format!("s:{}", point(2)), ScalarRole::TangentLength);
                    b.define_dependent(
                        end,
                        Resolver::TangentEnd { circle, tangency, len },
                        origin,
                    )?;
                }
                (false, true) => {
                    let len = b.scalar(format!("s:{}", point(2)), ScalarRole::TangentLength);
                    b.define_dependent(
                        end,
                        Resolver::TangentEnd { circle, tangency, len },
                        origin,
                    )?;
                }
                (true, false) => {
                    // Tangent drawn from a known external point; the
                    // tangency point is derived.
                    b.define_dependent(
                        tangency,
                        Resolver::TangentPoint { circle, external: end },
                        origin,
                    )?;
                    b.on_circle.push((circle, tangency));
                }
                (false, false) => {
                    return Err(CompileError::DuplicateDefinition {
                        origin,
                        what: format!("point {}", point(2)),
                    });
                }
            }
            b.add_segment(tangency, end);
        }
        Head::DoPerpendicular => {
            let from = b.id(point(0), origin)?;
            let host = b.seg(entity(1), origin)?;
            let foot = b.id(point(2), origin)?;
            b.define_dependent(
                foot,
                Resolver::PerpendicularFoot { p: from, a: host.0, b: host.1 },
                origin,
            )?;
            b.add_segment(host.0, host.1);
            b.add_segment(from, foot);
        }
        Head::PointInShape => {
            let target = b.id(point(0), origin)?;
            b.define_free(target, InitHint::None);
            let polygon: Vec<PointId> = entity(1)
                .points()
                .iter()
                .map(|&p| b.id(p, origin))
                .collect::<Result<_, _>>()?;
            b.constraints.push(Constraint {
                kind: ConstraintKind::Containment { p: target, polygon },
                origin,
                label: stmt.to_string(),
            });
        }

        // -- length constraints -----------------------------------------
        Head::Length => {
            let seg = b.seg(entity(0), origin)?;
            b.constraints.push(Constraint {
                kind: ConstraintKind::LengthValue { seg, target: number(1) },
                origin,
                label: stmt.to_string(),
            });
        }
        Head::LengthRatio => {
            let s1 = b.seg(entity(0), origin)?;
            let s2 = b.seg(entity(1), origin)?;
            let (p, q) = ratio(2);
            b.constraints.push(Constraint {
                kind: ConstraintKind::LengthRatio { a: s1, b: s2, target_num: p, target_den: q },
                origin,
                label: stmt.to_string(),
            });
        }
        Head::ArcRatio => {
            let arc1 = entity(0);
            let arc2 = entity(1);
            let (a1, b1) = (b.id(arc1.0[0], origin)?, b.id(arc1.0[1], origin)?);
            let (a2, b2) = (b.id(arc2.0[0], origin)?, b.id(arc2.0[1], origin)?);
            let c1 = b.circle_of_arc(a1, b1).ok_or_else(|| {
                CompileError::UnsupportedConstruction {
                    origin,
                    message: format!("arc {arc1} does not lie on a known circle"),
                }
            })?;
            let c2 = b.circle_of_arc(a2, b2).ok_or_else(|| {
                CompileError::UnsupportedConstruction {
                    origin,
                    message: format!("arc {arc2} does not lie on a known circle"),
                }
            })?;
            let (p, q) = ratio(2);
            b.constraints.push(Constraint {
                kind: ConstraintKind::CentralAngleRatio {
                    a: Ang(a1, b.circles[c1].center, b1),
                    b: Ang(a2, b.circles[c2].center, b2),
                    target_num: p,
                    target_den: q,
                },
                origin,
                label: stmt.to_string(),
            });
        }
        Head::LengthAddandSub => {
            let left = len_sum(b, &stmt.args[0], origin)?;
            let right = len_sum(b, &stmt.args[2], origin)?;
            let Argument::Relation(rel) = stmt.args[1] else { unreachable!() };
            b.constraints.push(Constraint {
                kind: ConstraintKind::LengthRelation { left, rel: rel_op(rel), right },
                origin,
                label: stmt.to_string(),
            });
        }
        Head::PointLineDistance => {
            let p = b.id(point(0), origin)?;
            let line = b.seg(entity(1), origin)?;
            b.constraints.push(Constraint {
                kind: ConstraintKind::PointLineDistance { p, line, target: number(2) },
                origin,
                label: stmt.to_string(),
            });
        }
        Head::ConnectPoints => {
            let seg = b.seg(entity(0), origin)?;
            b.add_segment(seg.0, seg.1);
        }

        // -- angle constraints -------------------------------------------
        Head::Parallel => {
            let s1 = b.seg(entity(0), origin)?;
            let s2 = b.seg(entity(1), origin)?;
            b.constraints.push(Constraint {
                kind: ConstraintKind::Parallel { a: s1, b: s2 },
                origin,
                label: stmt.to_string(),
            });
        }
        Head::Perpendicular => {
            let s1 = b.seg(entity(0), origin)?;
            let s2 = b.seg(entity(1), origin)?;
            b.constraints.push(Constraint {
                kind: ConstraintKind::Perpendicular { a: s1, b: s2 },
                origin,
                label: stmt.to_string(),
            });
        }
        Head::Angle => {
            let ang = b.ang(entity(0), origin)?;
            b.constraints.push(Constraint {
                kind: ConstraintKind::AngleValue { ang, target_deg: number(1) },
                origin,
                label: stmt.to_string(),
            });
        }
        Head::TriFunction => {
            let Argument::Trig(f) = stmt.args[0] else { unreachable!() };
            let v = number(2);
            let target_deg = match f {
                TrigFn::Sin if v > 0.0 && v <= 1.0 => v.asin().to_degrees(),
                TrigFn::Cos if v > -1.0 && v < 1.0 => v.acos().to_degrees(),
                TrigFn::Tan if v > 0.0 => v.atan().to_degrees(),
                _ => {
                    return Err(CompileError::UnsupportedConstruction {
                        origin,
                        message: format!("{f} value {v} has no angle in the supported range"),
                    })
                }
            };
            let ang = b.ang(entity(1), origin)?;
            b.constraints.push(Constraint {
                kind: ConstraintKind::AngleValue { ang, target_deg },
                origin,
                label: stmt.to_string(),
            });
        }
        Head::AngleRatio => {
            let a1 = b.ang(entity(0), origin)?;
            let a2 = b.ang(entity(1), origin)?;
            let (p, q) = ratio(2);
            b.constraints.push(Constraint {
                kind: ConstraintKind::AngleRatio { a: a1, b: a2, target_num: p, target_den: q },
                origin,
                label: stmt.to_string(),
            });
        }
        Head::AngleAddandSub => {
            let left = ang_sum(b, &stmt.args[0], origin)?;
            let right = ang_sum(b, &stmt.args[2], origin)?;
            let Argument::Relation(rel) = stmt.args[1] else { unreachable!() };
            b.constraints.push(Constraint {
                kind: ConstraintKind::AngleRelation { left, rel: rel_op(rel), right },
                origin,
                label: stmt.to_string(),
            });
        }
    }
    Ok(())
}

fn len_sum(
    b: &Builder,
    arg: &Argument,
    origin: Origin,
) -> Result<Vec<(f64, LenTerm)>, CompileError> {
    let Argument::Expr(expr) = arg else { unreachable!() };
    expr.terms
        .iter()
        .map(|(sign, op)| {
            Ok((
                *sign,
                match op {
                    Operand::Entity(e) => LenTerm::Seg(b.seg(e, origin)?),
                    Operand::Number(n) => LenTerm::Const(*n),
                },
            ))
        })
        .collect()
}

fn ang_sum(
    b: &Builder,
    arg: &Argument,
    origin: Origin,
) -> Result<Vec<(f64, AngTerm)>, CompileError> {
    let Argument::Expr(expr) = arg else { unreachable!() };
    expr.terms
        .iter()
        .map(|(sign, op)| {
            Ok((
                *sign,
                match op {
                    Operand::Entity(e) => AngTerm::Ang(b.ang(e, origin)?),
                    Operand::Number(n) => AngTerm::Const(*n),
                },
            ))
        })
        .collect()
}

fn finalize(b: Builder) -> Result<Scene, CompileError> {
    // Topologically order the dependent points (creation order breaks ties).
    let mut dependents: Vec<DependentPoint> = Vec::new();
    for &id in &b.dependent_order {
        if let Def::Dependent { resolver, origin } = &b.defs[id] {
            dependents.push(DependentPoint {
                point: id,
                resolver: resolver.clone(),
                origin: *origin,
            });
        }
    }
    let is_dependent: BTreeMap<PointId, usize> = dependents
        .iter()
        .enumerate()
        .map(|(i, d)| (d.point, i))
        .collect();
    let n = dependents.len();
    let mut indegree = vec![0usize; n];
    let mut out_edges: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, dep) in dependents.iter().enumerate() {
        for input in dep.resolver.inputs(&b.circles) {
            if let Some(&j) = is_dependent.get(&input) {
                if j != i {
                    out_edges[j].push(i);
                    indegree[i] += 1;
                }
            }
        }
    }
    let mut ready: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(&i) = ready.first() {
        ready.remove(0);
        order.push(i);
        for &j in &out_edges[i] {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                let pos = ready.partition_point(|&k| k < j);
                ready.insert(pos, j);
            }
        }
    }
    if order.len() != n {
        let points = (0..n)
            .filter(|i| !order.contains(i))
            .map(|i| b.names[dependents[i].point].to_string())
            .collect();
        return Err(CompileError::CyclicDependency { points });
    }
    let dependents: Vec<DependentPoint> = order.into_iter().map(|i| dependents[i].clone()).collect();

    // Parameter list: scalars (creation order) then free points (id order).
    let mut params = b.scalars;
    let mut free_of_point = vec![None; b.names.len()];
    for (id, def) in b.defs.iter().enumerate() {
        if let Def::Free { hint } = def {
            params.push(FreeParam {
                name: b.names[id].to_string(),
                kind: ParamKind::Point { point: id },
                hint: *hint,
            });
            free_of_point[id] = Some(params.len() - 1);
        }
    }
    let mut slot_offsets = Vec::with_capacity(params.len());
    let mut n_slots = 0;
    for p in &params {
        slot_offsets.push(n_slots);
        n_slots += p.slots();
    }

    Ok(Scene {
        point_names: b.names.iter().map(|p| p.to_string()).collect(),
        labels: vec![true; b.names.len()],
        params,
        slot_offsets,
        n_slots,
        free_of_point,
        dependents,
        circles: b.circles,
        arcs: b.arcs,
        constraints: b.constraints,
        segments: b.segments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_text;
    use crate::geometry::Point;
    use crate::scene::resolve_dependents;

    fn compiled(src: &str) -> Scene {
        let program = parse_text(src).unwrap();
        let report = crate::validate::validate(&program);
        assert!(report.ok(), "{src}: {:?}", report.diagnostics);
        compile(&program).unwrap()
    }

    fn free_point_names(scene: &Scene) -> Vec<String> {
        scene
            .params
            .iter()
            .filter(|p| matches!(p.kind, ParamKind::Point { .. }))
            .map(|p| p.name.clone())
            .collect()
    }

    #[test]
    fn polygon_with_midpoint() {
        let scene = compiled("shapes:\nPolygon(ABC)\ndependence:\nPointAtLine(D,BC,0.5)");
        assert_eq!(free_point_names(&scene), vec!["A", "B", "C"]);
        assert_eq!(scene.dependents.len(), 1);
        let dep = &scene.dependents[0];
        assert_eq!(scene.point_names[dep.point], "D");
        assert!(matches!(
            dep.resolver,
            Resolver::OnLine { t: ScalarSource::Const(r), .. } if r == 0.5
        ));
        // Triangle sides; BC is already among them.
        assert_eq!(scene.segments.len(), 3);
    }

    #[test]
    fn midpoint_resolves_numerically() {
        let scene = compiled("shapes:\nPolygon(ABC)\ndependence:\nPointAtLine(D,BC,0.5)");
        let assignment = Assignment {
            values: scene
                .params
                .iter()
                .flat_map(|p| match p.name.as_str() {
                    "A" => vec![1.0, 7.0],
                    "B" => vec![0.0, 0.0],
                    "C" => vec![4.0, 0.0],
                    _ => vec![0.0; p.slots()],
                })
                .collect(),
        };
        let (coords, degenerate) = resolve_dependents(&scene, &assignment);
        assert!(!degenerate.iter().any(|&d| d));
        let d = coords[scene.point_id("D").unwrap()];
        assert!((d.x - 2.0).abs() < 1e-12 && d.y.abs() < 1e-12);
    }

    #[test]
    fn square_is_two_free_points_and_two_corners() {
        let scene = compiled("shapes:\nSquare(ABCD)");
        assert_eq!(free_point_names(&scene), vec!["A", "B"]);
        assert_eq!(scene.dependents.len(), 2);
        assert_eq!(scene.segments.len(), 4);
        assert!(scene.constraints.is_empty());
    }

    #[test]
    fn circle_with_point_on_it() {
        let scene = compiled("shapes:\nCircle(O,5)\ndependence:\nPointAtArc(P,O,0)");
        assert_eq!(free_point_names(&scene), vec!["O"]);
        // Fixed radius scalar plus the free angle scalar.
        let radius = scene
            .params
            .iter()
            .find(|p| p.name == "r:O")
            .expect("radius param");
        assert!(matches!(
            radius.kind,
            ParamKind::Scalar { role: ScalarRole::Radius, lo, hi } if lo == 5.0 && hi == 5.0
        ));
        let theta = scene
            .params
            .iter()
            .find(|p| p.name == "theta:P")
            .expect("angle param");
        assert!(matches!(
            theta.kind,
            ParamKind::Scalar { role: ScalarRole::CircleAngle, lo, hi } if lo == 0.0 && hi == 360.0
        ));
        assert_eq!(scene.dependents.len(), 1);
    }

    #[test]
    fn circumscribed_polygon_requires_triangle() {
        let program =
            parse_text("shapes:\nPolygon(ABCD)\nCircumscribedPolygon(O,ABCD)").unwrap();
        let err = compile(&program).unwrap_err();
        assert!(matches!(err, CompileError::UnsupportedConstruction { .. }), "{err}");
    }

    #[test]
    fn cyclic_dependence_is_reported() {
        let program = parse_text(
            "shapes:\nPolygon(ABC)\ndependence:\nLineIntersect(AD,BC,E)\nLineIntersect(AE,BC,D)",
        )
        .unwrap();
        let err = compile(&program).unwrap_err();
        let CompileError::CyclicDependency { points } = err else {
            panic!("{err}");
        };
        assert!(points.contains(&"D".to_string()) && points.contains(&"E".to_string()));
    }

    #[test]
    fn inscribed_polygon_upgrades_existing_vertices() {
        let scene = compiled("shapes:\nPolygon(ABC)\nInscribedPolygon(O,ABC)");
        // All three vertices became on-circle dependents; only O and the
        // scalars stay free.
        assert_eq!(free_point_names(&scene), vec!["O"]);
        assert_eq!(scene.dependents.len(), 3);
        assert!(scene.circles[0].draw);
    }

    #[test]
    fn template_corner_positions() {
        let scene = compiled("shapes:\nSquare(ABCD)");
        let assignment = Assignment {
            values: scene
                .params
                .iter()
                .flat_map(|p| match p.name.as_str() {
                    "A" => vec![0.0, 0.0],
                    "B" => vec![4.0, 0.0],
                    _ => vec![0.0; p.slots()],
                })
                .collect(),
        };
        let (coords, degenerate) = resolve_dependents(&scene, &assignment);
        assert!(!degenerate.iter().any(|&d| d));
        let c = coords[scene.point_id("C").unwrap()];
        let d = coords[scene.point_id("D").unwrap()];
        assert!((c.x - 4.0).abs() < 1e-12 && (c.y - 4.0).abs() < 1e-12);
        assert!((d.x - 0.0).abs() < 1e-12 && (d.y - 4.0).abs() < 1e-12);
    }

    #[test]
    fn chord_upgrades_existing_endpoints() {
        let scene = compiled("shapes:\nPolygon(PAB)\nStringOfCircle(O,AB)");
        assert_eq!(free_point_names(&scene), vec!["P", "O"]);
        assert_eq!(scene.dependents.len(), 2);
        // Chord drawn plus the triangle sides.
        assert_eq!(scene.segments.len(), 3);
    }

    #[test]
    fn tangent_with_both_ends_defined_is_rejected() {
        let program =
            parse_text("shapes:\nCircle(O,3)\nPolygon(TPQ)\ndependence:\nTangent(O,T,P)").unwrap();
        assert!(!crate::validate::validate(&program).ok());
        assert!(matches!(
            compile(&program).unwrap_err(),
            CompileError::DuplicateDefinition { .. }
        ));
    }

    #[test]
    fn tangent_from_external_point() {
        // P is declared first (inside a polygon shape), so the tangency
        // point T is derived from it.
        let scene = compiled(
            "shapes:\nCircle(O,3)\nPolygon(PQR)\ndependence:\nTangent(O,T,P)",
        );
        let dep = scene
            .dependents
            .iter()
            .find(|d| scene.point_names[d.point] == "T")
            .expect("T resolver");
        assert!(matches!(dep.resolver, Resolver::TangentPoint { .. }));
    }

    #[test]
    fn arc_points_resolve_on_the_requested_side() {
        for (arc_type, expected_sign) in [("minor", 1.0), ("major", -1.0)] {
            let scene = compiled(&format!(
                "shapes:\nCircle(O,5)\nStringOfCircle(O,AB)\ndependence:\nPointAtArc(P,AB,{arc_type})"
            ));
            let assignment = Assignment {
                values: scene
                    .params
                    .iter()
                    .flat_map(|p| match p.name.as_str() {
                        "O" => vec![0.0, 0.0],
                        "r:O" => vec![5.0],
                        "theta:A" => vec![0.0],
                        "theta:B" => vec![90.0],
                        "s:P" => vec![0.5],
                        _ => vec![0.0; p.slots()],
                    })
                    .collect(),
            };
            let (coords, degenerate) = resolve_dependents(&scene, &assignment);
            assert!(!degenerate.iter().any(|&d| d));
            let p = coords[scene.point_id("P").unwrap()];
            // Midpoint of the 0..90 degree arc: 45 degrees on the minor
            // side, -135 degrees the long way round.
            let expected = 5.0 / 2.0f64.sqrt() * expected_sign;
            assert!((p.x - expected).abs() < 1e-9, "{arc_type}: {p:?}");
            assert!((p.y - expected).abs() < 1e-9, "{arc_type}: {p:?}");
        }
    }

    #[test]
    fn tangent_point_from_external_point_is_tangent() {
        let scene = compiled("shapes:\nCircle(O,3)\nPolygon(PQR)\ndependence:\nTangent(O,T,P)");
        let assignment = Assignment {
            values: scene
                .params
                .iter()
                .flat_map(|p| match p.name.as_str() {
                    "O" => vec![0.0, 0.0],
                    "r:O" => vec![3.0],
                    "P" => vec![5.0, 0.0],
                    "Q" => vec![20.0, 20.0],
                    "R" => vec![20.0, 30.0],
                    _ => vec![0.0; p.slots()],
                })
                .collect(),
        };
        let (coords, degenerate) = resolve_dependents(&scene, &assignment);
        let t = coords[scene.point_id("T").unwrap()];
        assert!(!degenerate[scene.point_id("T").unwrap()]);
        assert!((t.norm() - 3.0).abs() < 1e-9, "T on the circle");
        let p = Point::new(5.0, 0.0);
        assert!(t.dot(t - p).abs() < 1e-9, "OT perpendicular to TP");

        // From inside the circle the tangent is undefined.
        let mut inside = assignment.clone();
        let p_param = scene
            .params
            .iter()
            .position(|p| p.name == "P")
            .unwrap();
        inside.values[scene.slot_offsets[p_param]] = 1.0;
        inside.values[scene.slot_offsets[p_param] + 1] = 0.0;
        let (_, degenerate) = resolve_dependents(&scene, &inside);
        assert!(degenerate[scene.point_id("T").unwrap()]);
    }

    #[test]
    fn point_at_arc_without_circle_fails() {
        let program = parse_text("shapes:\nPolygon(AOB)\ndependence:\nPointAtArc(P,O,0)").unwrap();
        let err = compile(&program).unwrap_err();
        assert!(matches!(err, CompileError::NoSuchCircle { .. }), "{err}");
    }

    #[test]
    fn compile_is_deterministic() {
        let src = "shapes:\nSquare(ABCD)\nCircle(O,5)\ndependence:\nPointAtArc(P,O,0)\nlength constraint:\nLengthRatio(AB,OP,Ratio(2,1))";
        assert_eq!(compiled(src), compiled(src));
    }
}
