//! Compiled scenes: free parameters, constructive dependent-point resolvers
//! and the scalar constraint set.
//!
//! A scene separates what the solver may move (free 2D points and ranged
//! scalars) from what is derived (dependent points, evaluated in topological
//! order). Resolution is total: a resolver that degenerates (parallel
//! intersection, zero-length host, tangent from inside the circle) leaves its
//! point at a fixed fallback position and raises a degeneracy flag so the
//! evaluator can penalize instead of abort.

use crate::ast::Origin;
use crate::geometry::{self, Point, DEGENERACY_EPS};

pub type PointId = usize;
pub type CircleId = usize;
/// Index into [`Scene::params`].
pub type ParamId = usize;

/// Canvas side length used for initialization and perturbation scaling.
pub const CANVAS_SPAN: f64 = 100.0;

/// Position given to a dependent point whose resolver degenerates.
pub const FALLBACK_POS: Point = Point::new(CANVAS_SPAN / 2.0, CANVAS_SPAN / 2.0);

/// Semantic role of a free scalar parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarRole {
    /// Position along a host segment, in `[0,1]`.
    LineParam,
    /// Position along an extension of a host segment, > 1.
    ExtensionParam,
    /// Angle on a circle in degrees, wraps modulo 360.
    CircleAngle,
    /// Position along an arc between two endpoints, in `[0,1]`.
    ArcParam,
    /// Circle radius in canvas units.
    Radius,
    /// Rectangle height in canvas units.
    Height,
    /// Rhombus interior angle in degrees.
    ShapeAngle,
    /// Length of a tangent segment in canvas units.
    TangentLength,
}

impl ScalarRole {
    pub fn range(self) -> (f64, f64) {
        match self {
            ScalarRole::LineParam | ScalarRole::ArcParam => (0.0, 1.0),
            ScalarRole::ExtensionParam => (1.05, 10.0),
            ScalarRole::CircleAngle => (0.0, 360.0),
            ScalarRole::Radius => (2.0, 80.0),
            ScalarRole::Height => (1.0, 150.0),
            ScalarRole::ShapeAngle => (1.0, 179.0),
            ScalarRole::TangentLength => (2.0, 80.0),
        }
    }

    /// Angles on a circle wrap; every other scalar clamps to its range.
    pub fn wraps(self) -> bool {
        matches!(self, ScalarRole::CircleAngle)
    }
}

/// Hint for placing a free parameter at initialization time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitHint {
    /// No structure: uniform over the canvas (points) or the range (scalars).
    None,
    /// Shape vertex: on a ring of radius 30 around the canvas center at the
    /// given angle in degrees, jittered.
    Ring(f64),
    /// Circle center: near the canvas center, jittered.
    Center,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParamKind {
    /// Two slots (x, y).
    Point { point: PointId },
    /// One slot. `lo == hi` encodes a fixed value the solver never perturbs.
    Scalar { role: ScalarRole, lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreeParam {
    /// Stable name used in solution files, e.g. `"A"`, `"t:D"`, `"r:O"`.
    pub name: String,
    pub kind: ParamKind,
    pub hint: InitHint,
}

impl FreeParam {
    pub fn slots(&self) -> usize {
        match self.kind {
            ParamKind::Point { .. } => 2,
            ParamKind::Scalar { .. } => 1,
        }
    }
}

/// A scalar input of a resolver: a literal or a free parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarSource {
    Const(f64),
    Param(ParamId),
}

/// An angle input of a resolver, in degrees; `ParamPlus` adds a fixed offset
/// to a parameter (used for the second endpoint of a sector arc).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AngleSource {
    Param(ParamId),
    ParamPlus(ParamId, f64),
}

/// Where a circle's radius comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadiusSource {
    /// A scalar parameter (fixed when its range is collapsed).
    Param(ParamId),
    /// Inradius of the triangle `a`, `b`, `c`.
    Incircle { a: PointId, b: PointId, c: PointId },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: PointId,
    pub radius: RadiusSource,
    /// Whether the full circle outline is drawn (sector circles are not;
    /// their arc is drawn instead).
    pub draw: bool,
}

/// Drawable arc on a circle, from `start` sweeping `sweep_deg` counterclockwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcSpec {
    pub circle: CircleId,
    pub start: AngleSource,
    pub sweep_deg: f64,
}

/// Constructive rule producing one dependent point from earlier geometry.
#[derive(Debug, Clone, PartialEq)]
pub enum Resolver {
    /// `a + t * (b - a)`; handles on-segment points, midpoints and extensions.
    OnLine { a: PointId, b: PointId, t: ScalarSource },
    /// Intersection of the infinite lines `a..b` and `c..d`.
    Intersection { a: PointId, b: PointId, c: PointId, d: PointId },
    /// Foot of the perpendicular from `p` onto the line `a..b`.
    PerpendicularFoot { p: PointId, a: PointId, b: PointId },
    /// Point on a circle at an angle.
    OnCircle { circle: CircleId, angle: AngleSource },
    /// Point on the arc of `circle` between `from` and `to`, at fraction `t`;
    /// `major` selects the long way round.
    OnArc { circle: CircleId, from: PointId, to: PointId, t: ScalarSource, major: bool },
    /// End of a tangent segment: at distance `len` from `tangency` along the
    /// tangent line of `circle` at `tangency`.
    TangentEnd { circle: CircleId, tangency: PointId, len: ScalarSource },
    /// Tangency point of the tangent drawn from `external` to `circle`
    /// (degenerate when `external` lies inside the circle).
    TangentPoint { circle: CircleId, external: PointId },
    /// Third/fourth corner of a square on anchor side `a..b` (counterclockwise).
    SquareCorner { a: PointId, b: PointId, opposite_of: SquareSide },
    /// Corner of a rectangle with anchor side `a..b` and height `h`.
    RectCorner { a: PointId, b: PointId, h: ScalarSource, opposite_of: SquareSide },
    /// Corner of a rhombus with anchor side `a..b` and interior angle `phi`.
    RhombusCorner { a: PointId, b: PointId, phi: ScalarSource, opposite_of: SquareSide },
    /// Fourth corner of parallelogram `a b ? d`: `b + d - a`.
    ParallelogramCorner { a: PointId, b: PointId, d: PointId },
    /// Incenter of the triangle `a`, `b`, `c`.
    Incenter { a: PointId, b: PointId, c: PointId },
}

/// Which derived corner of a quadrilateral template (`A B C D` in order):
/// `B` produces `C`, `A` produces `D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SquareSide {
    B,
    A,
}

impl Resolver {
    /// Point inputs read by this resolver (dependency edges for topo order).
    pub fn inputs(&self, circles: &[Circle]) -> Vec<PointId> {
        let mut v = Vec::with_capacity(4);
        let circle_inputs = |id: CircleId, v: &mut Vec<PointId>| {
            let c = circles[id];
            v.push(c.center);
            if let RadiusSource::Incircle { a, b, c } = c.radius {
                v.extend([a, b, c]);
            }
        };
        match self {
            Resolver::OnLine { a, b, .. } => v.extend([*a, *b]),
            Resolver::Intersection { a, b, c, d } => v.extend([*a, *b, *c, *d]),
            Resolver::PerpendicularFoot { p, a, b } => v.extend([*p, *a, *b]),
            Resolver::OnCircle { circle, .. } => circle_inputs(*circle, &mut v),
            Resolver::OnArc { circle, from, to, .. } => {
                circle_inputs(*circle, &mut v);
                v.extend([*from, *to]);
            }
            Resolver::TangentEnd { circle, tangency, .. } => {
                circle_inputs(*circle, &mut v);
                v.push(*tangency);
            }
            Resolver::TangentPoint { circle, external } => {
                circle_inputs(*circle, &mut v);
                v.push(*external);
            }
            Resolver::SquareCorner { a, b, .. } => v.extend([*a, *b]),
            Resolver::RectCorner { a, b, .. } => v.extend([*a, *b]),
            Resolver::RhombusCorner { a, b, .. } => v.extend([*a, *b]),
            Resolver::ParallelogramCorner { a, b, d } => v.extend([*a, *b, *d]),
            Resolver::Incenter { a, b, c } => v.extend([*a, *b, *c]),
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DependentPoint {
    pub point: PointId,
    pub resolver: Resolver,
    pub origin: Origin,
}

/// A segment between two named points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Seg(pub PointId, pub PointId);

/// An angle: vertex in the middle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ang(pub PointId, pub PointId, pub PointId);

#[derive(Debug, Clone, PartialEq)]
pub enum LenTerm {
    Seg(Seg),
    Const(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum AngTerm {
    Ang(Ang),
    Const(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelOp {
    Eq,
    Gt,
    Ge,
    Lt,
    Le,
}

/// Scalar constraint lowered from a constraint statement.
#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintKind {
    /// |seg| compared to an absolute target.
    LengthValue { seg: Seg, target: f64 },
    LengthRatio { a: Seg, b: Seg, target_num: f64, target_den: f64 },
    LengthRelation { left: Vec<(f64, LenTerm)>, rel: RelOp, right: Vec<(f64, LenTerm)> },
    PointLineDistance { p: PointId, line: Seg, target: f64 },
    AngleValue { ang: Ang, target_deg: f64 },
    AngleRatio { a: Ang, b: Ang, target_num: f64, target_den: f64 },
    AngleRelation { left: Vec<(f64, AngTerm)>, rel: RelOp, right: Vec<(f64, AngTerm)> },
    Parallel { a: Seg, b: Seg },
    Perpendicular { a: Seg, b: Seg },
    /// Central-angle ratio between two arcs on (possibly different) circles.
    CentralAngleRatio { a: Ang, b: Ang, target_num: f64, target_den: f64 },
    /// Point inside (or on the boundary of) a polygon.
    Containment { p: PointId, polygon: Vec<PointId> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub kind: ConstraintKind,
    pub origin: Origin,
    /// Canonical source form, for reports.
    pub label: String,
}

impl ConstraintKind {
    /// Every point the constraint measures (used for degeneracy penalties).
    pub fn touched_points(&self) -> Vec<PointId> {
        let mut v = Vec::new();
        let seg = |s: &Seg, v: &mut Vec<PointId>| v.extend([s.0, s.1]);
        let ang = |a: &Ang, v: &mut Vec<PointId>| v.extend([a.0, a.1, a.2]);
        match self {
            ConstraintKind::LengthValue { seg: s, .. } => seg(s, &mut v),
            ConstraintKind::LengthRatio { a, b, .. } => {
                seg(a, &mut v);
                seg(b, &mut v);
            }
            ConstraintKind::LengthRelation { left, right, .. } => {
                for (_, t) in left.iter().chain(right) {
                    if let LenTerm::Seg(s) = t {
                        seg(s, &mut v);
                    }
                }
            }
            ConstraintKind::PointLineDistance { p, line, .. } => {
                v.push(*p);
                seg(line, &mut v);
            }
            ConstraintKind::AngleValue { ang: a, .. } => ang(a, &mut v),
            ConstraintKind::AngleRatio { a, b, .. }
            | ConstraintKind::CentralAngleRatio { a, b, .. } => {
                ang(a, &mut v);
                ang(b, &mut v);
            }
            ConstraintKind::AngleRelation { left, right, .. } => {
                for (_, t) in left.iter().chain(right) {
                    if let AngTerm::Ang(a) = t {
                        ang(a, &mut v);
                    }
                }
            }
            ConstraintKind::Parallel { a, b } | ConstraintKind::Perpendicular { a, b } => {
                seg(a, &mut v);
                seg(b, &mut v);
            }
            ConstraintKind::Containment { p, polygon } => {
                v.push(*p);
                v.extend(polygon.iter().copied());
            }
        }
        v
    }
}

/// A compiled optimization problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    /// Point names; index is the [`PointId`].
    pub point_names: Vec<String>,
    /// Free parameters in a fixed order.
    pub params: Vec<FreeParam>,
    /// Slot offset of each parameter in an [`Assignment`].
    pub slot_offsets: Vec<usize>,
    pub n_slots: usize,
    /// For each point, the index of its Point parameter (free points only).
    pub free_of_point: Vec<Option<ParamId>>,
    /// Dependent points in a valid topological order.
    pub dependents: Vec<DependentPoint>,
    pub circles: Vec<Circle>,
    pub arcs: Vec<ArcSpec>,
    pub constraints: Vec<Constraint>,
    /// Drawable segments, deduplicated, in first-appearance order.
    pub segments: Vec<Seg>,
    /// Per-point draw flag for labels.
    pub labels: Vec<bool>,
}

/// A concrete valuation of all free parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub values: Vec<f64>,
}

impl Scene {
    pub fn point_id(&self, name: &str) -> Option<PointId> {
        self.point_names.iter().position(|n| n == name)
    }

    pub fn point_value(&self, assignment: &Assignment, param: ParamId) -> Point {
        let off = self.slot_offsets[param];
        Point::new(assignment.values[off], assignment.values[off + 1])
    }

    pub fn scalar_value(&self, assignment: &Assignment, source: ScalarSource) -> f64 {
        match source {
            ScalarSource::Const(v) => v,
            ScalarSource::Param(p) => assignment.values[self.slot_offsets[p]],
        }
    }

    pub fn angle_value(&self, assignment: &Assignment, source: AngleSource) -> f64 {
        match source {
            AngleSource::Param(p) => assignment.values[self.slot_offsets[p]],
            AngleSource::ParamPlus(p, off) => assignment.values[self.slot_offsets[p]] + off,
        }
    }

    /// Radius of a circle under the given coordinates (the incircle radius
    /// depends on resolved vertex positions).
    pub fn circle_radius(&self, assignment: &Assignment, coords: &[Point], circle: CircleId) -> f64 {
        match self.circles[circle].radius {
            RadiusSource::Param(p) => assignment.values[self.slot_offsets[p]],
            RadiusSource::Incircle { a, b, c } => incircle_radius(coords[a], coords[b], coords[c]),
        }
    }
}

fn incircle_radius(a: Point, b: Point, c: Point) -> f64 {
    let la = b.dist(c);
    let lb = a.dist(c);
    let lc = a.dist(b);
    let s = (la + lb + lc) / 2.0;
    if s < DEGENERACY_EPS {
        return 0.0;
    }
    let area2 = (b - a).cross(c - a).abs() / 2.0;
    area2 / s
}

fn incenter(a: Point, b: Point, c: Point) -> Option<Point> {
    let la = b.dist(c);
    let lb = a.dist(c);
    let lc = a.dist(b);
    let sum = la + lb + lc;
    if sum < DEGENERACY_EPS {
        return None;
    }
    Some(Point::new(
        (la * a.x + lb * b.x + lc * c.x) / sum,
        (la * a.y + lb * b.y + lc * c.y) / sum,
    ))
}

/// Evaluate all dependent points of `scene` under `assignment`.
///
/// Writes coordinates for every point into `coords` and degeneracy flags
/// into `degenerate` (both sized to the point count). A degenerate resolver
/// leaves its point at [`FALLBACK_POS`]; degeneracy propagates to dependents
/// that read a degenerate input.
pub fn resolve_dependents_into(
    scene: &Scene,
    assignment: &Assignment,
    coords: &mut Vec<Point>,
    degenerate: &mut Vec<bool>,
) {
    let n = scene.point_names.len();
    coords.clear();
    coords.resize(n, FALLBACK_POS);
    degenerate.clear();
    degenerate.resize(n, false);

    for (point, param) in scene.free_of_point.iter().enumerate() {
        if let Some(param) = param {
            coords[point] = scene.point_value(assignment, *param);
        }
    }

    for dep in &scene.dependents {
        let inputs = dep.resolver.inputs(&scene.circles);
        let tainted = inputs.iter().any(|&p| degenerate[p]);
        let resolved = resolve_one(scene, assignment, coords, &dep.resolver);
        match resolved {
            Some(p) if !tainted => coords[dep.point] = p,
            Some(p) => {
                coords[dep.point] = p;
                degenerate[dep.point] = true;
            }
            None => degenerate[dep.point] = true,
        }
    }
}

/// Convenience wrapper returning fresh buffers.
pub fn resolve_dependents(scene: &Scene, assignment: &Assignment) -> (Vec<Point>, Vec<bool>) {
    let mut coords = Vec::new();
    let mut degenerate = Vec::new();
    resolve_dependents_into(scene, assignment, &mut coords, &mut degenerate);
    (coords, degenerate)
}

fn resolve_one(
    scene: &Scene,
    assignment: &Assignment,
    coords: &[Point],
    resolver: &Resolver,
) -> Option<Point> {
    match *resolver {
        Resolver::OnLine { a, b, t } => {
            let (pa, pb) = (coords[a], coords[b]);
            if pa.dist(pb) < DEGENERACY_EPS {
                return None;
            }
            let t = scene.scalar_value(assignment, t);
            Some(pa + (pb - pa) * t)
        }
        Resolver::Intersection { a, b, c, d } => {
            geometry::line_intersection(coords[a], coords[b], coords[c], coords[d])
        }
        Resolver::PerpendicularFoot { p, a, b } => {
            geometry::perpendicular_foot(coords[p], coords[a], coords[b])
        }
        Resolver::OnCircle { circle, angle } => {
            let center = coords[scene.circles[circle].center];
            let r = scene.circle_radius(assignment, coords, circle);
            if r < DEGENERACY_EPS {
                return None;
            }
            let theta = scene.angle_value(assignment, angle);
            Some(center + geometry::dir_deg(theta) * r)
        }
        Resolver::OnArc { circle, from, to, t, major } => {
            let center = coords[scene.circles[circle].center];
            let r = scene.circle_radius(assignment, coords, circle);
            if r < DEGENERACY_EPS {
                return None;
            }
            let va = coords[from] - center;
            let vb = coords[to] - center;
            if va.norm() < DEGENERACY_EPS || vb.norm() < DEGENERACY_EPS {
                return None;
            }
            let alpha = geometry::angle_of(va);
            let beta = geometry::angle_of(vb);
            // Signed sweep in (-180, 180]: the minor side.
            let mut sweep = (beta - alpha).rem_euclid(360.0);
            if sweep > 180.0 {
                sweep -= 360.0;
            }
            let sweep = if major {
                if sweep >= 0.0 {
                    sweep - 360.0
                } else {
                    sweep + 360.0
                }
            } else {
                sweep
            };
            let t = scene.scalar_value(assignment, t);
            Some(center + geometry::dir_deg(alpha + t * sweep) * r)
        }
        Resolver::TangentEnd { circle, tangency, len } => {
            let center = coords[scene.circles[circle].center];
            let t = coords[tangency];
            let radial = (t - center).normalized()?;
            let l = scene.scalar_value(assignment, len);
            Some(t + radial.rot90() * l)
        }
        Resolver::TangentPoint { circle, external } => {
            let center = coords[scene.circles[circle].center];
            let r = scene.circle_radius(assignment, coords, circle);
            if r < DEGENERACY_EPS {
                return None;
            }
            let v = coords[external] - center;
            let d = v.norm();
            // Tangent from an interior point does not exist.
            if d <= r + DEGENERACY_EPS {
                return None;
            }
            let psi = geometry::angle_of(v);
            let gamma = (r / d).clamp(-1.0, 1.0).acos().to_degrees();
            Some(center + geometry::dir_deg(psi + gamma) * r)
        }
        Resolver::SquareCorner { a, b, opposite_of } => {
            let (pa, pb) = (coords[a], coords[b]);
            if pa.dist(pb) < DEGENERACY_EPS {
                return None;
            }
            let w = (pb - pa).rot90(); // counterclockwise winding A,B,C,D
            Some(match opposite_of {
                SquareSide::B => pb + w,
                SquareSide::A => pa + w,
            })
        }
        Resolver::RectCorner { a, b, h, opposite_of } => {
            let (pa, pb) = (coords[a], coords[b]);
            let u = (pb - pa).normalized()?.rot90();
            let h = scene.scalar_value(assignment, h);
            Some(match opposite_of {
                SquareSide::B => pb + u * h,
                SquareSide::A => pa + u * h,
            })
        }
        Resolver::RhombusCorner { a, b, phi, opposite_of } => {
            let (pa, pb) = (coords[a], coords[b]);
            if pa.dist(pb) < DEGENERACY_EPS {
                return None;
            }
            let phi = scene.scalar_value(assignment, phi);
            let w = (pb - pa).rotate_deg(phi);
            Some(match opposite_of {
                SquareSide::A => pa + w,
                SquareSide::B => pb + w,
            })
        }
        Resolver::ParallelogramCorner { a, b, d } => {
            Some(coords[b] + (coords[d] - coords[a]))
        }
        Resolver::Incenter { a, b, c } => incenter(coords[a], coords[b], coords[c]),
    }
}

/// Kahn topological order over named dependency declarations. Inputs not
/// named as nodes are treated as free. Ties break by declaration order.
pub fn topo_order(deps: &[(String, Vec<String>)]) -> Result<Vec<String>, Vec<String>> {
    let index_of = |name: &str| deps.iter().position(|(n, _)| n == name);
    let n = deps.len();
    let mut indegree = vec![0usize; n];
    let mut out_edges: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, (_, inputs)) in deps.iter().enumerate() {
        for input in inputs {
            if let Some(j) = index_of(input) {
                out_edges[j].push(i);
                indegree[i] += 1;
            }
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut ready: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    while let Some(&i) = ready.first() {
        ready.remove(0);
        order.push(i);
        for &j in &out_edges[i] {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                // Keep declaration order among ready nodes.
                let pos = ready.partition_point(|&k| k < j);
                ready.insert(pos, j);
            }
        }
    }
    if order.len() == n {
        Ok(order.into_iter().map(|i| deps[i].0.clone()).collect())
    } else {
        // Extract one actual cycle for the error message.
        let remaining: Vec<usize> = (0..n).filter(|i| !order.contains(i)).collect();
        let mut cycle = Vec::new();
        let mut seen = vec![false; n];
        let mut cur = remaining[0];
        loop {
            if seen[cur] {
                let start = cycle.iter().position(|&c| c == cur).unwrap();
                cycle = cycle.split_off(start);
                break;
            }
            seen[cur] = true;
            cycle.push(cur);
            cur = deps[cur]
                .1
                .iter()
                .filter_map(|name| index_of(name))
                .find(|j| remaining.contains(j))
                .expect("remaining node must have a remaining input");
        }
        Err(cycle.into_iter().map(|i| deps[i].0.clone()).collect())
    }
}
