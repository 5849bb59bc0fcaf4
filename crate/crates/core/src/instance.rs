//! Capacitated covering instances: points, balls and the metric they live in.
//!
//! An instance is a finite list of points and a finite list of balls. Every
//! ball is anchored at a center node; points and centers share one metric,
//! given either by Euclidean coordinates or by an explicit dense matrix over
//! `points ++ centers`.

use std::cmp::Ordering;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance used for every metric comparison.
pub const TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub id: usize,
    /// Index into the instance's center list.
    pub center: usize,
    pub radius: f64,
    pub capacity: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Euclidean {
        dimension: usize,
        points: Vec<Vec<f64>>,
        centers: Vec<Vec<f64>>,
    },
    Explicit {
        point_names: Vec<String>,
        center_names: Vec<String>,
        /// Square matrix over `points ++ centers`.
        matrix: Vec<Vec<f64>>,
    },
}

/// A node of the metric space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Node {
    Point(usize),
    Center(usize),
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Point(j) => write!(f, "point {j}"),
            Node::Center(k) => write!(f, "center {k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricInstance {
    pub balls: Vec<Ball>,
    pub geometry: Geometry,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Shape,
    NonFinite,
    Radius,
    Capacity,
    Diagonal,
    Symmetry,
    Negative,
    Triangle,
    Monotonicity,
    Coverage,
    Assignment,
    Distance,
}

impl ViolationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationKind::Shape => "shape",
            ViolationKind::NonFinite => "non_finite",
            ViolationKind::Radius => "radius",
            ViolationKind::Capacity => "capacity",
            ViolationKind::Diagonal => "diagonal",
            ViolationKind::Symmetry => "symmetry",
            ViolationKind::Negative => "negative",
            ViolationKind::Triangle => "triangle",
            ViolationKind::Monotonicity => "monotonicity",
            ViolationKind::Coverage => "coverage",
            ViolationKind::Assignment => "assignment",
            ViolationKind::Distance => "distance",
        }
    }
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub is_valid: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn from_violations(violations: Vec<Violation>) -> Self {
        ValidationReport {
            is_valid: violations.is_empty(),
            violations,
        }
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    /// True when every violation is of the given kinds.
    pub fn only(&self, kinds: &[ViolationKind]) -> bool {
        self.violations.iter().all(|v| kinds.contains(&v.kind))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ValidateOptions {
    /// The triangle check is cubic in the node count.
    pub check_triangle: bool,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions {
            check_triangle: true,
        }
    }
}

impl MetricInstance {
    pub fn euclidean(
        dimension: usize,
        points: Vec<Vec<f64>>,
        centers: Vec<Vec<f64>>,
        balls: Vec<Ball>,
    ) -> Self {
        MetricInstance {
            balls,
            geometry: Geometry::Euclidean {
                dimension,
                points,
                centers,
            },
        }
    }

    /// Explicit metric with generated node names `p{j}` / `c{k}`.
    pub fn explicit(n_points: usize, matrix: Vec<Vec<f64>>, balls: Vec<Ball>) -> Self {
        let n_centers = matrix.len().saturating_sub(n_points);
        MetricInstance {
            balls,
            geometry: Geometry::Explicit {
                point_names: (0..n_points).map(|j| format!("p{j}")).collect(),
                center_names: (0..n_centers).map(|k| format!("c{k}")).collect(),
                matrix,
            },
        }
    }

    pub fn n_points(&self) -> usize {
        match &self.geometry {
            Geometry::Euclidean { points, .. } => points.len(),
            Geometry::Explicit { point_names, .. } => point_names.len(),
        }
    }

    pub fn n_centers(&self) -> usize {
        match &self.geometry {
            Geometry::Euclidean { centers, .. } => centers.len(),
            Geometry::Explicit { center_names, .. } => center_names.len(),
        }
    }

    pub fn n_balls(&self) -> usize {
        self.balls.len()
    }

    pub fn dimension(&self) -> Option<usize> {
        match &self.geometry {
            Geometry::Euclidean { dimension, .. } => Some(*dimension),
            Geometry::Explicit { .. } => None,
        }
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self.geometry, Geometry::Euclidean { .. })
    }

    fn node_index(&self, node: Node) -> Result<usize> {
        let (n, c) = (self.n_points(), self.n_centers());
        match node {
            Node::Point(j) if j < n => Ok(j),
            Node::Center(k) if k < c => Ok(n + k),
            _ => Err(Error::UnknownNode(node.to_string())),
        }
    }

    fn coords(&self, node: Node) -> &[f64] {
        match (&self.geometry, node) {
            (Geometry::Euclidean { points, .. }, Node::Point(j)) => &points[j],
            (Geometry::Euclidean { centers, .. }, Node::Center(k)) => &centers[k],
            _ => unreachable!("coords on explicit geometry"),
        }
    }

    /// Coordinates of ball `i`'s center; `None` for explicit metrics.
    pub fn center_coords(&self, i: usize) -> Option<&[f64]> {
        match &self.geometry {
            Geometry::Euclidean { centers, .. } => Some(&centers[self.balls[i].center]),
            Geometry::Explicit { .. } => None,
        }
    }

    /// Distance between two nodes.
    pub fn distance(&self, a: Node, b: Node) -> Result<f64> {
        let ia = self.node_index(a)?;
        let ib = self.node_index(b)?;
        Ok(match &self.geometry {
            Geometry::Euclidean { .. } => l2(self.coords(a), self.coords(b)),
            Geometry::Explicit { matrix, .. } => matrix[ia][ib],
        })
    }

    /// Unchecked distance; indices must be in range.
    pub(crate) fn dist(&self, a: Node, b: Node) -> f64 {
        match &self.geometry {
            Geometry::Euclidean { .. } => l2(self.coords(a), self.coords(b)),
            Geometry::Explicit { matrix, .. } => {
                let n = self.n_points();
                let idx = |x: Node| match x {
                    Node::Point(j) => j,
                    Node::Center(k) => n + k,
                };
                matrix[idx(a)][idx(b)]
            }
        }
    }

    /// Distance from the center of ball `i` to point `j`.
    pub fn ball_point(&self, i: usize, j: usize) -> f64 {
        self.dist(Node::Center(self.balls[i].center), Node::Point(j))
    }

    /// Distance between the centers of balls `i` and `k`.
    pub fn center_center(&self, i: usize, k: usize) -> f64 {
        self.dist(
            Node::Center(self.balls[i].center),
            Node::Center(self.balls[k].center),
        )
    }

    /// Whether `ball` expanded by `beta` contains point `p`.
    pub fn contains(&self, ball: &Ball, p: usize, beta: f64) -> bool {
        self.dist(Node::Center(ball.center), Node::Point(p)) <= beta * ball.radius + TOL
    }

    /// Whether ball `i` expanded by `beta` contains point `j`.
    pub fn covers(&self, i: usize, j: usize, beta: f64) -> bool {
        self.contains(&self.balls[i], j, beta)
    }

    /// Serving factor `d(c_i, p_j) / r_i`, with zero radii mapped to 1 on
    /// their own center and infinity elsewhere.
    pub fn stretch(&self, i: usize, j: usize) -> f64 {
        let d = self.ball_point(i, j);
        let r = self.balls[i].radius;
        if d <= TOL {
            0.0
        } else if r <= 0.0 {
            f64::INFINITY
        } else {
            d / r
        }
    }

    /// Ordering by (radius desc, capacity desc, id asc).
    pub fn tie_break(&self, a: usize, b: usize) -> Ordering {
        let (ba, bb) = (&self.balls[a], &self.balls[b]);
        bb.radius
            .total_cmp(&ba.radius)
            .then(bb.capacity.cmp(&ba.capacity))
            .then(ba.id.cmp(&bb.id))
    }

    /// Ball indices sorted by the tie-break convention.
    pub fn tie_break_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.n_balls()).collect();
        order.sort_by(|&a, &b| self.tie_break(a, b));
        order
    }

    pub fn has_uniform_capacity(&self) -> bool {
        self.balls
            .windows(2)
            .all(|w| w[0].capacity == w[1].capacity)
    }

    pub fn is_monotone(&self) -> bool {
        monotonicity_violations(&self.balls).is_empty()
    }

    /// Balls containing point `j` without expansion.
    pub fn covering_balls(&self, j: usize) -> Vec<usize> {
        (0..self.n_balls()).filter(|&i| self.covers(i, j, 1.0)).collect()
    }

    pub fn validate(&self) -> ValidationReport {
        self.validate_with(ValidateOptions::default())
    }

    pub fn validate_with(&self, opts: ValidateOptions) -> ValidationReport {
        let mut out = Vec::new();
        let mut push = |kind, detail: String| out.push(Violation { kind, detail });
        let n_centers = self.n_centers();

        for (idx, b) in self.balls.iter().enumerate() {
            if b.id != idx {
                push(ViolationKind::Shape, format!("ball at position {idx} has id {}", b.id));
            }
            if b.center >= n_centers {
                push(
                    ViolationKind::Shape,
                    format!("ball {idx} references center {} of {n_centers}", b.center),
                );
            }
            if !b.radius.is_finite() {
                push(ViolationKind::NonFinite, format!("ball {idx} radius {}", b.radius));
            } else if b.radius < 0.0 {
                push(ViolationKind::Radius, format!("ball {idx} radius {} < 0", b.radius));
            }
            if b.capacity < 1 {
                push(ViolationKind::Capacity, format!("ball {idx} capacity 0"));
            }
        }

        let structural_ok = match &self.geometry {
            Geometry::Euclidean {
                dimension,
                points,
                centers,
            } => {
                let mut ok = true;
                if *dimension == 0 {
                    push(ViolationKind::Shape, "dimension 0".into());
                    ok = false;
                }
                for (name, list) in [("point", points), ("center", centers)] {
                    for (k, c) in list.iter().enumerate() {
                        if c.len() != *dimension {
                            push(
                                ViolationKind::Shape,
                                format!("{name} {k} has {} coordinates, expected {dimension}", c.len()),
                            );
                            ok = false;
                        } else if c.iter().any(|x| !x.is_finite()) {
                            push(ViolationKind::NonFinite, format!("{name} {k} coordinates"));
                            ok = false;
                        }
                    }
                }
                ok
            }
            Geometry::Explicit { matrix, .. } => {
                let size = self.n_points() + n_centers;
                let mut ok = matrix.len() == size && matrix.iter().all(|row| row.len() == size);
                if !ok {
                    push(ViolationKind::Shape, format!("metric matrix is not {size}x{size}"));
                } else {
                    if matrix.iter().flatten().any(|x| !x.is_finite()) {
                        push(ViolationKind::NonFinite, "metric matrix entry".into());
                        ok = false;
                    }
                    if ok {
                        check_matrix(matrix, opts.check_triangle, &mut push);
                    }
                }
                ok
            }
        };

        for (a, b) in monotonicity_violations(&self.balls) {
            push(
                ViolationKind::Monotonicity,
                format!(
                    "ball {a} (r={}, U={}) larger than ball {b} (r={}, U={}) but has less capacity",
                    self.balls[a].radius,
                    self.balls[a].capacity,
                    self.balls[b].radius,
                    self.balls[b].capacity
                ),
            );
        }

        if structural_ok && self.balls.iter().all(|b| b.center < n_centers) {
            for j in 0..self.n_points() {
                if !(0..self.n_balls()).any(|i| self.covers(i, j, 1.0)) {
                    push(ViolationKind::Coverage, format!("point {j} lies in no ball"));
                }
            }
        }
        ValidationReport::from_violations(out)
    }

    /// Structural soundness required before any distance query.
    pub fn require_well_formed(&self) -> Result<()> {
        let report = self.validate_with(ValidateOptions {
            check_triangle: false,
        });
        let fatal: Vec<String> = report
            .violations
            .iter()
            .filter(|v| {
                matches!(
                    v.kind,
                    ViolationKind::Shape
                        | ViolationKind::NonFinite
                        | ViolationKind::Radius
                        | ViolationKind::Capacity
                )
            })
            .map(|v| format!("{}: {}", v.kind, v.detail))
            .collect();
        if fatal.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidInstance(fatal.join("; ")))
        }
    }

    pub fn to_file_format(&self) -> InstanceFile {
        let balls = self
            .balls
            .iter()
            .map(|b| BallRecord {
                center_index: b.center,
                radius: b.radius,
                capacity: b.capacity,
            })
            .collect();
        match &self.geometry {
            Geometry::Euclidean {
                dimension,
                points,
                centers,
            } => InstanceFile {
                dimension: Some(*dimension),
                points: NodeList::Coords(points.clone()),
                centers: NodeList::Coords(centers.clone()),
                balls,
                metric: None,
            },
            Geometry::Explicit {
                point_names,
                center_names,
                matrix,
            } => InstanceFile {
                dimension: None,
                points: NodeList::Names(point_names.clone()),
                centers: NodeList::Names(center_names.clone()),
                balls,
                metric: Some(matrix.clone()),
            },
        }
    }

    pub fn from_file_format(file: InstanceFile) -> Result<Self> {
        let balls = file
            .balls
            .iter()
            .enumerate()
            .map(|(id, b)| Ball {
                id,
                center: b.center_index,
                radius: b.radius,
                capacity: b.capacity,
            })
            .collect();
        let geometry = match file.dimension {
            Some(dimension) => {
                let points = file.points.into_coords("points")?;
                let centers = file.centers.into_coords("centers")?;
                if file.metric.is_some() {
                    return Err(Error::InvalidInstance(
                        "`metric` must be absent when `dimension` is set".into(),
                    ));
                }
                Geometry::Euclidean {
                    dimension,
                    points,
                    centers,
                }
            }
            None => {
                let point_names = file.points.into_names("points")?;
                let center_names = file.centers.into_names("centers")?;
                let matrix = file.metric.ok_or_else(|| {
                    Error::InvalidInstance("`metric` is required when `dimension` is null".into())
                })?;
                Geometry::Explicit {
                    point_names,
                    center_names,
                    matrix,
                }
            }
        };
        Ok(MetricInstance { balls, geometry })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file_format()).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file_format(serde_json::from_str(text)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json();
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}

fn l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn check_matrix(matrix: &[Vec<f64>], triangle: bool, push: &mut impl FnMut(ViolationKind, String)) {
    let size = matrix.len();
    for a in 0..size {
        if matrix[a][a].abs() > TOL {
            push(ViolationKind::Diagonal, format!("d({a},{a}) = {}", matrix[a][a]));
        }
        for b in 0..size {
            if matrix[a][b] < 0.0 {
                push(ViolationKind::Negative, format!("d({a},{b}) = {}", matrix[a][b]));
            }
            if b > a && (matrix[a][b] - matrix[b][a]).abs() > TOL {
                push(
                    ViolationKind::Symmetry,
                    format!("d({a},{b}) = {} but d({b},{a}) = {}", matrix[a][b], matrix[b][a]),
                );
            }
        }
    }
    if triangle {
        for a in 0..size {
            for b in 0..size {
                for c in 0..size {
                    if matrix[a][c] > matrix[a][b] + matrix[b][c] + TOL {
                        push(
                            ViolationKind::Triangle,
                            format!(
                                "d({a},{c}) = {} > d({a},{b}) + d({b},{c}) = {}",
                                matrix[a][c],
                                matrix[a][b] + matrix[b][c]
                            ),
                        );
                    }
                }
            }
        }
    }
}

/// Pairs (a, b) with r_a > r_b but U_a < U_b.
fn monotonicity_violations(balls: &[Ball]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for a in balls {
        for b in balls {
            if a.radius > b.radius && a.capacity < b.capacity {
                out.push((a.id, b.id));
            }
        }
    }
    out
}

/// On-disk instance layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub dimension: Option<usize>,
    pub points: NodeList,
    pub centers: NodeList,
    pub balls: Vec<BallRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallRecord {
    pub center_index: usize,
    pub radius: f64,
    pub capacity: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeList {
    Coords(Vec<Vec<f64>>),
    Names(Vec<String>),
}

impl NodeList {
    fn into_coords(self, field: &str) -> Result<Vec<Vec<f64>>> {
        match self {
            NodeList::Coords(c) => Ok(c),
            NodeList::Names(_) => Err(Error::InvalidInstance(format!(
                "`{field}` must be coordinate vectors for a Euclidean instance"
            ))),
        }
    }

    fn into_names(self, field: &str) -> Result<Vec<String>> {
        match self {
            NodeList::Names(n) => Ok(n),
            // `[]` deserializes as the first variant.
            NodeList::Coords(c) if c.is_empty() => Ok(Vec::new()),
            NodeList::Coords(_) => Err(Error::InvalidInstance(format!(
                "`{field}` must be node names for an explicit metric"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn ball(id: usize, center: usize, radius: f64, capacity: u64) -> Ball {
        Ball {
            id,
            center,
            radius,
            capacity,
        }
    }

    #[test]
    fn single_ball_single_point_is_valid() {
        let inst = MetricInstance::euclidean(2, vec![vec![0.0, 0.5]], vec![vec![0.0, 0.0]], vec![ball(0, 0, 1.0, 1)]);
        let report = inst.validate();
        assert!(report.is_valid, "{report:?}");
    }

    #[test]
    fn monotonicity_violation_is_reported() {
        let inst = MetricInstance::euclidean(
            1,
            vec![vec![0.0]],
            vec![vec![0.0], vec![0.0]],
            vec![ball(0, 0, 2.0, 1), ball(1, 1, 1.0, 5)],
        );
        let report = inst.validate();
        assert!(!report.is_valid);
        assert!(report.has(ViolationKind::Monotonicity));
        assert!(report.only(&[ViolationKind::Monotonicity]));
    }

    #[test]
    fn triangle_violation_is_reported() {
        // nodes: a, b (points), c (center)
        let m = vec![
            vec![0.0, 1.0, 5.0],
            vec![1.0, 0.0, 1.0],
            vec![5.0, 1.0, 0.0],
        ];
        let inst = MetricInstance::explicit(2, m, vec![ball(0, 0, 5.0, 2)]);
        let report = inst.validate();
        assert!(report.has(ViolationKind::Triangle));
        let skipped = inst.validate_with(ValidateOptions {
            check_triangle: false,
        });
        assert!(!skipped.has(ViolationKind::Triangle));
    }

    #[test]
    fn euclidean_distance_examples() {
        let inst = MetricInstance::euclidean(2, vec![vec![3.0, 4.0]], vec![vec![0.0, 0.0]], vec![]);
        assert_eq!(inst.distance(Node::Center(0), Node::Point(0)).unwrap(), 5.0);
        assert_eq!(inst.distance(Node::Point(0), Node::Point(0)).unwrap(), 0.0);
        assert!(matches!(
            inst.distance(Node::Point(3), Node::Point(0)),
            Err(Error::UnknownNode(_))
        ));
    }

    #[test]
    fn explicit_distance_is_lookup() {
        let m = vec![vec![0.0, 2.5], vec![2.5, 0.0]];
        let inst = MetricInstance::explicit(1, m, vec![ball(0, 0, 3.0, 1)]);
        assert_eq!(inst.distance(Node::Point(0), Node::Center(0)).unwrap(), 2.5);
        assert_eq!(inst.distance(Node::Center(0), Node::Point(0)).unwrap(), 2.5);
    }

    #[test]
    fn contains_examples() {
        let inst = MetricInstance::euclidean(
            2,
            vec![vec![0.0, 1.0], vec![0.0, 2.0], vec![0.0, 0.0]],
            vec![vec![0.0, 0.0]],
            vec![ball(0, 0, 1.0, 1), ball(1, 0, 0.0, 1)],
        );
        let b = &inst.balls[0];
        assert!(inst.contains(b, 0, 1.0));
        assert!(!inst.contains(b, 1, 1.0));
        assert!(inst.contains(b, 1, 2.0));
        assert!(inst.contains(&inst.balls[1], 2, 1.0));
    }

    #[test]
    fn uncovered_point_is_reported() {
        let inst = MetricInstance::euclidean(1, vec![vec![5.0]], vec![vec![0.0]], vec![ball(0, 0, 1.0, 1)]);
        assert!(inst.validate().has(ViolationKind::Coverage));
    }

    #[test]
    fn tie_break_prefers_radius_then_capacity_then_id() {
        let inst = MetricInstance::euclidean(
            1,
            vec![],
            vec![vec![0.0]],
            vec![ball(0, 0, 1.0, 1), ball(1, 0, 2.0, 1), ball(2, 0, 2.0, 3), ball(3, 0, 2.0, 3)],
        );
        assert_eq!(inst.tie_break_order(), vec![2, 3, 1, 0]);
    }

    #[test]
    fn explicit_file_round_trip() {
        let m = vec![vec![0.0, 1.25], vec![1.25, 0.0]];
        let inst = MetricInstance::explicit(1, m, vec![ball(0, 0, 1.5, 7)]);
        let back = MetricInstance::from_json(&inst.to_json()).unwrap();
        assert_eq!(inst, back);
    }

    #[test]
    fn malformed_files_are_rejected() {
        let no_metric = r#"{"dimension": null, "points": ["a"], "centers": ["b"], "balls": []}"#;
        assert!(MetricInstance::from_json(no_metric).is_err());
        let names_in_euclid = r#"{"dimension": 2, "points": ["a"], "centers": [], "balls": []}"#;
        assert!(MetricInstance::from_json(names_in_euclid).is_err());
    }
}
