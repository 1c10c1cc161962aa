//! Parametric structures in the plane and RANSAC-style pool sampling.
//!
//! A [`StructureModel`] is fitted from a minimal sample set (two points for a
//! line, three for a circle) and measures the residual of any ambient point.
//! [`sample_pool`] draws `m` such models from a dataset; the resulting
//! [`ModelPool`] defines the coordinates of the preference space.

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, Rng};

/// Absolute tolerance on norms and determinants of minimal samples.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Consecutive degenerate draws tolerated per requested model.
pub const RETRIES_PER_MODEL: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmbientPoint {
    pub x: f64,
    pub y: f64,
}

impl AmbientPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &AmbientPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Genuine,
    Anomaly,
}

impl Label {
    pub fn is_anomaly(self) -> bool {
        self == Label::Anomaly
    }

    /// CSV encoding: 0 genuine, 1 anomaly.
    pub fn as_flag(self) -> u8 {
        match self {
            Label::Genuine => 0,
            Label::Anomaly => 1,
        }
    }

    pub fn from_flag(flag: u8) -> Option<Self> {
        match flag {
            0 => Some(Label::Genuine),
            1 => Some(Label::Anomaly),
            _ => None,
        }
    }
}

/// Labelled points `X = G ∪ A`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    points: Vec<AmbientPoint>,
    labels: Vec<Label>,
}

impl Dataset {
    pub fn new(points: Vec<AmbientPoint>, labels: Vec<Label>) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(Error::config(format!(
                "{} points but {} labels",
                points.len(),
                labels.len()
            )));
        }
        if points.is_empty() {
            return Err(Error::config("dataset must contain at least one point"));
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::config(format!("point {i} has a non-finite coordinate")));
        }
        Ok(Self { points, labels })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[AmbientPoint] {
        &self.points
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn anomaly_count(&self) -> usize {
        self.labels.iter().filter(|l| l.is_anomaly()).count()
    }
}

/// Line `a·x + b·y + c = 0` with unit normal `(a, b)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Line {
    a: f64,
    b: f64,
    c: f64,
}

impl Line {
    /// Builds a line from arbitrary coefficients, normalizing the normal.
    pub fn from_coefficients(a: f64, b: f64, c: f64) -> Result<Self> {
        let norm = a.hypot(b);
        if !(norm > DEGENERACY_TOL) || !c.is_finite() {
            return Err(Error::DegenerateSample("line normal has zero length"));
        }
        Ok(Self {
            a: a / norm,
            b: b / norm,
            c: c / norm,
        })
    }

    pub fn through(p1: AmbientPoint, p2: AmbientPoint) -> Result<Self> {
        let (dx, dy) = (p2.x - p1.x, p2.y - p1.y);
        let len = dx.hypot(dy);
        if !(len > DEGENERACY_TOL) {
            return Err(Error::DegenerateSample("coincident points"));
        }
        let (a, b) = (-dy / len, dx / len);
        Ok(Self {
            a,
            b,
            c: -(a * p1.x + b * p1.y),
        })
    }

    pub fn coefficients(&self) -> (f64, f64, f64) {
        (self.a, self.b, self.c)
    }

    pub fn signed_residual(&self, p: &AmbientPoint) -> f64 {
        self.a * p.x + self.b * p.y + self.c
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    center: AmbientPoint,
    radius: f64,
}

impl Circle {
    pub fn new(center: AmbientPoint, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() || !center.is_finite() {
            return Err(Error::DegenerateSample("circle radius must be positive"));
        }
        Ok(Self { center, radius })
    }

    /// Circumcircle of three points.
    pub fn through(p1: AmbientPoint, p2: AmbientPoint, p3: AmbientPoint) -> Result<Self> {
        // Solve relative to p1 to keep the determinant well scaled.
        let (bx, by) = (p2.x - p1.x, p2.y - p1.y);
        let (cx, cy) = (p3.x - p1.x, p3.y - p1.y);
        let det = 2.0 * (bx * cy - by * cx);
        if !(det.abs() >= DEGENERACY_TOL) {
            return Err(Error::DegenerateSample("collinear points"));
        }
        let b2 = bx * bx + by * by;
        let c2 = cx * cx + cy * cy;
        let ux = (cy * b2 - by * c2) / det;
        let uy = (bx * c2 - cx * b2) / det;
        Circle::new(AmbientPoint::new(p1.x + ux, p1.y + uy), ux.hypot(uy))
    }

    pub fn center(&self) -> AmbientPoint {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn signed_residual(&self, p: &AmbientPoint) -> f64 {
        self.center.distance(p) - self.radius
    }
}

/// A fitted structure `θ` with its residual function `F(x, θ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StructureModel {
    Line(Line),
    Circle(Circle),
}

impl StructureModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            StructureModel::Line(_) => ModelKind::Line,
            StructureModel::Circle(_) => ModelKind::Circle,
        }
    }

    /// Signed residual: side of the line, or inside (<0) / outside (>0) the circle.
    pub fn signed_residual(&self, p: &AmbientPoint) -> f64 {
        match self {
            StructureModel::Line(l) => l.signed_residual(p),
            StructureModel::Circle(c) => c.signed_residual(p),
        }
    }

    /// Orthogonal distance of `p` from the structure.
    pub fn residual(&self, p: &AmbientPoint) -> f64 {
        self.signed_residual(p).abs()
    }
}

pub fn fit_line(p1: AmbientPoint, p2: AmbientPoint) -> Result<StructureModel> {
    Line::through(p1, p2).map(StructureModel::Line)
}

pub fn fit_circle(p1: AmbientPoint, p2: AmbientPoint, p3: AmbientPoint) -> Result<StructureModel> {
    Circle::through(p1, p2, p3).map(StructureModel::Circle)
}

pub fn residual(model: &StructureModel, x: &AmbientPoint) -> f64 {
    model.residual(x)
}

/// A family of structures that can be fitted from a minimal sample set.
pub trait ModelFamily: Sync {
    fn sample_size(&self) -> usize;

    /// Fits a structure to exactly `sample_size()` points.
    fn fit(&self, sample: &[AmbientPoint]) -> Result<StructureModel>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Line,
    Circle,
}

impl ModelFamily for ModelKind {
    fn sample_size(&self) -> usize {
        match self {
            ModelKind::Line => 2,
            ModelKind::Circle => 3,
        }
    }

    fn fit(&self, sample: &[AmbientPoint]) -> Result<StructureModel> {
        match (self, sample) {
            (ModelKind::Line, &[p1, p2]) => fit_line(p1, p2),
            (ModelKind::Circle, &[p1, p2, p3]) => fit_circle(p1, p2, p3),
            _ => Err(Error::InsufficientData {
                needed: self.sample_size(),
                got: sample.len(),
            }),
        }
    }
}

/// The `m` models spanning the preference space.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelPool {
    models: Vec<StructureModel>,
}

impl ModelPool {
    pub fn new(models: Vec<StructureModel>) -> Result<Self> {
        if models.is_empty() {
            return Err(Error::config("model pool must contain at least one model"));
        }
        Ok(Self { models })
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn models(&self) -> &[StructureModel] {
        &self.models
    }
}

/// Samples `m` models from `data`, cycling through `families` in order.
///
/// Each model is fitted to a minimal sample set drawn uniformly without
/// replacement from the points; sets are drawn independently, so duplicate
/// models are possible. Degenerate sets are redrawn, and sampling gives up
/// after `100·m` consecutive degenerate draws.
pub fn sample_pool<F: ModelFamily>(
    data: &Dataset,
    m: usize,
    families: &[F],
    rng: &mut Rng,
) -> Result<ModelPool> {
    if m == 0 {
        return Err(Error::config("pool size m must be at least 1"));
    }
    if families.is_empty() {
        return Err(Error::config("at least one model family is required"));
    }
    let n = data.len();
    let needed = families.iter().map(F::sample_size).max().unwrap_or(0);
    if n < needed {
        return Err(Error::InsufficientData { needed, got: n });
    }

    let limit = RETRIES_PER_MODEL.saturating_mul(m);
    let mut models = Vec::with_capacity(m);
    let mut sample = Vec::with_capacity(needed);
    let mut failures = 0usize;
    while models.len() < m {
        let family = &families[models.len() % families.len()];
        sample.clear();
        sample.extend(
            index::sample(rng, n, family.sample_size())
                .into_iter()
                .map(|i| data.points()[i]),
        );
        match family.fit(&sample) {
            Ok(model) => {
                models.push(model);
                failures = 0;
            }
            Err(Error::DegenerateSample(_)) => {
                failures += 1;
                if failures >= limit {
                    return Err(Error::PoolExhausted { attempts: failures });
                }
            }
            Err(e) => return Err(e),
        }
    }
    ModelPool::new(models)
}
