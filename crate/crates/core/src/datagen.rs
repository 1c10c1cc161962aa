//! Synthetic structured scenes and dataset files.
//!
//! Genuine points are drawn along lines and circles with Gaussian noise
//! perpendicular to the structure; anomalies are uniform in the bounding box
//! of the genuine points. Datasets are stored as CSV (`x,y,label`, label 0
//! genuine / 1 anomaly). The generating structures go to a JSON sidecar so
//! the noise level can be estimated later.

use std::f64::consts::{FRAC_PI_4, PI, TAU};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::models::{AmbientPoint, Circle, Dataset, Label, Line, StructureModel};
use crate::{seeded_rng, Error, Result, Rng};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SceneKind {
    Lines,
    Circles,
    Mixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub kind: SceneKind,
    pub structures: usize,
    pub points_per_structure: usize,
    pub sigma: f64,
    /// Target `|A| / |X|`.
    pub anomaly_ratio: f64,
    /// Structures are laid out in `[-extent, extent]²`.
    pub extent: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    /// Two crossing lines, 125 points each, plus as many anomalies.
    fn default() -> Self {
        Self {
            kind: SceneKind::Lines,
            structures: 2,
            points_per_structure: 125,
            sigma: 0.05,
            anomaly_ratio: 0.5,
            extent: 2.5,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.anomaly_ratio > 0.0 && self.anomaly_ratio < 1.0) {
            return Err(Error::config(format!(
                "anomaly ratio must lie in (0, 1), got {}",
                self.anomaly_ratio
            )));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::config(format!("sigma must be >= 0, got {}", self.sigma)));
        }
        if self.structures == 0 || self.points_per_structure == 0 {
            return Err(Error::config("need at least one structure with one point"));
        }
        if !(self.extent > 0.0 && self.extent.is_finite()) {
            return Err(Error::config(format!("extent must be positive, got {}", self.extent)));
        }
        Ok(())
    }

    /// `round(|G| · ratio / (1 − ratio))`.
    pub fn anomaly_count(&self) -> usize {
        let genuine = (self.structures * self.points_per_structure) as f64;
        (genuine * self.anomaly_ratio / (1.0 - self.anomaly_ratio)).round() as usize
    }
}

/// A generated dataset together with its ground-truth structures.
#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    pub data: Dataset,
    pub structures: Vec<StructureModel>,
}

#[derive(Clone, Copy, Debug)]
enum Shape {
    Segment { from: AmbientPoint, to: AmbientPoint },
    Ring { center: AmbientPoint, radius: f64 },
}

impl Shape {
    fn model(&self) -> Result<StructureModel> {
        match *self {
            Shape::Segment { from, to } => Line::through(from, to).map(StructureModel::Line),
            Shape::Ring { center, radius } => Circle::new(center, radius).map(StructureModel::Circle),
        }
    }

    fn sample(&self, noise: &Normal<f64>, rng: &mut Rng) -> AmbientPoint {
        match *self {
            Shape::Segment { from, to } => {
                let (dx, dy) = (to.x - from.x, to.y - from.y);
                let len = dx.hypot(dy);
                let (nx, ny) = (-dy / len, dx / len);
                let t: f64 = rng.random();
                let off = noise.sample(rng);
                AmbientPoint::new(from.x + t * dx + off * nx, from.y + t * dy + off * ny)
            }
            Shape::Ring { center, radius } => {
                let angle = rng.random::<f64>() * TAU;
                let r = radius + noise.sample(rng);
                AmbientPoint::new(center.x + r * angle.cos(), center.y + r * angle.sin())
            }
        }
    }
}

/// `count` lines through the origin at evenly spaced angles starting at
/// 45°, clipped to the square. Two lines form an "X".
fn line_layout(count: usize, extent: f64) -> Vec<Shape> {
    (0..count)
        .map(|i| {
            let angle = FRAC_PI_4 + PI * i as f64 / count as f64;
            let (s, c) = angle.sin_cos();
            let reach = extent / c.abs().max(s.abs());
            Shape::Segment {
                from: AmbientPoint::new(-reach * c, -reach * s),
                to: AmbientPoint::new(reach * c, reach * s),
            }
        })
        .collect()
}

/// Equal circles with centers along the x axis, spaced 1.2 radii apart so
/// neighbours overlap without being concentric.
fn circle_layout(count: usize, extent: f64) -> Vec<Shape> {
    let radius = extent / (1.0 + 0.6 * (count as f64 - 1.0));
    (0..count)
        .map(|i| Shape::Ring {
            center: AmbientPoint::new((i as f64 - (count as f64 - 1.0) / 2.0) * 1.2 * radius, 0.0),
            radius,
        })
        .collect()
}

fn layout(spec: &SyntheticSpec) -> Vec<Shape> {
    match spec.kind {
        SceneKind::Lines => line_layout(spec.structures, spec.extent),
        SceneKind::Circles => circle_layout(spec.structures, spec.extent),
        SceneKind::Mixed => {
            let circles = spec.structures / 2;
            let mut shapes = line_layout(spec.structures - circles, spec.extent);
            if circles > 0 {
                shapes.extend(circle_layout(circles, spec.extent * 0.6));
            }
            shapes
        }
    }
}

pub fn generate(spec: &SyntheticSpec) -> Result<Scene> {
    spec.validate()?;
    let mut rng = seeded_rng(spec.seed);
    let noise = Normal::new(0.0, spec.sigma).map_err(|e| Error::config(e.to_string()))?;
    let shapes = layout(spec);
    let structures = shapes.iter().map(Shape::model).collect::<Result<Vec<_>>>()?;

    let mut points = Vec::new();
    for shape in &shapes {
        for _ in 0..spec.points_per_structure {
            points.push(shape.sample(&noise, &mut rng));
        }
    }
    let genuine = points.len();
    let (mut lo, mut hi) = (points[0], points[0]);
    for p in &points {
        lo = AmbientPoint::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = AmbientPoint::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    for _ in 0..spec.anomaly_count() {
        let (u, v): (f64, f64) = (rng.random(), rng.random());
        points.push(AmbientPoint::new(lo.x + u * (hi.x - lo.x), lo.y + v * (hi.y - lo.y)));
    }
    let mut labels = vec![Label::Genuine; genuine];
    labels.resize(points.len(), Label::Anomaly);
    Ok(Scene {
        data: Dataset::new(points, labels)?,
        structures,
    })
}

/// Formats a float with 17 significant digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn save_csv(data: &Dataset, path: &Path) -> Result<()> {
    let io = |e| Error::io(path, e);
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(out, "x,y,label").map_err(io)?;
    for (p, l) in data.points().iter().zip(data.labels()) {
        writeln!(out, "{},{},{}", format_f64(p.x), format_f64(p.y), l.as_flag()).map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn load_csv(path: &Path) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let format = |line: u64, message: String| Error::Format {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut points = Vec::new();
    let mut labels = Vec::new();
    let mut saw_header = false;
    for record in reader.records() {
        let record = record.map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::io(path, std::io::Error::other(e.to_string())),
            _ => format(e.position().map_or(0, |p| p.line()), e.to_string()),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if !saw_header {
            if record.iter().collect::<Vec<_>>() != ["x", "y", "label"] {
                return Err(format(line, "expected header `x,y,label`".into()));
            }
            saw_header = true;
            continue;
        }
        if record.len() != 3 {
            return Err(format(line, format!("expected 3 columns, found {}", record.len())));
        }
        let coord = |i: usize| {
            record[i]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format(line, format!("invalid coordinate `{}`", &record[i])))
        };
        let (x, y) = (coord(0)?, coord(1)?);
        let label = record[2]
            .parse::<u8>()
            .ok()
            .and_then(Label::from_flag)
            .ok_or_else(|| format(line, format!("invalid label `{}`, expected 0 or 1", &record[2])))?;
        points.push(AmbientPoint::new(x, y));
        labels.push(label);
    }
    if !saw_header {
        return Err(format(1, "empty file".into()));
    }
    if points.is_empty() {
        return Err(format(2, "no data rows".into()));
    }
    Dataset::new(points, labels)
}

#[derive(Serialize, Deserialize)]
struct StructuresFile {
    schema: u32,
    structures: Vec<StructureModel>,
}

/// Sidecar path holding the structures of `csv`: `d.csv` → `d.structures.json`.
pub fn structures_path(csv: &Path) -> PathBuf {
    csv.with_extension("structures.json")
}

pub fn save_structures(structures: &[StructureModel], path: &Path) -> Result<()> {
    let body = serde_json::to_string_pretty(&StructuresFile {
        schema: SCHEMA_VERSION,
        structures: structures.to_vec(),
    })?;
    std::fs::write(path, body + "\n").map_err(|e| Error::io(path, e))
}

pub fn load_structures(path: &Path) -> Result<Vec<StructureModel>> {
    let body = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: StructuresFile = serde_json::from_str(&body)?;
    if file.schema != SCHEMA_VERSION {
        return Err(Error::config(format!("unsupported structures schema {}", file.schema)));
    }
    Ok(file.structures)
}
