//! Spatial-reasoning task definitions: labeling predicates, balanced pair
//! generation, evaluation metrics, and the JSONL dataset format.

mod generate;
mod predicates;

pub use generate::{gen_pairs, GenSpec, ATTEMPTS_PER_PAIR};
pub use predicates::{swapped_class, topo_label};

use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{from_geojson_value, to_geojson, Geometry, GeometryError};

/// Number of direction classes (16-wind compass rose).
pub const DIRECTION_CLASSES: usize = 16;

/// Half-width of a direction bin in degrees.
pub const DIRECTION_BIN_DEG: f64 = 22.5;

#[derive(Debug, Error)]
pub enum TaskError {
    #[error("unsupported geometry pair for this task: {0}")]
    UnsupportedPair(String),
    #[error("direction is undefined: centroids coincide")]
    CoincidentCentroids,
    #[error("empty input")]
    EmptyInput,
    #[error("could not generate a valid '{class}' pair within {attempts} attempts")]
    GenerationBudgetExceeded { class: String, attempts: usize },
    #[error("dataset is corrupt: {0}")]
    BadDataset(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// The three supervised tasks the harness can train and evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Topology,
    Direction,
    Distance,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Topology => "topology",
            Task::Direction => "direction",
            Task::Distance => "distance",
        }
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "topology" => Ok(Task::Topology),
            "direction" => Ok(Task::Direction),
            "distance" => Ok(Task::Distance),
            other => Err(format!(
                "unknown task '{other}' (expected topology, direction, or distance)"
            )),
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which pair of geometry kinds a dataset holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairType {
    PointPoint,
    PointPolyline,
    PointPolygon,
    PolylinePolyline,
    PolylinePolygon,
    PolygonPolygon,
}

impl PairType {
    pub const ALL: [PairType; 6] = [
        PairType::PointPoint,
        PairType::PointPolyline,
        PairType::PointPolygon,
        PairType::PolylinePolyline,
        PairType::PolylinePolygon,
        PairType::PolygonPolygon,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PairType::PointPoint => "point-point",
            PairType::PointPolyline => "point-polyline",
            PairType::PointPolygon => "point-polygon",
            PairType::PolylinePolyline => "polyline-polyline",
            PairType::PolylinePolygon => "polyline-polygon",
            PairType::PolygonPolygon => "polygon-polygon",
        }
    }
}

impl FromStr for PairType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PairType::ALL
            .iter()
            .copied()
            .find(|pt| pt.name() == s)
            .ok_or_else(|| format!("unknown pair type '{s}'"))
    }
}

impl fmt::Display for PairType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Topological relation between two geometries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopoClass {
    Disjoint,
    Touches,
    Intersects,
    Contains,
    Within,
    Equals,
}

impl TopoClass {
    pub fn name(self) -> &'static str {
        match self {
            TopoClass::Disjoint => "disjoint",
            TopoClass::Touches => "touches",
            TopoClass::Intersects => "intersects",
            TopoClass::Contains => "contains",
            TopoClass::Within => "within",
            TopoClass::Equals => "equals",
        }
    }
}

impl fmt::Display for TopoClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The set of topological classes that can actually occur for a pair type,
/// in label-index order. `None` for point-point, where every relation
/// degenerates to equals/disjoint on measure-zero sets.
pub fn topo_classes(pt: PairType) -> Option<&'static [TopoClass]> {
    use TopoClass::*;
    match pt {
        PairType::PointPoint => None,
        PairType::PointPolyline => Some(&[Disjoint, Intersects]),
        PairType::PointPolygon => Some(&[Disjoint, Contains]),
        PairType::PolylinePolyline => Some(&[Disjoint, Intersects]),
        PairType::PolylinePolygon => Some(&[Disjoint, Touches, Intersects, Within]),
        PairType::PolygonPolygon => {
            Some(&[Disjoint, Touches, Intersects, Contains, Within, Equals])
        }
    }
}

/// Number of classes a classifier head needs for `(task, pair_type)`;
/// 0 for the regression task.
pub fn class_count(task: Task, pt: PairType) -> usize {
    match task {
        Task::Topology => topo_classes(pt).map_or(0, <[TopoClass]>::len),
        Task::Direction => DIRECTION_CLASSES,
        Task::Distance => 0,
    }
}

/// 16-wind compass class of the bearing from `a`'s centroid to `b`'s.
/// Class 0 is north, and indices advance clockwise (1 = NNE, 4 = E, ...).
/// Each bin spans [center - 11.25°, center + 11.25°) in bearing space.
pub fn dir_label(a: &Geometry, b: &Geometry) -> Result<u8, TaskError> {
    let ca = crate::geometry::centroid(a);
    let cb = crate::geometry::centroid(b);
    let (dx, dy) = (cb.x - ca.x, cb.y - ca.y);
    if dx == 0.0 && dy == 0.0 {
        return Err(TaskError::CoincidentCentroids);
    }
    let theta_deg = dy.atan2(dx).to_degrees();
    let class = ((90.0 - theta_deg + DIRECTION_BIN_DEG / 2.0).rem_euclid(360.0)
        / DIRECTION_BIN_DEG)
        .floor() as u8;
    Ok(class.min(DIRECTION_CLASSES as u8 - 1))
}

/// Euclidean distance between the centroids of `a` and `b`.
pub fn dist_label(a: &Geometry, b: &Geometry) -> f64 {
    let ca = crate::geometry::centroid(a);
    let cb = crate::geometry::centroid(b);
    (cb.x - ca.x).hypot(cb.y - ca.y)
}

/// Which split of a generated dataset a pair belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split '{other}'")),
        }
    }
}

/// One labeled geometry pair. Only the field for the dataset's task is set.
#[derive(Debug, Clone)]
pub struct PairSample {
    pub a: Geometry,
    pub b: Geometry,
    pub topo: Option<u8>,
    pub dir: Option<u8>,
    pub dist: Option<f64>,
    pub split: Split,
}

impl PairSample {
    /// The class index for classification tasks.
    pub fn class(&self) -> Option<u8> {
        self.topo.or(self.dir)
    }
}

/// A generated dataset together with the parameters that produced it.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub task: Task,
    pub pair_type: PairType,
    pub per_class: usize,
    pub seed: u64,
    pub config_hash: String,
    pub pairs: Vec<PairSample>,
}

impl Dataset {
    /// Class names in label order ("0.00" .. for distance, which has none).
    pub fn class_names(&self) -> Vec<String> {
        match self.task {
            Task::Topology => topo_classes(self.pair_type)
                .map(|cs| cs.iter().map(|c| c.name().to_string()).collect())
                .unwrap_or_default(),
            Task::Direction => DIRECTION_NAMES.iter().map(|s| s.to_string()).collect(),
            Task::Distance => Vec::new(),
        }
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = (usize, &PairSample)> {
        self.pairs
            .iter()
            .enumerate()
            .filter(move |(_, p)| p.split == split)
    }

    /// Serialize as JSONL: one header line, then one record per pair.
    pub fn write_jsonl(&self, w: &mut impl Write) -> Result<(), TaskError> {
        let header = serde_json::json!({
            "format": "p2v-pairs",
            "version": 1u32,
            "task": self.task,
            "pair_type": self.pair_type,
            "per_class": self.per_class,
            "seed": self.seed,
            "config": self.config_hash,
            "pairs": self.pairs.len(),
        });
        writeln!(w, "{header}")?;
        for p in &self.pairs {
            let mut rec = serde_json::Map::new();
            rec.insert("a".into(), to_geojson(&p.a));
            rec.insert("b".into(), to_geojson(&p.b));
            if let Some(t) = p.topo {
                rec.insert("topo".into(), t.into());
            }
            if let Some(d) = p.dir {
                rec.insert("dir".into(), d.into());
            }
            if let Some(d) = p.dist {
                rec.insert("dist".into(), d.into());
            }
            rec.insert("split".into(), p.split.name().into());
            writeln!(w, "{}", serde_json::Value::Object(rec))?;
        }
        Ok(())
    }

    pub fn read_jsonl(r: impl BufRead) -> Result<Dataset, TaskError> {
        let mut lines = r.lines();
        let header_line = lines
            .next()
            .ok_or_else(|| TaskError::BadDataset("missing header line".into()))??;
        let header: serde_json::Value = serde_json::from_str(&header_line)
            .map_err(|e| TaskError::BadDataset(format!("header is not JSON: {e}")))?;
        if header["format"] != "p2v-pairs" {
            return Err(TaskError::BadDataset("not a p2v-pairs file".into()));
        }
        if header["version"] != 1 {
            return Err(TaskError::BadDataset(format!(
                "unsupported version {}",
                header["version"]
            )));
        }
        let field_str = |name: &str| -> Result<String, TaskError> {
            header[name]
                .as_str()
                .map(str::to_string)
                .ok_or_else(|| TaskError::BadDataset(format!("header missing '{name}'")))
        };
        let task: Task = field_str("task")?.parse().map_err(TaskError::BadDataset)?;
        let pair_type: PairType = field_str("pair_type")?
            .parse()
            .map_err(TaskError::BadDataset)?;
        let per_class = header["per_class"]
            .as_u64()
            .ok_or_else(|| TaskError::BadDataset("header missing 'per_class'".into()))?
            as usize;
        let seed = header["seed"]
            .as_u64()
            .ok_or_else(|| TaskError::BadDataset("header missing 'seed'".into()))?;
        let config_hash = field_str("config")?;
        let declared = header["pairs"].as_u64().unwrap_or(0) as usize;

        let mut pairs = Vec::with_capacity(declared);
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: serde_json::Value = serde_json::from_str(&line)
                .map_err(|e| TaskError::BadDataset(format!("record {i}: {e}")))?;
            let a = from_geojson_value(&rec["a"])?;
            let b = from_geojson_value(&rec["b"])?;
            let split: Split = rec["split"]
                .as_str()
                .ok_or_else(|| TaskError::BadDataset(format!("record {i}: missing split")))?
                .parse()
                .map_err(TaskError::BadDataset)?;
            pairs.push(PairSample {
                a,
                b,
                topo: rec["topo"].as_u64().map(|v| v as u8),
                dir: rec["dir"].as_u64().map(|v| v as u8),
                dist: rec["dist"].as_f64(),
                split,
            });
        }
        if pairs.len() != declared {
            return Err(TaskError::BadDataset(format!(
                "header declares {declared} pairs but file holds {}",
                pairs.len()
            )));
        }
        Ok(Dataset {
            task,
            pair_type,
            per_class,
            seed,
            config_hash,
            pairs,
        })
    }
}

/// Compass names for the 16 direction classes, clockwise from north.
pub const DIRECTION_NAMES: [&str; 16] = [
    "N", "NNE", "NE", "ENE", "E", "ESE", "SE", "SSE", "S", "SSW", "SW", "WSW", "W", "WNW", "NW",
    "NNW",
];

/// Accuracy plus macro-averaged precision/recall/F1 over `n_classes`.
/// Classes absent from the labels are excluded from the macro averages and
/// reported in `absent_classes`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationMetrics {
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub absent_classes: Vec<usize>,
}

pub fn classification_metrics(
    preds: &[u8],
    labels: &[u8],
    n_classes: usize,
) -> Result<ClassificationMetrics, TaskError> {
    if preds.is_empty() || preds.len() != labels.len() || n_classes == 0 {
        return Err(TaskError::EmptyInput);
    }
    let mut tp = vec![0usize; n_classes];
    let mut fp = vec![0usize; n_classes];
    let mut fn_ = vec![0usize; n_classes];
    let mut correct = 0usize;
    for (&p, &l) in preds.iter().zip(labels) {
        let (p, l) = (p as usize, l as usize);
        if p >= n_classes || l >= n_classes {
            return Err(TaskError::BadDataset(format!(
                "class index out of range: pred {p}, label {l}, n_classes {n_classes}"
            )));
        }
        if p == l {
            correct += 1;
            tp[l] += 1;
        } else {
            fp[p] += 1;
            fn_[l] += 1;
        }
    }
    let mut absent = Vec::new();
    let (mut sp, mut sr, mut sf) = (0.0, 0.0, 0.0);
    let mut present = 0usize;
    for c in 0..n_classes {
        if tp[c] + fn_[c] == 0 {
            absent.push(c);
            continue;
        }
        present += 1;
        let prec = if tp[c] + fp[c] == 0 {
            0.0
        } else {
            tp[c] as f64 / (tp[c] + fp[c]) as f64
        };
        let rec = tp[c] as f64 / (tp[c] + fn_[c]) as f64;
        let f1 = if prec + rec == 0.0 {
            0.0
        } else {
            2.0 * prec * rec / (prec + rec)
        };
        sp += prec;
        sr += rec;
        sf += f1;
    }
    if present == 0 {
        return Err(TaskError::EmptyInput);
    }
    Ok(ClassificationMetrics {
        accuracy: correct as f64 / preds.len() as f64,
        macro_precision: sp / present as f64,
        macro_recall: sr / present as f64,
        macro_f1: sf / present as f64,
        absent_classes: absent,
    })
}

pub fn mean_absolute_error(preds: &[f64], targets: &[f64]) -> Result<f64, TaskError> {
    if preds.is_empty() || preds.len() != targets.len() {
        return Err(TaskError::EmptyInput);
    }
    let sum: f64 = preds
        .iter()
        .zip(targets)
        .map(|(p, t)| (p - t).abs())
        .sum();
    Ok(sum / preds.len() as f64)
}
