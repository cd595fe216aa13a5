//! Text file formats: JSON for triangulations, patches and rules, CSV and
//! coordinate lists for numeric output.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complex::{BuildError, DecorationMap, Dart, Triangulation, TriangulationBuilder};
use crate::generate::{FaceImage, GenerateError, SubstitutionRule};
use crate::morph::{Omega, Patch, PatchError};
use crate::operator::{LocalRow, LocalRule, OperatorMatrix};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("bad dart name {0:?}, expected \"u->v\"")]
    DartName(String),
    #[error("unknown dart {0}")]
    UnknownDart(String),
    #[error("cannot read {path}: {reason}")]
    Read { path: String, reason: String },
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Patch(#[from] PatchError),
    #[error(transparent)]
    Generate(#[from] GenerateError),
}

impl From<serde_json::Error> for IoError {
    fn from(e: serde_json::Error) -> Self {
        Self::Json(e.to_string())
    }
}

fn parse_dart_name(s: &str) -> Result<(i64, i64), IoError> {
    let bad = || IoError::DartName(s.to_string());
    let (a, b) = s.split_once("->").ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn find_dart(t: &Triangulation, name: &str) -> Result<Dart, IoError> {
    let (a, b) = parse_dart_name(name)?;
    t.dart_by_labels(a, b).ok_or_else(|| IoError::UnknownDart(name.to_string()))
}

/// On-disk triangulation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TriangulationFile {
    pub faces: Vec<[i64; 3]>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub decorations: BTreeMap<String, Vec<f64>>,
    pub degree_bound: usize,
}

impl TriangulationFile {
    pub fn from_triangulation(t: &Triangulation) -> Self {
        let mut decorations = BTreeMap::new();
        if t.decoration_dim() != 1 || !t.decorations().is_zero() {
            for d in t.darts() {
                decorations.insert(t.dart_name(d), t.decoration(d).to_vec());
            }
        }
        Self {
            faces: t.faces().iter().map(|f| f.map(|v| t.label(v))).collect(),
            decorations,
            degree_bound: t.degree_bound(),
        }
    }

    fn decoration_map(&self) -> Result<DecorationMap, IoError> {
        self.decorations
            .iter()
            .map(|(k, v)| Ok((parse_dart_name(k)?, v.clone())))
            .collect()
    }

    fn builder(&self) -> Result<TriangulationBuilder, IoError> {
        Ok(TriangulationBuilder::new(self.faces.clone())
            .degree_bound(self.degree_bound)
            .decorations(self.decoration_map()?))
    }

    /// Closed spheres and disks; pinched vertices are rejected.
    pub fn to_triangulation(&self) -> Result<Triangulation, IoError> {
        Ok(self.builder()?.build()?)
    }
}

pub fn triangulation_to_json(t: &Triangulation) -> String {
    serde_json::to_string_pretty(&TriangulationFile::from_triangulation(t)).expect("serializable")
}

pub fn triangulation_from_json(s: &str) -> Result<Triangulation, IoError> {
    serde_json::from_str::<TriangulationFile>(s)?.to_triangulation()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OmegaFile {
    Exact,
    Wildcard,
    /// Per-dart lists of `[lo, hi]`, one per decoration coordinate.
    Box { bounds: BTreeMap<String, Vec<[f64; 2]>> },
}

/// On-disk patch: a triangulation with a marked dart and a constraint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchFile {
    pub faces: Vec<[i64; 3]>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub decorations: BTreeMap<String, Vec<f64>>,
    pub degree_bound: usize,
    pub marked: String,
    pub omega: OmegaFile,
}

impl PatchFile {
    pub fn from_patch(a: &Patch) -> Self {
        let t = &a.tri;
        let base = TriangulationFile::from_triangulation(t);
        let omega = match &a.omega {
            Omega::Exact => OmegaFile::Exact,
            Omega::Wildcard => OmegaFile::Wildcard,
            Omega::Box(b) => OmegaFile::Box {
                bounds: t
                    .darts()
                    .map(|d| (t.dart_name(d), b[d.idx()].iter().map(|&(l, h)| [l, h]).collect()))
                    .collect(),
            },
        };
        Self {
            faces: base.faces,
            decorations: base.decorations,
            degree_bound: base.degree_bound,
            marked: t.dart_name(a.marked),
            omega,
        }
    }

    pub fn to_patch(&self) -> Result<Patch, IoError> {
        let base = TriangulationFile {
            faces: self.faces.clone(),
            decorations: self.decorations.clone(),
            degree_bound: self.degree_bound,
        };
        let tri = if self.faces.is_empty() {
            let (a, b) = parse_dart_name(&self.marked)?;
            if a == b {
                return Err(IoError::DartName(self.marked.clone()));
            }
            let map = base.decoration_map()?;
            let dim = map.values().next().map_or(1, Vec::len);
            let mut t = Triangulation::single_edge(a, b, dim.max(1), self.degree_bound);
            for ((u, v), value) in map {
                let d = t
                    .dart_by_labels(u, v)
                    .ok_or_else(|| IoError::UnknownDart(format!("{u}->{v}")))?;
                t.set_decoration(d, &value)?;
            }
            t
        } else {
            base.builder()?.allow_pinched(true).build()?
        };
        let marked = find_dart(&tri, &self.marked)?;
        let omega = match &self.omega {
            OmegaFile::Exact => Omega::Exact,
            OmegaFile::Wildcard => Omega::Wildcard,
            OmegaFile::Box { bounds } => {
                let mut b = vec![Vec::new(); tri.num_darts()];
                for (name, iv) in bounds {
                    b[find_dart(&tri, name)?.idx()] = iv.iter().map(|&[l, h]| (l, h)).collect();
                }
                Omega::Box(b)
            }
        };
        Ok(Patch::new(tri, marked, omega)?)
    }
}

pub fn patch_to_json(a: &Patch) -> String {
    serde_json::to_string_pretty(&PatchFile::from_patch(a)).expect("serializable")
}

pub fn patch_from_json(s: &str) -> Result<Patch, IoError> {
    serde_json::from_str::<PatchFile>(s)?.to_patch()
}

/// A patch given inline or as a path to a patch file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PatchRef {
    Inline(Box<PatchFile>),
    Path(String),
}

impl PatchRef {
    fn resolve(&self, read: &dyn Fn(&str) -> Result<String, IoError>) -> Result<Patch, IoError> {
        match self {
            Self::Inline(p) => p.to_patch(),
            Self::Path(path) => patch_from_json(&read(path)?),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaceImageFile {
    pub name: String,
    /// Decorations of the darts `a -> b`, `b -> c`, `c -> a`.
    pub key: [Vec<f64>; 3],
    /// The image disk; its marked dart is ignored.
    pub patch: PatchRef,
    /// Labels of the images of `a`, `b`, `c`.
    pub corners: [i64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleFile {
    pub dim: usize,
    pub faces: Vec<FaceImageFile>,
}

pub fn rule_to_json(rule: &SubstitutionRule) -> String {
    let faces = rule
        .images
        .iter()
        .enumerate()
        .map(|(i, img)| {
            let marked = img.patch.darts().next().expect("image has darts");
            let patch = Patch {
                tri: img.patch.clone(),
                marked,
                omega: Omega::Exact,
            };
            FaceImageFile {
                name: format!("face{i}"),
                key: img.key.clone(),
                patch: PatchRef::Inline(Box::new(PatchFile::from_patch(&patch))),
                corners: img.corners,
            }
        })
        .collect();
    serde_json::to_string_pretty(&RuleFile {
        dim: rule.dim,
        faces,
    })
    .expect("serializable")
}

/// Parse a substitution rule. Patch paths are handed to `read`.
pub fn rule_from_json(
    s: &str,
    read: &dyn Fn(&str) -> Result<String, IoError>,
) -> Result<SubstitutionRule, IoError> {
    let file: RuleFile = serde_json::from_str(s)?;
    let images = file
        .faces
        .iter()
        .map(|f| {
            let p = f.patch.resolve(read)?;
            Ok(FaceImage::new(f.key.clone(), p.tri, f.corners)?)
        })
        .collect::<Result<Vec<_>, IoError>>()?;
    Ok(SubstitutionRule::new(file.dim, images)?)
}

/// `[position, re, im]` triples.
type RowFile = Vec<(u32, f64, f64)>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalRowFile {
    pub weight: f64,
    pub row: RowFile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalEntryFile {
    /// Ball centred at the tail of its marked dart.
    pub ball: PatchRef,
    pub weight: f64,
    pub row: RowFile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalRuleFile {
    pub hopping_range: usize,
    #[serde(default)]
    pub with_decorations: bool,
    #[serde(default)]
    pub entries: Vec<LocalEntryFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<LocalRowFile>,
}

fn row_to_file(r: &LocalRow) -> RowFile {
    r.entries.iter().map(|&(p, c)| (p, c.re, c.im)).collect()
}

fn row_from_file(weight: f64, row: &RowFile) -> Result<LocalRow, IoError> {
    if !(weight > 0.0) || !weight.is_finite() {
        return Err(IoError::Format(format!("row weight {weight} is not positive")));
    }
    if row.iter().any(|(_, re, im)| !re.is_finite() || !im.is_finite()) {
        return Err(IoError::Format("row coefficients must be finite".into()));
    }
    Ok(LocalRow {
        weight,
        entries: row.iter().map(|&(p, re, im)| (p, Complex64::new(re, im))).collect(),
    })
}

pub fn local_rule_to_json(rule: &LocalRule) -> Result<String, IoError> {
    let entries = rule
        .table
        .iter()
        .map(|(code, row)| {
            let ball = rule
                .balls
                .get(code)
                .ok_or_else(|| IoError::Format(format!("no ball stored for class {}", code.to_hex())))?;
            Ok(LocalEntryFile {
                ball: PatchRef::Inline(Box::new(PatchFile::from_patch(ball))),
                weight: row.weight,
                row: row_to_file(row),
            })
        })
        .collect::<Result<_, IoError>>()?;
    let file = LocalRuleFile {
        hopping_range: rule.hopping_range,
        with_decorations: rule.with_decorations,
        entries,
        default: rule.default.as_ref().map(|r| LocalRowFile {
            weight: r.weight,
            row: row_to_file(r),
        }),
    };
    Ok(serde_json::to_string_pretty(&file).expect("serializable"))
}

pub fn local_rule_from_json(
    s: &str,
    read: &dyn Fn(&str) -> Result<String, IoError>,
) -> Result<LocalRule, IoError> {
    let file: LocalRuleFile = serde_json::from_str(s)?;
    let mut rule = LocalRule::new(file.hopping_range, file.with_decorations);
    for e in &file.entries {
        let ball = e.ball.resolve(read)?;
        rule.insert(ball, row_from_file(e.weight, &e.row)?);
    }
    if let Some(d) = &file.default {
        rule.default = Some(row_from_file(d.weight, &d.row)?);
    }
    Ok(rule)
}

/// Reader that refuses every path, for inputs that must be self-contained.
pub fn no_files(path: &str) -> Result<String, IoError> {
    Err(IoError::Read {
        path: path.to_string(),
        reason: "external files are not allowed here".into(),
    })
}

/// Coordinate list `row col re im`, one entry per line, zero-based.
pub fn matrix_to_coo(h: &OperatorMatrix) -> String {
    let mut out = String::from("# row col re im\n");
    for (i, j, v) in h.triplets() {
        writeln!(out, "{i} {j} {:e} {:e}", v.re, v.im).unwrap();
    }
    out
}

/// CSV text with a comment line declaring columns and their units.
#[derive(Clone, Debug)]
pub struct CsvTable {
    columns: Vec<(String, String)>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    /// `columns` are `(name, unit)` pairs.
    pub fn new(columns: &[(&str, &str)]) -> Self {
        Self {
            columns: columns.iter().map(|(n, u)| (n.to_string(), u.to_string())).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let units: Vec<String> = self.columns.iter().map(|(n, u)| format!("{n} [{u}]")).collect();
        let mut out = format!("# columns: {}\n", units.join(", "));
        let header: Vec<&str> = self.columns.iter().map(|c| c.0.as_str()).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|c| quote(c)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn quote(cell: &str) -> String {
    if cell.contains([',', '"', '\n']) {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

/// Shortest text that parses back to the same float. Negative zero prints
/// as `0.0`.
pub fn num(x: f64) -> String {
    format!("{:?}", if x == 0.0 { 0.0 } else { x })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::ball;
    use crate::generate::{double_grid, ring_patch, theta};
    use crate::operator::{laplacian, local_rule_matrix, DecorationSchema};

    #[test]
    fn triangulation_round_trip() {
        let t = double_grid(3, 4).unwrap();
        let s = triangulation_to_json(&t);
        assert_eq!(triangulation_from_json(&s).unwrap(), t);
        let plain = crate::generate::hyperbolic_sphere(1).unwrap();
        let s = triangulation_to_json(&plain);
        assert!(!s.contains("decorations"));
        assert_eq!(triangulation_from_json(&s).unwrap(), plain);
        let odd = t.clone().with_decorations(1, (0..t.num_darts()).map(|i| 0.1 * i as f64 + 1e-17).collect());
        let odd = odd.unwrap();
        assert_eq!(triangulation_from_json(&triangulation_to_json(&odd)).unwrap(), odd);
    }

    #[test]
    fn patch_round_trip() {
        for p in [ring_patch(), theta(2).unwrap(), Patch::single_dart(2)] {
            assert_eq!(patch_from_json(&patch_to_json(&p)).unwrap(), p);
        }
        let t = double_grid(3, 1).unwrap();
        let b = ball(&t, Dart(5), 2);
        let boxed = Patch::new(
            b.tri.clone(),
            b.marked,
            Omega::Box(vec![vec![(-0.5, 0.5)]; b.tri.num_darts()]),
        )
        .unwrap();
        assert_eq!(patch_from_json(&patch_to_json(&boxed)).unwrap(), boxed);
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(triangulation_from_json("{"), Err(IoError::Json(_))));
        assert!(matches!(
            triangulation_from_json(r#"{"faces":[[0,1,2]],"degree_bound":12,"extra":1}"#),
            Err(IoError::Json(_))
        ));
        let bad = r#"{"faces":[[0,1,2]],"degree_bound":12,"decorations":{"0=>1":[1]}}"#;
        assert!(matches!(triangulation_from_json(bad), Err(IoError::DartName(_))));
        let p = r#"{"faces":[[0,1,2]],"degree_bound":12,"marked":"0->7","omega":{"kind":"exact"}}"#;
        assert!(matches!(patch_from_json(p), Err(IoError::UnknownDart(_))));
    }

    #[test]
    fn substitution_rule_round_trip() {
        let rule = SubstitutionRule::four_subdivision(&[0.0, 1.0], 0.0);
        let back = rule_from_json(&rule_to_json(&rule), &no_files).unwrap();
        assert_eq!(back.images.len(), rule.images.len());
        for (a, b) in rule.images.iter().zip(&back.images) {
            assert_eq!((a.key.clone(), a.corners), (b.key.clone(), b.corners));
            assert_eq!(a.patch, b.patch);
        }
        let with_path = r#"{"dim":1,"faces":[{"name":"a","key":[[0],[0],[0]],"patch":"a.json","corners":[0,1,2]}]}"#;
        assert!(matches!(rule_from_json(with_path, &no_files), Err(IoError::Read { .. })));
    }

    #[test]
    fn local_rule_round_trip() {
        let t = double_grid(4, 2).unwrap();
        let h = laplacian(&t, DecorationSchema::Natural).unwrap();
        let rule = LocalRule::from_operator(&t, &h, 1, false).unwrap();
        let text = local_rule_to_json(&rule).unwrap();
        let back = local_rule_from_json(&text, &no_files).unwrap();
        assert_eq!(back.table, rule.table);
        assert_eq!(local_rule_matrix(&t, &back).unwrap(), local_rule_matrix(&t, &rule).unwrap());
    }

    #[test]
    fn csv_and_coo() {
        let mut c = CsvTable::new(&[("index", "1"), ("eigenvalue", "1")]);
        c.push(vec!["0".into(), num(-4.0 / 3.0)]);
        let s = c.render();
        assert!(s.starts_with("# columns: index [1], eigenvalue [1]\nindex,eigenvalue\n"));
        assert_eq!(s.lines().nth(2).unwrap().split(',').nth(1).unwrap().parse::<f64>().unwrap(), -4.0 / 3.0);
        let t = crate::generate::hyperbolic_sphere(1).unwrap();
        let coo = matrix_to_coo(&laplacian(&t, DecorationSchema::Natural).unwrap());
        assert_eq!(coo.lines().count(), 1 + t.num_vertices() + t.num_darts());
    }
}
