use std::io::Write;
use std::path::{Path, PathBuf};

use trispec::complex::{Dart, Triangulation, Vertex};
use trispec::io::{
    local_rule_from_json, patch_from_json, rule_from_json, triangulation_from_json, IoError,
};
use trispec::morph::Patch;
use trispec::generate::SubstitutionRule;
use trispec::operator::{DecorationSchema, OperatorSpec, Slots};

use crate::{CliError, OperatorArgs, SchemaArg};

pub(crate) fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::File {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}

fn load_error(path: &Path, e: IoError) -> CliError {
    CliError::File {
        path: path.display().to_string(),
        reason: e.to_string(),
    }
}

/// Reader for paths nested inside a file, resolved against its directory.
pub(crate) fn nested_reader(base: &Path) -> impl Fn(&str) -> Result<String, IoError> {
    let dir: PathBuf = base.parent().map(Path::to_path_buf).unwrap_or_default();
    move |p: &str| {
        let full = dir.join(p);
        std::fs::read_to_string(&full).map_err(|e| IoError::Read {
            path: full.display().to_string(),
            reason: e.to_string(),
        })
    }
}

/// A file holding either a closed triangulation or a patch.
pub(crate) enum Loaded {
    Tri(Triangulation),
    Patch(Patch),
}

impl Loaded {
    pub(crate) fn tri(&self) -> &Triangulation {
        match self {
            Self::Tri(t) => t,
            Self::Patch(p) => &p.tri,
        }
    }

    pub(crate) fn marked(&self) -> Option<Dart> {
        match self {
            Self::Tri(_) => None,
            Self::Patch(p) => Some(p.marked),
        }
    }
}

pub(crate) fn load_any(path: &Path) -> Result<Loaded, CliError> {
    let text = read_text(path)?;
    let is_patch = serde_json::from_str::<serde_json::Value>(&text)
        .map_err(|e| load_error(path, e.into()))?
        .get("marked")
        .is_some();
    if is_patch {
        patch_from_json(&text).map(Loaded::Patch)
    } else {
        triangulation_from_json(&text).map(Loaded::Tri)
    }
    .map_err(|e| load_error(path, e))
}

pub(crate) fn load_triangulation(path: &Path) -> Result<Triangulation, CliError> {
    triangulation_from_json(&read_text(path)?).map_err(|e| load_error(path, e))
}

pub(crate) fn load_patch(path: &Path) -> Result<Patch, CliError> {
    patch_from_json(&read_text(path)?).map_err(|e| load_error(path, e))
}

pub(crate) fn load_rule(path: &Path) -> Result<SubstitutionRule, CliError> {
    rule_from_json(&read_text(path)?, &nested_reader(path)).map_err(|e| load_error(path, e))
}

pub(crate) fn schema(s: SchemaArg) -> DecorationSchema {
    match s {
        SchemaArg::Natural => DecorationSchema::Natural,
        SchemaArg::Decorated => DecorationSchema::Decorated(Slots::default()),
    }
}

/// `laplacian`, `magnetic` or `rule:PATH`.
pub(crate) fn operator_spec(name: &str, schema_arg: SchemaArg) -> Result<OperatorSpec, CliError> {
    let s = schema(schema_arg);
    match name {
        "laplacian" => Ok(OperatorSpec::Laplacian(s)),
        "magnetic" => Ok(OperatorSpec::Magnetic(s)),
        other => match other.strip_prefix("rule:") {
            Some(p) => {
                let path = Path::new(p);
                let rule = local_rule_from_json(&read_text(path)?, &nested_reader(path))
                    .map_err(|e| load_error(path, e))?;
                Ok(OperatorSpec::Local(rule))
            }
            None => Err(CliError::Usage(format!(
                "unknown operator {other:?}; expected laplacian, magnetic or rule:PATH"
            ))),
        },
    }
}

pub(crate) fn spec_from_args(a: &OperatorArgs) -> Result<OperatorSpec, CliError> {
    operator_spec(&a.operator, a.schema)
}

pub(crate) fn vertex(t: &Triangulation, label: i64) -> Result<Vertex, CliError> {
    t.vertex_by_label(label)
        .ok_or_else(|| CliError::Usage(format!("no vertex labelled {label}")))
}

pub(crate) fn dart(t: &Triangulation, name: &str) -> Result<Dart, CliError> {
    let bad = || CliError::Usage(format!("no dart {name:?}, expected \"u->v\" naming an edge"));
    let (a, b) = name.split_once("->").ok_or_else(bad)?;
    let a: i64 = a.trim().parse().map_err(|_| bad())?;
    let b: i64 = b.trim().parse().map_err(|_| bad())?;
    t.dart_by_labels(a, b).ok_or_else(bad)
}

/// Write to `out` if given, else to stdout.
pub(crate) fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(p) => write_file(p, text),
        None => stdout.write_all(text.as_bytes()).map_err(|e| CliError::File {
            path: "<stdout>".into(),
            reason: e.to_string(),
        }),
    }
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    let fail = |e: std::io::Error| CliError::File {
        path: path.display().to_string(),
        reason: e.to_string(),
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(fail)?;
    }
    std::fs::write(path, text).map_err(fail)
}
