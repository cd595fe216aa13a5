//! TOML experiment configs and the pipeline behind `trispec run`.
//!
//! ```toml
//! generator = "hyperbolic"   # grid | hyperbolic | substitution
//! stages = [1, 2, 3]         # or `k = 3` for stages 1..=3
//! seed = 7                   # required by grid and substitution
//! out = "results"
//! operator = "laplacian"     # laplacian | magnetic | rule:PATH
//! schema = "natural"         # natural | decorated
//! t = [-1.5, -1.0]           # step test functions, or
//! phi = ["poly:0,1"]         # any test function specs
//! probes = ["ring.json"]     # patch files for frequencies.csv
//! ```
//!
//! Paths are relative to the config file.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use trispec::complex::Triangulation;
use trispec::generate::{boundary_word, theta, Letter};
use trispec::io::{num, CsvTable};
use trispec::measure::{patch_frequency, uniform_measure};
use trispec::morph::Patch;
use trispec::spectral::TestFunction;

use crate::commands::{family, ids_csv, ids_lines, phis, Family};
use crate::files::{load_patch, load_rule, operator_spec, read_text, write_file};
use crate::{CliError, Context, SchemaArg};

/// The step grid used when a config names neither `t` nor `phi`.
pub const DEFAULT_T: [f64; 5] = [-1.5, -1.25, -1.0, -0.75, -0.5];

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub generator: String,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub stages: Vec<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub operator: Option<String>,
    #[serde(default)]
    pub schema: Option<String>,
    /// Substitution rule file.
    #[serde(default)]
    pub rule: Option<String>,
    #[serde(default)]
    pub t: Vec<f64>,
    #[serde(default)]
    pub phi: Vec<String>,
    #[serde(default)]
    pub probes: Vec<String>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            let field = msg
                .split('`')
                .nth(1)
                .filter(|_| msg.contains("field"))
                .unwrap_or("<document>")
                .to_string();
            CliError::Config { field, reason: msg }
        })
    }

    pub fn stage_list(&self) -> Result<Vec<usize>, CliError> {
        match (self.k, self.stages.is_empty()) {
            (Some(_), false) => Err(CliError::config("stages", "give `k` or `stages`, not both")),
            (Some(k), true) => Ok((1..=k).collect()),
            (None, false) => Ok(self.stages.clone()),
            (None, true) => Err(CliError::config("stages", "missing; give `k` or `stages`")),
        }
    }

    fn needs_seed(&self) -> bool {
        matches!(self.generator.as_str(), "grid" | "double-grid" | "substitution")
    }

    fn test_functions(&self) -> Result<Vec<TestFunction>, CliError> {
        if !self.phi.is_empty() && !self.t.is_empty() {
            return Err(CliError::config("phi", "give `phi` or `t`, not both"));
        }
        if self.phi.is_empty() {
            let ts = if self.t.is_empty() { DEFAULT_T.to_vec() } else { self.t.clone() };
            return phis("step", &ts).map_err(|e| CliError::config("t", e.to_string()));
        }
        self.phi
            .iter()
            .map(|s| {
                s.parse::<TestFunction>()
                    .map_err(|e| CliError::config("phi", format!("{s:?}: {e}")))
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HashedFile {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Record of one run. Hashes cover the data files only; runtimes vary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub out_dir: String,
    pub config: HashedFile,
    pub inputs: Vec<HashedFile>,
    pub outputs: Vec<HashedFile>,
    pub workers: usize,
    pub runtimes_ms: Vec<(String, f64)>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn hashed(path: &str, text: &str) -> HashedFile {
    HashedFile {
        path: path.to_string(),
        sha256: sha256_hex(text.as_bytes()),
        bytes: text.len(),
    }
}

struct Timer(Vec<(String, f64)>);

impl Timer {
    fn time<T>(&mut self, name: &str, f: impl FnOnce() -> Result<T, CliError>) -> Result<T, CliError> {
        let start = Instant::now();
        let out = f()?;
        self.0.push((name.to_string(), start.elapsed().as_secs_f64() * 1e3));
        Ok(out)
    }
}

fn stages_csv(spheres: &[(usize, Triangulation)]) -> String {
    let mut csv = CsvTable::new(&[
        ("stage", "1"),
        ("vertices", "count"),
        ("edges", "count"),
        ("faces", "count"),
        ("euler_characteristic", "1"),
        ("max_degree", "edges"),
        ("valid", "bool"),
    ]);
    for (k, t) in spheres {
        csv.push(vec![
            k.to_string(),
            t.num_vertices().to_string(),
            t.num_edges().to_string(),
            t.num_faces().to_string(),
            t.euler_characteristic().to_string(),
            t.max_degree().to_string(),
            t.validate().is_valid().to_string(),
        ]);
    }
    csv.render()
}

/// Boundary words of the first hyperbolic patch and its substitution images.
fn theta_words_csv(n_max: usize) -> Result<String, CliError> {
    let mut csv = CsvTable::new(&[
        ("n", "1"),
        ("length", "letters"),
        ("a_count", "letters"),
        ("b_count", "letters"),
        ("ratio", "1"),
    ]);
    let mut w = boundary_word(&theta(1).context("theta-words")?).context("theta-words")?;
    let mut prev: Option<usize> = None;
    for n in 1..=n_max {
        if n > 1 {
            w = w.substitute();
        }
        csv.push(vec![
            n.to_string(),
            w.len().to_string(),
            w.count(Letter::A).to_string(),
            w.count(Letter::B).to_string(),
            prev.map(|p| num(w.len() as f64 / p as f64)).unwrap_or_default(),
        ]);
        prev = Some(w.len());
    }
    Ok(csv.render())
}

fn frequencies_csv(spheres: &[(usize, Triangulation)], probes: &[(String, Patch)]) -> Result<String, CliError> {
    let mut csv = CsvTable::new(&[("stage", "1"), ("probe", "file"), ("frequency", "probability")]);
    for (k, t) in spheres {
        let m = uniform_measure(vec![t.clone()]).context(format!("stage {k}"))?;
        for (name, a) in probes {
            csv.push(vec![k.to_string(), name.clone(), num(patch_frequency(&m, a))]);
        }
    }
    Ok(csv.render())
}

/// Run the pipeline of the config at `path`. `out` overrides its output
/// directory.
pub fn run_config(path: &Path, out: Option<&Path>) -> Result<Manifest, CliError> {
    let text = read_text(path)?;
    let cfg = ExperimentConfig::parse(&text)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let resolve = |p: &str| base.join(p);

    let stages = cfg.stage_list()?;
    let seed = match (cfg.seed, cfg.needs_seed()) {
        (Some(s), _) => s,
        (None, false) => 0,
        (None, true) => {
            return Err(CliError::config(
                "seed",
                format!("the {} generator is randomized and needs a seed", cfg.generator),
            ))
        }
    };
    let schema = match cfg.schema.as_deref().unwrap_or("natural") {
        "natural" => SchemaArg::Natural,
        "decorated" => SchemaArg::Decorated,
        other => return Err(CliError::config("schema", format!("unknown schema {other:?}"))),
    };
    let op_name = cfg.operator.clone().unwrap_or_else(|| "laplacian".into());
    let op_name = match op_name.strip_prefix("rule:") {
        Some(p) => format!("rule:{}", resolve(p).display()),
        None => op_name,
    };
    let phis = cfg.test_functions()?;

    let mut inputs = Vec::new();
    let mut record = |p: &Path| -> Result<(), CliError> {
        inputs.push(hashed(&p.display().to_string(), &read_text(p)?));
        Ok(())
    };
    let rule = match &cfg.rule {
        Some(r) => {
            let p = resolve(r);
            record(&p)?;
            Some(load_rule(&p)?)
        }
        None => None,
    };
    if let Some(p) = op_name.strip_prefix("rule:") {
        record(Path::new(p))?;
    }
    let probes: Vec<(String, Patch)> = cfg
        .probes
        .iter()
        .map(|name| {
            let p = resolve(name);
            record(&p)?;
            Ok((name.clone(), load_patch(&p)?))
        })
        .collect::<Result<_, CliError>>()?;
    let spec = match operator_spec(&op_name, schema) {
        Err(CliError::Usage(m)) => return Err(CliError::config("operator", m)),
        other => other?,
    };
    let fam: Family = family(&cfg.generator, seed, rule).map_err(|m| CliError::config("generator", m))?;

    let out_dir: PathBuf = match (out, &cfg.out) {
        (Some(o), _) => o.to_path_buf(),
        (None, Some(o)) => resolve(o),
        (None, None) => resolve("out"),
    };

    let mut timer = Timer(Vec::new());
    let mut files: Vec<(&str, String)> = Vec::new();
    let spheres: Vec<(usize, Triangulation)> = timer.time("generate", || {
        use rayon::prelude::*;
        stages.par_iter().map(|&k| Ok((k, fam.sphere(k)?))).collect()
    })?;
    files.push(("stages.csv", stages_csv(&spheres)));
    if matches!(fam, Family::Hyperbolic) {
        let n_max = stages.iter().copied().max().unwrap_or(1);
        files.push(("theta-words.csv", timer.time("theta-words", || theta_words_csv(n_max))?));
    }
    if !probes.is_empty() {
        files.push(("frequencies.csv", timer.time("frequencies", || frequencies_csv(&spheres, &probes))?));
    }
    let lines = timer.time("ids", || ids_lines(spheres, &spec, &phis))?;
    files.push(("ids.csv", ids_csv(&lines)));

    let mut outputs = Vec::new();
    for (name, body) in &files {
        write_file(&out_dir.join(name), body)?;
        outputs.push(hashed(name, body));
    }
    let manifest = Manifest {
        tool: "trispec".into(),
        version: crate::VERSION.into(),
        out_dir: out_dir.display().to_string(),
        config: hashed(&path.display().to_string(), &text),
        inputs,
        outputs,
        workers: rayon::current_num_threads(),
        runtimes_ms: timer.0,
    };
    let mut body = serde_json::to_string_pretty(&manifest).expect("serializable");
    body.push('\n');
    write_file(&out_dir.join("manifest.json"), &body)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_errors_name_the_field() {
        let e = ExperimentConfig::parse("generator = \"grid\"\nstagez = [1]\n").unwrap_err();
        assert!(matches!(e, CliError::Config { ref field, .. } if field == "stagez"), "{e}");
        let e = ExperimentConfig::parse("k = 3\n").unwrap_err();
        assert!(matches!(e, CliError::Config { ref field, .. } if field == "generator"), "{e}");
    }

    #[test]
    fn stage_list_forms() {
        let mut c = ExperimentConfig::parse("generator = \"hyperbolic\"\nk = 3\n").unwrap();
        assert_eq!(c.stage_list().unwrap(), vec![1, 2, 3]);
        c.stages = vec![2];
        assert!(c.stage_list().is_err());
        c.k = None;
        assert_eq!(c.stage_list().unwrap(), vec![2]);
    }

    #[test]
    fn default_grid_is_five_steps() {
        let c = ExperimentConfig::parse("generator = \"grid\"\nk = 2\nseed = 1\n").unwrap();
        assert_eq!(c.test_functions().unwrap().len(), 5);
    }

    #[test]
    fn word_table_lengths() {
        let csv = theta_words_csv(4).unwrap();
        let lengths: Vec<&str> = csv
            .lines()
            .skip(2)
            .map(|l| l.split(',').nth(1).unwrap())
            .collect();
        assert_eq!(lengths, ["7", "21", "56", "147"]);
    }
}
