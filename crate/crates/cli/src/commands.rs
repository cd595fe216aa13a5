use std::collections::BTreeMap;
use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use trispec::complex::Triangulation;
use trispec::generate::{
    capped_tube, double_grid, hyperbolic_sphere, ring_patch, substitution_sphere, tetrahedron, theta,
    triangular_ball, SubstitutionRule,
};
use trispec::io::{num, patch_to_json, triangulation_to_json, CsvTable};
use trispec::measure::{
    measure_distance, reiter_defect, rw_distribution_mc, rw_patch_density, uniform_measure, walk_average,
    EmpiricalMeasure, Weighting,
};
use trispec::morph::{delta_hat, Pointed};
use trispec::operator::OperatorSpec;
use trispec::spectral::{css_search_near, eigh, eigh_window, SpectralAtlas, TestFunction, WindowOptions};

use crate::config::run_config;
use crate::files::{
    dart, emit, load_any, load_patch, load_rule, load_triangulation, spec_from_args, vertex, Loaded,
};
use crate::{
    CliError, Command, Context, CssArgs, Format, GenArgs, Generator, IdsArgs, MetricArgs, SpectrumArgs,
    StatsArgs, ValidateArgs, WalkArgs,
};

pub(crate) fn dispatch(cmd: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Command::Gen(a) => gen(a, stdout),
        Command::Validate(a) => validate(a, stdout),
        Command::Spectrum(a) => spectrum(a, stdout),
        Command::Ids(a) => ids_cmd(a, stdout),
        Command::Css(a) => css(a, stdout, stderr),
        Command::Walk(a) => walk(a, stdout),
        Command::Metric(a) => metric(a, stdout),
        Command::Stats(a) => stats(a, stdout),
        Command::Run(a) => {
            let manifest = run_config(&a.config, a.out.as_deref())?;
            let _ = writeln!(stderr, "wrote {} files to {}", manifest.outputs.len(), manifest.out_dir);
            Ok(())
        }
    }
}

fn required<T>(v: Option<T>, flag: &str, what: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("{what} needs --{flag}")))
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// The shipped substitution rule: 4-subdivision over `{0, 1}`, inner edges `0`.
pub(crate) fn default_rule() -> SubstitutionRule {
    SubstitutionRule::four_subdivision(&[0.0, 1.0], 0.0)
}

fn gen(a: GenArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let what = "gen";
    let text = match a.generator {
        Generator::DoubleGrid => {
            let k = required(a.k, "k", "double-grid")?;
            let seed = required(a.seed, "seed", "double-grid")?;
            triangulation_to_json(&double_grid(k, seed).context(what)?)
        }
        Generator::Hyperbolic => {
            triangulation_to_json(&hyperbolic_sphere(required(a.k, "k", "hyperbolic")?).context(what)?)
        }
        Generator::Substitution => {
            let n = required(a.n, "n", "substitution")?;
            let rule = match &a.rule {
                Some(p) => load_rule(p)?,
                None => default_rule(),
            };
            let t = match &a.base {
                Some(p) => {
                    let mut t = load_triangulation(p)?;
                    for _ in 0..n {
                        t = trispec::generate::substitution_apply(&t, &rule).context(what)?;
                    }
                    t
                }
                None => {
                    let seed = required(a.seed, "seed", "substitution without --base")?;
                    substitution_sphere(&rule, n, seed).context(what)?
                }
            };
            triangulation_to_json(&t)
        }
        Generator::Theta => patch_to_json(&theta(required(a.n.or(a.k), "n", "theta")?).context(what)?),
        Generator::TriangularBall => {
            patch_to_json(&triangular_ball(required(a.k, "k", "triangular-ball")?).context(what)?)
        }
        Generator::Tube => triangulation_to_json(&capped_tube(required(a.rings, "rings", "tube")?).context(what)?),
        Generator::RingPatch => patch_to_json(&ring_patch()),
        Generator::Tetrahedron => triangulation_to_json(&tetrahedron()),
    };
    emit(a.out.as_deref(), &(text + "\n"), stdout)
}

#[derive(Serialize)]
struct ValidationOut {
    valid: bool,
    vertices: usize,
    euler_characteristic: i64,
    violations: Vec<String>,
}

fn validate(a: ValidateArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let loaded = load_any(&a.input)?;
    let t = loaded.tri();
    let report = t.validate();
    let text = match a.format {
        Format::Json => json(&ValidationOut {
            valid: report.is_valid(),
            vertices: t.num_vertices(),
            euler_characteristic: t.euler_characteristic(),
            violations: report.violations.iter().map(ToString::to_string).collect(),
        }),
        Format::Csv => {
            let mut csv = CsvTable::new(&[("rule", "name"), ("location", "dart or vertex")]);
            for v in &report.violations {
                csv.push(vec![v.rule.to_string(), v.location.clone()]);
            }
            csv.render()
        }
    };
    emit(None, &text, stdout)?;
    if report.is_valid() {
        Ok(())
    } else {
        Err(CliError::Compute {
            context: a.input.display().to_string(),
            message: format!("{} violations", report.violations.len()),
        })
    }
}

#[derive(Serialize)]
struct SpectrumOut {
    vertices: usize,
    eigenvalues: Vec<f64>,
    residuals: Vec<f64>,
}

fn spectrum(a: SpectrumArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let t = load_any(&a.input)?;
    let h = spec_from_args(&a.operator)?.build(t.tri()).context("operator")?;
    let (values, residuals) = match a.center {
        Some(c) => {
            let w = eigh_window(&h, c, a.count, WindowOptions::default()).context("spectrum")?;
            (w.eigenvalues, w.residuals)
        }
        None => {
            let s = eigh(&h).context("spectrum")?;
            let r = s.max_residual(&h);
            (s.eigenvalues().to_vec(), vec![r; s.len()])
        }
    };
    let text = match a.format {
        Format::Json => json(&SpectrumOut {
            vertices: t.tri().num_vertices(),
            eigenvalues: values,
            residuals,
        }),
        Format::Csv => {
            let mut csv = CsvTable::new(&[("index", "1"), ("eigenvalue", "1"), ("residual", "1")]);
            for (i, (v, r)) in values.iter().zip(&residuals).enumerate() {
                csv.push(vec![i.to_string(), num(*v), num(*r)]);
            }
            csv.render()
        }
    };
    emit(a.out.as_deref(), &text, stdout)
}

/// A stage family of sphere ensembles.
#[derive(Clone, Debug)]
pub(crate) enum Family {
    Grid { seed: u64 },
    Hyperbolic,
    Substitution { rule: SubstitutionRule, seed: u64 },
}

impl Family {
    pub(crate) fn sphere(&self, stage: usize) -> Result<Triangulation, CliError> {
        let ctx = format!("stage {stage}");
        match self {
            Self::Grid { seed } => double_grid(stage, *seed).context(ctx),
            Self::Hyperbolic => hyperbolic_sphere(stage).context(ctx),
            Self::Substitution { rule, seed } => substitution_sphere(rule, stage, *seed).context(ctx),
        }
    }
}

/// One row of an IDS table.
#[derive(Clone, Debug, Serialize)]
pub(crate) struct IdsLine {
    pub stage: usize,
    pub vertices: usize,
    pub phi: String,
    pub dart_uniform: f64,
    pub vertex_uniform: f64,
    /// Dart-uniform change from the previous stage at the same `phi`.
    pub gap: Option<f64>,
}

pub(crate) fn phis(phi: &str, ts: &[f64]) -> Result<Vec<TestFunction>, CliError> {
    if phi == "step" {
        ts.iter()
            .map(|&t| TestFunction::step(t).map_err(|e| CliError::Usage(format!("--t: {e}"))))
            .collect()
    } else {
        let f = phi
            .parse::<TestFunction>()
            .map_err(|e| CliError::Usage(format!("--phi: {e}")))?;
        Ok(vec![f])
    }
}

/// Evaluate every `phi` on each stage's sphere. Stages run in parallel; the
/// rows come back in stage order.
pub(crate) fn ids_lines(
    spheres: Vec<(usize, Triangulation)>,
    spec: &OperatorSpec,
    phis: &[TestFunction],
) -> Result<Vec<IdsLine>, CliError> {
    let per_stage: Vec<Vec<IdsLine>> = spheres
        .into_par_iter()
        .map(|(stage, t)| {
            let n = t.num_vertices();
            let m = EmpiricalMeasure::new(vec![Arc::new(t)], Weighting::DartUniform)
                .context(format!("stage {stage}"))?;
            let atlas = SpectralAtlas::new(&m, spec).context(format!("stage {stage}"))?;
            Ok(phis
                .iter()
                .map(|phi| IdsLine {
                    stage,
                    vertices: n,
                    phi: phi.to_string(),
                    dart_uniform: atlas.kappa_with(phi, Weighting::DartUniform),
                    vertex_uniform: atlas.kappa_with(phi, Weighting::VertexUniform),
                    gap: None,
                })
                .collect())
        })
        .collect::<Result<_, CliError>>()?;
    let mut lines: Vec<IdsLine> = Vec::new();
    let mut last: BTreeMap<String, f64> = BTreeMap::new();
    for stage in per_stage {
        for mut l in stage {
            l.gap = last.get(&l.phi).map(|p| (l.dart_uniform - p).abs());
            last.insert(l.phi.clone(), l.dart_uniform);
            lines.push(l);
        }
    }
    Ok(lines)
}

pub(crate) fn ids_csv(lines: &[IdsLine]) -> String {
    let mut csv = CsvTable::new(&[
        ("stage", "1"),
        ("vertices", "count"),
        ("phi", "test function"),
        ("dart_uniform", "fraction of states"),
        ("vertex_uniform", "fraction of states"),
        ("gap", "fraction of states"),
    ]);
    for l in lines {
        csv.push(vec![
            l.stage.to_string(),
            l.vertices.to_string(),
            l.phi.clone(),
            num(l.dart_uniform),
            num(l.vertex_uniform),
            l.gap.map(num).unwrap_or_default(),
        ]);
    }
    csv.render()
}

pub(crate) fn family(name: &str, seed: u64, rule: Option<SubstitutionRule>) -> Result<Family, String> {
    match name {
        "grid" | "double-grid" => Ok(Family::Grid { seed }),
        "hyperbolic" => Ok(Family::Hyperbolic),
        "substitution" => Ok(Family::Substitution {
            rule: rule.unwrap_or_else(default_rule),
            seed,
        }),
        other => Err(format!("unknown measure {other:?}; expected grid, hyperbolic or substitution")),
    }
}

fn ids_cmd(a: IdsArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let spec = spec_from_args(&a.operator)?;
    let phis = phis(&a.phi, &a.t)?;
    let spheres: Vec<(usize, Triangulation)> = match (&a.measure, a.input.is_empty()) {
        (Some(_), false) => return Err(CliError::Usage("give --measure or --input, not both".into())),
        (None, true) => return Err(CliError::Usage("ids needs --measure or --input".into())),
        (None, false) => a
            .input
            .iter()
            .enumerate()
            .map(|(i, p)| Ok((a.stages.get(i).copied().unwrap_or(i), load_triangulation(p)?)))
            .collect::<Result<_, CliError>>()?,
        (Some(name), true) => {
            if a.stages.is_empty() {
                return Err(CliError::Usage("--measure needs --stages".into()));
            }
            let rule = a.rule.as_deref().map(load_rule).transpose()?;
            let fam = family(name, a.seed, rule).map_err(CliError::Usage)?;
            a.stages
                .par_iter()
                .map(|&k| Ok((k, fam.sphere(k)?)))
                .collect::<Result<_, CliError>>()?
        }
    };
    let lines = ids_lines(spheres, &spec, &phis)?;
    let text = match a.format {
        Format::Json => json(&lines),
        Format::Csv => ids_csv(&lines),
    };
    emit(a.out.as_deref(), &text, stdout)
}

#[derive(Serialize)]
struct CssOut {
    eigenvalue: f64,
    residual: f64,
    host_residual: Option<f64>,
    support: Vec<i64>,
    values: Vec<(i64, f64, f64)>,
}

fn css(a: CssArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let patch = load_patch(&a.patch)?;
    let spec = spec_from_args(&a.operator)?;
    let r = a.r.unwrap_or_else(|| spec.hopping_range());
    let reports = css_search_near(&patch, &spec, a.t, r, a.tol, a.window).context("css")?;
    let host = a.host.as_deref().map(load_triangulation).transpose()?;
    let mut out = Vec::with_capacity(reports.len());
    for rep in &reports {
        let host_residual = match &host {
            Some(h) => Some(
                rep.verify_in(h, &spec)
                    .context("css host check")?
                    .ok_or_else(|| CliError::Compute {
                        context: "css host check".into(),
                        message: "patch does not occur in the host".into(),
                    })?,
            ),
            None => None,
        };
        let values = rep
            .support
            .iter()
            .map(|&l| {
                let z = rep.value_at(l).expect("support lies in the patch");
                (l, z.re, z.im)
            })
            .collect();
        out.push(CssOut {
            eigenvalue: rep.eigenvalue,
            residual: rep.residual,
            host_residual,
            support: rep.support.clone(),
            values,
        });
    }
    let _ = writeln!(stderr, "{} eigenfunction(s) near {}", out.len(), num(a.t));
    let text = match a.format {
        Format::Json => json(&out),
        Format::Csv => {
            let mut csv = CsvTable::new(&[
                ("report", "1"),
                ("eigenvalue", "1"),
                ("residual", "relative"),
                ("host_residual", "relative"),
                ("label", "vertex"),
                ("re", "amplitude"),
                ("im", "amplitude"),
            ]);
            for (i, o) in out.iter().enumerate() {
                for &(l, re, im) in &o.values {
                    csv.push(vec![
                        i.to_string(),
                        num(o.eigenvalue),
                        num(o.residual),
                        o.host_residual.map(num).unwrap_or_default(),
                        l.to_string(),
                        num(re),
                        num(im),
                    ]);
                }
            }
            csv.render()
        }
    };
    emit(a.out.as_deref(), &text, stdout)
}

fn walk(a: WalkArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let loaded = load_any(&a.input)?;
    let t = loaded.tri();
    let x = vertex(t, a.start)?;
    if a.probe.is_some() as u8 + a.reiter_to.is_some() as u8 + a.samples.is_some() as u8 > 1 {
        return Err(CliError::Usage("--probe, --reiter-to and --samples are exclusive".into()));
    }
    let mut scalar = |name: &str, unit: &str, value: f64| -> Result<(), CliError> {
        let text = match a.format {
            Format::Json => json(&BTreeMap::from([(name.to_string(), value)])),
            Format::Csv => {
                let mut csv = CsvTable::new(&[(name, unit)]);
                csv.push(vec![num(value)]);
                csv.render()
            }
        };
        emit(a.out.as_deref(), &text, stdout)
    };
    if let Some(p) = &a.probe {
        let patch = load_patch(p)?;
        return scalar("density", "probability", rw_patch_density(t, x, &patch, a.n, a.cesaro));
    }
    if let Some(y) = a.reiter_to {
        let y = vertex(t, y)?;
        let d = reiter_defect(t, x, y, a.n).context("walk")?;
        return scalar("reiter_defect", "l1 distance", d);
    }
    let probs = match a.samples {
        Some(s) => {
            if a.cesaro {
                return Err(CliError::Usage("--samples gives the n-step law; drop --cesaro".into()));
            }
            rw_distribution_mc(t, x, a.n, s, required(a.seed, "seed", "--samples")?).probs
        }
        None => walk_average(t, x, a.n, a.cesaro),
    };
    let rows: Vec<(i64, f64)> = t
        .vertices()
        .filter(|v| probs[v.idx()] > 0.0)
        .map(|v| (t.label(v), probs[v.idx()]))
        .collect();
    let text = match a.format {
        Format::Json => json(&rows),
        Format::Csv => {
            let mut csv = CsvTable::new(&[("label", "vertex"), ("probability", "1")]);
            for (l, p) in rows {
                csv.push(vec![l.to_string(), num(p)]);
            }
            csv.render()
        }
    };
    emit(a.out.as_deref(), &text, stdout)
}

#[derive(Serialize)]
struct MetricOut {
    delta_hat: f64,
    reverse: f64,
    delta: f64,
    radius: usize,
    epsilon: f64,
    exact: bool,
    frequency_distance: Option<f64>,
}

fn root(loaded: &Loaded, name: Option<&str>, which: &str) -> Result<trispec::complex::Dart, CliError> {
    match (name, loaded.marked()) {
        (Some(n), _) => dart(loaded.tri(), n),
        (None, Some(d)) => Ok(d),
        (None, None) => Err(CliError::Usage(format!("--{which}-dart is needed for a triangulation"))),
    }
}

fn metric(a: MetricArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let la = load_any(&a.a)?;
    let lb = load_any(&a.b)?;
    let p = Pointed::new(la.tri(), root(&la, a.a_dart.as_deref(), "a")?);
    let q = Pointed::new(lb.tri(), root(&lb, a.b_dart.as_deref(), "b")?);
    let fwd = delta_hat(p, q, a.r_max);
    let rev = delta_hat(q, p, a.r_max);
    let frequency_distance = if a.probe.is_empty() {
        None
    } else {
        let probes = a.probe.iter().map(|p| load_patch(p)).collect::<Result<Vec<_>, _>>()?;
        let ma = uniform_measure(vec![la.tri().clone()]).context("metric")?;
        let mb = uniform_measure(vec![lb.tri().clone()]).context("metric")?;
        Some(measure_distance(&ma, &mb, &probes).context("metric")?)
    };
    let out = MetricOut {
        delta_hat: fwd.value,
        reverse: rev.value,
        delta: fwd.value + rev.value,
        radius: fwd.radius,
        epsilon: fwd.epsilon,
        exact: fwd.exact,
        frequency_distance,
    };
    let text = match a.format {
        Format::Json => json(&out),
        Format::Csv => {
            let mut csv = CsvTable::new(&[
                ("delta_hat", "1"),
                ("reverse", "1"),
                ("delta", "1"),
                ("radius", "edges"),
                ("epsilon", "decoration units"),
                ("exact", "bool"),
                ("frequency_distance", "probability"),
            ]);
            csv.push(vec![
                num(out.delta_hat),
                num(out.reverse),
                num(out.delta),
                out.radius.to_string(),
                num(out.epsilon),
                out.exact.to_string(),
                out.frequency_distance.map(num).unwrap_or_default(),
            ]);
            csv.render()
        }
    };
    emit(None, &text, stdout)
}

/// Named counts describing a triangulation, in a fixed order.
pub(crate) fn stats_of(t: &Triangulation) -> Vec<(String, f64)> {
    let mut rows = vec![
        ("vertices".to_string(), t.num_vertices() as f64),
        ("edges".into(), t.num_edges() as f64),
        ("faces".into(), t.num_faces() as f64),
        ("darts".into(), t.num_darts() as f64),
        ("boundary_darts".into(), t.num_boundary_darts() as f64),
        ("euler_characteristic".into(), t.euler_characteristic() as f64),
        ("max_degree".into(), t.max_degree() as f64),
        ("degree_bound".into(), t.degree_bound() as f64),
    ];
    let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
    for v in t.vertices() {
        *hist.entry(t.degree(v)).or_default() += 1;
    }
    let n = t.num_vertices().max(1) as f64;
    for (d, c) in hist {
        rows.push((format!("degree_{d}_fraction"), c as f64 / n));
    }
    rows
}

fn stats(a: StatsArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let loaded = load_any(&a.input)?;
    let rows = stats_of(loaded.tri());
    let text = match a.format {
        Format::Json => json(&rows.iter().cloned().collect::<BTreeMap<_, _>>()),
        Format::Csv => {
            let mut csv = CsvTable::new(&[("quantity", "name"), ("value", "count or fraction")]);
            for (k, v) in rows {
                let text = if v.fract() == 0.0 { (v as i64).to_string() } else { num(v) };
                csv.push(vec![k, text]);
            }
            csv.render()
        }
    };
    emit(None, &text, stdout)
}
