use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use strata::bifurcation::continuation::ContinuationStep;
use strata::bifurcation::{
    continue_alpha, find_bifurcation_points, scan_eigencurves, BifurcationPoint, PipelineOptions, Rejection, Tolerances,
};
use strata::config::{check_non_resonance, NonResonanceReport};
use strata::lsbif::toys;
use strata::wavefield::{assemble_first_order, export_field, fmt_num, FieldGrid, FieldMetadata, EXPORT_FILES};
use strata::Config;

use crate::manifest::{ensure_writable, manifest_path, sha256_hex, write_json, write_manifest, write_text, RunManifest};
use crate::Failure;

pub struct LoadedConfig {
    pub config: Config,
    pub hash: String,
}

pub fn load(path: &Path) -> Result<LoadedConfig, Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone()).map_err(|e| Failure::validation(e.to_string()))?;
    let config = Config::from_json(&text).map_err(Failure::from)?;
    Ok(LoadedConfig { config, hash: sha256_hex(&bytes) })
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub config_hash: Option<String>,
    pub checks: Vec<Check>,
    pub resonance: Option<NonResonanceReport>,
}

pub fn validate(config: &Path) -> (ValidationReport, Option<Failure>) {
    let mut checks = Vec::new();
    let hash = std::fs::read(config).ok().map(|b| sha256_hex(&b));
    let loaded = match load(config) {
        Ok(l) => l,
        Err(f) => {
            checks.push(Check { name: "configuration".into(), ok: false, detail: f.message.clone() });
            let report = ValidationReport { ok: false, config_hash: hash, checks, resonance: None };
            return (report, Some(f));
        }
    };
    checks.push(Check {
        name: "configuration".into(),
        ok: true,
        detail: format!("{} interface(s), {} fluid layer(s)", loaded.config.fluid.n(), loaded.config.fluid.m()),
    });
    let resonance = check_non_resonance(&loaded.config.fluid, &loaded.config.lattice);
    let detail = if resonance.ok {
        "no vertical resonance on the dual lattice".to_string()
    } else {
        let hits: Vec<String> = resonance
            .violations
            .iter()
            .map(|h| match h.m {
                Some((m1, m2)) => format!("layer {} at k = ({m1},{m2}), |k| = {}", h.layer, h.k_mag),
                None => format!("layer {} at |k| = {}", h.layer, h.k_mag),
            })
            .collect();
        format!("resonant: {}", hits.join("; "))
    };
    checks.push(Check { name: "non-resonance".into(), ok: resonance.ok, detail: detail.clone() });
    let ok = resonance.ok;
    let report = ValidationReport { ok, config_hash: Some(loaded.hash), checks, resonance: Some(resonance) };
    (report, (!ok).then(|| Failure::validation(detail)))
}

pub fn scan_csv(config: &Config, grid: usize) -> Result<String, Failure> {
    let scan = scan_eigencurves(&config.fluid, &config.lattice, grid)?;
    let n = config.fluid.n();
    let mut out = String::from("theta");
    for which in ["k1", "k2"] {
        for l in 1..=n {
            let _ = write!(out, ",mu_{l}_{which}");
        }
    }
    out.push('\n');
    let curves: Vec<Vec<f64>> = (0..2).flat_map(|w| (0..n).map(move |l| (w, l))).map(|(w, l)| scan.curve(w, l)).collect();
    for (i, theta) in scan.thetas.iter().enumerate() {
        out.push_str(&fmt_num(*theta));
        for c in &curves {
            out.push(',');
            out.push_str(&fmt_num(c[i]));
        }
        out.push('\n');
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointsFile {
    pub config_hash: String,
    pub manifest: String,
    pub all_intersections_nonnegative: bool,
    pub accepted: Vec<BifurcationPoint>,
    pub rejected: Vec<Rejection>,
}

pub fn bifurcate(loaded: &LoadedConfig, grid: usize, rescue: bool, out: &Path) -> Result<PointsFile, Failure> {
    let opts = PipelineOptions { grid, rescue, tol: Tolerances::default() };
    let outcome = find_bifurcation_points(&loaded.config.fluid, &loaded.config.lattice, &opts)?;
    Ok(PointsFile {
        config_hash: loaded.hash.clone(),
        manifest: file_name(&manifest_path(out)),
        all_intersections_nonnegative: outcome.all_intersections_nonnegative,
        accepted: outcome.accepted,
        rejected: outcome.rejected,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContinuationFile {
    pub config_hash: String,
    pub manifest: String,
    pub start: usize,
    pub target: Vec<f64>,
    pub steps: Vec<ContinuationStep>,
    pub point: BifurcationPoint,
}

pub fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// A point taken from a `bifurcate` or `continue-alpha` output.
pub struct SelectedPoint {
    pub point: BifurcationPoint,
    pub config_hash: String,
}

pub fn select_point(points: &Path, index: usize) -> Result<SelectedPoint, Failure> {
    let text = std::fs::read_to_string(points).map_err(|e| Failure::io(format!("{}: {e}", points.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Failure::validation(format!("{}: {e}", points.display())))?;
    let parse = |v: serde_json::Value| {
        serde_json::from_value::<BifurcationPoint>(v).map_err(|e| Failure::validation(format!("malformed point: {e}")))
    };
    let config_hash = value.get("config_hash").and_then(|v| v.as_str()).unwrap_or_default().to_string();
    let point = if let Some(list) = value.get("accepted").and_then(|v| v.as_array()) {
        let v = list.get(index).cloned().ok_or_else(|| {
            Failure::validation(format!("point index {index} out of range: {} accepted point(s)", list.len()))
        })?;
        parse(v)?
    } else if let Some(v) = value.get("point") {
        if index != 0 {
            return Err(Failure::validation("a continuation output holds a single point; use --point 0".into()));
        }
        parse(v.clone())?
    } else {
        return Err(Failure::validation(format!("{} holds no bifurcation points", points.display())));
    };
    Ok(SelectedPoint { point, config_hash })
}

fn check_origin(selected: &SelectedPoint, loaded: &LoadedConfig, force: bool) -> Result<(), Failure> {
    if !force && !selected.config_hash.is_empty() && selected.config_hash != loaded.hash {
        return Err(Failure::validation("points were computed for a different configuration; pass --force".into()));
    }
    Ok(())
}

pub struct WavefieldArgs<'a> {
    pub points: &'a Path,
    pub index: usize,
    pub t: [f64; 2],
    pub grid: FieldGrid,
    pub out: &'a Path,
    pub force: bool,
}

pub fn wavefield(loaded: &LoadedConfig, args: &WavefieldArgs) -> Result<Vec<PathBuf>, Failure> {
    let selected = select_point(args.points, args.index)?;
    check_origin(&selected, loaded, args.force)?;
    if !selected.point.accepted() && !args.force {
        return Err(Failure::validation("the selected point is not verified; pass --force to export anyway".into()));
    }
    let manifest_file = args.out.join("manifest.json");
    let mut targets: Vec<PathBuf> = EXPORT_FILES.iter().map(|f| args.out.join(f)).collect();
    targets.push(manifest_file.clone());
    ensure_writable(&targets.iter().map(|p| p.as_path()).collect::<Vec<_>>(), args.force)?;
    let sample = assemble_first_order(&loaded.config.fluid, &loaded.config.lattice, &selected.point, args.t, args.grid)?;
    let mut meta = FieldMetadata::for_sample(&sample, &loaded.hash);
    meta.manifest = Some(file_name(&manifest_file));
    for w in &sample.warnings {
        eprintln!("warning: {w}");
    }
    let mut written = export_field(&sample, &meta, args.out, true)?;
    written.push(manifest_file);
    Ok(written)
}

pub fn continuation(
    loaded: &LoadedConfig,
    points: &Path,
    index: usize,
    target: &[f64],
    steps: usize,
    out: &Path,
    force: bool,
) -> Result<ContinuationFile, Failure> {
    let selected = select_point(points, index)?;
    check_origin(&selected, loaded, force)?;
    let fs = selected.point.fluid(&loaded.config.fluid)?;
    let result = continue_alpha(&fs, &loaded.config.lattice, &selected.point, target, steps, &Tolerances::default())?;
    Ok(ContinuationFile {
        config_hash: loaded.hash.clone(),
        manifest: file_name(&manifest_path(out)),
        start: index,
        target: target.to_vec(),
        steps: result.steps,
        point: result.point,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DemoCase {
    pub name: String,
    pub ok: bool,
    pub error: f64,
    pub tolerance: f64,
}

/// Runs the model problems of the reduction engine against their known
/// solution branches.
pub fn lsdemo() -> Vec<DemoCase> {
    let mut cases = Vec::new();
    let mut record = |name: &str, error: Option<f64>, tolerance: f64| {
        let error = error.unwrap_or(f64::INFINITY);
        cases.push(DemoCase { name: name.into(), ok: error < tolerance, error, tolerance });
    };

    let c_star = [0.5, -0.25];
    let pitch = toys::pitchfork(c_star);
    let s = [0.1, -0.2];
    record(
        "pitchfork branch c = c* + s^2",
        pitch.solve_branch(&s).ok().map(|b| (0..2).map(|i| (b.c[i] - c_star[i] - s[i] * s[i]).abs()).fold(0.0, f64::max)),
        1e-10,
    );

    let comp = toys::with_complement(c_star);
    record(
        "complement x3 = -s1^2",
        comp.solve_branch(&s).ok().map(|b| (b.x[2] + s[0] * s[0]).abs()),
        1e-10,
    );

    let k = toys::Coupling { m12: 0.3, m21: -0.2, p: 1.0, q: 0.5, u: 0.7, v: 1.2, w: 0.4 };
    let coupled = toys::coupled(c_star, k);
    let s = [0.05, 0.03];
    let rhs = [
        k.p * s[0] * s[0] + k.q * s[1] * s[1] - k.w * s[0] * s[1],
        k.u * s[0] * s[0] + k.v * s[1] * s[1],
    ];
    let det = 1.0 - k.m12 * k.m21;
    let expected = [
        c_star[0] + (rhs[0] - k.m12 * rhs[1]) / det,
        c_star[1] + (rhs[1] - k.m21 * rhs[0]) / det,
    ];
    record(
        "coupled branch against series",
        coupled.solve_branch(&s).ok().map(|b| (b.c[0] - expected[0]).abs().max((b.c[1] - expected[1]).abs())),
        1e-8,
    );

    let small = [6e-4, 8e-4];
    record(
        "remainder ratio at |s| = 1e-3",
        comp.solve_branch(&small).ok().map(|b| {
            let lin = [small[0], small[1], 0.0];
            let rem: f64 = b.x.iter().zip(lin).map(|(a, l)| (a - l).powi(2)).sum::<f64>().sqrt();
            rem / 1e-3
        }),
        0.1,
    );
    cases
}

pub fn finish(path: &Path, mut manifest: RunManifest, outputs: &[PathBuf]) -> Result<(), Failure> {
    manifest.outputs = outputs.iter().map(|p| file_name(p)).collect();
    write_manifest(path, &manifest)
}

pub fn write_report<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    write_json(path, value)
}

pub fn write_csv(path: &Path, text: &str) -> Result<(), Failure> {
    write_text(path, text)
}
