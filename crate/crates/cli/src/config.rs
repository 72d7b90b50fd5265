//! Run configuration: the JSON schema and its validation into solver inputs.

use crate::CliError;
use holelab_core::bem3::{BemOptions, CartesianDataFamily};
use holelab_core::continuation::{
    check_grid, linspace, mirrored, Problem, TargetSet, Thresholds, BEM_DEGREE,
    DEFAULT_OUTER_RADIUS, SPECTRAL_DEGREE,
};
use holelab_core::convergence::SurfaceSpec;
use holelab_core::mesh3::{load_off, GeometryPair, TriMesh, Vec3};
use holelab_core::spectral::{SphereProblem, ZonalDataFamily};
use holelab_core::{Dimension, EpsPoly, Execution, Frame, Point};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Solve,
    Sweep,
    Fit,
    Continuation,
    Symmetry,
    Convergence,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub dimension: Option<usize>,
    pub geometry: Option<GeometrySpec>,
    pub data: Option<DataSpec>,
    pub grid: Option<GridSpec>,
    /// Single ε for `solve` and `convergence`.
    pub eps: Option<f64>,
    pub targets: Option<Vec<TargetSpec>>,
    #[serde(default)]
    pub thresholds: ThresholdSpec,
    pub degree: Option<usize>,
    /// Parity tested by `symmetry`; taken from the data when omitted.
    pub zeta: Option<i8>,
    pub execution: Option<Execution>,
    pub clearance_factor: Option<f64>,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum GeometrySpec {
    Spheres {
        r_inner: f64,
        r_outer: f64,
    },
    Meshes {
        inner: SurfaceSource,
        outer: SurfaceSource,
        /// Icosphere level, or number of midpoint refinements of an OFF file.
        #[serde(default = "default_subdivisions")]
        subdivisions: u32,
    },
}

fn default_subdivisions() -> u32 {
    2
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum SurfaceSource {
    Icosphere { radius: f64 },
    Ellipsoid { a: f64, b: f64, c: f64 },
    Path(PathBuf),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataKind {
    Zonal,
    Cartesian,
}

/// Boundary data. Zonal terms give a degree `l`, cartesian terms the
/// exponents `powers` of x^a y^b z^c; `coeffs` are decimal strings for the
/// coefficients of ε^0, ε^1, …
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    #[serde(rename = "type")]
    pub kind: DataKind,
    #[serde(default)]
    pub inner: Vec<DataTerm>,
    #[serde(default)]
    pub outer: Vec<DataTerm>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataTerm {
    pub l: Option<usize>,
    pub powers: Option<[u32; 3]>,
    pub coeffs: Vec<String>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "default_eps_min")]
    pub eps_min: f64,
    #[serde(default = "default_eps_max")]
    pub eps_max: f64,
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default)]
    pub signs: Signs,
}

fn default_eps_min() -> f64 {
    0.05
}
fn default_eps_max() -> f64 {
    0.3
}
fn default_count() -> usize {
    11
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            eps_min: default_eps_min(),
            eps_max: default_eps_max(),
            count: default_count(),
            signs: Signs::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Signs {
    #[default]
    Positive,
    Negative,
    Both,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub frame: Frame,
    pub points: Vec<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdSpec {
    pub atol: Option<f64>,
    pub rtol_break: Option<f64>,
    pub continues_factor: Option<f64>,
    pub breaks_factor: Option<f64>,
    pub symmetry_rtol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
    /// Copied into the report's provenance; nothing time-dependent is
    /// added otherwise.
    pub run_id: Option<String>,
}

/// Reads a config file, keeping the raw JSON for the provenance echo.
pub fn load(path: &Path) -> Result<(RunConfig, serde_json::Value), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config("--config", format!("{}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<(RunConfig, serde_json::Value), CliError> {
    let raw: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CliError::config("config", e.to_string()))?;
    let config = serde_path_to_error::deserialize(&raw).map_err(|e| {
        let path = e.path().to_string();
        CliError::config(
            if path == "." { "config" } else { &path },
            e.into_inner().to_string(),
        )
    })?;
    Ok((config, raw))
}

/// A config resolved against a command.
#[derive(Debug)]
pub struct Resolved {
    pub command: Command,
    pub problem: Problem,
    /// Present for mesh geometry, for `convergence`.
    pub surfaces: Option<(SurfaceSpec, SurfaceSpec, u32)>,
    pub targets: Vec<TargetSet>,
    /// Positive part of the grid.
    pub grid: Vec<f64>,
    pub signs: Signs,
    pub eps: Option<f64>,
    pub thresholds: Thresholds,
    pub degree: usize,
    pub zeta: Option<i8>,
    pub exec: Execution,
    pub options: BemOptions,
}

impl Resolved {
    /// The grid a plain sweep runs over, ascending.
    pub fn sweep_grid(&self) -> Vec<f64> {
        match self.signs {
            Signs::Positive => self.grid.clone(),
            Signs::Negative => mirrored(&self.grid),
            Signs::Both => {
                let mut g = mirrored(&self.grid);
                g.extend(&self.grid);
                g.sort_by(f64::total_cmp);
                g
            }
        }
    }
}

fn poly(field: &str, coeffs: &[String]) -> Result<EpsPoly, CliError> {
    if coeffs.is_empty() {
        return Err(CliError::config(field, "needs at least one coefficient"));
    }
    let mut out = Vec::with_capacity(coeffs.len());
    for (k, c) in coeffs.iter().enumerate() {
        let v: f64 = c.trim().parse().map_err(|_| {
            CliError::config(
                &format!("{field}[{k}]"),
                format!("{c:?} is not a decimal number"),
            )
        })?;
        if !v.is_finite() {
            return Err(CliError::config(&format!("{field}[{k}]"), "must be finite"));
        }
        out.push(v);
    }
    Ok(EpsPoly::new(out))
}

fn positive(field: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::config(
            field,
            format!("must be a positive number, got {v}"),
        ))
    }
}

fn family<K: PartialEq + Copy + std::fmt::Debug>(
    spec: &DataSpec,
    key: impl Fn(&DataTerm) -> Option<K>,
    key_name: &str,
    mut add: impl FnMut(bool, K, EpsPoly),
) -> Result<(), CliError> {
    for (side, terms) in [("inner", &spec.inner), ("outer", &spec.outer)] {
        let mut seen = Vec::new();
        for (k, t) in terms.iter().enumerate() {
            let field = format!("data.{side}[{k}]");
            if t.l.is_some() && t.powers.is_some() {
                return Err(CliError::config(
                    &field,
                    "give either l or powers, not both",
                ));
            }
            let key = key(t)
                .ok_or_else(|| CliError::config(&format!("{field}.{key_name}"), "missing"))?;
            if seen.contains(&key) {
                return Err(CliError::config(
                    &format!("{field}.{key_name}"),
                    format!("{key:?} given twice"),
                ));
            }
            seen.push(key);
            add(
                side == "inner",
                key,
                poly(&format!("{field}.coeffs"), &t.coeffs)?,
            );
        }
    }
    Ok(())
}

fn zonal_family(spec: &DataSpec) -> Result<ZonalDataFamily, CliError> {
    let mut d = ZonalDataFamily::new();
    family(
        spec,
        |t| t.l,
        "l",
        |inner, l, p| {
            let old = std::mem::take(&mut d);
            d = if inner {
                old.with_inner(l, p)
            } else {
                old.with_outer(l, p)
            };
        },
    )?;
    Ok(d)
}

fn cartesian_family(spec: &DataSpec) -> Result<CartesianDataFamily, CliError> {
    let mut d = CartesianDataFamily::new();
    family(
        spec,
        |t| t.powers,
        "powers",
        |inner, powers, p| {
            let old = std::mem::take(&mut d);
            d = if inner {
                old.with_inner(powers, p)
            } else {
                old.with_outer(powers, p)
            };
        },
    )?;
    Ok(d)
}

fn surface(field: &str, src: &SurfaceSource, base: &Path) -> Result<SurfaceSpec, CliError> {
    Ok(match src {
        SurfaceSource::Icosphere { radius } => SurfaceSpec::Sphere {
            radius: positive(&format!("{field}.icosphere.radius"), *radius)?,
        },
        SurfaceSource::Ellipsoid { a, b, c } => SurfaceSpec::Ellipsoid {
            a: positive(&format!("{field}.ellipsoid.a"), *a)?,
            b: positive(&format!("{field}.ellipsoid.b"), *b)?,
            c: positive(&format!("{field}.ellipsoid.c"), *c)?,
        },
        SurfaceSource::Path(p) => {
            let p = if p.is_relative() {
                base.join(p)
            } else {
                p.clone()
            };
            SurfaceSpec::Polyhedron(
                load_off(&p)
                    .map_err(|e| CliError::config(&format!("{field}.path"), e.to_string()))?,
            )
        }
    })
}

fn build_mesh(field: &str, spec: &SurfaceSpec, level: u32) -> Result<TriMesh, CliError> {
    spec.build(level)
        .map_err(|e| CliError::config(field, e.to_string()))
}

/// Default targets: two macroscopic points on a sphere between the largest
/// hole and the outer boundary.
fn default_targets(n: Dimension, hole: f64, outer: f64, eps_max: f64) -> TargetSet {
    let lo = eps_max * hole;
    let r = if 1.5 * lo < 0.75 * hole && 0.75 * hole < 0.75 * outer {
        0.75 * hole
    } else {
        0.5 * (lo + outer)
    };
    TargetSet::new(
        Frame::Macroscopic,
        vec![Point::polar(n, r, 0.3), Point::polar(n, r, -0.7)],
    )
}

/// Resolves `config` for `command`. Relative mesh paths are taken from
/// `base`, the directory of the config file.
pub fn resolve(command: Command, config: &RunConfig, base: &Path) -> Result<Resolved, CliError> {
    if let Some(c) = config.command {
        if c != command {
            return Err(CliError::config(
                "command",
                format!("config says {c:?} but {command:?} was requested"),
            ));
        }
    }
    let exec = config.execution.unwrap_or_default();
    let mut options = BemOptions {
        exec,
        ..BemOptions::default()
    };
    if let Some(c) = config.clearance_factor {
        options.clearance_factor = positive("clearance_factor", c)?;
    }

    let g = config.grid.unwrap_or_default();
    if !(g.eps_min.is_finite() && g.eps_min > 0.0) {
        return Err(CliError::config(
            "grid.eps_min",
            format!(
                "must be > 0 (the grid may not contain ε = 0), got {}",
                g.eps_min
            ),
        ));
    }
    if !(g.eps_max.is_finite() && g.eps_max > g.eps_min) {
        return Err(CliError::config(
            "grid.eps_max",
            format!("must exceed eps_min = {}", g.eps_min),
        ));
    }
    if g.count < 2 {
        return Err(CliError::config("grid.count", "needs at least 2 points"));
    }
    let grid = linspace(g.eps_min, g.eps_max, g.count);
    check_grid(&grid).map_err(|e| CliError::config("grid", e.to_string()))?;

    let eps = match config.eps {
        Some(e) if !e.is_finite() || e == 0.0 => {
            return Err(CliError::config(
                "eps",
                format!("must be finite and nonzero, got {e}"),
            ))
        }
        Some(e) => Some(e),
        None if matches!(command, Command::Solve | Command::Convergence) => {
            return Err(CliError::config("eps", format!("required by {command:?}")))
        }
        None => None,
    };
    let largest = match command {
        Command::Solve | Command::Convergence => eps.unwrap_or(0.0).abs(),
        _ => g.eps_max,
    };

    let default_geometry = GeometrySpec::Spheres {
        r_inner: 1.0,
        r_outer: DEFAULT_OUTER_RADIUS,
    };
    let geometry = config.geometry.as_ref().unwrap_or(&default_geometry);
    let mut surfaces = None;
    let (problem, hole, outer, n) = match geometry {
        GeometrySpec::Spheres { r_inner, r_outer } => {
            if command == Command::Convergence {
                return Err(CliError::config(
                    "geometry",
                    "convergence needs mesh geometry; sphere solves are exact per mode",
                ));
            }
            let n = config
                .dimension
                .ok_or_else(|| CliError::config("dimension", "required for sphere geometry"))?;
            let n = Dimension::new(n).map_err(|e| CliError::config("dimension", e.to_string()))?;
            let ri = positive("geometry.r_inner", *r_inner)?;
            let ro = positive("geometry.r_outer", *r_outer)?;
            let geometry = SphereProblem::new(n, ri, ro)
                .map_err(|e| CliError::config("geometry", e.to_string()))?;
            if largest >= geometry.eps_bound() {
                let field = if config.eps.is_some() && matches!(command, Command::Solve) {
                    "eps"
                } else {
                    "grid.eps_max"
                };
                return Err(CliError::config(
                    field,
                    format!(
                        "|ε| must stay below {} for these radii",
                        geometry.eps_bound()
                    ),
                ));
            }
            let data = match &config.data {
                None => ZonalDataFamily::new().with_inner(0, EpsPoly::constant(1.0)),
                Some(d) if d.kind == DataKind::Zonal => zonal_family(d)?,
                Some(_) => {
                    return Err(CliError::config(
                        "data.type",
                        "cartesian data need mesh geometry",
                    ))
                }
            };
            (Problem::Spectral { geometry, data }, ri, ro, n)
        }
        GeometrySpec::Meshes {
            inner,
            outer,
            subdivisions,
        } => {
            if let Some(n) = config.dimension {
                if n != 3 {
                    return Err(CliError::config(
                        "dimension",
                        "mesh geometry is three-dimensional",
                    ));
                }
            }
            let n = Dimension::new(3).expect("3 is a valid dimension");
            let si = surface("geometry.inner", inner, base)?;
            let so = surface("geometry.outer", outer, base)?;
            let mi = build_mesh("geometry.inner", &si, *subdivisions)?;
            let mo = build_mesh("geometry.outer", &so, *subdivisions)?;
            let pair = GeometryPair::new(mi, mo)
                .map_err(|e| CliError::config("geometry", e.to_string()))?;
            for e in [largest, -largest] {
                if e != 0.0 && !pair.admissibility(e).admissible {
                    let field = if matches!(command, Command::Solve | Command::Convergence) {
                        "eps"
                    } else {
                        "grid.eps_max"
                    };
                    return Err(CliError::config(
                        field,
                        format!(
                            "ε = {e} is not admissible (largest is about {})",
                            pair.eps_max
                        ),
                    ));
                }
            }
            let data = match &config.data {
                None => CartesianDataFamily::new().with_inner([0, 0, 0], EpsPoly::constant(1.0)),
                Some(d) if d.kind == DataKind::Cartesian => cartesian_family(d)?,
                Some(_) => {
                    return Err(CliError::config(
                        "data.type",
                        "zonal data need sphere geometry",
                    ))
                }
            };
            let hole = pair.inner.bounding_radius();
            let reach = pair.outer.distance_to(&Vec3::zeros()).0;
            surfaces = Some((si, so, *subdivisions));
            (
                Problem::Bem {
                    geometry: pair,
                    data,
                    options,
                },
                hole,
                reach,
                n,
            )
        }
    };

    let targets = match &config.targets {
        None => vec![default_targets(n, hole, outer, largest)],
        Some(sets) => {
            if sets.is_empty() {
                return Err(CliError::config("targets", "needs at least one target set"));
            }
            sets.iter()
                .map(|s| {
                    TargetSet::new(
                        s.frame,
                        s.points.iter().map(|p| Point::new(p.clone())).collect(),
                    )
                })
                .collect()
        }
    };
    for (k, set) in targets.iter().enumerate() {
        if set.points.is_empty() {
            return Err(CliError::config(
                &format!("targets[{k}].points"),
                "is empty",
            ));
        }
        set.check(&problem)
            .map_err(|e| CliError::config(&format!("targets[{k}]"), e.to_string()))?;
    }
    if command == Command::Convergence && targets.len() != 1 {
        return Err(CliError::config(
            "targets",
            "convergence takes a single target set",
        ));
    }

    let mut thresholds = Thresholds::for_problem(&problem);
    let t = &config.thresholds;
    for (name, value, slot) in [
        ("atol", t.atol, &mut thresholds.atol),
        ("rtol_break", t.rtol_break, &mut thresholds.rtol_break),
        (
            "continues_factor",
            t.continues_factor,
            &mut thresholds.continues_factor,
        ),
        (
            "breaks_factor",
            t.breaks_factor,
            &mut thresholds.breaks_factor,
        ),
        (
            "symmetry_rtol",
            t.symmetry_rtol,
            &mut thresholds.symmetry_rtol,
        ),
    ] {
        if let Some(v) = value {
            *slot = positive(&format!("thresholds.{name}"), v)?;
        }
    }
    let degree = config.degree.unwrap_or(match problem {
        Problem::Spectral { .. } => SPECTRAL_DEGREE,
        Problem::Bem { .. } => BEM_DEGREE,
    });
    if matches!(
        command,
        Command::Fit | Command::Continuation | Command::Symmetry
    ) && degree + 2 > grid.len()
    {
        return Err(CliError::config(
            "degree",
            format!("degree {degree} needs at least {} grid points", degree + 2),
        ));
    }
    if let Some(z) = config.zeta {
        if z != 1 && z != -1 {
            return Err(CliError::config(
                "zeta",
                format!("must be 1 or -1, got {z}"),
            ));
        }
    }
    Ok(Resolved {
        command,
        problem,
        surfaces,
        targets,
        grid,
        signs: g.signs,
        eps,
        thresholds,
        degree,
        zeta: config.zeta,
        exec,
        options,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve_text(command: Command, text: &str) -> Result<Resolved, CliError> {
        let (c, _) = parse(text)?;
        resolve(command, &c, Path::new("."))
    }

    fn field(e: CliError) -> String {
        match e {
            CliError::Config { field, .. } => field,
            other => panic!("not a config error: {other}"),
        }
    }

    #[test]
    fn defaults() {
        let r = resolve_text(Command::Continuation, r#"{"dimension": 4}"#).unwrap();
        assert_eq!(r.grid.len(), 11);
        assert_eq!(r.degree, SPECTRAL_DEGREE);
        let Problem::Spectral { geometry, .. } = &r.problem else {
            panic!()
        };
        assert_eq!(
            (geometry.r_inner, geometry.r_outer),
            (1.0, DEFAULT_OUTER_RADIUS)
        );
        assert_eq!(r.targets[0].points.len(), 2);
    }

    #[test]
    fn errors_name_the_field() {
        let bad = [
            (
                Command::Sweep,
                r#"{"dimension": 3, "grid": {"eps_min": 0, "eps_max": 0.3, "count": 5}}"#,
                "grid.eps_min",
            ),
            (Command::Sweep, r#"{}"#, "dimension"),
            (Command::Solve, r#"{"dimension": 3}"#, "eps"),
            (
                Command::Sweep,
                r#"{"dimension": 3, "data": {"type": "zonal", "inner": [{"l": 0, "coeffs": [1]}]}}"#,
                "data.inner[0].coeffs[0]",
            ),
            (
                Command::Sweep,
                r#"{"dimension": 3, "data": {"type": "zonal", "inner": [{"l": 0, "coeffs": ["x"]}]}}"#,
                "data.inner[0].coeffs[0]",
            ),
            (Command::Sweep, r#"{"dimension": 3, "colour": 1}"#, "colour"),
            (
                Command::Convergence,
                r#"{"dimension": 3, "eps": 0.5}"#,
                "geometry",
            ),
            (
                Command::Sweep,
                r#"{"dimension": 3, "targets": [{"frame": "macroscopic", "points": [[0, 0, 60]]}]}"#,
                "targets[0]",
            ),
            (
                Command::Fit,
                r#"{"dimension": 3, "command": "sweep"}"#,
                "command",
            ),
            (
                Command::Sweep,
                r#"{"dimension": 3, "data": {"type": "cartesian"}}"#,
                "data.type",
            ),
        ];
        for (cmd, text, want) in bad {
            assert_eq!(field(resolve_text(cmd, text).unwrap_err()), want, "{text}");
        }
    }

    #[test]
    fn signs_expand_the_grid() {
        let r = resolve_text(Command::Sweep, r#"{"dimension": 3, "grid": {"eps_min": 0.1, "eps_max": 0.2, "count": 2, "signs": "both"}}"#)
            .unwrap();
        assert_eq!(r.sweep_grid(), vec![-0.2, -0.1, 0.1, 0.2]);
    }

    #[test]
    fn mesh_geometry() {
        let text = r#"{
            "eps": 0.4,
            "geometry": {"type": "meshes", "inner": {"ellipsoid": {"a": 1, "b": 0.7, "c": 0.5}},
                         "outer": {"icosphere": {"radius": 2}}, "subdivisions": 1},
            "data": {"type": "cartesian", "inner": [{"powers": [0, 0, 1], "coeffs": ["1", "0.5"]}]}
        }"#;
        let r = resolve_text(Command::Convergence, text).unwrap();
        assert_eq!(r.degree, BEM_DEGREE);
        assert!(matches!(
            r.surfaces,
            Some((SurfaceSpec::Ellipsoid { .. }, SurfaceSpec::Sphere { .. }, 1))
        ));
    }
}
