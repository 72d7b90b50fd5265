//! One function per command. Each returns CSV rows and a JSON result.

use crate::config::{Command, Resolved};
use crate::CliError;
use holelab_core::continuation::{
    fit_series, mirrored, sweep, test_continuation, test_symmetry, ContinuationError,
    ContinuationReport, PowerSeriesFit, Problem, SweepResult, SymmetryReport, Verdict,
};
use holelab_core::convergence::{
    convergence_study, ConvergenceError, ConvergenceReport, ConvergenceSetup,
};
use holelab_core::mesh3::Vec3;
use holelab_core::Frame;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub eps: f64,
    pub frame: Frame,
    pub target_index: usize,
    pub value: f64,
    pub cond_estimate: f64,
}

#[derive(Debug)]
pub struct Outcome {
    pub rows: Vec<Row>,
    pub result: serde_json::Value,
    /// Overall continuation verdict, for `continuation` only.
    pub verdict: Option<Verdict>,
}

fn continuation_error(e: ContinuationError) -> CliError {
    use ContinuationError::*;
    match e {
        EmptyGrid | ZeroInGrid | NotMonotone(_) | NonFinite(_) | NotPositive(_) => {
            CliError::config("grid", e.to_string())
        }
        DegreeTooHigh { .. } => CliError::config("degree", e.to_string()),
        BadTarget { .. } => CliError::config("targets", e.to_string()),
        _ => CliError::Solver(e.to_string()),
    }
}

fn convergence_error(e: ConvergenceError) -> CliError {
    match e {
        ConvergenceError::Inadmissible { .. } => CliError::config("eps", e.to_string()),
        ConvergenceError::NoTargets => CliError::config("targets", e.to_string()),
        ConvergenceError::Mesh(_) => CliError::config("geometry", e.to_string()),
        _ => CliError::Solver(e.to_string()),
    }
}

/// Rows ordered by ε, then target set, then point; indices run over all sets.
fn rows(sweeps: &[SweepResult]) -> Vec<Row> {
    let Some(first) = sweeps.first() else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for (k, &eps) in first.grid.iter().enumerate() {
        let mut index = 0;
        for s in sweeps {
            for &value in &s.values[k] {
                out.push(Row {
                    eps,
                    frame: s.frame,
                    target_index: index,
                    value,
                    cond_estimate: s.conditions[k],
                });
                index += 1;
            }
        }
    }
    out
}

fn run_sweep(r: &Resolved, grid: &[f64]) -> Result<Vec<SweepResult>, CliError> {
    sweep(&r.problem, grid, &r.targets, r.exec).map_err(continuation_error)
}

fn to_json<T: Serialize>(v: &T) -> Result<serde_json::Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Output(e.to_string()))
}

#[derive(Serialize)]
struct FitEntry<'a> {
    frame: Frame,
    fit: &'a PowerSeriesFit,
    /// Coefficients of ε^i rather than of (ε/eps_scale)^i.
    unscaled: Vec<Vec<f64>>,
}

fn fit_entry(fit: &PowerSeriesFit) -> FitEntry<'_> {
    FitEntry {
        frame: fit.frame,
        fit,
        unscaled: (0..fit.coeffs.len())
            .map(|j| fit.unscaled_coeffs(j))
            .collect(),
    }
}

fn fits(r: &Resolved, sweeps: &[SweepResult]) -> Result<Vec<PowerSeriesFit>, CliError> {
    sweeps
        .iter()
        .map(|s| fit_series(s, r.degree).map_err(continuation_error))
        .collect()
}

/// A definite break in any target set settles the question; otherwise any
/// inconclusive set makes the whole run inconclusive.
pub fn overall_verdict(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
    let mut out = Verdict::Continues;
    for v in verdicts {
        match v {
            Verdict::Breaks => return Verdict::Breaks,
            Verdict::Inconclusive => out = Verdict::Inconclusive,
            Verdict::Continues => {}
        }
    }
    out
}

fn data_parity(problem: &Problem, frame: Frame) -> Option<i8> {
    match problem {
        Problem::Spectral { data, .. } => data.reflection_parity(frame),
        Problem::Bem { data, .. } => data.reflection_parity(frame),
    }
}

pub fn execute(r: &Resolved) -> Result<Outcome, CliError> {
    match r.command {
        Command::Solve => {
            let eps = r.eps.expect("resolve requires eps for solve");
            let sweeps = run_sweep(r, &[eps])?;
            #[derive(Serialize)]
            struct Solve<'a> {
                eps: f64,
                condition: f64,
                sets: &'a [SweepResult],
            }
            let result = to_json(&Solve {
                eps,
                condition: sweeps[0].conditions[0],
                sets: &sweeps,
            })?;
            Ok(Outcome {
                rows: rows(&sweeps),
                result,
                verdict: None,
            })
        }
        Command::Sweep => {
            let sweeps = run_sweep(r, &r.sweep_grid())?;
            #[derive(Serialize)]
            struct Sweep<'a> {
                signs: crate::config::Signs,
                sets: &'a [SweepResult],
            }
            let result = to_json(&Sweep {
                signs: r.signs,
                sets: &sweeps,
            })?;
            Ok(Outcome {
                rows: rows(&sweeps),
                result,
                verdict: None,
            })
        }
        Command::Fit => {
            let sweeps = run_sweep(r, &r.grid)?;
            let fits = fits(r, &sweeps)?;
            #[derive(Serialize)]
            struct Fit<'a> {
                fits: Vec<FitEntry<'a>>,
            }
            let result = to_json(&Fit {
                fits: fits.iter().map(fit_entry).collect(),
            })?;
            Ok(Outcome {
                rows: rows(&sweeps),
                result,
                verdict: None,
            })
        }
        Command::Continuation => {
            let positive = run_sweep(r, &r.grid)?;
            let negative = run_sweep(r, &mirrored(&r.grid))?;
            let fits = fits(r, &positive)?;
            let reports = fits
                .iter()
                .zip(&negative)
                .map(|(f, n)| test_continuation(f, n, &r.thresholds).map_err(continuation_error))
                .collect::<Result<Vec<ContinuationReport>, _>>()?;
            let verdict = overall_verdict(reports.iter().map(|rep| rep.verdict));
            #[derive(Serialize)]
            struct Set<'a> {
                fit: FitEntry<'a>,
                report: &'a ContinuationReport,
            }
            #[derive(Serialize)]
            struct Continuation<'a> {
                verdict: Verdict,
                data_eps_independent: bool,
                sets: Vec<Set<'a>>,
            }
            let result = to_json(&Continuation {
                verdict,
                data_eps_independent: r.problem.data_is_eps_independent(),
                sets: fits
                    .iter()
                    .zip(&reports)
                    .map(|(f, report)| Set {
                        fit: fit_entry(f),
                        report,
                    })
                    .collect(),
            })?;
            let mut all = rows(&negative);
            all.extend(rows(&positive));
            Ok(Outcome {
                rows: all,
                result,
                verdict: Some(verdict),
            })
        }
        Command::Symmetry => {
            let mut zetas = Vec::with_capacity(r.targets.len());
            for (k, set) in r.targets.iter().enumerate() {
                let zeta = match r.zeta.or_else(|| data_parity(&r.problem, set.frame)) {
                    Some(z) => z,
                    None => {
                        return Err(CliError::config(
                            "zeta",
                            format!("data have no reflection parity in the {:?} frame of targets[{k}]; give zeta", set.frame),
                        ))
                    }
                };
                zetas.push(zeta);
            }
            let sweeps = run_sweep(r, &r.grid)?;
            let fits = fits(r, &sweeps)?;
            let reports: Vec<SymmetryReport> = fits
                .iter()
                .zip(&zetas)
                .map(|(f, &z)| {
                    test_symmetry(
                        f,
                        z,
                        r.problem.symmetry_hypothesis(f.frame, z),
                        &r.thresholds,
                    )
                })
                .collect();
            #[derive(Serialize)]
            struct Set<'a> {
                fit: FitEntry<'a>,
                report: &'a SymmetryReport,
            }
            #[derive(Serialize)]
            struct Symmetry<'a> {
                sets: Vec<Set<'a>>,
            }
            let result = to_json(&Symmetry {
                sets: fits
                    .iter()
                    .zip(&reports)
                    .map(|(f, report)| Set {
                        fit: fit_entry(f),
                        report,
                    })
                    .collect(),
            })?;
            Ok(Outcome {
                rows: rows(&sweeps),
                result,
                verdict: None,
            })
        }
        Command::Convergence => {
            let (Some((inner, outer, base)), Problem::Bem { data, .. }) = (&r.surfaces, &r.problem)
            else {
                return Err(CliError::config(
                    "geometry",
                    "convergence needs mesh geometry",
                ));
            };
            let set = &r.targets[0];
            let setup = ConvergenceSetup {
                inner: inner.clone(),
                outer: outer.clone(),
                data: data.clone(),
                eps: r.eps.expect("resolve requires eps for convergence"),
                frame: set.frame,
                targets: set
                    .points
                    .iter()
                    .map(|p| {
                        let c = p.coords();
                        Vec3::new(c[0], c[1], c[2])
                    })
                    .collect(),
                options: r.options,
            };
            let report: ConvergenceReport =
                convergence_study(&setup, *base).map_err(convergence_error)?;
            let finest = report.levels.last().expect("a study has three levels");
            let rows = finest
                .values
                .iter()
                .enumerate()
                .map(|(j, &value)| Row {
                    eps: report.eps,
                    frame: report.frame,
                    target_index: j,
                    value,
                    cond_estimate: finest.condition,
                })
                .collect();
            Ok(Outcome {
                rows,
                result: to_json(&report)?,
                verdict: None,
            })
        }
    }
}
