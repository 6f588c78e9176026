//! Executes a parsed manifest: runs the requested analyses in declared
//! order, assembles the deterministic report, and reports whether any
//! theorem hypothesis failed.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use geoball::ballvol::{self, FitConfig};
use geoball::curvature;
use geoball::gaussbonnet::{self, GridSpec};
use geoball::gray::{BallVolumeSeries, GrayCoefficients};
use geoball::quadrature::SphereRule;
use geoball::spaceform::{self, EulerCheck, ModelKind, Tolerances};
use geoball::Result;

use crate::manifest::{Analysis, Manifest, PointsSpec, RadiiSpec};
use crate::report::{fmt_float, fmt_point, tsv_row, ReportFiles, PER_POINT_HEADER, PER_RADIUS_HEADER};

/// Overall verdict of a run. Hypothesis failure is a structured outcome
/// distinct from tool failure, so callers can map it to its own exit code.
#[derive(Clone, Debug)]
pub enum RunStatus {
    Passed,
    HypothesisFailed(Vec<String>),
}

#[derive(Debug)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub output_dir: PathBuf,
    pub written: Vec<PathBuf>,
}

fn yesno(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn passfail(b: bool) -> &'static str {
    if b {
        "pass"
    } else {
        "FAIL"
    }
}

/// Runs every analysis in the manifest and writes the report files.
/// Returns `Err` only for tool-level failures (bad geometry requests,
/// integration breakdown, unwritable output); refuted hypotheses come
/// back as `RunStatus::HypothesisFailed`.
pub fn execute(manifest: &Manifest, out_override: Option<&Path>) -> Result<RunOutcome> {
    let metric = manifest.manifold.build()?;
    let points = manifest.points.resolve(&metric);
    let radii = manifest.radii.values();
    let (n1, n2, n3) = manifest.numeric.rule;
    let rule = SphereRule::product(n1, n2, n3);

    let mut summary = String::new();
    let mut per_point: Option<String> = None;
    let mut per_radius: Option<String> = None;
    let mut failed: Vec<String> = Vec::new();

    let s = &mut summary;
    let _ = writeln!(s, "geoball run summary");
    let _ = writeln!(s, "===================");
    let _ = writeln!(s);
    let _ = writeln!(s, "manifold: {}", metric.name());
    let _ = writeln!(s, "chart covers manifold: {}", yesno(metric.covers_manifold()));
    let analysis_list = if manifest.analyses.is_empty() {
        "none".to_string()
    } else {
        manifest.analyses.iter().map(|a| a.token()).collect::<Vec<_>>().join(", ")
    };
    let _ = writeln!(s, "analyses: {analysis_list}");
    match &manifest.points {
        PointsSpec::Sampled { count, seed } => {
            let _ = writeln!(s, "points: {count} sampled with seed {seed}");
        }
        PointsSpec::Explicit(pts) => {
            let _ = writeln!(s, "points: {} explicit", pts.len());
        }
    }
    match &manifest.radii {
        RadiiSpec::Range { min, max, count, log } => {
            let spacing = if *log { "log-spaced" } else { "linearly spaced" };
            let _ = writeln!(
                s,
                "radii: {count} {spacing} in [{}, {}]",
                fmt_float(*min),
                fmt_float(*max)
            );
        }
        RadiiSpec::Explicit(list) => {
            let _ = writeln!(s, "radii: {} explicit", list.len());
        }
    }

    for analysis in &manifest.analyses {
        let _ = writeln!(s);
        match analysis {
            Analysis::Invariants => {
                let _ = writeln!(s, "[invariants]");
                let mut table = String::new();
                let _ = writeln!(table, "{PER_POINT_HEADER}");
                let mut tau_lo = f64::INFINITY;
                let mut tau_hi = f64::NEG_INFINITY;
                for p in &points {
                    let frame = curvature::curvature_frame(&metric, p)?;
                    let coeffs = GrayCoefficients::from_frame(&frame);
                    tau_lo = tau_lo.min(frame.tau);
                    tau_hi = tau_hi.max(frame.tau);
                    let mut row: Vec<f64> = frame.point.coords().to_vec();
                    row.extend_from_slice(&[
                        frame.tau,
                        frame.norm_riemann2,
                        frame.norm_ricci2,
                        frame.norm_weyl2,
                        frame.norm_traceless_ricci2,
                        frame.laplacian_tau,
                        coeffs.a2,
                        coeffs.a4,
                    ]);
                    let _ = writeln!(table, "{}", tsv_row(&row));
                }
                per_point = Some(table);
                let _ = writeln!(s, "points evaluated: {}", points.len());
                let _ = writeln!(s, "tau min: {}", fmt_float(tau_lo));
                let _ = writeln!(s, "tau max: {}", fmt_float(tau_hi));
                let _ = writeln!(s, "rows written: per_point.tsv");
            }
            Analysis::BallVolumes => {
                // The radius sweep tracks the first point of the sample.
                let base = &points[0];
                let frame = curvature::curvature_frame(&metric, base)?;
                let series = BallVolumeSeries::from_coefficients(&GrayCoefficients::from_frame(&frame));
                let mut table = String::new();
                let _ = writeln!(table, "{PER_RADIUS_HEADER}");
                let mut max_resid: f64 = 0.0;
                for &r in &radii {
                    let est = ballvol::ball_volume(&metric, base, r, &rule, manifest.numeric.ode_tol)?;
                    let predicted = series.eval(r);
                    let residual = est.value - predicted;
                    max_resid = max_resid.max(residual.abs());
                    let _ = writeln!(table, "{}", tsv_row(&[r, est.value, predicted, residual]));
                }
                per_radius = Some(table);
                let _ = writeln!(s, "[ball_volumes]");
                let _ = writeln!(s, "base point: {}", fmt_point(base.coords()));
                let _ = writeln!(s, "rule: product {n1}x{n2}x{n3} ({} directions)", rule.directions.len());
                let _ = writeln!(s, "ode tolerance: {}", fmt_float(manifest.numeric.ode_tol));
                let _ = writeln!(s, "radii measured: {}", radii.len());
                let _ = writeln!(s, "max |measured - series|: {}", fmt_float(max_resid));
                let _ = writeln!(s, "rows written: per_radius.tsv");
            }
            Analysis::FitExpansion => {
                let base = &points[0];
                let config = FitConfig {
                    rule: rule.clone(),
                    ode_tol: manifest.numeric.ode_tol,
                    with_r6_term: true,
                };
                let fit = ballvol::fit_expansion(&metric, base, &radii, &config)?;
                let frame = curvature::curvature_frame(&metric, base)?;
                let coeffs = GrayCoefficients::from_frame(&frame);
                let _ = writeln!(s, "[fit_expansion]");
                let _ = writeln!(s, "base point: {}", fmt_point(base.coords()));
                let _ = writeln!(s, "a2 fitted: {} +/- {}", fmt_float(fit.a2), fmt_float(fit.a2_stderr));
                let _ = writeln!(s, "a4 fitted: {} +/- {}", fmt_float(fit.a4), fmt_float(fit.a4_stderr));
                let _ = writeln!(s, "a2 analytic: {}", fmt_float(coeffs.a2));
                let _ = writeln!(s, "a4 analytic: {}", fmt_float(coeffs.a4));
                let _ = writeln!(s, "fit condition: {}", fmt_float(fit.condition));
                let _ = writeln!(s, "residual rms: {}", fmt_float(fit.residual_rms));
                let _ = writeln!(s, "radii used: {} of {}", fit.radii_used, radii.len());
                match fit.conjugate_bound {
                    Some(b) => {
                        let _ = writeln!(s, "conjugate bound: {}", fmt_float(b));
                    }
                    None => {
                        let _ = writeln!(s, "conjugate bound: none");
                    }
                }
            }
            Analysis::GaussBonnet => {
                let grid = GridSpec::new(manifest.numeric.grid_nodes);
                let res = gaussbonnet::euler_characteristic(&metric, grid)?;
                let (holds, slack) = gaussbonnet::euler_inequality(res.chi_form4, res.volume);
                let _ = writeln!(s, "[gauss_bonnet]");
                let _ = writeln!(s, "grid nodes per axis: {}", grid.nodes_per_axis);
                let _ = writeln!(s, "chi (curvature-norm form): {}", fmt_float(res.chi_form4));
                let _ = writeln!(s, "chi (decomposed form): {}", fmt_float(res.chi_form7));
                let _ = writeln!(s, "form difference: {}", fmt_float(res.chi_form4 - res.chi_form7));
                let _ = writeln!(s, "volume: {}", fmt_float(res.volume));
                let _ = writeln!(s, "refinement error estimate: {}", fmt_float(res.error_estimate));
                let _ = writeln!(s, "balance slack (32 pi^2 chi - 24 vol): {}", fmt_float(slack));
                let _ = writeln!(s, "inequality holds: {}", yesno(holds));
            }
            Analysis::Classify => {
                let verdict =
                    spaceform::classify_space_form(&metric, &points, manifest.numeric.tol_analytic)?;
                let _ = writeln!(s, "[classify]");
                let _ = writeln!(s, "samples: {}", verdict.samples);
                let _ = writeln!(s, "zero tolerance: {}", fmt_float(verdict.tolerance));
                let _ = writeln!(s, "space form: {}", yesno(verdict.is_space_form));
                let model = match verdict.model {
                    ModelKind::Flat => "flat",
                    ModelKind::SphereLike => "sphere-like",
                    ModelKind::HyperbolicLike => "hyperbolic-like",
                    ModelKind::NoModel => "none",
                };
                let _ = writeln!(s, "model: {model}");
                match verdict.curvature {
                    Some(k) => {
                        let _ = writeln!(s, "curvature: {}", fmt_float(k));
                    }
                    None => {
                        let _ = writeln!(s, "curvature: n/a");
                    }
                }
                let _ = writeln!(s, "max |W|^2: {}", fmt_float(verdict.max_weyl2));
                let _ = writeln!(s, "max |rho~|^2: {}", fmt_float(verdict.max_traceless_ricci2));
                let _ = writeln!(
                    s,
                    "tau range: [{}, {}]",
                    fmt_float(verdict.tau_range.0),
                    fmt_float(verdict.tau_range.1)
                );
            }
            Analysis::Theorem1 => {
                // Presence of `model` is enforced at parse time.
                let branch = manifest.model.expect("validated at parse");
                let tols = Tolerances {
                    analytic_zero: manifest.numeric.tol_analytic,
                    fitted_zero: manifest.numeric.tol_fitted,
                    ..Tolerances::default()
                };
                let grid = GridSpec::new(manifest.numeric.grid_nodes);
                let rep = spaceform::run_theorem1(&metric, branch, &points, grid, &tols)?;
                let model_name = match branch {
                    spaceform::Branch::Flat => "flat",
                    spaceform::Branch::Sphere => "sphere",
                    spaceform::Branch::Hyperbolic => "hyperbolic",
                };
                let _ = writeln!(s, "[theorem1]");
                let _ = writeln!(s, "branch: {} ({model_name} model)", rep.branch.index());
                let _ = writeln!(s, "zero tolerance (analytic): {}", fmt_float(tols.analytic_zero));
                let _ = writeln!(s, "hypothesis table:");
                let _ = writeln!(s, "x0\tx1\tx2\tx3\ttau\tweyl_combination\tvolume_match");
                for check in &rep.points {
                    let _ = writeln!(
                        s,
                        "{}\t{}\t{}",
                        tsv_row(check.point.coords()),
                        tsv_row(&[check.tau, check.weyl_combination]),
                        passfail(check.volume_match)
                    );
                }
                let _ = writeln!(s, "volume-match hypothesis: {}", passfail(rep.hypothesis_volume_match));
                match &rep.euler {
                    EulerCheck::Computed { chi, volume, holds, slack } => {
                        let _ = writeln!(
                            s,
                            "euler check: computed chi = {}, volume = {}, slack = {}, holds = {}",
                            fmt_float(*chi),
                            fmt_float(*volume),
                            fmt_float(*slack),
                            yesno(*holds)
                        );
                    }
                    EulerCheck::SyntheticQuotient { example_volume, example_chi } => {
                        let _ = writeln!(
                            s,
                            "euler check: synthetic quotient identity, volume {} gives chi = {} \
                             (this chart cannot cover a closed manifold)",
                            fmt_float(*example_volume),
                            fmt_float(*example_chi)
                        );
                    }
                }
                if let Some(slack) = rep.balance_slack {
                    let _ = writeln!(s, "balance slack (32 pi^2 chi - 24 vol): {}", fmt_float(slack));
                }
                if rep.failed.is_empty() {
                    let _ = writeln!(s, "failed hypotheses: none");
                } else {
                    let _ = writeln!(s, "failed hypotheses:");
                    for f in &rep.failed {
                        let _ = writeln!(s, "  - {f}");
                    }
                }
                if let Some(rule_pick) = &rep.sphere_vs_projective {
                    let _ = writeln!(s, "volume rule: {rule_pick}");
                }
                let _ = writeln!(s, "conclusion: {}", rep.conclusion);
                if !rep.failed.is_empty() {
                    failed = rep.failed.clone();
                }
            }
        }
    }

    let _ = writeln!(s);
    let _ = writeln!(s, "[provenance]");
    let _ = writeln!(s, "tool: geoball {}", env!("CARGO_PKG_VERSION"));
    match manifest.points.seed() {
        Some(seed) => {
            let _ = writeln!(s, "points seed: {seed}");
        }
        None => {
            let _ = writeln!(s, "points seed: none (explicit list)");
        }
    }
    let _ = writeln!(s, "manifest echo:");
    for line in manifest.raw_text.lines() {
        let _ = writeln!(s, "> {line}");
    }
    if failed.is_empty() {
        let _ = writeln!(s, "status: all checks passed");
    } else {
        let _ = writeln!(s, "status: hypothesis failed: {}", failed.join("; "));
    }

    let files = ReportFiles { summary, per_point, per_radius };
    let output_dir = out_override.map_or_else(|| PathBuf::from(&manifest.output), Path::to_path_buf);
    let written = files.write(&output_dir)?;

    let status = if failed.is_empty() {
        RunStatus::Passed
    } else {
        RunStatus::HypothesisFailed(failed)
    };
    Ok(RunOutcome { status, output_dir, written })
}
