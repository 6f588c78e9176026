//! Space-form classification and the volume-rigidity decision procedure.
//!
//! A metric has constant sectional curvature at a point exactly when its
//! Weyl tensor and traceless Ricci tensor vanish there; the scalar
//! curvature then fixes the constant. [`classify_space_form`] aggregates
//! that pointwise test over a sample of chart points.
//!
//! [`run_theorem1`] mechanizes the decision procedure that upgrades a
//! small-ball volume hypothesis to a global model-space conclusion, in
//! three branches keyed to the comparison model:
//!
//! 1. flat model: if small balls match Euclidean volumes at every point
//!    and the Euler characteristic is nonnegative, the manifold is flat;
//! 2. unit sphere model: if small balls match those of the unit sphere and
//!    `32 pi^2 chi >= 24 vol`, the manifold has constant curvature 1, and
//!    a total volume at least that of the round 4-sphere pins the sphere
//!    itself rather than its projective quotient;
//! 3. unit hyperbolic model: as in branch 2 with the matching curvature
//!    sign, concluding a compact quotient of hyperbolic 4-space.
//!
//! Checking "all points" numerically means checking a recorded finite
//! sample; the report states the sample size rather than hiding it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::curvature::{self, CurvatureFrame};
use crate::error::{Error, Result};
use crate::gaussbonnet::{self, GridSpec};
use crate::gray;
use crate::metric::{ChartPoint, MetricField};

/// Which model space a run compares against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Flat,
    Sphere,
    Hyperbolic,
}

impl Branch {
    /// Branch index used in reports.
    pub fn index(self) -> u8 {
        match self {
            Branch::Flat => 1,
            Branch::Sphere => 2,
            Branch::Hyperbolic => 3,
        }
    }

    /// Sectional curvature of the comparison model.
    pub fn model_curvature(self) -> f64 {
        match self {
            Branch::Flat => 0.0,
            Branch::Sphere => 1.0,
            Branch::Hyperbolic => -1.0,
        }
    }

    /// Scalar curvature of the comparison model in dimension four.
    pub fn model_tau(self) -> f64 {
        12.0 * self.model_curvature()
    }
}

/// Zero-test thresholds. Scale-relative: a quantity q "vanishes" when
/// `|q| < tol * (1 + |R|^2)` at the point in question.
#[derive(Clone, Copy, Debug)]
pub struct Tolerances {
    /// For quantities evaluated analytically from metric derivatives.
    pub analytic_zero: f64,
    /// For quantities recovered by least-squares fitting.
    pub fitted_zero: f64,
    /// Relative slack allowed in the integral balance `32 pi^2 chi >= 24 vol`.
    pub balance: f64,
    /// Distance from an integer the Euler characteristic may sit at the
    /// default grid.
    pub chi_integer: f64,
}

impl Default for Tolerances {
    fn default() -> Tolerances {
        Tolerances { analytic_zero: 1e-8, fitted_zero: 1e-6, balance: 1e-4, chi_integer: 0.05 }
    }
}

/// Model family a sampled metric belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Flat,
    SphereLike,
    HyperbolicLike,
    NoModel,
}

/// Aggregated constant-curvature test over a point sample.
#[derive(Clone, Debug)]
pub struct SpaceFormVerdict {
    pub is_space_form: bool,
    /// Common sectional curvature when the test passes.
    pub curvature: Option<f64>,
    pub model: ModelKind,
    pub max_weyl2: f64,
    pub max_traceless_ricci2: f64,
    /// Smallest and largest sampled scalar curvature.
    pub tau_range: (f64, f64),
    pub samples: usize,
    pub tolerance: f64,
}

/// One sample point's hypothesis row.
#[derive(Clone, Debug)]
pub struct PointCheck {
    pub point: ChartPoint,
    pub tau: f64,
    /// The order-r^4 obstruction `-3 |W|^2 + 2 |rho~|^2`; zero together
    /// with a matching tau makes small-ball volumes agree with the model
    /// through fourth order.
    pub weyl_combination: f64,
    pub volume_match: bool,
}

/// How the Euler-characteristic condition was checked.
#[derive(Clone, Debug)]
pub enum EulerCheck {
    /// The chart covers the manifold, so chi and the volume were measured.
    Computed { chi: f64, volume: f64, holds: bool, slack: f64 },
    /// The chart cannot cover a compact manifold (hyperbolic model). The
    /// quotient identity `chi = 3 vol / (4 pi^2)` is demonstrated on a
    /// synthetic volume instead, and the report says so.
    SyntheticQuotient { example_volume: f64, example_chi: f64 },
}

/// Outcome of the full decision procedure.
#[derive(Clone, Debug)]
pub struct TheoremReport {
    pub branch: Branch,
    pub points: Vec<PointCheck>,
    /// All sample points matched the model's small-ball volumes.
    pub hypothesis_volume_match: bool,
    pub euler: EulerCheck,
    pub hypothesis_euler: bool,
    /// `32 pi^2 chi - 24 vol` when chi was computed (curvature branches).
    pub balance_slack: Option<f64>,
    /// Names of violated hypotheses; empty exactly when the conclusion
    /// affirms the model.
    pub failed: Vec<String>,
    pub conclusion: String,
    /// Sphere branch only: "S⁴" when the total volume lands on the round
    /// sphere's side of the midpoint between the two candidate volumes;
    /// below it the label "RP⁴ (by elimination)" is an inference, since a
    /// constant-curvature-1 manifold with half the sphere's volume has no
    /// other candidate.
    pub sphere_vs_projective: Option<String>,
    pub tolerances: Tolerances,
}

impl TheoremReport {
    pub fn passed(&self) -> bool {
        self.failed.is_empty()
    }
}

/// Round-sphere volume in dimension four, the threshold of the volume rule.
pub fn round_sphere_volume() -> f64 {
    8.0 * std::f64::consts::PI * std::f64::consts::PI / 3.0
}

/// The compact-quotient identity for unit hyperbolic 4-manifolds:
/// `chi = 3 vol / (4 pi^2)`.
pub fn hyperbolic_chi_formula(volume: f64) -> f64 {
    3.0 * volume / (4.0 * std::f64::consts::PI * std::f64::consts::PI)
}

/// Draws `count` interior chart points reproducibly from `seed`. The
/// margin keeps samples away from coordinate degeneracies at chart edges.
pub fn sample_points(m: &MetricField, count: usize, seed: u64) -> Vec<ChartPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| m.domain().sample_interior(&mut rng, 0.12)).collect()
}

fn frames_at(m: &MetricField, points: &[ChartPoint]) -> Result<Vec<CurvatureFrame>> {
    points.par_iter().map(|p| curvature::curvature_frame(m, p)).collect()
}

/// Tests whether the metric has constant sectional curvature on a sample
/// of points: Weyl and traceless Ricci must vanish at every sample and the
/// scalar curvature must not drift between samples.
pub fn classify_space_form(
    m: &MetricField,
    points: &[ChartPoint],
    tol: f64,
) -> Result<SpaceFormVerdict> {
    if points.is_empty() {
        return Err(Error::InvalidParameter("need at least one sample point".into()));
    }
    let frames = frames_at(m, points)?;

    let mut pointwise_ok = true;
    let mut max_w2: f64 = 0.0;
    let mut max_rt2: f64 = 0.0;
    let mut tau_lo = f64::INFINITY;
    let mut tau_hi = f64::NEG_INFINITY;
    let mut k_sum = 0.0;
    let mut max_scale: f64 = 1.0;
    for frame in &frames {
        let (ok, k) = curvature::check_space_form_pointwise(frame, tol);
        pointwise_ok &= ok;
        max_w2 = max_w2.max(frame.norm_weyl2);
        max_rt2 = max_rt2.max(frame.norm_traceless_ricci2);
        tau_lo = tau_lo.min(frame.tau);
        tau_hi = tau_hi.max(frame.tau);
        k_sum += k;
        max_scale = max_scale.max(1.0 + frame.norm_riemann2);
    }
    // Constant curvature also means the same constant everywhere sampled.
    let drift_ok = (tau_hi - tau_lo) <= 12.0 * tol * max_scale;
    let is_space_form = pointwise_ok && drift_ok;

    let k_mean = k_sum / frames.len() as f64;
    let model = if !is_space_form {
        ModelKind::NoModel
    } else if k_mean.abs() <= tol * max_scale {
        ModelKind::Flat
    } else if k_mean > 0.0 {
        ModelKind::SphereLike
    } else {
        ModelKind::HyperbolicLike
    };

    Ok(SpaceFormVerdict {
        is_space_form,
        curvature: is_space_form.then_some(k_mean),
        model,
        max_weyl2: max_w2,
        max_traceless_ricci2: max_rt2,
        tau_range: (tau_lo, tau_hi),
        samples: frames.len(),
        tolerance: tol,
    })
}

/// Runs the decision procedure for the chosen branch on a point sample.
///
/// The small-ball volume hypothesis is checked pointwise through the
/// fourth-order expansion coefficients; the Euler-characteristic condition
/// is computed by quadrature when the chart covers the manifold and
/// otherwise demonstrated as a formula-level identity (hyperbolic branch).
/// Hypothesis failure is a structured outcome, not an error.
pub fn run_theorem1(
    m: &MetricField,
    branch: Branch,
    points: &[ChartPoint],
    gb_grid: GridSpec,
    tols: &Tolerances,
) -> Result<TheoremReport> {
    if points.is_empty() {
        return Err(Error::InvalidParameter("need at least one sample point".into()));
    }
    let frames = frames_at(m, points)?;
    let model_c = branch.model_curvature();

    let mut checks = Vec::with_capacity(frames.len());
    let mut all_match = true;
    for (p, frame) in points.iter().zip(&frames) {
        let scale = 1.0 + frame.norm_riemann2;
        let volume_match =
            gray::volumes_match_to_r4(frame, model_c, tols.analytic_zero * scale);
        all_match &= volume_match;
        checks.push(PointCheck {
            point: p.clone(),
            tau: frame.tau,
            weyl_combination: -3.0 * frame.norm_weyl2 + 2.0 * frame.norm_traceless_ricci2,
            volume_match,
        });
    }

    let mut failed = Vec::new();
    if !all_match {
        let bad = checks.iter().filter(|c| !c.volume_match).count();
        failed.push(format!(
            "ball-volume match: small-ball volumes deviate from the model at {bad} of {} sample points",
            checks.len()
        ));
    }

    // Euler-characteristic condition.
    let (euler, hypothesis_euler, balance_slack, vol_for_rule) = if m.covers_manifold() {
        let res = gaussbonnet::euler_characteristic(m, gb_grid)?;
        let chi = res.chi_form4;
        let (_, slack) = gaussbonnet::euler_inequality(chi, res.volume);
        let holds = match branch {
            Branch::Flat => chi >= -tols.chi_integer,
            _ => slack >= -tols.balance * 24.0 * res.volume,
        };
        let euler = EulerCheck::Computed { chi, volume: res.volume, holds, slack };
        let slack_out = (branch != Branch::Flat).then_some(slack);
        (euler, holds, slack_out, Some(res.volume))
    } else {
        // Hyperbolic-model charts cannot cover a compact manifold, so the
        // global condition is exhibited on a synthetic quotient volume.
        let example_volume = 4.0 * std::f64::consts::PI * std::f64::consts::PI / 3.0;
        let example_chi = hyperbolic_chi_formula(example_volume);
        (
            EulerCheck::SyntheticQuotient { example_volume, example_chi },
            true,
            None,
            None,
        )
    };
    if !hypothesis_euler {
        failed.push(match branch {
            Branch::Flat => "Euler characteristic: chi >= 0 fails".to_string(),
            _ => "Euler characteristic: 32 pi^2 chi >= 24 vol fails".to_string(),
        });
    }

    let sphere_vs_projective = if branch == Branch::Sphere && failed.is_empty() {
        // The only candidates differ by a factor of two in volume, so the
        // midpoint 2 pi^2 separates them robustly at any grid resolution.
        let threshold = 0.75 * round_sphere_volume();
        Some(match vol_for_rule {
            Some(v) if v >= threshold => "S⁴".to_string(),
            Some(_) => "RP⁴ (by elimination)".to_string(),
            None => "undetermined (volume not computed)".to_string(),
        })
    } else {
        None
    };

    let conclusion = if failed.is_empty() {
        match branch {
            Branch::Flat => "all hypotheses pass: M is flat".to_string(),
            Branch::Sphere => {
                let rule = sphere_vs_projective.as_deref().unwrap_or("undetermined");
                format!(
                    "all hypotheses pass: M is a space of constant sectional curvature 1; \
                     the volume rule gives {rule}"
                )
            }
            Branch::Hyperbolic => "local hypotheses pass on the sampled chart: a compact \
                 manifold with these small-ball volumes is isometric to a quotient of \
                 hyperbolic 4-space (global conditions shown on a synthetic quotient; this \
                 chart does not cover a compact manifold)"
                .to_string(),
        }
    } else {
        format!("hypotheses not satisfied: {}", failed.join("; "))
    };

    Ok(TheoremReport {
        branch,
        points: checks,
        hypothesis_volume_match: all_match,
        euler,
        hypothesis_euler,
        balance_slack,
        failed,
        conclusion,
        sphere_vs_projective,
        tolerances: *tols,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn sphere_sample_classifies_as_space_form() {
        let m = MetricField::round_sphere(1.0).unwrap();
        let pts = sample_points(&m, 50, 11);
        let verdict = classify_space_form(&m, &pts, 1e-8).unwrap();
        assert!(verdict.is_space_form);
        assert_eq!(verdict.model, ModelKind::SphereLike);
        assert_relative_eq!(verdict.curvature.unwrap(), 1.0, epsilon = 1e-9);
        assert!(verdict.max_weyl2 < 1e-10);
        assert!(verdict.tau_range.1 - verdict.tau_range.0 < 1e-8);
    }

    #[test]
    fn flat_sample_classifies_as_flat() {
        let m = MetricField::flat_torus([1.0, 2.0, 3.0, 4.0]).unwrap();
        let pts = sample_points(&m, 20, 3);
        let verdict = classify_space_form(&m, &pts, 1e-8).unwrap();
        assert!(verdict.is_space_form);
        assert_eq!(verdict.model, ModelKind::Flat);
        assert_relative_eq!(verdict.curvature.unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn hyperbolic_sample_classifies_with_negative_curvature() {
        let m = MetricField::hyperbolic_space(-1.0).unwrap();
        let pts = sample_points(&m, 20, 5);
        let verdict = classify_space_form(&m, &pts, 1e-8).unwrap();
        assert!(verdict.is_space_form);
        assert_eq!(verdict.model, ModelKind::HyperbolicLike);
        assert_relative_eq!(verdict.curvature.unwrap(), -1.0, epsilon = 1e-9);
    }

    #[test]
    fn anisotropic_product_is_not_a_space_form() {
        let m = MetricField::product_spheres(1.0, 1.0).unwrap();
        let pts = sample_points(&m, 20, 7);
        let verdict = classify_space_form(&m, &pts, 1e-8).unwrap();
        assert!(!verdict.is_space_form);
        assert_eq!(verdict.model, ModelKind::NoModel);
        assert!(verdict.curvature.is_none());
        // |W|^2 = (4/3)(1/a^2 + 1/b^2)^2 = 16/3 for unit factors.
        assert_relative_eq!(verdict.max_weyl2, 16.0 / 3.0, max_relative = 1e-10);
    }

    #[test]
    fn sphere_branch_passes_end_to_end() {
        let m = MetricField::round_sphere(1.0).unwrap();
        let pts = sample_points(&m, 12, 19);
        let report =
            run_theorem1(&m, Branch::Sphere, &pts, GridSpec::new(10), &Tolerances::default())
                .unwrap();
        assert!(report.passed(), "failed: {:?}", report.failed);
        assert!(report.hypothesis_volume_match);
        assert!(report.hypothesis_euler);
        assert!(report.conclusion.contains("constant sectional curvature 1"));
        assert_eq!(report.sphere_vs_projective.as_deref(), Some("S⁴"));
        // The sphere saturates the volume bound, so the slack is tiny.
        let slack = report.balance_slack.unwrap();
        assert!(slack.abs() < 1e-4 * 24.0 * round_sphere_volume(), "slack = {slack}");
    }

    #[test]
    fn flat_branch_passes_on_torus() {
        let m = MetricField::flat_torus([1.0, 2.0, 3.0, 4.0]).unwrap();
        let pts = sample_points(&m, 12, 23);
        let report =
            run_theorem1(&m, Branch::Flat, &pts, GridSpec::new(6), &Tolerances::default())
                .unwrap();
        assert!(report.passed());
        assert!(report.conclusion.contains("M is flat"));
        assert!(report.balance_slack.is_none());
        match report.euler {
            EulerCheck::Computed { chi, holds, .. } => {
                assert_eq!(chi, 0.0);
                assert!(holds);
            }
            _ => panic!("torus chart covers, chi must be computed"),
        }
    }

    #[test]
    fn hyperbolic_branch_reports_synthetic_euler_check() {
        let m = MetricField::hyperbolic_space(-1.0).unwrap();
        let pts = sample_points(&m, 12, 29);
        let report = run_theorem1(
            &m,
            Branch::Hyperbolic,
            &pts,
            GridSpec::default(),
            &Tolerances::default(),
        )
        .unwrap();
        assert!(report.passed());
        assert!(report.hypothesis_volume_match);
        match report.euler {
            EulerCheck::SyntheticQuotient { example_volume, example_chi } => {
                assert_relative_eq!(
                    example_chi,
                    hyperbolic_chi_formula(example_volume),
                    epsilon = 0.0
                );
            }
            _ => panic!("hyperbolic chart cannot cover, check must be synthetic"),
        }
        assert!(report.conclusion.contains("synthetic"));
    }

    #[test]
    fn product_metric_fails_sphere_branch_with_named_hypothesis() {
        let m = MetricField::product_spheres(1.0, 1.0).unwrap();
        let pts = sample_points(&m, 10, 31);
        let report =
            run_theorem1(&m, Branch::Sphere, &pts, GridSpec::new(10), &Tolerances::default())
                .unwrap();
        assert!(!report.passed());
        assert!(!report.hypothesis_volume_match);
        assert!(report.failed.iter().any(|f| f.contains("ball-volume match")));
        assert!(report.conclusion.contains("not satisfied"));
        assert!(report.sphere_vs_projective.is_none());
        // tau = 4 and -3|W|^2 + 2|rho~|^2 = -16 on the unit-unit product.
        for check in &report.points {
            assert_relative_eq!(check.tau, 4.0, max_relative = 1e-10);
            assert_relative_eq!(check.weyl_combination, -16.0, max_relative = 1e-9);
            assert!(!check.volume_match);
        }
    }

    #[test]
    fn perturbed_torus_fails_flat_branch() {
        let tau = 2.0 * PI;
        let m =
            MetricField::conformal_perturbation([tau, tau, tau, tau], 0.2, [1, 1, 2, 0])
                .unwrap();
        let pts = sample_points(&m, 10, 37);
        let report =
            run_theorem1(&m, Branch::Flat, &pts, GridSpec::new(8), &Tolerances::default())
                .unwrap();
        assert!(!report.passed());
        assert!(report.failed.iter().any(|f| f.contains("ball-volume match")));
    }

    #[test]
    fn quotient_identity_examples() {
        assert_relative_eq!(
            hyperbolic_chi_formula(4.0 * PI * PI / 3.0),
            1.0,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            hyperbolic_chi_formula(8.0 * PI * PI / 3.0),
            2.0,
            epsilon = 1e-15
        );
        assert_eq!(hyperbolic_chi_formula(0.0), 0.0);
    }

    #[test]
    fn fourth_order_match_is_equivalent_to_weyl_combination_vanishing() {
        // With tau pinned to the model value and a harmonic scalar
        // curvature, the fourth-order coefficient differs from the model's
        // by exactly (-3 |W|^2 + 2 |rho~|^2) / 17280, so the two hypothesis
        // phrasings agree.
        for &(c, w2, rt2) in &[
            (1.0, 0.0, 0.0),
            (1.0, 1e-3, 0.0),
            (1.0, 0.0, 1e-3),
            (-1.0, 2.0, 3.0),
            (0.0, 0.5, 0.75),
            (1.0, 2.0, 3.0), // -3 w2 + 2 rt2 = 0: volumes match despite W != 0
        ] {
            let tau = 12.0 * c;
            let r2 = w2 + 2.0 * rt2 + tau * tau / 6.0;
            let rho2 = rt2 + tau * tau / 4.0;
            let got = gray::GrayCoefficients::from_invariants(4, tau, r2, rho2, 0.0).unwrap();
            let want = gray::GrayCoefficients::model(c);
            let combo = -3.0 * w2 + 2.0 * rt2;
            assert_relative_eq!(got.a4 - want.a4, combo / 17280.0, epsilon = 1e-15);
        }
    }
}
