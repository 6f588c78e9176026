//! The small-ball volume expansion and exact model volumes.
//!
//! For a geodesic ball of radius `r` about a point `p` of an n-manifold,
//!
//! ```text
//! V(r) = lead(r) (1 + a2 r^2 + a4 r^4 + O(r^6)),
//! lead(r) = (π r^2)^(n/2) / Γ(n/2 + 1),
//! a2 = -τ / (6(n+2)),
//! a4 = (-3|R|^2 + 8|ρ|^2 + 5τ^2 - 18Δτ) / (360(n+2)(n+4)),
//! ```
//!
//! with all invariants evaluated at `p`. The module also carries `a4`
//! rewritten through the Weyl decomposition, whose τ² coefficient is
//! `5 + 6/((n-1)(n-2)) + 8/n - 12/(n(n-2))` (13/2 at n = 4). One published
//! statement of that rewrite prints the τ² coefficient as `2/(n(n-1))`
//! instead; the value it yields is kept alongside as
//! [`GrayCoefficients::a4_printed_variant`] because demonstrating its
//! inconsistency (1/720 instead of 13/240 on the unit 4-sphere) is part of
//! the verification story.
//!
//! Exact comparison volumes for the three 4-dimensional model geometries of
//! curvature `c`:
//!
//! ```text
//! c = 0:  V = π^2 r^4 / 2
//! c > 0:  V = (2π^2/c^2) (2/3 - cos(√c r) + cos^3(√c r)/3),  r < π/√c
//! c < 0:  V = (2π^2/c^2) (cosh^3(√-c r)/3 - cosh(√-c r) + 2/3)
//! ```

use crate::curvature::CurvatureFrame;
use crate::error::{Error, Result};

/// Γ(n/2 + 1) for integer `n ≥ 0`: a factorial for even `n`, a half-integer
/// gamma value (odd double factorial times √π) for odd `n`.
fn gamma_half_plus_one(n: usize) -> f64 {
    if n % 2 == 0 {
        (1..=n / 2).map(|k| k as f64).product()
    } else {
        // Γ(m + 1/2) = (2m)! / (4^m m!) √π with m = (n+1)/2.
        let m = (n + 1) / 2;
        let mut v = std::f64::consts::PI.sqrt();
        for k in 1..=m {
            v *= (2 * k - 1) as f64 / 2.0;
        }
        v
    }
}

/// Volume of the Euclidean `dim`-ball of radius `r`: the leading term of
/// the expansion.
pub fn euclidean_ball_volume(dim: usize, r: f64) -> f64 {
    std::f64::consts::PI.powf(dim as f64 / 2.0) * r.powi(dim as i32)
        / gamma_half_plus_one(dim)
}

/// Expansion coefficients at a point, with the diagnostic variants of `a4`.
#[derive(Clone, Copy, Debug)]
pub struct GrayCoefficients {
    pub dim: usize,
    pub a2: f64,
    pub a4: f64,
    /// `a4` recomputed through the Weyl decomposition with the corrected τ²
    /// coefficient; equals `a4` up to rounding, for any invariants.
    pub a4_weyl_form: f64,
    /// The Weyl-decomposed rewrite with τ² coefficient `2/(n(n-1))` as
    /// printed in one published statement. Does not reproduce `a4`;
    /// reported for the record.
    pub a4_printed_variant: f64,
}

impl GrayCoefficients {
    /// Coefficients from raw invariants. Requires `dim ≥ 3` (the Weyl
    /// decomposition divides by `n - 2`).
    pub fn from_invariants(
        dim: usize,
        tau: f64,
        norm_riemann2: f64,
        norm_ricci2: f64,
        laplacian_tau: f64,
    ) -> Result<GrayCoefficients> {
        if dim < 3 {
            return Err(Error::InvalidParameter(format!(
                "expansion coefficients need dimension >= 3, got {dim}"
            )));
        }
        let n = dim as f64;
        let denom = 360.0 * (n + 2.0) * (n + 4.0);
        let a2 = -tau / (6.0 * (n + 2.0));
        let a4 =
            (-3.0 * norm_riemann2 + 8.0 * norm_ricci2 + 5.0 * tau * tau - 18.0 * laplacian_tau)
                / denom;

        let w2 = norm_riemann2 - 4.0 / (n - 2.0) * norm_ricci2
            + 2.0 / ((n - 1.0) * (n - 2.0)) * tau * tau;
        let rt2 = norm_ricci2 - tau * tau / n;
        let c_rt = 8.0 - 12.0 / (n - 2.0);
        let c_tau = 5.0 + 6.0 / ((n - 1.0) * (n - 2.0)) + 8.0 / n - 12.0 / (n * (n - 2.0));
        let c_tau_printed = 2.0 / (n * (n - 1.0));
        let a4_weyl_form =
            (-3.0 * w2 + c_rt * rt2 + c_tau * tau * tau - 18.0 * laplacian_tau) / denom;
        let a4_printed_variant =
            (-3.0 * w2 + c_rt * rt2 + c_tau_printed * tau * tau - 18.0 * laplacian_tau) / denom;

        Ok(GrayCoefficients { dim, a2, a4, a4_weyl_form, a4_printed_variant })
    }

    pub fn from_frame(frame: &CurvatureFrame) -> GrayCoefficients {
        GrayCoefficients::from_invariants(
            4,
            frame.tau,
            frame.norm_riemann2,
            frame.norm_ricci2,
            frame.laplacian_tau,
        )
        .expect("dimension is fixed at 4")
    }

    /// Coefficients of the constant-curvature model of curvature `c` in
    /// dimension 4: `a2 = -c/3`, `a4 = 13 c^2 / 240`.
    pub fn model(c: f64) -> GrayCoefficients {
        GrayCoefficients::from_invariants(4, 12.0 * c, 24.0 * c * c, 36.0 * c * c, 0.0)
            .expect("model invariants are valid")
    }
}

/// The truncated series `lead(r) (1 + a2 r^2 + a4 r^4)` as an evaluatable
/// object.
#[derive(Clone, Copy, Debug)]
pub struct BallVolumeSeries {
    pub dim: usize,
    pub a2: f64,
    pub a4: f64,
}

impl BallVolumeSeries {
    pub fn from_coefficients(c: &GrayCoefficients) -> BallVolumeSeries {
        BallVolumeSeries { dim: c.dim, a2: c.a2, a4: c.a4 }
    }

    pub fn lead(&self, r: f64) -> f64 {
        euclidean_ball_volume(self.dim, r)
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.lead(r) * (1.0 + self.a2 * r * r + self.a4 * r.powi(4))
    }
}

/// Exact volume of a geodesic `r`-ball in the 4-dimensional model space of
/// constant curvature `c`. For `c > 0` the radius must stay below the
/// injectivity bound `π/√c`.
pub fn model_ball_volume_exact(c: f64, r: f64) -> Result<f64> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("radius must be nonnegative, got {r}")));
    }
    if !c.is_finite() {
        return Err(Error::InvalidParameter(format!("curvature must be finite, got {c}")));
    }
    let two_pi2 = 2.0 * std::f64::consts::PI * std::f64::consts::PI;
    if c == 0.0 {
        return Ok(euclidean_ball_volume(4, r));
    }
    if c > 0.0 {
        let bound = std::f64::consts::PI / c.sqrt();
        if r >= bound {
            return Err(Error::RadiusBeyondInjectivity { r, bound });
        }
        // 2/3 - cos x + cos^3 x / 3 = u^2 (3 - u) / 3 with u = 1 - cos x;
        // the right-hand side is free of the cancellation that makes the
        // textbook form lose half its digits at small radii.
        let u = 2.0 * (0.5 * c.sqrt() * r).sin().powi(2);
        Ok(two_pi2 / (c * c) * u * u * (3.0 - u) / 3.0)
    } else {
        // cosh^3 x / 3 - cosh x + 2/3 = w^2 (3 + w) / 3 with w = cosh x - 1.
        let w = 2.0 * (0.5 * (-c).sqrt() * r).sinh().powi(2);
        Ok(two_pi2 / (c * c) * w * w * (3.0 + w) / 3.0)
    }
}

/// Whether the expansion at `frame` agrees with the constant-curvature
/// model `c` through fourth order: both `a2` and `a4` within `tol` on a
/// `1 + |model|` scale. By the coefficient formulas this is equivalent to
/// `τ = 12c` together with `-3|W|^2 + 2|ρ̃|^2 = 0`.
pub fn volumes_match_to_r4(frame: &CurvatureFrame, c: f64, tol: f64) -> bool {
    let got = GrayCoefficients::from_frame(frame);
    let want = GrayCoefficients::model(c);
    (got.a2 - want.a2).abs() <= tol * (1.0 + want.a2.abs())
        && (got.a4 - want.a4).abs() <= tol * (1.0 + want.a4.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::curvature_frame;
    use crate::metric::{ChartPoint, MetricField};
    use approx::assert_relative_eq;

    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn euclidean_volumes_match_closed_forms() {
        assert_relative_eq!(euclidean_ball_volume(2, 1.0), PI, max_relative = 1e-14);
        assert_relative_eq!(
            euclidean_ball_volume(3, 2.0),
            4.0 / 3.0 * PI * 8.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(euclidean_ball_volume(4, 1.0), PI * PI / 2.0, max_relative = 1e-14);
        assert_relative_eq!(
            euclidean_ball_volume(5, 1.0),
            8.0 / 15.0 * PI * PI,
            max_relative = 1e-14
        );
    }

    #[test]
    fn coefficients_on_models() {
        let s = MetricField::round_sphere(1.0).unwrap();
        let f = curvature_frame(&s, &ChartPoint::from([1.2, 1.0, 0.8, 0.5])).unwrap();
        let c = GrayCoefficients::from_frame(&f);
        assert_relative_eq!(c.a2, -1.0 / 3.0, max_relative = 1e-8);
        assert_relative_eq!(c.a4, 13.0 / 240.0, max_relative = 1e-8);
        assert_relative_eq!(c.a4_weyl_form, 13.0 / 240.0, max_relative = 1e-8);
        assert_relative_eq!(c.a4_printed_variant, 1.0 / 720.0, max_relative = 1e-6);

        let s2 = MetricField::round_sphere(2.0).unwrap();
        let f2 = curvature_frame(&s2, &ChartPoint::from([1.2, 1.0, 0.8, 0.5])).unwrap();
        let c2 = GrayCoefficients::from_frame(&f2);
        assert_relative_eq!(c2.a2, -1.0 / 12.0, max_relative = 1e-8);
        assert_relative_eq!(c2.a4, 13.0 / 3840.0, max_relative = 1e-8);

        let h = MetricField::hyperbolic_space(-1.0).unwrap();
        let fh = curvature_frame(&h, &ChartPoint::from([0.25, -0.1, 0.3, 0.0])).unwrap();
        let ch = GrayCoefficients::from_frame(&fh);
        assert_relative_eq!(ch.a2, 1.0 / 3.0, max_relative = 1e-8);
        assert_relative_eq!(ch.a4, 13.0 / 240.0, max_relative = 1e-8);

        let t = MetricField::flat_torus([1.0; 4]).unwrap();
        let ft = curvature_frame(&t, &ChartPoint::from([0.2, 0.4, 0.6, 0.8])).unwrap();
        let ct = GrayCoefficients::from_frame(&ft);
        assert!(ct.a2.abs() < 1e-14);
        assert!(ct.a4.abs() < 1e-14);

        // S^2 x S^2 with unit radii: numerator -3*8 + 8*4 + 5*16 = 88.
        let q = MetricField::product_spheres(1.0, 1.0).unwrap();
        let fq = curvature_frame(&q, &ChartPoint::from([1.1, 0.6, 1.9, 0.3])).unwrap();
        let cq = GrayCoefficients::from_frame(&fq);
        assert_relative_eq!(cq.a2, -1.0 / 9.0, max_relative = 1e-8);
        assert_relative_eq!(cq.a4, 88.0 / 17280.0, max_relative = 1e-8);
        assert_relative_eq!(cq.a4_weyl_form, cq.a4, max_relative = 1e-12);
    }

    #[test]
    fn model_coefficients_match_catalog_frames() {
        let m = GrayCoefficients::model(0.25);
        assert_relative_eq!(m.a2, -1.0 / 12.0, max_relative = 1e-14);
        assert_relative_eq!(m.a4, 13.0 / 3840.0, max_relative = 1e-14);
    }

    #[test]
    fn exact_model_volumes_frozen_values() {
        // Reference values recomputed independently at high precision.
        assert_relative_eq!(
            model_ball_volume_exact(0.0, 1.0).unwrap(),
            4.9348022005446793,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            model_ball_volume_exact(1.0, 1.0).unwrap(),
            3.5321451273312309,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            model_ball_volume_exact(-1.0, 1.0).unwrap(),
            6.8757195882414267,
            max_relative = 1e-14
        );
        // Whole sphere in the limit r -> π.
        assert_relative_eq!(
            model_ball_volume_exact(1.0, PI - 1e-9).unwrap(),
            8.0 * PI * PI / 3.0,
            max_relative = 1e-9
        );
    }

    #[test]
    fn injectivity_bound_enforced() {
        assert!(model_ball_volume_exact(1.0, PI).is_err());
        assert!(model_ball_volume_exact(4.0, PI / 2.0).is_err());
        assert!(model_ball_volume_exact(4.0, PI / 2.0 - 1e-6).is_ok());
        assert!(model_ball_volume_exact(-1.0, 50.0).is_ok());
        assert!(model_ball_volume_exact(0.0, -1.0).is_err());
    }

    #[test]
    fn model_volume_scaling_law() {
        // V_c(r) = c^-2 V_1(√c r) for c > 0, and likewise below zero.
        for r in [0.2, 0.7, 1.1] {
            let v4 = model_ball_volume_exact(4.0, r).unwrap();
            let v1 = model_ball_volume_exact(1.0, 2.0 * r).unwrap();
            assert_relative_eq!(v4, v1 / 16.0, max_relative = 1e-13);
            let w = model_ball_volume_exact(-2.25, r).unwrap();
            let w1 = model_ball_volume_exact(-1.0, 1.5 * r).unwrap();
            assert_relative_eq!(w, w1 / (2.25 * 2.25), max_relative = 1e-13);
        }
    }

    #[test]
    fn small_curvature_approaches_flat() {
        for c in [1e-4, -1e-4] {
            let v = model_ball_volume_exact(c, 1.0).unwrap();
            let f = model_ball_volume_exact(0.0, 1.0).unwrap();
            assert_relative_eq!(v, f, max_relative = 1e-4);
        }
    }

    #[test]
    fn series_evaluation() {
        let flat = BallVolumeSeries { dim: 4, a2: 0.0, a4: 0.0 };
        assert_relative_eq!(flat.eval(1.0), PI * PI / 2.0, max_relative = 1e-14);

        let sphere = BallVolumeSeries::from_coefficients(&GrayCoefficients::model(1.0));
        // lead(0.5) (1 - 1/12 + 13/3840), frozen from an independent
        // high-precision evaluation.
        assert_relative_eq!(sphere.eval(0.5), 0.28376719034056563, max_relative = 1e-14);
    }

    #[test]
    fn series_truncation_error_scales_as_r6() {
        // |V_exact - series| / lead should decay like r^6: slope of the
        // log-log regression within 0.3 of 6.
        for c in [1.0, -1.0] {
            let series = BallVolumeSeries::from_coefficients(&GrayCoefficients::model(c));
            let mut pts = Vec::new();
            for k in 0..10 {
                let r = 0.05 * (0.5f64 / 0.05).powf(k as f64 / 9.0);
                let resid = (model_ball_volume_exact(c, r).unwrap() - series.eval(r)).abs()
                    / series.lead(r);
                pts.push((r.ln(), resid.ln()));
            }
            let slope = regress_slope(&pts);
            assert!((slope - 6.0).abs() < 0.3, "c={c}: slope {slope}");
        }
    }

    #[test]
    fn fitting_exact_volumes_recovers_a4() {
        // Least squares on y = V/lead - 1 over small radii must reproduce
        // a4 = 13/240 closely; the printed-variant value 1/720 is far
        // outside any fit uncertainty.
        let radii: Vec<f64> =
            (0..12).map(|k| 0.02 * (0.12f64 / 0.02).powf(k as f64 / 11.0)).collect();
        let a4 = fit_even_polynomial(1.0, &radii);
        assert!((a4 - 13.0 / 240.0).abs() < 1e-6, "fit a4 = {a4}");
        assert!((a4 - 1.0 / 720.0).abs() > 0.05);
        let a4h = fit_even_polynomial(-1.0, &radii);
        assert!((a4h - 13.0 / 240.0).abs() < 1e-6, "fit a4 = {a4h}");
    }

    /// Slope of the ordinary least-squares line through `(x, y)` pairs.
    fn regress_slope(pts: &[(f64, f64)]) -> f64 {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        sxy / sxx
    }

    /// Fits y = a2 r^2 + a4 r^4 + a6 r^6 + a8 r^8 to exact model volumes
    /// and returns the fitted a4. Columns are normalized before the solve;
    /// raw powers of r differ in scale by orders of magnitude.
    fn fit_even_polynomial(c: f64, radii: &[f64]) -> f64 {
        use nalgebra::{DMatrix, DVector};
        let rows = radii.len();
        let mut x = DMatrix::zeros(rows, 4);
        let mut y = DVector::zeros(rows);
        for (i, &r) in radii.iter().enumerate() {
            let v = model_ball_volume_exact(c, r).unwrap();
            y[i] = v / euclidean_ball_volume(4, r) - 1.0;
            for (j, p) in [2, 4, 6, 8].into_iter().enumerate() {
                x[(i, j)] = r.powi(p);
            }
        }
        let scales: Vec<f64> = (0..4).map(|j| x.column(j).norm()).collect();
        for (j, s) in scales.iter().enumerate() {
            let mut col = x.column_mut(j);
            col /= *s;
        }
        let svd = x.svd(true, true);
        let sol = svd.solve(&y, 1e-14).unwrap();
        sol[1] / scales[1]
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            /// The Weyl-decomposed rewrite of a4 with the corrected τ²
            /// coefficient is an algebraic identity in the invariants, for
            /// every dimension.
            #[test]
            fn a4_rewrite_is_identity(
                dim in 3usize..7,
                tau in -50.0f64..50.0,
                r2 in 0.0f64..400.0,
                rho2 in 0.0f64..300.0,
                lap in -20.0f64..20.0,
            ) {
                let c = GrayCoefficients::from_invariants(dim, tau, r2, rho2, lap).unwrap();
                let scale = c.a4.abs().max(1e-6);
                prop_assert!((c.a4 - c.a4_weyl_form).abs() <= 1e-12 * scale.max(1.0));
                // The printed variant differs whenever τ is nonzero.
                if tau.abs() > 1.0 {
                    let n = dim as f64;
                    let gap = (5.0 + 6.0/((n-1.0)*(n-2.0)) + 8.0/n - 12.0/(n*(n-2.0))
                        - 2.0/(n*(n-1.0))) * tau * tau
                        / (360.0 * (n + 2.0) * (n + 4.0));
                    prop_assert!((c.a4 - c.a4_printed_variant - gap).abs() < 1e-12 * (1.0 + gap.abs()));
                }
            }
        }
    }
}
