//! Measured geodesic-ball volumes.
//!
//! A ball volume is the double integral of the volume density in geodesic
//! polar coordinates: for each unit direction `u` at the center, shoot the
//! geodesic `exp(t u)` and propagate the matrix Jacobi equation
//! `A'' + R_u A = 0` in a frame parallel-transported along it; the density
//! is `det A(t, u)` and
//!
//! ```text
//!   V(p, r) = sum_u w_u  int_0^r det A(t, u) dt .
//! ```
//!
//! Position, velocity, frame, `A`, `A'`, and the running radial integral
//! travel together as one 39-component ODE state, so the radial integral
//! inherits the integrator's error control, and checkpoint values at
//! requested radii are exact step landings, not interpolations.
//!
//! Direction sums always reduce in direction order regardless of how the
//! work was scheduled, so results are bit-identical across worker counts.

use rayon::prelude::*;

use crate::curvature::{self, ConnectionData};
use crate::error::{Error, Result};
use crate::gray;
use crate::linalg;
use crate::metric::{ChartPoint, MetricField, DIM};
use crate::ode::{Dopri5, Monitor, OdeOptions, StepRecord};
use crate::quadrature::SphereRule;

// Augmented state layout: position, velocity, three parallel frame
// vectors, the Jacobi matrix A (row-major), its derivative, and the
// accumulated density integral.
const OX: usize = 0;
const OV: usize = 4;
const OE: usize = 8;
const OA: usize = 20;
const OB: usize = 29;
const OS: usize = 38;
const LEN: usize = 39;

/// Snapshot of the augmented geodesic state at one parameter value.
#[derive(Clone, Debug)]
pub struct GeodesicState {
    pub t: f64,
    /// Chart coordinates; periodic coordinates are left unwrapped.
    pub position: ChartPoint,
    /// Unit-speed velocity in chart coordinates.
    pub velocity: [f64; 4],
    /// Parallel-transported orthonormal basis of the velocity's orthogonal
    /// complement.
    pub frame: [[f64; 4]; 3],
    /// Jacobi matrix A(t); A(0) = 0.
    pub jacobi_matrix: [[f64; 3]; 3],
    /// A'(t); A'(0) = identity.
    pub jacobi_rate: [[f64; 3]; 3],
    /// Running integral of det A from 0 to t.
    pub density_integral: f64,
}

impl GeodesicState {
    fn from_flat(t: f64, y: &[f64]) -> GeodesicState {
        let mut frame = [[0.0; 4]; 3];
        for a in 0..3 {
            frame[a].copy_from_slice(&y[OE + 4 * a..OE + 4 * a + 4]);
        }
        GeodesicState {
            t,
            position: ChartPoint::new(y[OX..OX + 4].to_vec()),
            velocity: y[OV..OV + 4].try_into().unwrap(),
            frame,
            jacobi_matrix: unflatten3(&y[OA..OA + 9]),
            jacobi_rate: unflatten3(&y[OB..OB + 9]),
            density_integral: y[OS],
        }
    }

    /// Volume density det A at this state.
    pub fn density(&self) -> f64 {
        linalg::det3(&self.jacobi_matrix)
    }
}

/// Densely stored geodesic, sampleable anywhere on its parameter span.
#[derive(Clone, Debug)]
pub struct GeodesicTrajectory {
    traj: crate::ode::Trajectory,
}

impl GeodesicTrajectory {
    pub fn t_end(&self) -> f64 {
        self.traj.t_end()
    }

    pub fn sample(&self, t: f64) -> GeodesicState {
        let y = self.traj.sample(t);
        GeodesicState::from_flat(t.clamp(0.0, self.traj.t_end()), &y)
    }

    pub fn end(&self) -> GeodesicState {
        GeodesicState::from_flat(self.traj.t_end(), self.traj.y_end())
    }
}

/// One measured ball volume together with its accuracy context.
#[derive(Clone, Debug)]
pub struct BallVolumeEstimate {
    pub radius: f64,
    pub value: f64,
    pub directions_used: usize,
    pub ode_tolerance: f64,
    /// Difference against a coarser direction rule; a bound on the
    /// direction-quadrature contribution to the error.
    pub quadrature_error_estimate: f64,
}

/// Configuration for [`fit_expansion`].
#[derive(Clone, Debug)]
pub struct FitConfig {
    pub rule: SphereRule,
    pub ode_tol: f64,
    /// Include an r^6 nuisance term soaking up the next expansion order.
    /// Without it the a4 estimate is biased at the 1e-2 level.
    pub with_r6_term: bool,
}

impl Default for FitConfig {
    fn default() -> FitConfig {
        FitConfig { rule: SphereRule::default_rule(), ode_tol: 1e-10, with_r6_term: true }
    }
}

/// Least-squares estimate of the volume-expansion coefficients.
#[derive(Clone, Debug)]
pub struct FittedExpansion {
    pub a2: f64,
    pub a4: f64,
    pub a2_stderr: f64,
    pub a4_stderr: f64,
    /// Condition number of the column-normalized design matrix.
    pub condition: f64,
    pub residual_rms: f64,
    /// Radii that actually entered the fit (conjugate truncation may drop
    /// the tail of the requested grid).
    pub radii_used: usize,
    /// First conjugate distance seen in any direction, if one was hit.
    pub conjugate_bound: Option<f64>,
    /// Measured (radius, volume) pairs for every radius all directions
    /// reached, including any excluded from the fit by truncation.
    pub volumes: Vec<(f64, f64)>,
}

fn unflatten3(flat: &[f64]) -> [[f64; 3]; 3] {
    let mut m = [[0.0; 3]; 3];
    for a in 0..3 {
        m[a].copy_from_slice(&flat[3 * a..3 * a + 3]);
    }
    m
}

fn det3_flat(flat: &[f64]) -> f64 {
    linalg::det3(&unflatten3(flat))
}

/// Right-hand side of the augmented system.
fn augmented_rhs(m: &MetricField, y: &[f64], dy: &mut [f64]) -> Result<()> {
    let x: &[f64; 4] = y[OX..OX + 4].try_into().unwrap();
    if !m.domain().contains(x) {
        return Err(Error::PointOutsideChart {
            chart: m.name().to_string(),
            point: x.to_vec(),
        });
    }
    let ConnectionData { gamma, riemann } = curvature::connection_data(m, x)?;
    let v: &[f64; 4] = y[OV..OV + 4].try_into().unwrap();

    for i in 0..DIM {
        dy[OX + i] = v[i];
    }
    // The geodesic equation and parallel transport share the contraction
    // Gamma(v, .).
    let mut gv = [[0.0; 4]; 4];
    for r in 0..DIM {
        for n in 0..DIM {
            let mut s = 0.0;
            for l in 0..DIM {
                s += gamma[r][l][n] * v[l];
            }
            gv[r][n] = s;
        }
    }
    for r in 0..DIM {
        let mut s = 0.0;
        for n in 0..DIM {
            s += gv[r][n] * v[n];
        }
        dy[OV + r] = -s;
    }
    for a in 0..3 {
        let e = &y[OE + 4 * a..OE + 4 * a + 4];
        for r in 0..DIM {
            let mut s = 0.0;
            for n in 0..DIM {
                s += gv[r][n] * e[n];
            }
            dy[OE + 4 * a + r] = -s;
        }
    }

    // Jacobi operator in the parallel frame: M_ab = R(e_a, v, e_b, v),
    // symmetric by the pair symmetry of the curvature tensor.
    let mut q = [[0.0; 4]; 4];
    for r in 0..DIM {
        for k in 0..DIM {
            let mut s = 0.0;
            for si in 0..DIM {
                for n in 0..DIM {
                    s += riemann[r][si][k][n] * v[si] * v[n];
                }
            }
            q[r][k] = s;
        }
    }
    let mut mm = [[0.0; 3]; 3];
    for a in 0..3 {
        let ea = &y[OE + 4 * a..OE + 4 * a + 4];
        for b in 0..3 {
            let eb = &y[OE + 4 * b..OE + 4 * b + 4];
            let mut s = 0.0;
            for r in 0..DIM {
                for k in 0..DIM {
                    s += ea[r] * q[r][k] * eb[k];
                }
            }
            mm[a][b] = s;
        }
    }

    // A' = B, B' = -M A, s' = det A.
    for a in 0..3 {
        for b in 0..3 {
            dy[OA + 3 * a + b] = y[OB + 3 * a + b];
            let mut s = 0.0;
            for c in 0..3 {
                s += mm[a][c] * y[OA + 3 * c + b];
            }
            dy[OB + 3 * a + b] = -s;
        }
    }
    dy[OS] = det3_flat(&y[OA..OA + 9]);
    Ok(())
}

fn inner_g(g: &[[f64; 4]; 4], a: &[f64; 4], b: &[f64; 4]) -> f64 {
    let mut s = 0.0;
    for i in 0..DIM {
        for j in 0..DIM {
            s += g[i][j] * a[i] * b[j];
        }
    }
    s
}

/// g-orthonormal basis of the tangent space at `p` (columns of the inverse
/// transpose of the Cholesky factor).
fn orthonormal_basis(m: &MetricField, p: &ChartPoint) -> Result<([[f64; 4]; 4], [[f64; 4]; 4])> {
    let g = m.components_at(p)?;
    let l = linalg::cholesky_lower(&g, DIM).ok_or(Error::NotPositiveDefinite)?;
    Ok((g, linalg::inverse_transpose_columns(&l, DIM)))
}

/// Completes the unit coefficient vector `d` (coordinates of the direction
/// in a g-orthonormal basis) to an orthonormal basis of R^4; returns the
/// three complement vectors. Deterministic in `d`.
fn euclidean_complement(d: &[f64; 4]) -> [[f64; 4]; 3] {
    let skip = (0..4).max_by(|&i, &j| d[i].abs().partial_cmp(&d[j].abs()).unwrap()).unwrap();
    let mut out = [[0.0; 4]; 3];
    let mut count = 0;
    for axis in 0..4 {
        if axis == skip {
            continue;
        }
        let mut w = [0.0; 4];
        w[axis] = 1.0;
        let proj: f64 = (0..4).map(|i| w[i] * d[i]).sum();
        for i in 0..4 {
            w[i] -= proj * d[i];
        }
        for prev in out.iter().take(count) {
            let proj: f64 = (0..4).map(|i| w[i] * prev[i]).sum();
            for i in 0..4 {
                w[i] -= proj * prev[i];
            }
        }
        let norm = (0..4).map(|i| w[i] * w[i]).sum::<f64>().sqrt();
        for i in 0..4 {
            w[i] /= norm;
        }
        out[count] = w;
        count += 1;
    }
    out
}

/// Initial augmented state for the direction with coefficients `d` in the
/// orthonormal basis `f` (columns f[.][k] are basis vectors).
fn initial_state(basis: &[[f64; 4]; 4], p: &ChartPoint, d: &[f64; 4]) -> [f64; LEN] {
    let mut y = [0.0; LEN];
    y[OX..OX + 4].copy_from_slice(p.coords());
    for i in 0..DIM {
        let mut s = 0.0;
        for k in 0..DIM {
            s += basis[i][k] * d[k];
        }
        y[OV + i] = s;
    }
    let comp = euclidean_complement(d);
    for (a, c) in comp.iter().enumerate() {
        for i in 0..DIM {
            let mut s = 0.0;
            for k in 0..DIM {
                s += basis[i][k] * c[k];
            }
            y[OE + 4 * a + i] = s;
        }
    }
    // A(0) = 0, A'(0) = identity.
    for a in 0..3 {
        y[OB + 3 * a + a] = 1.0;
    }
    y
}

/// Initial state from a caller-supplied unit tangent `u` at `p`.
fn initial_state_from_tangent(
    m: &MetricField,
    p: &ChartPoint,
    u: &[f64; 4],
) -> Result<[f64; LEN]> {
    let (g, basis) = orthonormal_basis(m, p)?;
    let speed2 = inner_g(&g, u, u);
    if (speed2 - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidParameter(format!(
            "direction must be unit speed, got g(u,u) = {speed2:.12}"
        )));
    }
    // Coefficients of u in the orthonormal basis: d_k = g(u, f_k).
    let mut d = [0.0; 4];
    for k in 0..DIM {
        let fk: [f64; 4] = std::array::from_fn(|i| basis[i][k]);
        d[k] = inner_g(&g, u, &fk);
    }
    Ok(initial_state(&basis, p, &d))
}

/// Monitor that stops at the first sign change of det A (conjugate point),
/// located by bisection on the dense output.
fn conjugate_monitor(rec: &StepRecord) -> Result<Monitor> {
    let mut buf = [0.0; LEN];
    rec.eval(rec.t1(), &mut buf);
    if det3_flat(&buf[OA..OA + 9]) > 0.0 {
        return Ok(Monitor::Continue);
    }
    let mut lo = rec.t0;
    let mut hi = rec.t1();
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        rec.eval(mid, &mut buf);
        if det3_flat(&buf[OA..OA + 9]) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Monitor::Stop { t: 0.5 * (lo + hi) })
}

/// Leaving the chart during a geodesic integration shows up as the metric
/// code refusing to evaluate; all such refusals mean the same thing here.
fn is_chart_boundary(e: &Error) -> bool {
    matches!(
        e,
        Error::PointOutsideChart { .. }
            | Error::SingularMetric { .. }
            | Error::NotPositiveDefinite
    )
}

/// Runs one direction to parameter `r`, capturing state at `checkpoints`
/// and stopping at the first conjugate point. Chart exits surface as
/// `ChartExit` at the last parameter the right-hand side evaluated.
fn run_direction(
    m: &MetricField,
    y0: &[f64; LEN],
    r: f64,
    checkpoints: &[f64],
    opts: OdeOptions,
) -> Result<crate::ode::Solution> {
    let solver = Dopri5::new(opts);
    let seen = std::cell::Cell::new(0.0f64);
    let result = solver.solve_monitored(
        |t, y, dy| {
            let out = augmented_rhs(m, y, dy);
            if out.is_ok() && t > seen.get() {
                seen.set(t);
            }
            out
        },
        0.0,
        y0,
        r,
        checkpoints,
        conjugate_monitor,
    );
    match result {
        Err(e) if is_chart_boundary(&e) => Err(Error::ChartExit { t: seen.get() }),
        other => other,
    }
}

/// Integrates the geodesic through `p` with unit tangent `u` out to
/// parameter `r`, returning a densely sampled trajectory. The trajectory
/// continues through conjugate points (they are not geodesic endpoints);
/// only chart exit or integrator failure stops it.
pub fn shoot_geodesic(
    m: &MetricField,
    p: &ChartPoint,
    u: &[f64; 4],
    r: f64,
) -> Result<GeodesicTrajectory> {
    shoot_geodesic_with(m, p, u, r, OdeOptions::default())
}

pub fn shoot_geodesic_with(
    m: &MetricField,
    p: &ChartPoint,
    u: &[f64; 4],
    r: f64,
    opts: OdeOptions,
) -> Result<GeodesicTrajectory> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {r}")));
    }
    let y0 = initial_state_from_tangent(m, p, u)?;
    let solver = Dopri5::new(opts);
    let seen = std::cell::Cell::new(0.0f64);
    let traj = solver
        .solve_dense(
            |t, y, dy| {
                let out = augmented_rhs(m, y, dy);
                if out.is_ok() && t > seen.get() {
                    seen.set(t);
                }
                out
            },
            0.0,
            &y0,
            r,
        )
        .map_err(|e| {
            if is_chart_boundary(&e) {
                Error::ChartExit { t: seen.get() }
            } else {
                e
            }
        })?;
    Ok(GeodesicTrajectory { traj })
}

/// Volume density det A(t, u) for the geodesic from `p` in direction `u`.
/// Fails with `ConjugatePoint` if det A vanishes before `t`.
pub fn volume_density(m: &MetricField, p: &ChartPoint, u: &[f64; 4], t: f64) -> Result<f64> {
    volume_density_with(m, p, u, t, OdeOptions::default())
}

pub fn volume_density_with(
    m: &MetricField,
    p: &ChartPoint,
    u: &[f64; 4],
    t: f64,
    opts: OdeOptions,
) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("parameter must be positive, got {t}")));
    }
    let y0 = initial_state_from_tangent(m, p, u)?;
    let sol = run_direction(m, &y0, t, &[], opts)?;
    if let Some(stop) = sol.stopped {
        return Err(Error::ConjugatePoint { t: stop.t });
    }
    Ok(det3_flat(&sol.y_end[OA..OA + 9]))
}

/// Integrates density along every rule direction, returning the per-
/// direction solutions in direction order.
fn run_all_directions(
    m: &MetricField,
    p: &ChartPoint,
    rule: &SphereRule,
    r: f64,
    checkpoints: &[f64],
    opts: OdeOptions,
) -> Result<Vec<crate::ode::Solution>> {
    let (_, basis) = orthonormal_basis(m, p)?;
    rule.directions
        .par_iter()
        .map(|d| {
            let y0 = initial_state(&basis, p, d);
            run_direction(m, &y0, r, checkpoints, opts)
        })
        .collect()
}

/// Sum of weighted per-direction radial integrals at a fixed checkpoint
/// index, accumulated in direction order.
fn weighted_sum(rule: &SphereRule, sols: &[crate::ode::Solution], idx: Option<usize>) -> f64 {
    let mut total = 0.0;
    for (w, sol) in rule.weights.iter().zip(sols) {
        let s = match idx {
            Some(j) => sol.checkpoints[j][OS],
            None => sol.y_end[OS],
        };
        total += w * s;
    }
    total
}

/// Measures the volume of the geodesic ball of radius `r` about `p`.
///
/// The estimate carries the difference against a coarser companion rule;
/// if that difference exceeds 1% of the value, the direction quadrature
/// has not converged and the measurement is rejected.
pub fn ball_volume(
    m: &MetricField,
    p: &ChartPoint,
    r: f64,
    rule: &SphereRule,
    ode_tol: f64,
) -> Result<BallVolumeEstimate> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {r}")));
    }
    let opts = OdeOptions::with_tol(ode_tol);
    let sols = run_all_directions(m, p, rule, r, &[], opts)?;
    for sol in &sols {
        if let Some(stop) = sol.stopped {
            return Err(Error::ConjugatePoint { t: stop.t });
        }
    }
    let value = weighted_sum(rule, &sols, None);

    let coarse = rule.coarse();
    let coarse_sols = run_all_directions(m, p, &coarse, r, &[], opts)?;
    for sol in &coarse_sols {
        if let Some(stop) = sol.stopped {
            return Err(Error::ConjugatePoint { t: stop.t });
        }
    }
    let estimate = (value - weighted_sum(&coarse, &coarse_sols, None)).abs();
    if estimate > 0.01 * value.abs() + 1e-12 {
        return Err(Error::QuadratureNotConverged { estimate, budget: 0.01 * value.abs() });
    }
    Ok(BallVolumeEstimate {
        radius: r,
        value,
        directions_used: rule.len(),
        ode_tolerance: ode_tol,
        quadrature_error_estimate: estimate,
    })
}

/// Measures ball volumes on a radius grid and fits the normalized
/// volume defect `V(r)/lead(r) - 1` against `{r^2, r^4}` (plus an `r^6`
/// nuisance term by default) to recover the expansion coefficients.
///
/// Radii past 0.6 times the first detected conjugate distance are excluded
/// from the fit; the expansion is an asymptotic statement near r = 0 and
/// measurement past a conjugate point is not meaningful anyway.
pub fn fit_expansion(
    m: &MetricField,
    p: &ChartPoint,
    radii: &[f64],
    config: &FitConfig,
) -> Result<FittedExpansion> {
    if radii.len() < 8 {
        return Err(Error::InvalidParameter(format!(
            "need at least 8 radii for a stable fit, got {}",
            radii.len()
        )));
    }
    if !radii.windows(2).all(|w| w[0] < w[1]) || !(radii[0] > 0.0) {
        return Err(Error::InvalidParameter(
            "radii must be positive and strictly increasing".into(),
        ));
    }
    let r_max = *radii.last().unwrap();
    let opts = OdeOptions::with_tol(config.ode_tol);
    let sols = run_all_directions(m, p, &config.rule, r_max, radii, opts)?;

    // Conjugate truncation: keep radii every direction reached, and below
    // 0.6 times the earliest conjugate distance.
    let reached = sols.iter().map(|s| s.checkpoints.len()).min().unwrap_or(0);
    let conjugate_bound = sols
        .iter()
        .filter_map(|s| s.stopped.map(|i| i.t))
        .min_by(|a, b| a.partial_cmp(b).unwrap());
    let cutoff = conjugate_bound.map(|t| 0.6 * t).unwrap_or(f64::INFINITY);

    let volumes: Vec<(f64, f64)> = (0..reached)
        .map(|j| (radii[j], weighted_sum(&config.rule, &sols, Some(j))))
        .collect();
    let fit_points: Vec<(f64, f64)> =
        volumes.iter().copied().filter(|&(r, _)| r < cutoff).collect();

    let n_params = if config.with_r6_term { 3 } else { 2 };
    if fit_points.len() < n_params + 2 {
        return Err(Error::InvalidParameter(format!(
            "only {} usable radii below the conjugate cutoff, need {}",
            fit_points.len(),
            n_params + 2
        )));
    }

    // Column-normalized least squares on y = V/lead - 1.
    let rows = fit_points.len();
    let mut design = nalgebra::DMatrix::zeros(rows, n_params);
    let mut rhs = nalgebra::DVector::zeros(rows);
    for (i, &(r, v)) in fit_points.iter().enumerate() {
        design[(i, 0)] = r * r;
        design[(i, 1)] = r.powi(4);
        if n_params == 3 {
            design[(i, 2)] = r.powi(6);
        }
        rhs[i] = v / gray::euclidean_ball_volume(DIM, r) - 1.0;
    }
    let col_norms: Vec<f64> = (0..n_params).map(|j| design.column(j).norm()).collect();
    for (j, &norm) in col_norms.iter().enumerate() {
        design.column_mut(j).scale_mut(1.0 / norm);
    }
    let svd = design.clone().svd(true, true);
    let condition = svd.singular_values.max() / svd.singular_values.min();
    if condition > 1e10 {
        return Err(Error::IllConditionedFit { condition });
    }
    let beta_scaled =
        svd.solve(&rhs, 0.0).map_err(|_| Error::IllConditionedFit { condition })?;
    let beta: Vec<f64> =
        beta_scaled.iter().zip(&col_norms).map(|(b, n)| b / n).collect();

    // Residual variance and parameter covariance diag(V S^-2 V^T).
    let fitted = design * &beta_scaled;
    let dof = (rows - n_params).max(1);
    let ss: f64 = (0..rows).map(|i| (rhs[i] - fitted[i]).powi(2)).sum();
    let sigma2 = ss / dof as f64;
    let v_t = svd.v_t.as_ref().unwrap();
    let mut stderr = vec![0.0; n_params];
    for j in 0..n_params {
        let mut var = 0.0;
        for k in 0..n_params {
            var += (v_t[(k, j)] / svd.singular_values[k]).powi(2);
        }
        stderr[j] = (sigma2 * var).sqrt() / col_norms[j];
    }

    Ok(FittedExpansion {
        a2: beta[0],
        a4: beta[1],
        a2_stderr: stderr[0],
        a4_stderr: stderr[1],
        condition,
        residual_rms: (ss / rows as f64).sqrt(),
        radii_used: rows,
        conjugate_bound,
        volumes,
    })
}
