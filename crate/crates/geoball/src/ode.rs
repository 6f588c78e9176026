//! Adaptive Runge-Kutta integration (Dormand-Prince 5(4)).
//!
//! A single core loop serves three uses: plain endpoint integration, dense
//! (interpolable) trajectories, and monitored runs that can stop mid-step
//! on an event. Steps land exactly on requested checkpoints by clipping the
//! step size, so checkpoint values carry no interpolation error.
//!
//! The right-hand side returns a `Result`; a failing trial stage (for
//! example a stage point that wanders off the chart) shrinks the step and
//! retries, and only an unrecoverable shrink propagates the failure. This
//! makes domain boundaries behave like ordinary stiffness instead of hard
//! crashes.

use crate::error::{Error, Result};

/// Integrator tolerances and limits.
#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> OdeOptions {
        OdeOptions { rtol: 1e-10, atol: 1e-12, max_steps: 100_000 }
    }
}

impl OdeOptions {
    pub fn with_tol(rtol: f64) -> OdeOptions {
        OdeOptions { rtol, atol: 1e-2 * rtol, ..OdeOptions::default() }
    }
}

// Dormand-Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
// Embedded 4th-order error coefficients (b - b_hat).
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Dense-output quintic coefficients.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// One accepted step with its dense-output coefficients: the solution on
/// `[t0, t0+h]` is a quintic in the normalized time.
#[derive(Clone, Debug)]
pub struct StepRecord {
    pub t0: f64,
    pub h: f64,
    /// Five interpolation coefficients per component.
    cont: Vec<[f64; 5]>,
}

impl StepRecord {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    /// Interpolates the solution at `t` within the step.
    pub fn eval(&self, t: f64, out: &mut [f64]) {
        let th = ((t - self.t0) / self.h).clamp(0.0, 1.0);
        let th1 = 1.0 - th;
        for (o, c) in out.iter_mut().zip(&self.cont) {
            *o = c[0] + th * (c[1] + th1 * (c[2] + th * (c[3] + th1 * c[4])));
        }
    }
}

/// Verdict a monitor returns after inspecting an accepted step.
pub enum Monitor {
    Continue,
    /// Truncate the solution at `t` (inside the step just taken) and stop.
    Stop { t: f64 },
}

/// Where and why integration ended early.
#[derive(Clone, Copy, Debug)]
pub struct StopInfo {
    pub t: f64,
}

/// Result of a monitored integration.
#[derive(Debug)]
pub struct Solution {
    pub t_end: f64,
    pub y_end: Vec<f64>,
    /// State at each requested checkpoint that was reached, in order.
    pub checkpoints: Vec<Vec<f64>>,
    pub stopped: Option<StopInfo>,
    pub steps: usize,
}

/// Densely stored trajectory, sampleable at any time in its span.
#[derive(Clone, Debug)]
pub struct Trajectory {
    t0: f64,
    t_end: f64,
    steps: Vec<StepRecord>,
    y_start: Vec<f64>,
    y_end: Vec<f64>,
}

impl Trajectory {
    pub fn t_start(&self) -> f64 {
        self.t0
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn y_end(&self) -> &[f64] {
        &self.y_end
    }

    /// Solution at `t`, clamped to the trajectory span.
    pub fn sample(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.y_end.len()];
        if self.steps.is_empty() || t <= self.t0 {
            out.copy_from_slice(&self.y_start);
            if self.steps.is_empty() && t >= self.t_end {
                out.copy_from_slice(&self.y_end);
            }
            return out;
        }
        let idx = self
            .steps
            .partition_point(|s| s.t1() < t)
            .min(self.steps.len() - 1);
        self.steps[idx].eval(t.min(self.t_end), &mut out);
        out
    }
}

pub struct Dopri5 {
    pub opts: OdeOptions,
}

enum StepInspect<'a> {
    None,
    Monitor(&'a mut dyn FnMut(&StepRecord) -> Result<Monitor>),
}

impl Dopri5 {
    pub fn new(opts: OdeOptions) -> Dopri5 {
        Dopri5 { opts }
    }

    /// Integrates to `t_end` and returns the final state.
    pub fn solve_to<F>(&self, mut rhs: F, t0: f64, y0: &[f64], t_end: f64) -> Result<Vec<f64>>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    {
        let sol = self.run(&mut rhs, t0, y0, t_end, &[], StepInspect::None, None)?;
        Ok(sol.y_end)
    }

    /// Integrates with checkpoint capture and an event monitor.
    pub fn solve_monitored<F, M>(
        &self,
        mut rhs: F,
        t0: f64,
        y0: &[f64],
        t_end: f64,
        checkpoints: &[f64],
        mut monitor: M,
    ) -> Result<Solution>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
        M: FnMut(&StepRecord) -> Result<Monitor>,
    {
        self.run(&mut rhs, t0, y0, t_end, checkpoints, StepInspect::Monitor(&mut monitor), None)
    }

    /// Integrates and stores every accepted step for later interpolation.
    pub fn solve_dense<F>(
        &self,
        mut rhs: F,
        t0: f64,
        y0: &[f64],
        t_end: f64,
    ) -> Result<Trajectory>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    {
        let mut store = Vec::new();
        let sol = self.run(&mut rhs, t0, y0, t_end, &[], StepInspect::None, Some(&mut store))?;
        Ok(Trajectory {
            t0,
            t_end: sol.t_end,
            steps: store,
            y_start: y0.to_vec(),
            y_end: sol.y_end,
        })
    }

    fn run(
        &self,
        rhs: &mut dyn FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
        t0: f64,
        y0: &[f64],
        t_end: f64,
        checkpoints: &[f64],
        mut inspect: StepInspect,
        mut dense: Option<&mut Vec<StepRecord>>,
    ) -> Result<Solution> {
        let dim = y0.len();
        let opts = self.opts;
        if !(t_end > t0) {
            return Err(Error::InvalidParameter(format!(
                "integration span must be forward, got [{t0}, {t_end}]"
            )));
        }
        let span = t_end - t0;
        let mut t = t0;
        let mut y = y0.to_vec();
        let mut k = vec![vec![0.0f64; dim]; 7];
        let mut ytmp = vec![0.0f64; dim];
        let mut y1 = vec![0.0f64; dim];

        rhs(t, &y, &mut k[0])?;
        let mut h = initial_step(rhs, t, &y, &k[0].clone(), span, opts).unwrap_or(1e-6 * span);

        let mut next_cp = checkpoints.partition_point(|&c| c <= t0);
        let mut captured: Vec<Vec<f64>> = Vec::new();
        let mut stopped = None;
        let mut steps = 0usize;
        let mut rejected_last = false;

        'outer: while t < t_end - 1e-14 * span.max(t.abs()) {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::OdeStepFailure {
                    t,
                    detail: format!("step budget {} exhausted", opts.max_steps),
                });
            }
            // Clip to the next mandatory landing point.
            let mut h_step = h.min(t_end - t);
            let mut landing_cp = false;
            if next_cp < checkpoints.len() {
                let gap = checkpoints[next_cp] - t;
                if gap <= h_step * (1.0 + 1e-12) {
                    h_step = gap;
                    landing_cp = true;
                }
            }

            // Stages; a failing stage halves the attempt and retries.
            let stage_result = (|| -> Result<f64> {
                let h = h_step;
                for i in 0..dim {
                    ytmp[i] = y[i] + h * A21 * k[0][i];
                }
                rhs(t + C2 * h, &ytmp, &mut k[1])?;
                for i in 0..dim {
                    ytmp[i] = y[i] + h * (A31 * k[0][i] + A32 * k[1][i]);
                }
                rhs(t + C3 * h, &ytmp, &mut k[2])?;
                for i in 0..dim {
                    ytmp[i] = y[i] + h * (A41 * k[0][i] + A42 * k[1][i] + A43 * k[2][i]);
                }
                rhs(t + C4 * h, &ytmp, &mut k[3])?;
                for i in 0..dim {
                    ytmp[i] = y[i]
                        + h * (A51 * k[0][i] + A52 * k[1][i] + A53 * k[2][i] + A54 * k[3][i]);
                }
                rhs(t + C5 * h, &ytmp, &mut k[4])?;
                for i in 0..dim {
                    ytmp[i] = y[i]
                        + h * (A61 * k[0][i]
                            + A62 * k[1][i]
                            + A63 * k[2][i]
                            + A64 * k[3][i]
                            + A65 * k[4][i]);
                }
                rhs(t + h, &ytmp, &mut k[5])?;
                for i in 0..dim {
                    y1[i] = y[i]
                        + h * (B1 * k[0][i]
                            + B3 * k[2][i]
                            + B4 * k[3][i]
                            + B5 * k[4][i]
                            + B6 * k[5][i]);
                }
                rhs(t + h, &y1, &mut k[6])?;
                // Scaled RMS error of the embedded 4th-order solution.
                let mut err = 0.0;
                for i in 0..dim {
                    let e = h
                        * (E1 * k[0][i]
                            + E3 * k[2][i]
                            + E4 * k[3][i]
                            + E5 * k[4][i]
                            + E6 * k[5][i]
                            + E7 * k[6][i]);
                    let sc = opts.atol + opts.rtol * y[i].abs().max(y1[i].abs());
                    err += (e / sc) * (e / sc);
                }
                Ok((err / dim as f64).sqrt())
            })();

            let err = match stage_result {
                Ok(err) => err,
                Err(e) => {
                    // Trial point failed to evaluate; treat as an oversized
                    // step until the step gets hopelessly small.
                    if h_step < 1e-12 * span.max(t.abs()) {
                        return Err(e);
                    }
                    h = 0.25 * h_step;
                    rejected_last = true;
                    continue 'outer;
                }
            };

            if !err.is_finite() {
                if h_step < 1e-12 * span.max(t.abs()) {
                    return Err(Error::OdeStepFailure {
                        t,
                        detail: "error estimate is not finite".into(),
                    });
                }
                h = 0.25 * h_step;
                rejected_last = true;
                continue 'outer;
            }

            if err > 1.0 {
                h = h_step * (0.9 * err.powf(-0.2)).max(0.2);
                rejected_last = true;
                continue 'outer;
            }

            // Accepted.
            let t1 = t + h_step;
            let need_record =
                matches!(inspect, StepInspect::Monitor(_)) || dense.is_some();
            let record = if need_record {
                let mut cont = Vec::with_capacity(dim);
                for i in 0..dim {
                    let ydiff = y1[i] - y[i];
                    let bspl = h_step * k[0][i] - ydiff;
                    let c5 = h_step
                        * (D1 * k[0][i]
                            + D3 * k[2][i]
                            + D4 * k[3][i]
                            + D5 * k[4][i]
                            + D6 * k[5][i]
                            + D7 * k[6][i]);
                    cont.push([y[i], ydiff, bspl, ydiff - h_step * k[6][i] - bspl, c5]);
                }
                Some(StepRecord { t0: t, h: h_step, cont })
            } else {
                None
            };

            if let (StepInspect::Monitor(m), Some(rec)) = (&mut inspect, &record) {
                match m(rec)? {
                    Monitor::Continue => {}
                    Monitor::Stop { t: ts } => {
                        let ts = ts.clamp(t, t1);
                        rec.eval(ts, &mut y1);
                        stopped = Some(StopInfo { t: ts });
                        t = ts;
                        y.copy_from_slice(&y1);
                        break 'outer;
                    }
                }
            }
            if let (Some(store), Some(rec)) = (dense.as_deref_mut(), record) {
                store.push(rec);
            }

            if landing_cp {
                captured.push(y1.clone());
                next_cp += 1;
            }

            y.copy_from_slice(&y1);
            t = t1;
            k.swap(0, 6); // FSAL

            let facmax = if rejected_last { 1.0 } else { 5.0 };
            rejected_last = false;
            let fac = (0.9 * err.powf(-0.2)).clamp(0.2, facmax);
            h = (h_step * fac).max(1e-14 * span);
        }

        Ok(Solution { t_end: t, y_end: y, checkpoints: captured, stopped, steps })
    }
}

/// Step-size guess from local derivative magnitudes (Hairer's procedure).
fn initial_step(
    rhs: &mut dyn FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    t0: f64,
    y0: &[f64],
    f0: &[f64],
    span: f64,
    opts: OdeOptions,
) -> Result<f64> {
    let dim = y0.len();
    let sc: Vec<f64> = y0.iter().map(|v| opts.atol + opts.rtol * v.abs()).collect();
    let d0 = rms(y0.iter().zip(&sc).map(|(v, s)| v / s), dim);
    let d1 = rms(f0.iter().zip(&sc).map(|(v, s)| v / s), dim);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * (d0 / d1) }.min(span);
    let mut y1 = vec![0.0; dim];
    for i in 0..dim {
        y1[i] = y0[i] + h0 * f0[i];
    }
    let mut f1 = vec![0.0; dim];
    rhs(t0 + h0, &y1, &mut f1)?;
    let d2 = rms(
        f1.iter().zip(f0.iter()).zip(&sc).map(|((a, b), s)| (a - b) / s),
        dim,
    ) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    Ok((100.0 * h0).min(h1).min(span))
}

fn rms(vals: impl Iterator<Item = f64>, n: usize) -> f64 {
    (vals.map(|v| v * v).sum::<f64>() / n as f64).sqrt()
}
