//! Curvature tensors and scalar invariants.
//!
//! Everything is assembled from exact metric derivatives (jet evaluation),
//! so the only numerical error is floating-point rounding plus whatever the
//! metric inverse contributes; there is no finite-difference truncation.
//!
//! Conventions, fixed once and verified by the sign-calibration test
//! (`tau` of the unit 4-sphere is +12):
//!
//! * `Γ^k_ij = (1/2) g^{kl} (∂_i g_jl + ∂_j g_il - ∂_l g_ij)`;
//! * `R^r_smn = ∂_m Γ^r_ns - ∂_n Γ^r_ms + Γ^r_mλ Γ^λ_ns - Γ^r_nλ Γ^λ_ms`;
//! * `R_asmn = g_ar R^r_smn`, so constant curvature K means
//!   `R_asmn = K (g_am g_sn - g_an g_sm)`;
//! * `ρ_sn = R^m_smn`, `τ = g^sn ρ_sn` (positive on spheres);
//! * `Δf = g^ij (∂_i ∂_j f - Γ^k_ij ∂_k f)` (nonpositive spectrum on a
//!   closed manifold).
//!
//! Tensor norms contract every index with the metric, e.g.
//! `|R|^2 = R_asmn R^asmn`.

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::linalg;
use crate::metric::{ChartPoint, MetricField, DIM};

/// Metrics whose condition estimate exceeds this are treated as numerically
/// singular rather than silently losing digits.
pub const CONDITION_LIMIT: f64 = 1e12;

type Mat = [[f64; 4]; 4];
type Rank3 = [[[f64; 4]; 4]; 4];
type Rank4 = [[[[f64; 4]; 4]; 4]; 4];

/// Metric derivative values at one point: `d1[m][a][b] = ∂_m g_ab`,
/// `d2[m][l][a][b] = ∂_m ∂_l g_ab`.
struct Derivs {
    g: Mat,
    d1: Rank3,
    d2: Rank4,
}

fn extract_derivs(gj: &[[Jet; 4]; 4]) -> Derivs {
    let mut d = Derivs { g: [[0.0; 4]; 4], d1: [[[0.0; 4]; 4]; 4], d2: [[[[0.0; 4]; 4]; 4]; 4] };
    for a in 0..DIM {
        for b in 0..DIM {
            d.g[a][b] = gj[a][b].value();
            for m in 0..DIM {
                let mut alpha = [0u8; 4];
                alpha[m] = 1;
                d.d1[m][a][b] = gj[a][b].partial(&alpha);
                for l in 0..DIM {
                    let mut beta = alpha;
                    beta[l] += 1;
                    d.d2[m][l][a][b] = gj[a][b].partial(&beta);
                }
            }
        }
    }
    d
}

/// Everything the pointwise formulas need, assembled in plain arithmetic.
struct TensorSet {
    g: Mat,
    g_inv: Mat,
    sqrt_det: f64,
    condition: f64,
    gamma: Rank3,
    /// Fully lowered curvature tensor `R_asmn`.
    riemann: Rank4,
    ricci: Mat,
    tau: f64,
}

fn assemble(d: &Derivs) -> Result<TensorSet> {
    if linalg::cholesky_lower(&d.g, DIM).is_none() {
        return Err(Error::NotPositiveDefinite);
    }
    let (det, g_inv) = linalg::det_inverse(&d.g, DIM)
        .ok_or(Error::SingularMetric { condition: f64::INFINITY, limit: CONDITION_LIMIT })?;
    let condition = linalg::condition_estimate(&d.g, &g_inv, DIM);
    if condition > CONDITION_LIMIT {
        return Err(Error::SingularMetric { condition, limit: CONDITION_LIMIT });
    }

    let mut gamma = [[[0.0; 4]; 4]; 4];
    for k in 0..DIM {
        for i in 0..DIM {
            for j in 0..DIM {
                let mut s = 0.0;
                for l in 0..DIM {
                    s += g_inv[k][l] * (d.d1[i][j][l] + d.d1[j][i][l] - d.d1[l][i][j]);
                }
                gamma[k][i][j] = 0.5 * s;
            }
        }
    }

    // ∂_m g^kl = -g^ka (∂_m g_ab) g^bl
    let mut dginv = [[[0.0; 4]; 4]; 4];
    for m in 0..DIM {
        for k in 0..DIM {
            for l in 0..DIM {
                let mut s = 0.0;
                for a in 0..DIM {
                    for b in 0..DIM {
                        s += g_inv[k][a] * d.d1[m][a][b] * g_inv[b][l];
                    }
                }
                dginv[m][k][l] = -s;
            }
        }
    }

    // dgamma[m][k][i][j] = ∂_m Γ^k_ij
    let mut dgamma = [[[[0.0; 4]; 4]; 4]; 4];
    for m in 0..DIM {
        for k in 0..DIM {
            for i in 0..DIM {
                for j in 0..DIM {
                    let mut s = 0.0;
                    for l in 0..DIM {
                        s += dginv[m][k][l] * (d.d1[i][j][l] + d.d1[j][i][l] - d.d1[l][i][j]);
                        s += g_inv[k][l]
                            * (d.d2[m][i][j][l] + d.d2[m][j][i][l] - d.d2[m][l][i][j]);
                    }
                    dgamma[m][k][i][j] = 0.5 * s;
                }
            }
        }
    }

    let mut riemann_up = [[[[0.0; 4]; 4]; 4]; 4];
    for r in 0..DIM {
        for s in 0..DIM {
            for m in 0..DIM {
                for n in 0..DIM {
                    let mut v = dgamma[m][r][n][s] - dgamma[n][r][m][s];
                    for lam in 0..DIM {
                        v += gamma[r][m][lam] * gamma[lam][n][s]
                            - gamma[r][n][lam] * gamma[lam][m][s];
                    }
                    riemann_up[r][s][m][n] = v;
                }
            }
        }
    }

    let mut riemann = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..DIM {
        for s in 0..DIM {
            for m in 0..DIM {
                for n in 0..DIM {
                    let mut v = 0.0;
                    for r in 0..DIM {
                        v += d.g[a][r] * riemann_up[r][s][m][n];
                    }
                    riemann[a][s][m][n] = v;
                }
            }
        }
    }

    let mut ricci = [[0.0; 4]; 4];
    for s in 0..DIM {
        for n in 0..DIM {
            let mut v = 0.0;
            for m in 0..DIM {
                v += riemann_up[m][s][m][n];
            }
            ricci[s][n] = v;
        }
    }

    let mut tau = 0.0;
    for s in 0..DIM {
        for n in 0..DIM {
            tau += g_inv[s][n] * ricci[s][n];
        }
    }

    Ok(TensorSet { g: d.g, g_inv, sqrt_det: det.sqrt(), condition, gamma, riemann, ricci, tau })
}

fn raise_slot(t: &Rank4, g_inv: &Mat, slot: usize) -> Rank4 {
    let mut out = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..DIM {
        for b in 0..DIM {
            for c in 0..DIM {
                for e in 0..DIM {
                    let mut v = 0.0;
                    for p in 0..DIM {
                        let idx = [a, b, c, e];
                        let mut src = idx;
                        src[slot] = p;
                        v += g_inv[idx[slot]][p] * t[src[0]][src[1]][src[2]][src[3]];
                    }
                    out[a][b][c][e] = v;
                }
            }
        }
    }
    out
}

fn norm_rank4(t: &Rank4, g_inv: &Mat) -> f64 {
    let mut up = *t;
    for slot in 0..4 {
        up = raise_slot(&up, g_inv, slot);
    }
    let mut s = 0.0;
    for a in 0..DIM {
        for b in 0..DIM {
            for c in 0..DIM {
                for e in 0..DIM {
                    s += t[a][b][c][e] * up[a][b][c][e];
                }
            }
        }
    }
    s
}

fn norm_rank2(t: &Mat, g_inv: &Mat) -> f64 {
    let mut s = 0.0;
    for a in 0..DIM {
        for b in 0..DIM {
            for c in 0..DIM {
                for e in 0..DIM {
                    s += t[a][b] * g_inv[a][c] * g_inv[b][e] * t[c][e];
                }
            }
        }
    }
    s
}

fn weyl_tensor(ts: &TensorSet) -> Rank4 {
    let n = DIM as f64;
    let c1 = 1.0 / (n - 2.0);
    let c2 = ts.tau / ((n - 1.0) * (n - 2.0));
    let (g, rho, r) = (&ts.g, &ts.ricci, &ts.riemann);
    let mut w = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..DIM {
        for b in 0..DIM {
            for c in 0..DIM {
                for e in 0..DIM {
                    w[a][b][c][e] = r[a][b][c][e]
                        - c1 * (rho[a][c] * g[b][e] + rho[b][e] * g[a][c]
                            - rho[a][e] * g[b][c]
                            - rho[b][c] * g[a][e])
                        + c2 * (g[a][c] * g[b][e] - g[a][e] * g[b][c]);
                }
            }
        }
    }
    w
}

/// Scalar curvature invariants at a point, from second metric derivatives
/// only. This is the cheap path used per quadrature node.
#[derive(Clone, Copy, Debug)]
pub struct InvariantSet {
    pub tau: f64,
    pub norm_riemann2: f64,
    pub norm_ricci2: f64,
    pub norm_weyl2: f64,
    pub norm_traceless_ricci2: f64,
    /// Riemannian volume density `sqrt(det g)` in these coordinates.
    pub sqrt_det: f64,
}

impl InvariantSet {
    /// The Gauss-Bonnet integrand `|R|^2 - 4|ρ|^2 + τ^2`.
    pub fn gauss_bonnet_integrand(&self) -> f64 {
        self.norm_riemann2 - 4.0 * self.norm_ricci2 + self.tau * self.tau
    }

    /// The same integrand in its Weyl decomposition,
    /// `|W|^2 - 2|ρ̃|^2 + τ^2/6`. Agreement of the two forms is a strong
    /// internal consistency check.
    pub fn gauss_bonnet_integrand_weyl(&self) -> f64 {
        self.norm_weyl2 - 2.0 * self.norm_traceless_ricci2 + self.tau * self.tau / 6.0
    }
}

fn invariants_from(ts: &TensorSet) -> InvariantSet {
    let n = DIM as f64;
    let tau = ts.tau;
    let norm_riemann2 = norm_rank4(&ts.riemann, &ts.g_inv);
    let norm_ricci2 = norm_rank2(&ts.ricci, &ts.g_inv);
    let w = weyl_tensor(ts);
    let norm_weyl2 = norm_rank4(&w, &ts.g_inv);
    let norm_traceless_ricci2 = norm_ricci2 - tau * tau / n;
    InvariantSet {
        tau,
        norm_riemann2,
        norm_ricci2,
        norm_weyl2,
        norm_traceless_ricci2,
        sqrt_det: ts.sqrt_det,
    }
}

/// Cheap pointwise invariants (no fourth derivatives, no Laplacian).
pub fn invariants_at(m: &MetricField, p: &ChartPoint) -> Result<InvariantSet> {
    let gj = m.components_jets(p, 2)?;
    let ts = assemble(&extract_derivs(&gj))?;
    Ok(invariants_from(&ts))
}

/// Christoffel symbols `Γ^k_ij`, indexed `[k][i][j]`.
pub fn christoffel(m: &MetricField, p: &ChartPoint) -> Result<Rank3> {
    let gj = m.components_jets(p, 1)?;
    let mut d = Derivs { g: [[0.0; 4]; 4], d1: [[[0.0; 4]; 4]; 4], d2: [[[[0.0; 4]; 4]; 4]; 4] };
    for a in 0..DIM {
        for b in 0..DIM {
            d.g[a][b] = gj[a][b].value();
            for mm in 0..DIM {
                let mut alpha = [0u8; 4];
                alpha[mm] = 1;
                d.d1[mm][a][b] = gj[a][b].partial(&alpha);
            }
        }
    }
    if linalg::cholesky_lower(&d.g, DIM).is_none() {
        return Err(Error::NotPositiveDefinite);
    }
    let (_, g_inv) = linalg::det_inverse(&d.g, DIM)
        .ok_or(Error::SingularMetric { condition: f64::INFINITY, limit: CONDITION_LIMIT })?;
    let condition = linalg::condition_estimate(&d.g, &g_inv, DIM);
    if condition > CONDITION_LIMIT {
        return Err(Error::SingularMetric { condition, limit: CONDITION_LIMIT });
    }
    let mut gamma = [[[0.0; 4]; 4]; 4];
    for k in 0..DIM {
        for i in 0..DIM {
            for j in 0..DIM {
                let mut s = 0.0;
                for l in 0..DIM {
                    s += g_inv[k][l] * (d.d1[i][j][l] + d.d1[j][i][l] - d.d1[l][i][j]);
                }
                gamma[k][i][j] = 0.5 * s;
            }
        }
    }
    Ok(gamma)
}

/// Connection and lowered curvature at raw coordinates, for the geodesic
/// and Jacobi right-hand sides. Avoids any allocation on the hot path.
pub(crate) struct ConnectionData {
    pub gamma: Rank3,
    pub riemann: Rank4,
}

pub(crate) fn connection_data(m: &MetricField, x: &[f64; 4]) -> Result<ConnectionData> {
    let gj = m.components_jets_raw(x, 2)?;
    let ts = assemble(&extract_derivs(&gj))?;
    Ok(ConnectionData { gamma: ts.gamma, riemann: ts.riemann })
}

/// Full curvature data at one point: tensors, invariants, and the Laplacian
/// of scalar curvature (from fourth metric derivatives).
#[derive(Clone, Debug)]
pub struct CurvatureFrame {
    pub point: ChartPoint,
    pub g: Mat,
    pub g_inv: Mat,
    pub sqrt_det: f64,
    /// Condition estimate of `g` at the point.
    pub condition: f64,
    pub gamma: Rank3,
    /// Fully lowered `R_asmn`.
    pub riemann: Rank4,
    pub ricci: Mat,
    pub traceless_ricci: Mat,
    pub weyl: Rank4,
    pub tau: f64,
    pub laplacian_tau: f64,
    pub norm_riemann2: f64,
    pub norm_ricci2: f64,
    pub norm_weyl2: f64,
    pub norm_traceless_ricci2: f64,
}

impl CurvatureFrame {
    pub fn invariants(&self) -> InvariantSet {
        InvariantSet {
            tau: self.tau,
            norm_riemann2: self.norm_riemann2,
            norm_ricci2: self.norm_ricci2,
            norm_weyl2: self.norm_weyl2,
            norm_traceless_ricci2: self.norm_traceless_ricci2,
            sqrt_det: self.sqrt_det,
        }
    }
}

/// Scalar curvature as a jet exact through total degree 2, by running the
/// whole Ricci contraction in jet arithmetic on degree-4 metric jets.
fn tau_jet(gj: &[[Jet; 4]; 4]) -> Result<Jet> {
    let (_, ginv) = linalg::det_inverse(gj, DIM)
        .ok_or(Error::SingularMetric { condition: f64::INFINITY, limit: CONDITION_LIMIT })?;

    // dg[m][a][b] = ∂_m g_ab as jets (exact through degree 3).
    let zero = gj[0][0].lift(0.0);
    let mut dg = [[[zero; 4]; 4]; 4];
    for a in 0..DIM {
        for b in 0..DIM {
            for m in 0..DIM {
                dg[m][a][b] = gj[a][b].derivative(m);
            }
        }
    }
    let mut gamma = [[[zero; 4]; 4]; 4];
    for k in 0..DIM {
        for i in 0..DIM {
            for j in 0..DIM {
                let mut s = zero;
                for l in 0..DIM {
                    s = s + ginv[k][l] * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]);
                }
                gamma[k][i][j] = s * 0.5;
            }
        }
    }
    // Γ trace over the upper and first lower slot, used twice below.
    let mut trace = [zero; 4];
    for (lam, t) in trace.iter_mut().enumerate() {
        let mut s = zero;
        for mu in 0..DIM {
            s = s + gamma[mu][mu][lam];
        }
        *t = s;
    }
    // ρ_sn = ∂_m Γ^m_ns - ∂_n Γ^m_ms + Γ^m_mλ Γ^λ_ns - Γ^m_nλ Γ^λ_ms
    let mut tau = zero;
    for s in 0..DIM {
        for n in 0..DIM {
            let mut r = zero;
            for mu in 0..DIM {
                r = r + gamma[mu][n][s].derivative(mu) - gamma[mu][mu][s].derivative(n);
            }
            for lam in 0..DIM {
                r = r + trace[lam] * gamma[lam][n][s];
                for mu in 0..DIM {
                    r = r - gamma[mu][n][lam] * gamma[lam][mu][s];
                }
            }
            tau = tau + ginv[s][n] * r;
        }
    }
    Ok(tau)
}

/// Full curvature frame at a point, including the Laplacian of scalar
/// curvature.
pub fn curvature_frame(m: &MetricField, p: &ChartPoint) -> Result<CurvatureFrame> {
    let gj = m.components_jets(p, 4)?;
    let ts = assemble(&extract_derivs(&gj))?;
    let inv = invariants_from(&ts);
    let weyl = weyl_tensor(&ts);

    let tau_j = tau_jet(&gj)?;
    // Δτ = g^ij (∂_i ∂_j τ - Γ^k_ij ∂_k τ); the jet is exact through
    // degree 2, exactly what the Hessian needs.
    let mut grad = [0.0; 4];
    let mut hess = [[0.0; 4]; 4];
    for i in 0..DIM {
        let mut alpha = [0u8; 4];
        alpha[i] = 1;
        grad[i] = tau_j.partial(&alpha);
        for j in 0..DIM {
            let mut beta = alpha;
            beta[j] += 1;
            hess[i][j] = tau_j.partial(&beta);
        }
    }
    let mut laplacian_tau = 0.0;
    for i in 0..DIM {
        for j in 0..DIM {
            let mut v = hess[i][j];
            for k in 0..DIM {
                v -= ts.gamma[k][i][j] * grad[k];
            }
            laplacian_tau += ts.g_inv[i][j] * v;
        }
    }

    let n = DIM as f64;
    let mut traceless = ts.ricci;
    for i in 0..DIM {
        for j in 0..DIM {
            traceless[i][j] -= ts.tau / n * ts.g[i][j];
        }
    }

    Ok(CurvatureFrame {
        point: p.clone(),
        g: ts.g,
        g_inv: ts.g_inv,
        sqrt_det: ts.sqrt_det,
        condition: ts.condition,
        gamma: ts.gamma,
        riemann: ts.riemann,
        ricci: ts.ricci,
        traceless_ricci: traceless,
        weyl,
        tau: ts.tau,
        laplacian_tau,
        norm_riemann2: inv.norm_riemann2,
        norm_ricci2: inv.norm_ricci2,
        norm_weyl2: inv.norm_weyl2,
        norm_traceless_ricci2: inv.norm_traceless_ricci2,
    })
}

/// Pointwise space-form test: vanishing Weyl and traceless Ricci parts,
/// against a tolerance scaled by `1 + |R|^2`. Returns the verdict and the
/// sectional curvature `K = τ / (n(n-1))` the point would then have.
pub fn check_space_form_pointwise(frame: &CurvatureFrame, tol: f64) -> (bool, f64) {
    let n = DIM as f64;
    let scale = 1.0 + frame.norm_riemann2;
    let flat_enough =
        frame.norm_weyl2 < tol * scale && frame.norm_traceless_ricci2 < tol * scale;
    (flat_enough, frame.tau / (n * (n - 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::MetricField;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sphere_points(rng: &mut ChaCha8Rng, m: &MetricField, k: usize) -> Vec<ChartPoint> {
        (0..k).map(|_| m.domain().sample_interior(rng, 0.1)).collect()
    }

    /// Sign calibration: the unit round 4-sphere has scalar curvature +12.
    #[test]
    fn scalar_curvature_sign_calibration() {
        let m = MetricField::round_sphere(1.0).unwrap();
        let p = ChartPoint::from([1.2, 0.9, 1.7, 0.4]);
        let f = curvature_frame(&m, &p).unwrap();
        assert_relative_eq!(f.tau, 12.0, max_relative = 1e-8);
    }

    #[test]
    fn flat_torus_is_flat() {
        let m = MetricField::flat_torus([1.0, 2.0, 1.5, 3.0]).unwrap();
        let p = ChartPoint::from([0.3, 1.1, 0.7, 2.2]);
        let f = curvature_frame(&m, &p).unwrap();
        assert!(f.tau.abs() < 1e-14);
        assert!(f.norm_riemann2.abs() < 1e-14);
        assert!(f.norm_ricci2.abs() < 1e-14);
        assert!(f.norm_weyl2.abs() < 1e-14);
        assert!(f.laplacian_tau.abs() < 1e-14);
        for k in 0..4 {
            for i in 0..4 {
                for j in 0..4 {
                    assert_eq!(f.gamma[k][i][j], 0.0);
                }
            }
        }
    }

    #[test]
    fn constant_curvature_invariants() {
        // Closed forms for a space form of curvature K in dimension n:
        // τ = n(n-1)K, |R|^2 = 2n(n-1)K^2, |ρ|^2 = n(n-1)^2 K^2.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let cases = [
            (MetricField::round_sphere(1.0).unwrap(), 1.0),
            (MetricField::round_sphere(2.0).unwrap(), 0.25),
            (MetricField::hyperbolic_space(-1.0).unwrap(), -1.0),
            (MetricField::hyperbolic_space(-0.5).unwrap(), -0.5),
        ];
        for (m, k) in cases {
            for p in sphere_points(&mut rng, &m, 12) {
                let f = curvature_frame(&m, &p).unwrap();
                assert_relative_eq!(f.tau, 12.0 * k, max_relative = 1e-8);
                assert_relative_eq!(f.norm_riemann2, 24.0 * k * k, max_relative = 1e-7);
                assert_relative_eq!(f.norm_ricci2, 36.0 * k * k, max_relative = 1e-7);
                let scale = 1.0 + f.norm_riemann2;
                assert!(f.norm_weyl2.abs() < 1e-8 * scale, "{}: {}", m.name(), f.norm_weyl2);
                assert!(f.norm_traceless_ricci2.abs() < 1e-8 * scale);
                assert!(f.laplacian_tau.abs() < 1e-6, "{}: {}", m.name(), f.laplacian_tau);
            }
        }
    }

    #[test]
    fn product_spheres_invariants() {
        // S^2(a) x S^2(b): τ = 2/a^2 + 2/b^2, |R|^2 = 4/a^4 + 4/b^4,
        // |ρ|^2 = 2/a^4 + 2/b^4, |ρ̃|^2 = (1/a^2 - 1/b^2)^2,
        // |W|^2 = (4/3)(1/a^2 + 1/b^2)^2.
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for (a, b) in [(1.0f64, 1.0f64), (1.0, 2.0), (0.8, 1.3)] {
            let m = MetricField::product_spheres(a, b).unwrap();
            let (ia, ib) = (a.powi(-2), b.powi(-2));
            for p in sphere_points(&mut rng, &m, 10) {
                let f = curvature_frame(&m, &p).unwrap();
                assert_relative_eq!(f.tau, 2.0 * (ia + ib), max_relative = 1e-8);
                assert_relative_eq!(
                    f.norm_riemann2,
                    4.0 * (ia * ia + ib * ib),
                    max_relative = 1e-7
                );
                assert_relative_eq!(
                    f.norm_ricci2,
                    2.0 * (ia * ia + ib * ib),
                    max_relative = 1e-7
                );
                assert_relative_eq!(
                    f.norm_traceless_ricci2 + 1.0,
                    (ia - ib) * (ia - ib) + 1.0,
                    max_relative = 1e-7
                );
                assert_relative_eq!(
                    f.norm_weyl2,
                    4.0 / 3.0 * (ia + ib) * (ia + ib),
                    max_relative = 1e-7
                );
                assert!(f.laplacian_tau.abs() < 1e-6);
            }
        }
    }

    #[test]
    fn christoffel_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let metrics = [
            MetricField::round_sphere(1.3).unwrap(),
            MetricField::hyperbolic_space(-0.7).unwrap(),
            MetricField::conformal_perturbation([2.0; 4], 0.25, [1, 1, 1, 1]).unwrap(),
        ];
        for m in &metrics {
            let p = m.domain().sample_interior(&mut rng, 0.1);
            let gamma = christoffel(m, &p).unwrap();
            // Independent oracle: finite differences of g plus exact inverse.
            let h = 1e-5;
            let g = m.components_at(&p).unwrap();
            let (_, ginv) = linalg::det_inverse(&g, 4).unwrap();
            let mut d1 = [[[0.0; 4]; 4]; 4];
            for axis in 0..4 {
                let mut cp = p.coords().to_vec();
                cp[axis] += h;
                let gp = m.components_at(&ChartPoint::new(cp.clone())).unwrap();
                cp[axis] -= 2.0 * h;
                let gm = m.components_at(&ChartPoint::new(cp)).unwrap();
                for i in 0..4 {
                    for j in 0..4 {
                        d1[axis][i][j] = (gp[i][j] - gm[i][j]) / (2.0 * h);
                    }
                }
            }
            for k in 0..4 {
                for i in 0..4 {
                    for j in 0..4 {
                        let mut s = 0.0;
                        for l in 0..4 {
                            s += ginv[k][l] * (d1[i][j][l] + d1[j][i][l] - d1[l][i][j]);
                        }
                        assert_relative_eq!(
                            gamma[k][i][j],
                            0.5 * s,
                            epsilon = 1e-6,
                            max_relative = 1e-6
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn frame_identities_hold_across_catalog() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let metrics = [
            MetricField::round_sphere(1.0).unwrap(),
            MetricField::round_sphere(1.7).unwrap(),
            MetricField::flat_torus([1.0, 2.0, 3.0, 4.0]).unwrap(),
            MetricField::hyperbolic_space(-1.0).unwrap(),
            MetricField::product_spheres(1.0, 2.0).unwrap(),
            MetricField::conformal_perturbation([2.0; 4], 0.3, [1, 1, 1, 1]).unwrap(),
            MetricField::conformal_perturbation([2.0, 3.0, 2.5, 2.0], 0.15, [1, 2, 1, 1])
                .unwrap(),
        ];
        let mut checked = 0;
        for m in &metrics {
            for _ in 0..30 {
                let p = m.domain().sample_interior(&mut rng, 0.08);
                let f = curvature_frame(m, &p).unwrap();
                let scale = 1.0 + f.norm_riemann2;
                let tol = 1e-8 * scale;

                // Riemann symmetries and first Bianchi identity.
                for a in 0..4 {
                    for b in 0..4 {
                        for c in 0..4 {
                            for d in 0..4 {
                                let r = f.riemann[a][b][c][d];
                                assert!((r + f.riemann[b][a][c][d]).abs() < tol);
                                assert!((r + f.riemann[a][b][d][c]).abs() < tol);
                                assert!((r - f.riemann[c][d][a][b]).abs() < tol);
                                let bianchi = r
                                    + f.riemann[a][c][d][b]
                                    + f.riemann[a][d][b][c];
                                assert!(bianchi.abs() < tol);
                            }
                        }
                    }
                }

                // Ricci is symmetric and traces correctly.
                let mut tau = 0.0;
                for i in 0..4 {
                    for j in 0..4 {
                        assert!((f.ricci[i][j] - f.ricci[j][i]).abs() < tol);
                        tau += f.g_inv[i][j] * f.ricci[i][j];
                    }
                }
                assert_relative_eq!(tau, f.tau, epsilon = tol);

                // Every single trace of the Weyl tensor vanishes.
                let wtol = 1e-8 * scale.sqrt().max(1.0);
                for (s1, s2) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
                    for free1 in 0..4 {
                        for free2 in 0..4 {
                            let mut tr = 0.0;
                            for u in 0..4 {
                                for v in 0..4 {
                                    let mut idx = [0usize; 4];
                                    idx[s1] = u;
                                    idx[s2] = v;
                                    let mut frees = (0..4).filter(|s| *s != s1 && *s != s2);
                                    idx[frees.next().unwrap()] = free1;
                                    idx[frees.next().unwrap()] = free2;
                                    tr += f.g_inv[u][v] * f.weyl[idx[0]][idx[1]][idx[2]][idx[3]];
                                }
                            }
                            assert!(tr.abs() < wtol, "weyl trace {tr} at {s1},{s2}");
                        }
                    }
                }

                // Norm decompositions.
                let n = 4.0f64;
                let eq1 = f.norm_riemann2 - 4.0 / (n - 2.0) * f.norm_ricci2
                    + 2.0 / ((n - 1.0) * (n - 2.0)) * f.tau * f.tau;
                assert_relative_eq!(f.norm_weyl2, eq1, epsilon = tol * 10.0);
                assert_relative_eq!(
                    f.norm_traceless_ricci2,
                    f.norm_ricci2 - f.tau * f.tau / n,
                    epsilon = tol
                );
                let eq5 = f.norm_riemann2 - 2.0 * f.norm_traceless_ricci2
                    - f.tau * f.tau / 6.0;
                assert_relative_eq!(f.norm_weyl2, eq5, epsilon = tol * 10.0);
                let inv = f.invariants();
                assert_relative_eq!(
                    inv.gauss_bonnet_integrand(),
                    inv.gauss_bonnet_integrand_weyl(),
                    epsilon = tol * 10.0
                );
                checked += 1;
            }
        }
        assert!(checked >= 200);
    }

    #[test]
    fn conformal_metric_is_conformally_flat() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        for eps in [0.1, 0.3] {
            let m = MetricField::conformal_perturbation([2.0; 4], eps, [1, 1, 1, 1]).unwrap();
            for _ in 0..10 {
                let p = m.domain().sample_interior(&mut rng, 0.05);
                let f = curvature_frame(&m, &p).unwrap();
                let scale = 1.0 + f.norm_riemann2;
                assert!(f.norm_weyl2 < 1e-8 * scale, "eps={eps}: |W|^2 = {}", f.norm_weyl2);
            }
        }
    }

    #[test]
    fn laplacian_matches_finite_differences() {
        let m = MetricField::conformal_perturbation([2.0, 3.0, 2.0, 2.5], 0.2, [1, 1, 1, 1])
            .unwrap();
        let p = ChartPoint::from([0.31, 0.77, 0.42, 0.95]);
        let f = curvature_frame(&m, &p).unwrap();
        assert!(f.tau.abs() > 1e-3, "perturbation should curve the torus");

        let tau_at = |c: Vec<f64>| invariants_at(&m, &ChartPoint::new(c)).unwrap().tau;
        let h = 1e-4;
        let mut grad = [0.0; 4];
        let mut hess = [[0.0; 4]; 4];
        for i in 0..4 {
            let mut cp = p.coords().to_vec();
            cp[i] += h;
            let tp = tau_at(cp.clone());
            cp[i] -= 2.0 * h;
            let tm = tau_at(cp);
            grad[i] = (tp - tm) / (2.0 * h);
            for j in 0..4 {
                let at = |di: f64, dj: f64| {
                    let mut c = p.coords().to_vec();
                    c[i] += di;
                    c[j] += dj;
                    tau_at(c)
                };
                hess[i][j] = if i == j {
                    (at(h, 0.0) - 2.0 * tau_at(p.coords().to_vec()) + at(-h, 0.0)) / (h * h)
                } else {
                    (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4.0 * h * h)
                };
            }
        }
        let mut lap = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let mut v = hess[i][j];
                for k in 0..4 {
                    v -= f.gamma[k][i][j] * grad[k];
                }
                lap += f.g_inv[i][j] * v;
            }
        }
        assert_relative_eq!(f.laplacian_tau, lap, max_relative = 1e-4, epsilon = 1e-4);
    }

    #[test]
    fn invariants_agree_with_full_frame() {
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        let m = MetricField::product_spheres(0.9, 1.4).unwrap();
        for _ in 0..5 {
            let p = m.domain().sample_interior(&mut rng, 0.1);
            let f = curvature_frame(&m, &p).unwrap();
            let i = invariants_at(&m, &p).unwrap();
            assert_relative_eq!(f.tau, i.tau, max_relative = 1e-12);
            assert_relative_eq!(f.norm_riemann2, i.norm_riemann2, max_relative = 1e-12);
            assert_relative_eq!(f.norm_weyl2 + 1.0, i.norm_weyl2 + 1.0, max_relative = 1e-12);
            assert_relative_eq!(f.sqrt_det, i.sqrt_det, max_relative = 1e-12);
        }
    }

    #[test]
    fn pointwise_space_form_verdicts() {
        let tol = 1e-8;
        let s = MetricField::round_sphere(1.0).unwrap();
        let p = ChartPoint::from([1.3, 1.1, 0.8, 2.0]);
        let (ok, k) = check_space_form_pointwise(&curvature_frame(&s, &p).unwrap(), tol);
        assert!(ok);
        assert_relative_eq!(k, 1.0, max_relative = 1e-8);

        let t = MetricField::flat_torus([1.0; 4]).unwrap();
        let (ok, k) = check_space_form_pointwise(
            &curvature_frame(&t, &ChartPoint::from([0.1, 0.5, 0.7, 0.2])).unwrap(),
            tol,
        );
        assert!(ok);
        assert!(k.abs() < 1e-12);

        let h = MetricField::hyperbolic_space(-1.0).unwrap();
        let (ok, k) = check_space_form_pointwise(
            &curvature_frame(&h, &ChartPoint::from([0.2, 0.1, -0.3, 0.15])).unwrap(),
            tol,
        );
        assert!(ok);
        assert_relative_eq!(k, -1.0, max_relative = 1e-8);

        let q = MetricField::product_spheres(1.0, 1.0).unwrap();
        let (ok, _) = check_space_form_pointwise(
            &curvature_frame(&q, &ChartPoint::from([1.2, 0.7, 1.9, 0.4])).unwrap(),
            tol,
        );
        assert!(!ok, "product of spheres has Weyl curvature");
    }

    #[test]
    fn near_singular_chart_point_is_rejected() {
        let m = MetricField::round_sphere(1.0).unwrap();
        let p = ChartPoint::from([1e-8, 1.5, 1.5, 1.0]);
        match curvature_frame(&m, &p) {
            Err(Error::SingularMetric { condition, .. }) => assert!(condition > 1e12),
            other => panic!("expected singular metric, got {other:?}"),
        }
    }
}
