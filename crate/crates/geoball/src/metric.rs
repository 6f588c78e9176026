//! Analytic metrics on coordinate charts, and the model catalog.
//!
//! A [`MetricField`] is a named chart domain together with a rule for the
//! covariant components `g_ij` at a point. The rule is written once, generic
//! over [`Analytic`], so the same formula serves plain evaluation and jet
//! evaluation to any derivative order the tables support.
//!
//! Catalog conventions:
//! * round sphere of radius `a`: nested hyperspherical angles, sectional
//!   curvature `1/a^2`;
//! * flat torus: identity metric, all axes periodic;
//! * hyperbolic space of curvature `c < 0`: Poincare ball, `g = 4/( |c| (1-|x|^2)^2 ) δ`;
//! * product of two round 2-spheres of radii `a`, `b`;
//! * conformal perturbation of a flat torus: `g = e^{2 ε φ} δ` with a
//!   periodic cosine-product profile `φ`.

use crate::error::{Error, Result};
use crate::jet::{Analytic, Jet, JetTable, MAX_DIM};
use rand::Rng;

/// A point in chart coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartPoint {
    coords: Vec<f64>,
}

impl ChartPoint {
    pub fn new(coords: impl Into<Vec<f64>>) -> ChartPoint {
        ChartPoint { coords: coords.into() }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

impl From<[f64; 4]> for ChartPoint {
    fn from(c: [f64; 4]) -> ChartPoint {
        ChartPoint::new(c.to_vec())
    }
}

/// One coordinate axis of a chart domain. Non-periodic axes are open
/// intervals; periodic axes identify `x` with `x + (hi - lo)`.
#[derive(Clone, Debug)]
pub struct AxisInterval {
    pub lo: f64,
    pub hi: f64,
    pub periodic: bool,
}

impl AxisInterval {
    fn open(lo: f64, hi: f64) -> AxisInterval {
        AxisInterval { lo, hi, periodic: false }
    }

    fn periodic(lo: f64, hi: f64) -> AxisInterval {
        AxisInterval { lo, hi, periodic: true }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Constraint beyond the per-axis intervals.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ExtraConstraint {
    None,
    /// Euclidean norm of the coordinate vector stays below one.
    OpenUnitBall,
}

/// Chart domain: a box with per-axis periodicity and an optional extra
/// constraint.
#[derive(Clone, Debug)]
pub struct Domain {
    axes: Vec<AxisInterval>,
    extra: ExtraConstraint,
}

impl Domain {
    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[AxisInterval] {
        &self.axes
    }

    /// Whether the coordinates name a point of the chart. Periodic axes
    /// accept any real value (the components are periodic); open axes are
    /// strict interiors.
    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.axes.len() {
            return false;
        }
        for (xi, ax) in x.iter().zip(&self.axes) {
            if !xi.is_finite() {
                return false;
            }
            if !ax.periodic && (*xi <= ax.lo || *xi >= ax.hi) {
                return false;
            }
        }
        match self.extra {
            ExtraConstraint::None => true,
            ExtraConstraint::OpenUnitBall => x.iter().map(|v| v * v).sum::<f64>() < 1.0,
        }
    }

    /// Draws a point uniformly from the domain shrunk by `margin` (a fraction
    /// of each axis width, and of the ball radius when applicable).
    pub fn sample_interior(&self, rng: &mut impl Rng, margin: f64) -> ChartPoint {
        loop {
            let coords: Vec<f64> = self
                .axes
                .iter()
                .map(|ax| {
                    let m = if ax.periodic { 0.0 } else { margin * ax.width() };
                    rng.random_range(ax.lo + m..ax.hi - m)
                })
                .collect();
            match self.extra {
                ExtraConstraint::None => return ChartPoint::new(coords),
                ExtraConstraint::OpenUnitBall => {
                    let r2: f64 = coords.iter().map(|v| v * v).sum();
                    if r2.sqrt() < 1.0 - margin {
                        return ChartPoint::new(coords);
                    }
                }
            }
        }
    }

    /// Shortest representative of `a - b`, reducing periodic axes to the
    /// nearest image.
    pub fn wrap_delta(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        a.iter()
            .zip(b)
            .zip(&self.axes)
            .map(|((&ai, &bi), ax)| {
                let mut d = ai - bi;
                if ax.periodic {
                    let w = ax.width();
                    d -= (d / w).round() * w;
                }
                d
            })
            .collect()
    }
}

/// Periodic cosine-product conformal profile,
/// `φ(x) = Π_i cos(k_i x_i)` with `k_i = 2π w_i / L_i`.
#[derive(Clone, Debug)]
struct CosineProfile {
    angular: [f64; MAX_DIM],
}

impl CosineProfile {
    fn eval<T: Analytic>(&self, x: &[T; MAX_DIM]) -> T {
        let mut p = x[0].lift(1.0);
        for (xi, &k) in x.iter().zip(&self.angular) {
            if k != 0.0 {
                p = p * (*xi * k).cos();
            }
        }
        p
    }
}

#[derive(Clone, Debug)]
enum MetricKind {
    RoundSphere { radius: f64 },
    FlatTorus,
    PoincareBall { conf: f64 },
    ProductSpheres { a: f64, b: f64 },
    ConformalTorus { profile: CosineProfile, eps: f64 },
}

impl MetricKind {
    fn components<T: Analytic>(&self, x: &[T; MAX_DIM]) -> [[T; MAX_DIM]; MAX_DIM] {
        let zero = x[0].lift(0.0);
        let one = x[0].lift(1.0);
        let mut g = [[zero; MAX_DIM]; MAX_DIM];
        match self {
            MetricKind::RoundSphere { radius } => {
                let a2 = radius * radius;
                let s0 = x[0].sin();
                let s1 = x[1].sin();
                let s2 = x[2].sin();
                g[0][0] = x[0].lift(a2);
                g[1][1] = s0 * s0 * a2;
                g[2][2] = s0 * s0 * (s1 * s1) * a2;
                g[3][3] = s0 * s0 * (s1 * s1) * (s2 * s2) * a2;
            }
            MetricKind::FlatTorus => {
                for (i, row) in g.iter_mut().enumerate() {
                    row[i] = one;
                }
            }
            MetricKind::PoincareBall { conf } => {
                let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3];
                let f = (one - r2).powi(-2) * *conf;
                for (i, row) in g.iter_mut().enumerate() {
                    row[i] = f;
                }
            }
            MetricKind::ProductSpheres { a, b } => {
                let s0 = x[0].sin();
                let s2 = x[2].sin();
                g[0][0] = x[0].lift(a * a);
                g[1][1] = s0 * s0 * (a * a);
                g[2][2] = x[0].lift(b * b);
                g[3][3] = s2 * s2 * (b * b);
            }
            MetricKind::ConformalTorus { profile, eps } => {
                let f = (profile.eval(x) * (2.0 * eps)).exp();
                for (i, row) in g.iter_mut().enumerate() {
                    row[i] = f;
                }
            }
        }
        g
    }
}

/// An analytic Riemannian metric on a named coordinate chart.
#[derive(Clone, Debug)]
pub struct MetricField {
    name: String,
    domain: Domain,
    covers_manifold: bool,
    kind: MetricKind,
}

pub const DIM: usize = 4;

impl MetricField {
    /// Round 4-sphere of radius `radius` in nested hyperspherical angles
    /// `(x0, x1, x2) ∈ (0, π)^3`, `x3 ∈ (0, 2π)` periodic.
    pub fn round_sphere(radius: f64) -> Result<MetricField> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sphere radius must be positive, got {radius}"
            )));
        }
        Ok(MetricField {
            name: format!("sphere({radius})"),
            domain: Domain {
                axes: vec![
                    AxisInterval::open(0.0, std::f64::consts::PI),
                    AxisInterval::open(0.0, std::f64::consts::PI),
                    AxisInterval::open(0.0, std::f64::consts::PI),
                    AxisInterval::periodic(0.0, 2.0 * std::f64::consts::PI),
                ],
                extra: ExtraConstraint::None,
            },
            covers_manifold: true,
            kind: MetricKind::RoundSphere { radius },
        })
    }

    /// Flat torus with the given periods; the metric is the identity.
    pub fn flat_torus(periods: [f64; 4]) -> Result<MetricField> {
        for p in periods {
            if !(p > 0.0 && p.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "torus periods must be positive, got {periods:?}"
                )));
            }
        }
        Ok(MetricField {
            name: format!("torus({},{},{},{})", periods[0], periods[1], periods[2], periods[3]),
            domain: Domain {
                axes: periods.iter().map(|&p| AxisInterval::periodic(0.0, p)).collect(),
                extra: ExtraConstraint::None,
            },
            covers_manifold: true,
            kind: MetricKind::FlatTorus,
        })
    }

    /// Hyperbolic 4-space of constant sectional curvature `curvature < 0`,
    /// as the Poincare unit ball. The chart covers the whole space, but the
    /// space is not closed, so global integrals are refused.
    pub fn hyperbolic_space(curvature: f64) -> Result<MetricField> {
        if !(curvature < 0.0 && curvature.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "hyperbolic curvature must be negative, got {curvature}"
            )));
        }
        Ok(MetricField {
            name: format!("hyperbolic({curvature})"),
            domain: Domain {
                axes: (0..4).map(|_| AxisInterval::open(-1.0, 1.0)).collect(),
                extra: ExtraConstraint::OpenUnitBall,
            },
            covers_manifold: false,
            kind: MetricKind::PoincareBall { conf: 4.0 / curvature.abs() },
        })
    }

    /// Product of round 2-spheres of radii `a` and `b`, charted by
    /// `(θ1, φ1, θ2, φ2)` with `θ ∈ (0, π)` and `φ ∈ (0, 2π)` periodic.
    pub fn product_spheres(a: f64, b: f64) -> Result<MetricField> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "product sphere radii must be positive, got ({a}, {b})"
            )));
        }
        Ok(MetricField {
            name: format!("product_spheres({a},{b})"),
            domain: Domain {
                axes: vec![
                    AxisInterval::open(0.0, std::f64::consts::PI),
                    AxisInterval::periodic(0.0, 2.0 * std::f64::consts::PI),
                    AxisInterval::open(0.0, std::f64::consts::PI),
                    AxisInterval::periodic(0.0, 2.0 * std::f64::consts::PI),
                ],
                extra: ExtraConstraint::None,
            },
            covers_manifold: true,
            kind: MetricKind::ProductSpheres { a, b },
        })
    }

    /// Conformally perturbed flat torus `g = e^{2 ε φ} δ`, with
    /// `φ(x) = Π_i cos(2π w_i x_i / L_i)`. Wave numbers `w_i` may be zero to
    /// drop an axis from the profile.
    pub fn conformal_perturbation(
        periods: [f64; 4],
        eps: f64,
        waves: [u32; 4],
    ) -> Result<MetricField> {
        let base = MetricField::flat_torus(periods)?;
        if !eps.is_finite() {
            return Err(Error::InvalidParameter(format!("eps must be finite, got {eps}")));
        }
        let mut angular = [0.0; MAX_DIM];
        for i in 0..4 {
            angular[i] = 2.0 * std::f64::consts::PI * waves[i] as f64 / periods[i];
        }
        Ok(MetricField {
            name: format!(
                "perturbed_torus({},{},{},{};eps={eps})",
                periods[0], periods[1], periods[2], periods[3]
            ),
            domain: base.domain,
            covers_manifold: true,
            kind: MetricKind::ConformalTorus { profile: CosineProfile { angular }, eps },
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        DIM
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// True when the chart covers a closed manifold up to a measure-zero
    /// set, so that integrals over the chart compute global quantities.
    pub fn covers_manifold(&self) -> bool {
        self.covers_manifold
    }

    fn check_point(&self, p: &ChartPoint) -> Result<()> {
        if p.dim() != DIM {
            return Err(Error::DimensionMismatch { expected: DIM, got: p.dim() });
        }
        if !self.domain.contains(p.coords()) {
            return Err(Error::PointOutsideChart {
                chart: self.name.clone(),
                point: p.coords().to_vec(),
            });
        }
        Ok(())
    }

    /// Covariant components `g_ij` at a chart point.
    pub fn components_at(&self, p: &ChartPoint) -> Result<[[f64; 4]; 4]> {
        self.check_point(p)?;
        let c = p.coords();
        let x = [c[0], c[1], c[2], c[3]];
        Ok(self.kind.components(&x))
    }

    /// Components as jets truncated at total degree `degree`, seeded with
    /// the chart coordinates as independent variables.
    pub(crate) fn components_jets(&self, p: &ChartPoint, degree: usize) -> Result<[[Jet; 4]; 4]> {
        self.check_point(p)?;
        let c = p.coords();
        self.components_jets_raw(&[c[0], c[1], c[2], c[3]], degree)
    }

    /// Allocation-free variant of [`Self::components_jets`] for hot loops.
    pub(crate) fn components_jets_raw(
        &self,
        x: &[f64; 4],
        degree: usize,
    ) -> Result<[[Jet; 4]; 4]> {
        if !self.domain.contains(x) {
            return Err(Error::PointOutsideChart { chart: self.name.clone(), point: x.to_vec() });
        }
        let tab = JetTable::get(DIM, degree);
        let xj = [
            Jet::variable(tab, x[0], 0),
            Jet::variable(tab, x[1], 1),
            Jet::variable(tab, x[2], 2),
            Jet::variable(tab, x[3], 3),
        ];
        Ok(self.kind.components(&xj))
    }

    /// All partial derivatives of every component through total order
    /// `order` (at most 4), exact to machine precision.
    pub fn derivatives(&self, p: &ChartPoint, order: usize) -> Result<DerivativeBlock> {
        if order > 4 {
            return Err(Error::InvalidParameter(format!(
                "derivative order {order} exceeds the supported maximum 4"
            )));
        }
        let g = self.components_jets(p, order)?;
        let tab = JetTable::get(DIM, order);
        let mut exps = Vec::with_capacity(tab.len());
        let mut values = Vec::with_capacity(tab.len());
        for idx in 0..tab.len() {
            let alpha = tab_exps(tab, idx);
            let mut m = [[0.0f64; 4]; 4];
            for i in 0..4 {
                for j in 0..4 {
                    m[i][j] = g[i][j].partial(&alpha);
                }
            }
            exps.push(alpha);
            values.push(m);
        }
        Ok(DerivativeBlock { order, exps, values })
    }
}

fn tab_exps(tab: &JetTable, idx: usize) -> [u8; MAX_DIM] {
    tab.multi_index(idx)
}

/// Partial derivatives of all metric components at one point, indexed by
/// multi-index.
#[derive(Clone, Debug)]
pub struct DerivativeBlock {
    order: usize,
    exps: Vec<[u8; MAX_DIM]>,
    values: Vec<[[f64; 4]; 4]>,
}

impl DerivativeBlock {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn multi_indices(&self) -> &[[u8; MAX_DIM]] {
        &self.exps
    }

    /// `∂^alpha g_ij`; panics if `alpha` exceeds the stored order.
    pub fn partial(&self, i: usize, j: usize, alpha: [u8; MAX_DIM]) -> f64 {
        let idx = self
            .exps
            .iter()
            .position(|e| *e == alpha)
            .unwrap_or_else(|| panic!("multi-index {alpha:?} outside derivative block"));
        self.values[idx][i][j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn catalog() -> Vec<MetricField> {
        vec![
            MetricField::round_sphere(1.0).unwrap(),
            MetricField::round_sphere(2.0).unwrap(),
            MetricField::flat_torus([1.0, 2.0, 3.0, 4.0]).unwrap(),
            MetricField::hyperbolic_space(-1.0).unwrap(),
            MetricField::product_spheres(1.0, 1.0).unwrap(),
            MetricField::product_spheres(1.0, 2.0).unwrap(),
            MetricField::conformal_perturbation([2.0, 2.0, 2.0, 2.0], 0.1, [1, 1, 1, 1]).unwrap(),
        ]
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(MetricField::round_sphere(0.0).is_err());
        assert!(MetricField::round_sphere(-2.0).is_err());
        assert!(MetricField::flat_torus([1.0, 0.0, 1.0, 1.0]).is_err());
        assert!(MetricField::hyperbolic_space(1.0).is_err());
        assert!(MetricField::hyperbolic_space(0.0).is_err());
        assert!(MetricField::product_spheres(1.0, -1.0).is_err());
        assert!(MetricField::conformal_perturbation([1.0; 4], f64::NAN, [1; 4]).is_err());
    }

    #[test]
    fn rejects_points_outside_domain() {
        let s = MetricField::round_sphere(1.0).unwrap();
        assert!(s.components_at(&ChartPoint::from([0.0, 1.0, 1.0, 1.0])).is_err());
        assert!(s.components_at(&ChartPoint::from([3.2, 1.0, 1.0, 1.0])).is_err());
        // Periodic axis accepts values beyond one period.
        assert!(s.components_at(&ChartPoint::from([1.0, 1.0, 1.0, 9.0])).is_ok());
        assert!(s.components_at(&ChartPoint::new(vec![1.0, 1.0, 1.0])).is_err());

        let h = MetricField::hyperbolic_space(-1.0).unwrap();
        assert!(h.components_at(&ChartPoint::from([0.9, 0.9, 0.0, 0.0])).is_err());
        assert!(h.components_at(&ChartPoint::from([0.3, -0.2, 0.1, 0.4])).is_ok());
    }

    #[test]
    fn sphere_components_match_formula() {
        let s = MetricField::round_sphere(2.0).unwrap();
        let p = ChartPoint::from([0.7, 1.1, 2.0, 0.3]);
        let g = s.components_at(&p).unwrap();
        let (s0, s1, s2) = (0.7f64.sin(), 1.1f64.sin(), 2.0f64.sin());
        assert_relative_eq!(g[0][0], 4.0);
        assert_relative_eq!(g[1][1], 4.0 * s0 * s0, max_relative = 1e-15);
        assert_relative_eq!(g[2][2], 4.0 * s0 * s0 * s1 * s1, max_relative = 1e-15);
        assert_relative_eq!(g[3][3], 4.0 * s0 * s0 * s1 * s1 * s2 * s2, max_relative = 1e-15);
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert_eq!(g[i][j], 0.0);
                }
            }
        }
    }

    #[test]
    fn poincare_ball_components() {
        let h = MetricField::hyperbolic_space(-1.0).unwrap();
        let p = ChartPoint::from([0.2, -0.1, 0.3, 0.05]);
        let g = h.components_at(&p).unwrap();
        let r2: f64 = p.coords().iter().map(|v| v * v).sum();
        let expect = 4.0 / ((1.0 - r2) * (1.0 - r2));
        for i in 0..4 {
            assert_relative_eq!(g[i][i], expect, max_relative = 1e-15);
        }
        // Curvature -4 doubles the sectional curvature scale: g shrinks by 4.
        let h4 = MetricField::hyperbolic_space(-4.0).unwrap();
        let g4 = h4.components_at(&p).unwrap();
        assert_relative_eq!(g4[0][0], expect / 4.0, max_relative = 1e-15);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for m in catalog() {
            let p = m.domain().sample_interior(&mut rng, 0.1);
            let block = m.derivatives(&p, 2).unwrap();
            let h = 1e-5;
            for axis in 0..4 {
                for i in 0..4 {
                    for j in 0..4 {
                        let mut cp = p.coords().to_vec();
                        cp[axis] += h;
                        let gp = m.components_at(&ChartPoint::new(cp.clone())).unwrap();
                        cp[axis] -= 2.0 * h;
                        let gm = m.components_at(&ChartPoint::new(cp)).unwrap();
                        let fd = (gp[i][j] - gm[i][j]) / (2.0 * h);
                        let mut alpha = [0u8; 4];
                        alpha[axis] = 1;
                        let exact = block.partial(i, j, alpha);
                        assert_relative_eq!(exact, fd, epsilon = 1e-6, max_relative = 1e-6);
                    }
                }
            }
        }
    }

    #[test]
    fn second_derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let m = MetricField::conformal_perturbation([2.0, 3.0, 2.5, 2.0], 0.2, [1, 2, 1, 1])
            .unwrap();
        let p = m.domain().sample_interior(&mut rng, 0.1);
        let block = m.derivatives(&p, 2).unwrap();
        let h = 1e-4;
        for (a, b) in [(0usize, 1usize), (2, 3), (1, 1)] {
            for i in 0..4 {
                let at = |da: f64, db: f64| {
                    let mut c = p.coords().to_vec();
                    c[a] += da;
                    c[b] += db;
                    m.components_at(&ChartPoint::new(c)).unwrap()[i][i]
                };
                let fd = if a == b {
                    (at(h, 0.0) - 2.0 * at(0.0, 0.0) + at(-h, 0.0)) / (h * h)
                } else {
                    (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4.0 * h * h)
                };
                let mut alpha = [0u8; 4];
                alpha[a] += 1;
                alpha[b] += 1;
                let exact = block.partial(i, i, alpha);
                assert_relative_eq!(exact, fd, epsilon = 1e-4, max_relative = 1e-4);
            }
        }
    }

    #[test]
    fn mixed_partials_are_symmetric() {
        let m = MetricField::round_sphere(1.5).unwrap();
        let p = ChartPoint::from([1.0, 0.8, 1.9, 2.2]);
        let block = m.derivatives(&p, 4).unwrap();
        // One representative pair reached by different index orderings.
        let v1 = block.partial(1, 1, [2, 1, 1, 0]);
        let d4 = m.derivatives(&p, 4).unwrap();
        let v2 = d4.partial(1, 1, [2, 1, 1, 0]);
        assert_eq!(v1, v2);
        assert!(v1.is_finite());
    }

    #[test]
    fn periodic_components_repeat() {
        let m = MetricField::conformal_perturbation([2.0, 3.0, 2.0, 5.0], 0.15, [1, 1, 2, 1])
            .unwrap();
        let p = ChartPoint::from([0.3, 0.4, 0.5, 0.6]);
        let q = ChartPoint::from([0.3 + 2.0, 0.4 - 3.0, 0.5 + 4.0, 0.6 + 10.0]);
        let gp = m.components_at(&p).unwrap();
        let gq = m.components_at(&q).unwrap();
        for i in 0..4 {
            assert_relative_eq!(gp[i][i], gq[i][i], max_relative = 1e-12);
        }
    }

    #[test]
    fn conformal_eps_zero_is_flat() {
        let m = MetricField::conformal_perturbation([1.0, 1.0, 1.0, 1.0], 0.0, [1, 1, 1, 1])
            .unwrap();
        let p = ChartPoint::from([0.21, 0.43, 0.65, 0.87]);
        let g = m.components_at(&p).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(g[i][j], if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn wrap_delta_uses_nearest_image() {
        let m = MetricField::flat_torus([1.0, 2.0, 3.0, 4.0]).unwrap();
        let d = m.domain().wrap_delta(&[0.9, 0.1, 0.2, 3.9], &[0.1, 1.9, 0.3, 0.1]);
        assert_relative_eq!(d[0], -0.2, epsilon = 1e-12);
        assert_relative_eq!(d[1], 0.2, epsilon = 1e-12);
        assert_relative_eq!(d[2], -0.1, epsilon = 1e-12);
        assert_relative_eq!(d[3], -0.2, epsilon = 1e-12);
    }

    #[test]
    fn interior_samples_stay_inside() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for m in catalog() {
            for _ in 0..50 {
                let p = m.domain().sample_interior(&mut rng, 0.05);
                assert!(m.domain().contains(p.coords()), "{}: {:?}", m.name(), p);
            }
        }
    }
}
