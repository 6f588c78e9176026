//! Quadrature rules: 1-d Gauss-Legendre and midpoint rules, and direction
//! rules on the unit 3-sphere used to average geodesic ball volumes.
//!
//! Sphere-rule weights are rescaled so they sum to exactly `2 pi^2`, the
//! area of the unit 3-sphere. The rescaling removes the (tiny) quadrature
//! error in the total measure, so integrating the constant function 1 is
//! exact by construction and measured ball volumes are not biased by the
//! direction rule.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Area of the unit 3-sphere.
pub const SPHERE_AREA: f64 = 2.0 * PI * PI;

/// Nodes and weights for a 1-d rule on some interval.
#[derive(Clone, Debug)]
pub struct Quadrature1d {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Quadrature1d {
    /// `n`-point Gauss-Legendre rule on `[-1, 1]`.
    ///
    /// Nodes come from Newton iteration on the Legendre recurrence; only
    /// one half is computed and the other half is mirrored, so symmetric
    /// nodes are exact negatives bit for bit.
    pub fn gauss_legendre(n: usize) -> Quadrature1d {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Tricomi-style initial guess, then Newton.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // Guess ordering puts large positive x first.
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = w;
            nodes[i] = -x;
            weights[i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Quadrature1d { nodes, weights }
    }

    /// Affine image of this rule on `[lo, hi]`.
    pub fn mapped(&self, lo: f64, hi: f64) -> Quadrature1d {
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        Quadrature1d {
            nodes: self.nodes.iter().map(|x| mid + half * x).collect(),
            weights: self.weights.iter().map(|w| half * w).collect(),
        }
    }

    /// `n`-point Gauss-Chebyshev rule of the second kind: integrates
    /// `f(x) sqrt(1 - x^2)` on `[-1, 1]`, exactly for polynomial `f` up to
    /// degree `2n - 1`. Nodes and weights are closed-form.
    pub fn chebyshev_second(n: usize) -> Quadrature1d {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let denom = (n + 1) as f64;
        for k in 1..=n.div_ceil(2) {
            let theta = PI * k as f64 / denom;
            let x = theta.cos();
            let w = PI / denom * theta.sin() * theta.sin();
            nodes[n - k] = x;
            weights[n - k] = w;
            nodes[k - 1] = -x;
            weights[k - 1] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Quadrature1d { nodes, weights }
    }

    /// `n`-point midpoint rule on `[lo, hi]`.
    ///
    /// On a full period of a smooth periodic function this is the
    /// equispaced trapezoid rule, which converges spectrally, so it is the
    /// right choice for periodic coordinates.
    pub fn midpoint(n: usize, lo: f64, hi: f64) -> Quadrature1d {
        assert!(n >= 1, "rule needs at least one node");
        let step = (hi - lo) / n as f64;
        Quadrature1d {
            nodes: (0..n).map(|i| lo + (i as f64 + 0.5) * step).collect(),
            weights: vec![step; n],
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Applies the rule to `f`.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Legendre polynomial `P_n` and its derivative at `x`.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[derive(Clone, Debug)]
enum RuleKind {
    Product { n1: usize, n2: usize, n3: usize },
    LowDiscrepancy { count: usize, seed: u64 },
}

/// Weighted directions on the unit sphere in `R^4`.
///
/// Integrating `f` over the 3-sphere is `sum_i w_i f(u_i)`; the weights sum
/// to [`SPHERE_AREA`]. Averages divide by that constant.
#[derive(Clone, Debug)]
pub struct SphereRule {
    pub directions: Vec<[f64; 4]>,
    pub weights: Vec<f64>,
    kind: RuleKind,
}

impl SphereRule {
    /// Tensor rule in hyperspherical coordinates, built so that every
    /// polynomial direction moment of degree below `min(2 n1, 2 n2, n3)`
    /// is integrated exactly: substituting `t = cos chi1` turns the
    /// `sin^2 chi1` area factor into the Chebyshev second-kind weight,
    /// `s = cos chi2` turns `sin chi2` into the flat Legendre weight, and
    /// the midpoint rule is spectrally exact in the periodic azimuth.
    pub fn product(n1: usize, n2: usize, n3: usize) -> SphereRule {
        let q1 = Quadrature1d::chebyshev_second(n1);
        let q2 = Quadrature1d::gauss_legendre(n2);
        let q3 = Quadrature1d::midpoint(n3, 0.0, 2.0 * PI);
        let mut directions = Vec::with_capacity(n1 * n2 * n3);
        let mut weights = Vec::with_capacity(n1 * n2 * n3);
        for (&t, &w1) in q1.nodes.iter().zip(&q1.weights) {
            let s1 = (1.0 - t * t).sqrt();
            for (&s, &w2) in q2.nodes.iter().zip(&q2.weights) {
                let s2 = (1.0 - s * s).sqrt();
                for (&c3, &w3) in q3.nodes.iter().zip(&q3.weights) {
                    directions.push([t, s1 * s, s1 * s2 * c3.cos(), s1 * s2 * c3.sin()]);
                    weights.push(w1 * w2 * w3);
                }
            }
        }
        let mut rule =
            SphereRule { directions, weights, kind: RuleKind::Product { n1, n2, n3 } };
        rule.normalize();
        rule
    }

    /// Halton(2,3,5) points with a seeded Cranley-Patterson rotation,
    /// mapped to the sphere through the inverse of the area distribution.
    /// Equal weights. Useful as an alternative direction set when a tensor
    /// grid's axis alignment is suspect.
    pub fn low_discrepancy(count: usize, seed: u64) -> SphereRule {
        assert!(count >= 1, "rule needs at least one direction");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift = [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()];
        let mut directions = Vec::with_capacity(count);
        for i in 0..count {
            let u1 = (radical_inverse(2, i as u64 + 1) + shift[0]).fract();
            let u2 = (radical_inverse(3, i as u64 + 1) + shift[1]).fract();
            let u3 = (radical_inverse(5, i as u64 + 1) + shift[2]).fract();
            let chi1 = polar_angle_from_uniform(u1);
            let chi2 = (1.0 - 2.0 * u2.clamp(1e-12, 1.0 - 1e-12)).acos();
            let chi3 = 2.0 * PI * u3;
            let (s1, c1) = chi1.sin_cos();
            let (s2, c2) = chi2.sin_cos();
            directions.push([c1, s1 * c2, s1 * s2 * chi3.cos(), s1 * s2 * chi3.sin()]);
        }
        let w = SPHERE_AREA / count as f64;
        SphereRule {
            directions,
            weights: vec![w; count],
            kind: RuleKind::LowDiscrepancy { count, seed },
        }
    }

    /// Default direction rule: accurate enough that direction quadrature
    /// error sits well below geodesic integration tolerances.
    pub fn default_rule() -> SphereRule {
        SphereRule::product(8, 8, 16)
    }

    /// A companion rule of roughly half the resolution in each angle, for
    /// estimating the direction-quadrature error by comparison.
    pub fn coarse(&self) -> SphereRule {
        match self.kind {
            RuleKind::Product { n1, n2, n3 } => {
                SphereRule::product((n1 / 2).max(2), (n2 / 2).max(2), (n3 / 2).max(4))
            }
            RuleKind::LowDiscrepancy { count, seed } => {
                SphereRule::low_discrepancy((count / 2).max(8), seed.wrapping_add(1))
            }
        }
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// The same rule with every direction replaced by its antipode. For a
    /// well-converged rule this changes sphere averages of smooth
    /// integrands by no more than the quadrature error.
    pub fn antipodal(&self) -> SphereRule {
        SphereRule {
            directions: self
                .directions
                .iter()
                .map(|u| [-u[0], -u[1], -u[2], -u[3]])
                .collect(),
            weights: self.weights.clone(),
            kind: self.kind.clone(),
        }
    }

    fn normalize(&mut self) {
        let total: f64 = self.weights.iter().sum();
        let scale = SPHERE_AREA / total;
        for w in &mut self.weights {
            *w *= scale;
        }
    }
}

/// Van der Corput radical inverse in the given base.
fn radical_inverse(base: u64, mut i: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// Inverse of the polar-angle distribution `F(chi) = (chi - sin chi cos
/// chi) / pi` on `(0, pi)`, by bisection-safeguarded Newton.
fn polar_angle_from_uniform(u: f64) -> f64 {
    let u = u.clamp(1e-12, 1.0 - 1e-12);
    let target = PI * u;
    let (mut lo, mut hi) = (0.0, PI);
    let mut x = PI * u;
    for _ in 0..100 {
        let f = x - 0.5 * (2.0 * x).sin() - target;
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let df = 1.0 - (2.0 * x).cos();
        let next = if df > 1e-12 { x - f / df } else { 0.5 * (lo + hi) };
        let next = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        if (next - x).abs() < 1e-15 {
            return next;
        }
        x = next;
    }
    x
}
