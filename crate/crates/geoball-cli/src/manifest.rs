//! Run-manifest grammar and strict parser.
//!
//! A manifest is a flat, line-oriented `key = value` file. Dots group
//! related keys into sections; there are no nested structures, so every
//! line stands alone and diffs cleanly. Blank lines are skipped, and a
//! line whose first non-space character is `#` is a comment. Parsing is
//! strict: unknown keys, duplicate keys, malformed values, and parameter
//! keys that do not belong to the chosen manifold are all errors that
//! carry the offending line number. Nothing falls back to a default when
//! a key is misspelled.
//!
//! ```text
//! manifold = sphere                 # sphere | flat_torus | hyperbolic |
//!                                   # product_spheres | conformal_torus
//! manifold.radius = 1.0             # sphere (default 1.0)
//! manifold.curvature = -1.0         # hyperbolic (default -1.0)
//! manifold.periods = 1, 2, 3, 4     # flat_torus, conformal_torus (required)
//! manifold.eps = 0.2                # conformal_torus (required)
//! manifold.waves = 1, 1, 2, 0      # conformal_torus (required)
//! manifold.a = 1.0                  # product_spheres (default 1.0)
//! manifold.b = 1.0                  # product_spheres (default 1.0)
//! analyses = invariants, theorem1   # executed in declared order; may be empty
//! model = sphere                    # flat | sphere | hyperbolic, required by theorem1
//! points.count = 8                  # sampled points (default 8)
//! points.seed = 0                   # sampling seed (default 0)
//! points.list = 1.5 1.5 1.5 1.0 ; 0.3 0.7 1.1 2.9   # overrides sampling
//! radii.min = 0.05                  # radius sweep (defaults 0.05 .. 0.5)
//! radii.max = 0.5
//! radii.count = 10
//! radii.log = true                  # log spacing (default true)
//! radii.list = 0.1, 0.2, 0.4        # overrides the range
//! numeric.ode_tol = 1e-10           # geodesic integrator tolerance
//! numeric.grid_nodes = 16           # Euler-characteristic grid, per axis
//! numeric.rule = 8 8 16             # sphere-rule sizes n1 n2 n3
//! numeric.tol_analytic = 1e-8       # zero test for analytic quantities
//! numeric.tol_fitted = 1e-6         # zero test for fitted quantities
//! output = report                   # report directory (default "report")
//! ```
//!
//! Number lists accept commas, whitespace, or both as separators;
//! `points.list` separates points with `;`.

use geoball::metric::{ChartPoint, MetricField};
use geoball::spaceform::Branch;
use geoball::{Error, Result};

/// Which metric to build, with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum ManifoldSpec {
    Sphere { radius: f64 },
    FlatTorus { periods: [f64; 4] },
    Hyperbolic { curvature: f64 },
    ProductSpheres { a: f64, b: f64 },
    ConformalTorus { periods: [f64; 4], eps: f64, waves: [u32; 4] },
}

impl ManifoldSpec {
    pub fn build(&self) -> Result<MetricField> {
        match *self {
            ManifoldSpec::Sphere { radius } => MetricField::round_sphere(radius),
            ManifoldSpec::FlatTorus { periods } => MetricField::flat_torus(periods),
            ManifoldSpec::Hyperbolic { curvature } => MetricField::hyperbolic_space(curvature),
            ManifoldSpec::ProductSpheres { a, b } => MetricField::product_spheres(a, b),
            ManifoldSpec::ConformalTorus { periods, eps, waves } => {
                MetricField::conformal_perturbation(periods, eps, waves)
            }
        }
    }

    /// Catalog rows for `--list-manifolds`: token, parameter keys, notes.
    pub fn catalog() -> &'static [(&'static str, &'static str)] {
        &[
            ("sphere", "manifold.radius (default 1.0)"),
            ("flat_torus", "manifold.periods = p0, p1, p2, p3 (required)"),
            ("hyperbolic", "manifold.curvature < 0 (default -1.0); chart does not cover a closed manifold"),
            ("product_spheres", "manifold.a, manifold.b (defaults 1.0)"),
            (
                "conformal_torus",
                "manifold.periods (required), manifold.eps (required), manifold.waves = k0, k1, k2, k3 (required)",
            ),
        ]
    }
}

/// One analysis pass; the runner executes them in declared order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Analysis {
    Invariants,
    BallVolumes,
    FitExpansion,
    GaussBonnet,
    Classify,
    Theorem1,
}

impl Analysis {
    pub fn token(self) -> &'static str {
        match self {
            Analysis::Invariants => "invariants",
            Analysis::BallVolumes => "ball_volumes",
            Analysis::FitExpansion => "fit_expansion",
            Analysis::GaussBonnet => "gauss_bonnet",
            Analysis::Classify => "classify",
            Analysis::Theorem1 => "theorem1",
        }
    }

    fn from_token(tok: &str) -> Option<Analysis> {
        Some(match tok {
            "invariants" => Analysis::Invariants,
            "ball_volumes" => Analysis::BallVolumes,
            "fit_expansion" => Analysis::FitExpansion,
            "gauss_bonnet" => Analysis::GaussBonnet,
            "classify" => Analysis::Classify,
            "theorem1" => Analysis::Theorem1,
            _ => return None,
        })
    }
}

/// Where evaluation points come from.
#[derive(Clone, Debug, PartialEq)]
pub enum PointsSpec {
    Sampled { count: usize, seed: u64 },
    Explicit(Vec<[f64; 4]>),
}

impl PointsSpec {
    pub fn resolve(&self, m: &MetricField) -> Vec<ChartPoint> {
        match self {
            PointsSpec::Sampled { count, seed } => {
                geoball::spaceform::sample_points(m, *count, *seed)
            }
            PointsSpec::Explicit(list) => {
                list.iter().map(|c| ChartPoint::new(c.to_vec())).collect()
            }
        }
    }

    /// The sampling seed when points are sampled; reports echo it.
    pub fn seed(&self) -> Option<u64> {
        match self {
            PointsSpec::Sampled { seed, .. } => Some(*seed),
            PointsSpec::Explicit(_) => None,
        }
    }
}

/// The radius sweep for volume analyses.
#[derive(Clone, Debug, PartialEq)]
pub enum RadiiSpec {
    Range { min: f64, max: f64, count: usize, log: bool },
    Explicit(Vec<f64>),
}

impl RadiiSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            RadiiSpec::Explicit(list) => list.clone(),
            RadiiSpec::Range { min, max, count, log } => {
                let n = *count;
                if n == 1 {
                    return vec![*min];
                }
                (0..n)
                    .map(|i| {
                        let s = i as f64 / (n - 1) as f64;
                        if *log {
                            (min.ln() + s * (max.ln() - min.ln())).exp()
                        } else {
                            min + s * (max - min)
                        }
                    })
                    .collect()
            }
        }
    }
}

/// Numeric knobs with documented defaults.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericOptions {
    pub ode_tol: f64,
    pub grid_nodes: usize,
    pub rule: (usize, usize, usize),
    pub tol_analytic: f64,
    pub tol_fitted: f64,
}

impl Default for NumericOptions {
    fn default() -> NumericOptions {
        NumericOptions {
            ode_tol: 1e-10,
            grid_nodes: 16,
            rule: (8, 8, 16),
            tol_analytic: 1e-8,
            tol_fitted: 1e-6,
        }
    }
}

/// A parsed and validated run description.
#[derive(Clone, Debug)]
pub struct Manifest {
    pub manifold: ManifoldSpec,
    pub analyses: Vec<Analysis>,
    pub points: PointsSpec,
    pub radii: RadiiSpec,
    pub model: Option<Branch>,
    pub numeric: NumericOptions,
    pub output: String,
    /// Verbatim manifest text, echoed into the report for provenance.
    pub raw_text: String,
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::ManifestParse { line, message: message.into() }
}

fn parse_f64(line: usize, key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| err(line, format!("{key}: expected a number, got `{value}`")))
}

fn parse_usize(line: usize, key: &str, value: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|_| err(line, format!("{key}: expected a nonnegative integer, got `{value}`")))
}

fn parse_bool(line: usize, key: &str, value: &str) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(err(line, format!("{key}: expected true or false, got `{value}`"))),
    }
}

fn split_numbers(value: &str) -> Vec<&str> {
    value.split([',', ' ', '\t']).filter(|s| !s.is_empty()).collect()
}

fn parse_f64_list<const N: usize>(line: usize, key: &str, value: &str) -> Result<[f64; N]> {
    let parts = split_numbers(value);
    if parts.len() != N {
        return Err(err(line, format!("{key}: expected {N} numbers, got {}", parts.len())));
    }
    let mut out = [0.0; N];
    for (slot, part) in out.iter_mut().zip(&parts) {
        *slot = parse_f64(line, key, part)?;
    }
    Ok(out)
}

fn parse_u32_list<const N: usize>(line: usize, key: &str, value: &str) -> Result<[u32; N]> {
    let parts = split_numbers(value);
    if parts.len() != N {
        return Err(err(line, format!("{key}: expected {N} integers, got {}", parts.len())));
    }
    let mut out = [0u32; N];
    for (slot, part) in out.iter_mut().zip(&parts) {
        *slot = part
            .parse::<u32>()
            .map_err(|_| err(line, format!("{key}: expected an integer, got `{part}`")))?;
    }
    Ok(out)
}

/// One manifest value with the line it came from, so later cross-checks
/// can still point at the source.
#[derive(Clone, Copy)]
struct At<T> {
    value: T,
    line: usize,
}

#[derive(Default)]
struct Builder {
    manifold: Option<At<String>>,
    radius: Option<At<f64>>,
    curvature: Option<At<f64>>,
    periods: Option<At<[f64; 4]>>,
    eps: Option<At<f64>>,
    waves: Option<At<[u32; 4]>>,
    param_a: Option<At<f64>>,
    param_b: Option<At<f64>>,
    analyses: Option<At<Vec<Analysis>>>,
    model: Option<At<Branch>>,
    points_count: Option<At<usize>>,
    points_seed: Option<At<u64>>,
    points_list: Option<At<Vec<[f64; 4]>>>,
    radii_min: Option<At<f64>>,
    radii_max: Option<At<f64>>,
    radii_count: Option<At<usize>>,
    radii_log: Option<At<bool>>,
    radii_list: Option<At<Vec<f64>>>,
    ode_tol: Option<At<f64>>,
    grid_nodes: Option<At<usize>>,
    rule: Option<At<(usize, usize, usize)>>,
    tol_analytic: Option<At<f64>>,
    tol_fitted: Option<At<f64>>,
    output: Option<At<String>>,
}

fn set<T>(slot: &mut Option<At<T>>, key: &str, line: usize, value: T) -> Result<()> {
    if let Some(prev) = slot.as_ref().map(|a| a.line) {
        return Err(err(line, format!("duplicate key `{key}` (first set on line {prev})")));
    }
    *slot = Some(At { value, line });
    Ok(())
}

fn positive(line: usize, key: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(err(line, format!("{key}: must be positive and finite, got {v}")))
    }
}

impl Manifest {
    /// Parses and fully validates manifest text. Every rejected input
    /// names the offending line; nothing is silently defaulted.
    pub fn parse(text: &str) -> Result<Manifest> {
        let mut b = Builder::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some((key, value)) = trimmed.split_once('=') else {
                return Err(err(line, format!("expected `key = value`, got `{trimmed}`")));
            };
            let key = key.trim();
            let value = value.trim();
            match key {
                "manifold" => set(&mut b.manifold, key, line, value.to_string())?,
                "manifold.radius" => {
                    let v = positive(line, key, parse_f64(line, key, value)?)?;
                    set(&mut b.radius, key, line, v)?;
                }
                "manifold.curvature" => {
                    let v = parse_f64(line, key, value)?;
                    if !(v < 0.0) {
                        return Err(err(line, format!("{key}: must be negative, got {v}")));
                    }
                    set(&mut b.curvature, key, line, v)?;
                }
                "manifold.periods" => {
                    let v: [f64; 4] = parse_f64_list(line, key, value)?;
                    for &p in &v {
                        positive(line, key, p)?;
                    }
                    set(&mut b.periods, key, line, v)?;
                }
                "manifold.eps" => set(&mut b.eps, key, line, parse_f64(line, key, value)?)?,
                "manifold.waves" => {
                    set(&mut b.waves, key, line, parse_u32_list(line, key, value)?)?
                }
                "manifold.a" => {
                    let v = positive(line, key, parse_f64(line, key, value)?)?;
                    set(&mut b.param_a, key, line, v)?;
                }
                "manifold.b" => {
                    let v = positive(line, key, parse_f64(line, key, value)?)?;
                    set(&mut b.param_b, key, line, v)?;
                }
                "analyses" => {
                    let mut list = Vec::new();
                    for tok in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                        let a = Analysis::from_token(tok)
                            .ok_or_else(|| err(line, format!("unknown analysis `{tok}`")))?;
                        if list.contains(&a) {
                            return Err(err(line, format!("analysis `{tok}` listed twice")));
                        }
                        list.push(a);
                    }
                    set(&mut b.analyses, key, line, list)?;
                }
                "model" => {
                    let branch = match value {
                        "flat" => Branch::Flat,
                        "sphere" => Branch::Sphere,
                        "hyperbolic" => Branch::Hyperbolic,
                        _ => {
                            return Err(err(
                                line,
                                format!("model: expected flat, sphere, or hyperbolic, got `{value}`"),
                            ))
                        }
                    };
                    set(&mut b.model, key, line, branch)?;
                }
                "points.count" => {
                    let v = parse_usize(line, key, value)?;
                    if v == 0 {
                        return Err(err(line, "points.count: must be at least 1"));
                    }
                    set(&mut b.points_count, key, line, v)?;
                }
                "points.seed" => {
                    let v = value.parse::<u64>().map_err(|_| {
                        err(line, format!("points.seed: expected an integer, got `{value}`"))
                    })?;
                    set(&mut b.points_seed, key, line, v)?;
                }
                "points.list" => {
                    let mut pts = Vec::new();
                    for chunk in value.split(';').map(str::trim).filter(|s| !s.is_empty()) {
                        pts.push(parse_f64_list::<4>(line, key, chunk)?);
                    }
                    if pts.is_empty() {
                        return Err(err(line, "points.list: no points given"));
                    }
                    set(&mut b.points_list, key, line, pts)?;
                }
                "radii.min" => {
                    let v = positive(line, key, parse_f64(line, key, value)?)?;
                    set(&mut b.radii_min, key, line, v)?;
                }
                "radii.max" => {
                    let v = positive(line, key, parse_f64(line, key, value)?)?;
                    set(&mut b.radii_max, key, line, v)?;
                }
                "radii.count" => {
                    let v = parse_usize(line, key, value)?;
                    if v == 0 {
                        return Err(err(line, "radii.count: must be at least 1"));
                    }
                    set(&mut b.radii_count, key, line, v)?;
                }
                "radii.log" => set(&mut b.radii_log, key, line, parse_bool(line, key, value)?)?,
                "radii.list" => {
                    let parts = split_numbers(value);
                    let mut list = Vec::new();
                    for part in parts {
                        list.push(positive(line, key, parse_f64(line, key, part)?)?);
                    }
                    if list.is_empty() {
                        return Err(err(line, "radii.list: no radii given"));
                    }
                    if !list.windows(2).all(|w| w[0] < w[1]) {
                        return Err(err(line, "radii.list: must be strictly increasing"));
                    }
                    set(&mut b.radii_list, key, line, list)?;
                }
                "numeric.ode_tol" => {
                    let v = positive(line, key, parse_f64(line, key, value)?)?;
                    set(&mut b.ode_tol, key, line, v)?;
                }
                "numeric.grid_nodes" => {
                    let v = parse_usize(line, key, value)?;
                    if v < 2 {
                        return Err(err(line, "numeric.grid_nodes: must be at least 2"));
                    }
                    set(&mut b.grid_nodes, key, line, v)?;
                }
                "numeric.rule" => {
                    let parts = split_numbers(value);
                    if parts.len() != 3 {
                        return Err(err(
                            line,
                            format!("numeric.rule: expected 3 sizes n1 n2 n3, got {}", parts.len()),
                        ));
                    }
                    let mut sizes = [0usize; 3];
                    for (slot, part) in sizes.iter_mut().zip(&parts) {
                        *slot = parse_usize(line, key, part)?;
                        if *slot == 0 {
                            return Err(err(line, "numeric.rule: sizes must be at least 1"));
                        }
                    }
                    set(&mut b.rule, key, line, (sizes[0], sizes[1], sizes[2]))?;
                }
                "numeric.tol_analytic" => {
                    let v = positive(line, key, parse_f64(line, key, value)?)?;
                    set(&mut b.tol_analytic, key, line, v)?;
                }
                "numeric.tol_fitted" => {
                    let v = positive(line, key, parse_f64(line, key, value)?)?;
                    set(&mut b.tol_fitted, key, line, v)?;
                }
                "output" => {
                    if value.is_empty() {
                        return Err(err(line, "output: path must not be empty"));
                    }
                    set(&mut b.output, key, line, value.to_string())?;
                }
                _ => return Err(err(line, format!("unknown key `{key}`"))),
            }
        }
        assemble(b, text)
    }
}

/// Rejects a parameter key that the chosen manifold does not take.
fn forbid<T>(slot: &Option<At<T>>, key: &str, manifold: &str) -> Result<()> {
    if let Some(at) = slot {
        return Err(err(at.line, format!("{key} does not apply to manifold `{manifold}`")));
    }
    Ok(())
}

fn require<T: Clone>(slot: &Option<At<T>>, key: &str, manifold: &str) -> Result<T> {
    slot.as_ref()
        .map(|a| a.value.clone())
        .ok_or_else(|| err(0, format!("{key} is required for manifold `{manifold}`")))
}

fn assemble(b: Builder, text: &str) -> Result<Manifest> {
    let Some(name) = b.manifold.as_ref() else {
        return Err(err(0, "missing required key `manifold`"));
    };
    let token = name.value.as_str();
    let manifold = match token {
        "sphere" => {
            forbid(&b.curvature, "manifold.curvature", token)?;
            forbid(&b.periods, "manifold.periods", token)?;
            forbid(&b.eps, "manifold.eps", token)?;
            forbid(&b.waves, "manifold.waves", token)?;
            forbid(&b.param_a, "manifold.a", token)?;
            forbid(&b.param_b, "manifold.b", token)?;
            ManifoldSpec::Sphere { radius: b.radius.map_or(1.0, |a| a.value) }
        }
        "flat_torus" => {
            forbid(&b.radius, "manifold.radius", token)?;
            forbid(&b.curvature, "manifold.curvature", token)?;
            forbid(&b.eps, "manifold.eps", token)?;
            forbid(&b.waves, "manifold.waves", token)?;
            forbid(&b.param_a, "manifold.a", token)?;
            forbid(&b.param_b, "manifold.b", token)?;
            ManifoldSpec::FlatTorus { periods: require(&b.periods, "manifold.periods", token)? }
        }
        "hyperbolic" => {
            forbid(&b.radius, "manifold.radius", token)?;
            forbid(&b.periods, "manifold.periods", token)?;
            forbid(&b.eps, "manifold.eps", token)?;
            forbid(&b.waves, "manifold.waves", token)?;
            forbid(&b.param_a, "manifold.a", token)?;
            forbid(&b.param_b, "manifold.b", token)?;
            ManifoldSpec::Hyperbolic { curvature: b.curvature.map_or(-1.0, |a| a.value) }
        }
        "product_spheres" => {
            forbid(&b.radius, "manifold.radius", token)?;
            forbid(&b.curvature, "manifold.curvature", token)?;
            forbid(&b.periods, "manifold.periods", token)?;
            forbid(&b.eps, "manifold.eps", token)?;
            forbid(&b.waves, "manifold.waves", token)?;
            ManifoldSpec::ProductSpheres {
                a: b.param_a.map_or(1.0, |a| a.value),
                b: b.param_b.map_or(1.0, |a| a.value),
            }
        }
        "conformal_torus" => {
            forbid(&b.radius, "manifold.radius", token)?;
            forbid(&b.curvature, "manifold.curvature", token)?;
            forbid(&b.param_a, "manifold.a", token)?;
            forbid(&b.param_b, "manifold.b", token)?;
            ManifoldSpec::ConformalTorus {
                periods: require(&b.periods, "manifold.periods", token)?,
                eps: require(&b.eps, "manifold.eps", token)?,
                waves: require(&b.waves, "manifold.waves", token)?,
            }
        }
        _ => {
            return Err(err(
                name.line,
                format!(
                    "unknown manifold `{token}`; known: {}",
                    ManifoldSpec::catalog()
                        .iter()
                        .map(|(t, _)| *t)
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
            ))
        }
    };

    // Constructor-level validation (parameter ranges, degeneracies).
    let metric = manifold
        .build()
        .map_err(|e| err(name.line, format!("manifold rejected: {e}")))?;

    let analyses = b.analyses.map(|a| a.value).unwrap_or_default();

    let points = if let Some(list) = &b.points_list {
        if let Some(at) = &b.points_count {
            return Err(err(at.line, "points.count conflicts with points.list"));
        }
        if let Some(at) = &b.points_seed {
            return Err(err(at.line, "points.seed conflicts with points.list"));
        }
        for pt in &list.value {
            if !metric.domain().contains(pt) {
                return Err(err(
                    list.line,
                    format!("points.list: {pt:?} lies outside the chart of {}", metric.name()),
                ));
            }
        }
        PointsSpec::Explicit(list.value.clone())
    } else {
        PointsSpec::Sampled {
            count: b.points_count.map_or(8, |a| a.value),
            seed: b.points_seed.map_or(0, |a| a.value),
        }
    };

    let radii = if let Some(list) = b.radii_list {
        let conflict = b
            .radii_min
            .map(|a| a.line)
            .or(b.radii_max.map(|a| a.line))
            .or(b.radii_count.map(|a| a.line))
            .or(b.radii_log.map(|a| a.line));
        if let Some(line) = conflict {
            return Err(err(line, "radii range keys conflict with radii.list"));
        }
        RadiiSpec::Explicit(list.value)
    } else {
        let min = b.radii_min.map_or(0.05, |a| a.value);
        let max = b.radii_max.map_or(0.5, |a| a.value);
        if min >= max {
            let line = b.radii_min.map_or(0, |a| a.line);
            return Err(err(line, format!("radii: min {min} must be below max {max}")));
        }
        RadiiSpec::Range {
            min,
            max,
            count: b.radii_count.map_or(10, |a| a.value),
            log: b.radii_log.map_or(true, |a| a.value),
        }
    };

    let model = b.model.map(|a| a.value);
    if analyses.contains(&Analysis::Theorem1) && model.is_none() {
        return Err(err(0, "analyses include theorem1 but no `model` is set"));
    }
    if analyses.contains(&Analysis::FitExpansion) && radii.values().len() < 8 {
        return Err(err(0, "fit_expansion needs at least 8 radii"));
    }

    let numeric = NumericOptions {
        ode_tol: b.ode_tol.map_or(1e-10, |a| a.value),
        grid_nodes: b.grid_nodes.map_or(16, |a| a.value),
        rule: b.rule.map_or((8, 8, 16), |a| a.value),
        tol_analytic: b.tol_analytic.map_or(1e-8, |a| a.value),
        tol_fitted: b.tol_fitted.map_or(1e-6, |a| a.value),
    };

    Ok(Manifest {
        manifold,
        analyses,
        points,
        radii,
        model,
        numeric,
        output: b.output.map_or_else(|| "report".to_string(), |a| a.value),
        raw_text: text.to_string(),
    })
}
