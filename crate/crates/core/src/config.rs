//! JSON run configuration.
//!
//! ```json
//! {
//!   "model": {
//!     "boundary": { "alpha": "3/2", "beta": "1/3", "gamma": "-2/5", "rho": "7/4" },
//!     "inhomogeneities": ["2", "-3"],
//!     "spins": ["1/2", "1/2"]
//!   },
//!   "seed": 7,
//!   "bethe": { "regime": "even-modified", "starts": 400 }
//! }
//! ```
//!
//! Rationals are `"p/q"` strings or plain decimals (read exactly). Test
//! points are reals or `[re, im]` pairs.

use std::fmt;

use num_complex::Complex64;
use serde::Deserialize;
use serde_json::Value;

use crate::bethe::SolveConfig;
use crate::kernel::{BoundaryParams, ChainConfig, Spin};
use crate::operators::Regime;
use crate::scalar::{parse_rational, Rational, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// Dotted path of the offending field, if known.
    pub path: Option<String>,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error")?;
        if let Some(l) = self.line {
            write!(f, " at line {l}")?;
        }
        if let Some(p) = &self.path {
            write!(f, " ({p})")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Workflow {
    Verify,
    Spectrum,
    Bethe,
}

impl Workflow {
    pub fn name(self) -> &'static str {
        match self {
            Workflow::Verify => "verify",
            Workflow::Spectrum => "spectrum",
            Workflow::Bethe => "bethe",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Exact,
    Float,
}

impl Backend {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "exact" => Some(Backend::Exact),
            "float" => Some(Backend::Float),
            _ => None,
        }
    }
}

/// A spectral test point `re + i·im`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestPoint {
    pub re: Rational,
    pub im: Rational,
}

impl TestPoint {
    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.re.to_complex().re, self.im.to_complex().re)
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        num_traits::Zero::is_zero(&self.im).then_some(&self.re)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetheOptions {
    pub regime: Regime,
    /// `None` means the regime's forced value.
    pub m: Option<usize>,
    pub solve: SolveConfig,
    pub eigvec_tol: f64,
    pub match_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: BoundaryParams<Rational>,
    pub chain: ChainConfig<Rational>,
    pub workflow: Option<Workflow>,
    pub seed: u64,
    pub backend: Option<Backend>,
    pub trials: Option<usize>,
    pub test_points: Vec<TestPoint>,
    pub certificate_tol: f64,
    pub bethe: Option<BetheOptions>,
}

pub const DEFAULT_CERTIFICATE_TOL: f64 = 1e-10;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: RawModel,
    #[serde(default)]
    workflow: Option<String>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    backend: Option<String>,
    #[serde(default)]
    trials: Option<usize>,
    #[serde(default)]
    test_points: Option<Vec<Value>>,
    #[serde(default)]
    certificate_tol: Option<f64>,
    #[serde(default)]
    bethe: Option<RawBethe>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    boundary: RawBoundary,
    inhomogeneities: Vec<Value>,
    #[serde(default)]
    spins: Option<Vec<Value>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBoundary {
    alpha: Value,
    beta: Value,
    gamma: Value,
    rho: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBethe {
    regime: String,
    #[serde(default)]
    m: Option<usize>,
    #[serde(default)]
    starts: Option<usize>,
    #[serde(default)]
    newton_tol: Option<f64>,
    #[serde(default)]
    max_iterations: Option<usize>,
    #[serde(default)]
    dedup_tol: Option<f64>,
    #[serde(default)]
    pole_guard: Option<f64>,
    #[serde(default)]
    annulus: Option<[f64; 2]>,
    #[serde(default)]
    escape_radius: Option<f64>,
    #[serde(default)]
    eigvec_tol: Option<f64>,
    #[serde(default)]
    match_tol: Option<f64>,
}

/// Line of the first occurrence of `"key"` in the document.
fn line_of(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&needle)).map(|i| i + 1)
}

struct Ctx<'a> {
    text: &'a str,
}

impl Ctx<'_> {
    fn err(&self, path: &str, message: impl Into<String>) -> ConfigError {
        let key = path.rsplit('.').next().unwrap_or(path);
        let key = key.split('[').next().unwrap_or(key);
        ConfigError { path: Some(path.to_string()), line: line_of(self.text, key), message: message.into() }
    }

    fn rational(&self, path: &str, v: &Value) -> Result<Rational, ConfigError> {
        let text = match v {
            Value::String(s) => s.clone(),
            Value::Number(n) => n.to_string(),
            other => return Err(self.err(path, format!("expected a rational, got {other}"))),
        };
        parse_rational(&text).ok_or_else(|| self.err(path, format!("cannot read {text:?} as a rational")))
    }

    fn point(&self, path: &str, v: &Value) -> Result<TestPoint, ConfigError> {
        match v {
            Value::Array(a) if a.len() == 2 => Ok(TestPoint {
                re: self.rational(&format!("{path}[0]"), &a[0])?,
                im: self.rational(&format!("{path}[1]"), &a[1])?,
            }),
            Value::Array(_) => Err(self.err(path, "complex test points are [re, im] pairs")),
            _ => Ok(TestPoint { re: self.rational(path, v)?, im: Rational::from_integer(0.into()) }),
        }
    }

    fn spin(&self, path: &str, v: &Value) -> Result<Spin, ConfigError> {
        let s = self.rational(path, v)?;
        let twice = s * Rational::from_integer(2.into());
        if !twice.is_integer() || twice <= Rational::from_integer(0.into()) {
            return Err(self.err(path, "spin must be a positive half-integer"));
        }
        let n: u32 = twice
            .to_integer()
            .try_into()
            .map_err(|_| self.err(path, "spin too large"))?;
        Ok(Spin(n))
    }
}

fn positive(ctx: &Ctx, path: &str, v: Option<f64>, default: f64) -> Result<f64, ConfigError> {
    let v = v.unwrap_or(default);
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(ctx.err(path, format!("must be positive, got {v}")))
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| ConfigError {
            path: None,
            line: Some(e.line()),
            message: e.to_string(),
        })?;
        let ctx = Ctx { text };
        let b = &raw.model.boundary;
        let params = BoundaryParams::new(
            ctx.rational("model.boundary.alpha", &b.alpha)?,
            ctx.rational("model.boundary.beta", &b.beta)?,
            ctx.rational("model.boundary.gamma", &b.gamma)?,
            ctx.rational("model.boundary.rho", &b.rho)?,
        )
        .map_err(|e| ctx.err("model.boundary", e.to_string()))?;

        let v = raw
            .model
            .inhomogeneities
            .iter()
            .enumerate()
            .map(|(i, x)| ctx.rational(&format!("model.inhomogeneities[{i}]"), x))
            .collect::<Result<Vec<_>, _>>()?;
        let spins = match &raw.model.spins {
            Some(s) => {
                if s.len() != v.len() {
                    return Err(ctx.err(
                        "model.spins",
                        format!("{} spins for {} inhomogeneities", s.len(), v.len()),
                    ));
                }
                s.iter()
                    .enumerate()
                    .map(|(i, x)| ctx.spin(&format!("model.spins[{i}]"), x))
                    .collect::<Result<Vec<_>, _>>()?
            }
            None => vec![Spin::HALF; v.len()],
        };
        let chain = ChainConfig::new(v, spins).map_err(|e| ctx.err("model.inhomogeneities", e.to_string()))?;

        let workflow = match raw.workflow.as_deref() {
            None => None,
            Some("verify") => Some(Workflow::Verify),
            Some("spectrum") => Some(Workflow::Spectrum),
            Some("bethe") => Some(Workflow::Bethe),
            Some(other) => return Err(ctx.err("workflow", format!("unknown workflow {other:?}"))),
        };
        let backend = match raw.backend.as_deref() {
            None => None,
            Some(s) => Some(Backend::parse(s).ok_or_else(|| ctx.err("backend", format!("unknown backend {s:?}")))?),
        };
        let test_points = match &raw.test_points {
            Some(pts) if pts.is_empty() => return Err(ctx.err("test_points", "at least one test point is required")),
            Some(pts) => pts
                .iter()
                .enumerate()
                .map(|(i, x)| ctx.point(&format!("test_points[{i}]"), x))
                .collect::<Result<Vec<_>, _>>()?,
            None => default_test_points(),
        };
        let certificate_tol = positive(&ctx, "certificate_tol", raw.certificate_tol, DEFAULT_CERTIFICATE_TOL)?;

        let bethe = match &raw.bethe {
            None => None,
            Some(rb) => Some(parse_bethe(&ctx, rb, raw.seed.unwrap_or(0))?),
        };
        if matches!(raw.trials, Some(0)) {
            return Err(ctx.err("trials", "must be at least 1"));
        }

        Ok(RunConfig {
            params,
            chain,
            workflow,
            seed: raw.seed.unwrap_or(0),
            backend,
            trials: raw.trials,
            test_points,
            certificate_tol,
            bethe,
        })
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            path: None,
            line: None,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::from_json(&text)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        if let Some(b) = &mut self.bethe {
            b.solve.seed = seed;
        }
        self
    }
}

fn parse_bethe(ctx: &Ctx, rb: &RawBethe, seed: u64) -> Result<BetheOptions, ConfigError> {
    let regime = Regime::parse(&rb.regime).ok_or_else(|| {
        ctx.err("bethe.regime", format!("unknown regime {:?} (triangular, odd-sector, even-modified)", rb.regime))
    })?;
    let d = SolveConfig::default();
    let annulus = match rb.annulus {
        Some([lo, hi]) => (lo, hi),
        None => d.annulus,
    };
    let solve = SolveConfig {
        seed,
        starts: rb.starts.unwrap_or(d.starts),
        newton_tol: positive(ctx, "bethe.newton_tol", rb.newton_tol, d.newton_tol)?,
        max_iterations: rb.max_iterations.unwrap_or(d.max_iterations),
        dedup_tol: positive(ctx, "bethe.dedup_tol", rb.dedup_tol, d.dedup_tol)?,
        pole_guard: positive(ctx, "bethe.pole_guard", rb.pole_guard, d.pole_guard)?,
        annulus,
        escape_radius: rb.escape_radius.unwrap_or(d.escape_radius),
    };
    solve.validate().map_err(|e| ctx.err("bethe", e.to_string()))?;
    Ok(BetheOptions {
        regime,
        m: rb.m,
        solve,
        eigvec_tol: positive(ctx, "bethe.eigvec_tol", rb.eigvec_tol, 1e-8)?,
        match_tol: positive(ctx, "bethe.match_tol", rb.match_tol, 1e-8)?,
    })
}

/// `0.37` and `2.9 + 0.4i`.
pub fn default_test_points() -> Vec<TestPoint> {
    let q = |n: i64, d: i64| Rational::new(n.into(), d.into());
    vec![TestPoint { re: q(37, 100), im: q(0, 1) }, TestPoint { re: q(29, 10), im: q(2, 5) }]
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
  "model": {
    "boundary": { "alpha": "3/2", "beta": 0.25, "gamma": "-2/5", "rho": "7/4" },
    "inhomogeneities": ["2", "-3"]
  },
  "seed": 5
}"#;

    #[test]
    fn parses_minimal_config() {
        let c = RunConfig::from_json(BASE).unwrap();
        assert_eq!(c.params.beta, Rational::new(1.into(), 4.into()));
        assert_eq!(c.chain.len(), 2);
        assert!(c.chain.is_spin_half());
        assert_eq!(c.seed, 5);
        assert_eq!(c.test_points.len(), 2);
        assert!(c.bethe.is_none());
    }

    #[test]
    fn decimals_are_exact() {
        let text = BASE.replace("0.25", "0.1");
        let c = RunConfig::from_json(&text).unwrap();
        assert_eq!(c.params.beta, Rational::new(1.into(), 10.into()));
    }

    #[test]
    fn equal_inhomogeneities_name_the_field() {
        let text = BASE.replace(r#"["2", "-3"]"#, r#"["2", "2"]"#);
        let e = RunConfig::from_json(&text).unwrap_err();
        assert_eq!(e.path.as_deref(), Some("model.inhomogeneities"));
        assert_eq!(e.line, Some(4));
        assert!(e.to_string().contains("line 4"), "{e}");
    }

    #[test]
    fn syntax_errors_carry_lines() {
        let e = RunConfig::from_json("{\n  \"model\": {\n  oops\n}").unwrap_err();
        assert_eq!(e.line, Some(3));
        let e = RunConfig::from_json(&BASE.replace("\"seed\"", "\"sede\"")).unwrap_err();
        assert!(e.message.contains("unknown field"));
    }

    #[test]
    fn bad_values() {
        let e = RunConfig::from_json(&BASE.replace("\"3/2\"", "\"3/0\"")).unwrap_err();
        assert_eq!(e.path.as_deref(), Some("model.boundary.alpha"));
        let e = RunConfig::from_json(&BASE.replace("\"7/4\"", "0")).unwrap_err();
        assert_eq!(e.path.as_deref(), Some("model.boundary"));
    }

    #[test]
    fn spins_and_points() {
        let text = BASE.replace(
            r#""inhomogeneities": ["2", "-3"]"#,
            r#""inhomogeneities": ["2", "-3"], "spins": ["1/2", 1]"#,
        )
        .replace("\"seed\": 5", "\"seed\": 5, \"test_points\": [\"1/3\", [\"2\", \"-1/2\"]]");
        let c = RunConfig::from_json(&text).unwrap();
        assert_eq!(c.chain.spins(), &[Spin::HALF, Spin::ONE]);
        assert_eq!(c.test_points[1].to_complex(), Complex64::new(2.0, -0.5));
        assert!(c.test_points[1].as_rational().is_none());
        let bad = text.replace("\"1/2\", 1]", "\"1/3\", 1]");
        assert_eq!(RunConfig::from_json(&bad).unwrap_err().path.as_deref(), Some("model.spins[0]"));
    }

    #[test]
    fn bethe_section() {
        let text = BASE.replace("\"seed\": 5", "\"seed\": 5, \"bethe\": {\"regime\": \"even\", \"starts\": 10}");
        let c = RunConfig::from_json(&text).unwrap();
        let b = c.bethe.unwrap();
        assert_eq!(b.regime, Regime::EvenModified);
        assert_eq!(b.solve.starts, 10);
        assert_eq!(b.solve.seed, 5);
        let bad = text.replace("\"even\"", "\"sideways\"");
        assert_eq!(RunConfig::from_json(&bad).unwrap_err().path.as_deref(), Some("bethe.regime"));
    }
}
