//! The three batch workflows and their serialized results.
//!
//! Outputs contain no timings or other run-dependent data, so identical
//! configurations and seeds give byte-identical files.

use num_complex::Complex64;
use serde_json::{json, Map, Number, Value};

use crate::bethe::{self, coverage, ed_spectra, validate_solution, BetheSolution, ValidationReport};
use crate::config::{Backend, RunConfig, TestPoint};
use crate::error::Error;
use crate::identities::{run_suite, SuiteOptions, VerificationReport};
use crate::matrix::{Matrix, DIMENSION_CAP};
use crate::operators::{Chain, Regime};
use crate::scalar::{fmt_complex, fmt_f64, Rational, Scalar};
use crate::spectral;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// Result of a workflow: exit status plus both renderings.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// 0 on success, 1 on a failed check or validation.
    pub exit_code: i32,
    pub json: Value,
    pub csv: String,
}

impl Outcome {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("serializable");
                s.push('\n');
                s
            }
            Format::Csv => self.csv.clone(),
        }
    }
}

/// A usage or configuration problem; the CLI exits with status 2.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(e: impl std::fmt::Display) -> UsageError {
    UsageError(e.to_string())
}

/// Reals as JSON numbers with 17 significant digits; non-finite values as
/// strings.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(fmt_f64(x).parse::<Number>().expect("valid number literal"))
    } else {
        Value::String(fmt_f64(x))
    }
}

pub fn cnum(z: Complex64) -> Value {
    Value::String(fmt_complex(z))
}

fn csv_text(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8")
}

fn check_dimension(cfg: &RunConfig) -> Result<(), UsageError> {
    let d = cfg.chain.dim();
    if d > DIMENSION_CAP {
        Err(usage(Error::DimensionCap(d, DIMENSION_CAP)))
    } else {
        Ok(())
    }
}

fn float_chain(cfg: &RunConfig) -> Result<Chain<Complex64>, UsageError> {
    Chain::new(cfg.params.map(Complex64::from_rational), cfg.chain.map(Complex64::from_rational)).map_err(usage)
}

fn points(cfg: &RunConfig) -> Vec<Complex64> {
    cfg.test_points.iter().map(TestPoint::to_complex).collect()
}

// ----------------------------------------------------------------------
// verify

pub fn run_verify(cfg: &RunConfig, backend: Backend, perturb: bool) -> Result<Outcome, UsageError> {
    check_dimension(cfg)?;
    let opts = SuiteOptions { seed: cfg.seed, trials: cfg.trials, perturb };
    let report = match backend {
        Backend::Exact => run_suite::<Rational>(&cfg.params, &cfg.chain, &opts),
        Backend::Float => run_suite::<Complex64>(&cfg.params, &cfg.chain, &opts),
    };
    Ok(verify_outcome(&report))
}

pub fn verify_outcome(report: &VerificationReport) -> Outcome {
    let checks: Vec<Value> = report
        .checks
        .iter()
        .map(|c| {
            let mut m = Map::new();
            m.insert("name".into(), json!(c.name));
            m.insert("status".into(), json!(if c.pass { "pass" } else { "fail" }));
            m.insert("trials".into(), json!(c.trials));
            m.insert("deviation".into(), num(c.worst));
            m.insert("witness".into(), c.witness.clone().map_or(Value::Null, Value::String));
            m.insert("note".into(), c.note.clone().map_or(Value::Null, Value::String));
            Value::Object(m)
        })
        .collect();
    let json = json!({
        "workflow": "verify",
        "seed": report.seed,
        "backend": report.backend,
        "passed": report.passed(),
        "failed": report.failures().len(),
        "checks": checks,
    });
    let rows = report
        .checks
        .iter()
        .map(|c| {
            vec![
                c.name.clone(),
                if c.pass { "pass" } else { "fail" }.to_string(),
                c.trials.to_string(),
                fmt_f64(c.worst),
                c.witness.clone().unwrap_or_default(),
                c.note.clone().unwrap_or_default(),
            ]
        })
        .collect();
    Outcome {
        exit_code: if report.passed() { 0 } else { 1 },
        json,
        csv: csv_text(&["check", "status", "trials", "deviation", "witness", "note"], rows),
    }
}

// ----------------------------------------------------------------------
// spectrum

/// `‖[A,B]‖_F / (‖A‖_F ‖B‖_F)`.
pub fn relative_commutator(a: &Matrix<Complex64>, b: &Matrix<Complex64>) -> f64 {
    let scale = a.frobenius() * b.frobenius();
    if scale == 0.0 {
        return 0.0;
    }
    a.commutator(b).frobenius() / scale
}

pub fn run_spectrum(cfg: &RunConfig, backend: Backend) -> Result<Outcome, UsageError> {
    if backend == Backend::Exact {
        return Err(usage("the spectrum workflow requires the float backend"));
    }
    check_dimension(cfg)?;
    let chain = float_chain(cfg)?;
    let xs = points(cfg);
    let ts: Vec<Matrix<Complex64>> = xs.iter().map(|x| chain.transfer(x, 0)).collect::<Result<_, _>>().map_err(usage)?;
    let diagonal = cfg.params.is_diagonal();
    let spin2 = chain.total_spin_twice();
    let mut sectors: Vec<i64> = spin2.clone();
    sectors.sort_unstable_by(|a, b| b.cmp(a));
    sectors.dedup();

    let mut point_json = Vec::new();
    let mut rows = Vec::new();
    let mut exit_code = 0;
    for (k, (x, t)) in xs.iter().zip(&ts).enumerate() {
        let spec = match spectral::eigenvalues(t, cfg.certificate_tol) {
            Ok(s) => s,
            Err(e @ Error::DimensionCap(..)) => return Err(usage(e)),
            Err(e) => {
                exit_code = 1;
                point_json.push(json!({ "x": cnum(*x), "error": e.to_string() }));
                continue;
            }
        };
        for (i, l) in spec.eigenvalues.iter().enumerate() {
            rows.push(vec![k.to_string(), fmt_complex(*x), "all".into(), i.to_string(), fmt_complex(*l)]);
        }
        let mut entry = json!({
            "x": cnum(*x),
            "certificate": num(spec.certificate),
            "eigenvalues": spec.eigenvalues.iter().map(|l| cnum(*l)).collect::<Vec<_>>(),
        });
        if diagonal {
            let mut blocks = Vec::new();
            for &s in &sectors {
                let idx: Vec<usize> = (0..spin2.len()).filter(|&i| spin2[i] == s).collect();
                let block = Matrix::from_rows(t.block(&idx, &idx));
                let ev = spectral::eigenvalues(&block, cfg.certificate_tol).map_err(usage)?;
                for (i, l) in ev.eigenvalues.iter().enumerate() {
                    rows.push(vec![k.to_string(), fmt_complex(*x), format!("{s}/2"), i.to_string(), fmt_complex(*l)]);
                }
                blocks.push(json!({
                    "total_spin": format!("{s}/2"),
                    "eigenvalues": ev.eigenvalues.iter().map(|l| cnum(*l)).collect::<Vec<_>>(),
                }));
            }
            entry["sectors"] = Value::Array(blocks);
        }
        point_json.push(entry);
    }
    let mut comms = Vec::new();
    for i in 0..ts.len() {
        for j in i + 1..ts.len() {
            comms.push(json!({ "i": i, "j": j, "relative_norm": num(relative_commutator(&ts[i], &ts[j])) }));
        }
    }
    let json = json!({
        "workflow": "spectrum",
        "dimension": chain.dim(),
        "diagonal_boundary": diagonal,
        "test_points": point_json,
        "commutators": comms,
    });
    Ok(Outcome {
        exit_code,
        json,
        csv: csv_text(&["point", "x", "sector", "index", "eigenvalue"], rows),
    })
}

// ----------------------------------------------------------------------
// bethe

/// One solved and validated root set.
#[derive(Debug, Clone, PartialEq)]
pub struct BetheRecord {
    pub solution: BetheSolution,
    pub validation: ValidationReport,
    pub inhomogeneous_terms: Vec<Complex64>,
}

impl BetheRecord {
    pub fn validated(&self) -> bool {
        self.validation.passed()
            && (self.solution.regime != Regime::OddSector || self.validation.conjugate_validated())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetheRun {
    pub regime: Regime,
    pub m: usize,
    pub points: Vec<Complex64>,
    pub spectra: Vec<Vec<Complex64>>,
    pub records: Vec<BetheRecord>,
    pub coverage: Vec<bethe::Coverage>,
}

impl BetheRun {
    pub fn all_validated(&self) -> bool {
        self.records.iter().all(BetheRecord::validated)
    }
}

/// Solves, validates every solution, and measures coverage of the ED
/// spectrum at each test point.
pub fn solve_and_validate(cfg: &RunConfig) -> Result<BetheRun, UsageError> {
    let opts = cfg.bethe.as_ref().ok_or_else(|| usage("the bethe workflow needs a \"bethe\" section"))?;
    check_dimension(cfg)?;
    let forced = opts.regime.admissible(&cfg.params, &cfg.chain).map_err(usage)?;
    let m = match (forced, opts.m) {
        (Some(f), Some(m)) if f as usize != m => {
            return Err(usage(format!("{} regime needs M = {f}, got {m}", opts.regime.name())))
        }
        (Some(f), _) => f as usize,
        (None, Some(m)) => m,
        (None, None) => return Err(usage("bethe.m is required in the triangular regime")),
    };
    let chain = float_chain(cfg)?;
    let (p, c) = (chain.params().clone(), chain.config().clone());
    let xs = points(cfg);
    let spectra = ed_spectra(&chain, &xs, cfg.certificate_tol).map_err(usage)?;
    let sols = bethe::solve(opts.regime, m, &p, &c, &opts.solve, &xs).map_err(usage)?;
    let mut records = Vec::new();
    for s in sols {
        let validation = validate_solution(&s, &chain, &xs, &spectra, opts.eigvec_tol, opts.match_tol).map_err(usage)?;
        let inhomogeneous_terms = s.inhomogeneous_terms(&p, &c).map_err(usage)?;
        records.push(BetheRecord { solution: s, validation, inhomogeneous_terms });
    }
    let coverage = spectra
        .iter()
        .enumerate()
        .map(|(k, ed)| {
            let mut ev: Vec<Complex64> = Vec::new();
            for r in &records {
                let pt = &r.validation.points[k];
                ev.push(pt.eigenvalue);
                // the conjugate vector spans a second eigenvector in the other sector
                if pt.conjugate_residual.is_some_and(|x| x <= opts.eigvec_tol) {
                    ev.push(pt.eigenvalue);
                }
            }
            coverage(&ev, ed, opts.match_tol)
        })
        .collect();
    Ok(BetheRun { regime: opts.regime, m, points: xs, spectra, records, coverage })
}

pub fn run_bethe(cfg: &RunConfig, backend: Backend) -> Result<Outcome, UsageError> {
    if backend == Backend::Exact {
        return Err(usage("the bethe workflow requires the float backend"));
    }
    let run = solve_and_validate(cfg)?;
    Ok(bethe_outcome(cfg, &run))
}

fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

pub fn bethe_outcome(cfg: &RunConfig, run: &BetheRun) -> Outcome {
    let opts = cfg.bethe.as_ref().expect("bethe section");
    let sols: Vec<Value> = run
        .records
        .iter()
        .map(|r| {
            let s = &r.solution;
            let v = &r.validation;
            let mut m = Map::new();
            m.insert("roots".into(), s.roots.iter().map(|z| cnum(*z)).collect());
            m.insert("residual".into(), num(s.residual));
            m.insert("hits".into(), json!(s.hits));
            m.insert("first_start".into(), json!(s.start));
            m.insert("inversion_merged".into(), json!(s.inversion_merged));
            m.insert("eigenvalues".into(), v.points.iter().map(|p| cnum(p.eigenvalue)).collect());
            m.insert("ed_distance".into(), v.points.iter().map(|p| num(p.ed_distance)).collect());
            m.insert("eigvec_residual".into(), v.points.iter().map(|p| opt_num(p.residual)).collect());
            if s.regime == Regime::OddSector {
                m.insert(
                    "conjugate_residual".into(),
                    v.points.iter().map(|p| opt_num(p.conjugate_residual)).collect(),
                );
            }
            if s.regime == Regime::EvenModified {
                m.insert(
                    "inhomogeneous_term_magnitudes".into(),
                    r.inhomogeneous_terms.iter().map(|t| num(t.norm())).collect(),
                );
            }
            m.insert("validated".into(), json!(r.validated()));
            Value::Object(m)
        })
        .collect();
    let cov: Vec<Value> = run
        .points
        .iter()
        .zip(&run.coverage)
        .map(|(x, c)| {
            json!({
                "x": cnum(*x),
                "matched": c.matched,
                "total": c.total,
                "distinct_matched": c.distinct_matched,
                "distinct_total": c.distinct_total,
            })
        })
        .collect();
    let status = if run.records.is_empty() {
        "no solutions found"
    } else if run.all_validated() {
        "ok"
    } else {
        "validation failed"
    };
    let json = json!({
        "workflow": "bethe",
        "regime": run.regime.name(),
        "m": run.m,
        "seed": opts.solve.seed,
        "starts": opts.solve.starts,
        "test_points": run.points.iter().map(|x| cnum(*x)).collect::<Vec<_>>(),
        "status": status,
        "solutions": sols,
        "coverage": cov,
        "ed_spectra": run.spectra.iter().map(|s| s.iter().map(|l| cnum(*l)).collect::<Vec<_>>()).collect::<Vec<_>>(),
    });
    let rows = run
        .records
        .iter()
        .map(|r| {
            let first = &r.validation.points[0];
            vec![
                r.solution.roots.iter().map(|z| fmt_complex(*z)).collect::<Vec<_>>().join(";"),
                fmt_f64(r.solution.residual),
                fmt_complex(first.eigenvalue),
                fmt_f64(first.ed_distance),
                r.validated().to_string(),
            ]
        })
        .collect();
    Outcome {
        exit_code: if run.all_validated() { 0 } else { 1 },
        json,
        csv: csv_text(&["roots", "residual", "eigenvalue", "match_distance", "validated"], rows),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(extra: &str) -> RunConfig {
        let text = format!(
            r#"{{
  "model": {{
    "boundary": {{ "alpha": "3/2", "beta": "1/3", "gamma": "-2/5", "rho": "7/4" }},
    "inhomogeneities": ["2", "-3"]
  }},
  "seed": 3{extra}
}}"#
        );
        RunConfig::from_json(&text).unwrap()
    }

    #[test]
    fn numbers_keep_seventeen_digits() {
        assert_eq!(num(0.1).to_string(), "1.0000000000000001e-1");
        assert_eq!(num(f64::INFINITY), json!("inf"));
        assert_eq!(cnum(Complex64::new(1.0, -2.0)), json!("1.0000000000000000e0,-2.0000000000000000e0"));
    }

    #[test]
    fn verify_passes_and_perturbation_fails() {
        let c = cfg(", \"trials\": 2");
        let ok = run_verify(&c, Backend::Exact, false).unwrap();
        assert_eq!(ok.exit_code, 0, "{}", ok.render(Format::Json));
        let bad = run_verify(&c, Backend::Exact, true).unwrap();
        assert_eq!(bad.exit_code, 1);
        assert!(bad.json["checks"][0]["witness"].is_string());
    }

    #[test]
    fn spectrum_commutes() {
        let out = run_spectrum(&cfg(""), Backend::Float).unwrap();
        assert_eq!(out.json["test_points"][0]["eigenvalues"].as_array().unwrap().len(), 4);
        let n: f64 = out.json["commutators"][0]["relative_norm"].as_f64().unwrap();
        assert!(n < 1e-12);
        assert!(run_spectrum(&cfg(""), Backend::Exact).is_err());
    }

    #[test]
    fn bethe_even_and_mismatch() {
        let c = cfg(", \"bethe\": {\"regime\": \"even-modified\", \"starts\": 100}");
        let out = run_bethe(&c, Backend::Float).unwrap();
        assert_eq!(out.exit_code, 0, "{}", out.render(Format::Json));
        assert!(out.json["solutions"][0]["inhomogeneous_term_magnitudes"].is_array());
        assert!(out.render(Format::Csv).starts_with("roots,residual,eigenvalue,match_distance,validated\n"));
        let odd = cfg(", \"bethe\": {\"regime\": \"odd-sector\"}");
        assert!(run_bethe(&odd, Backend::Float).is_err());
        assert!(run_bethe(&c, Backend::Exact).is_err());
    }
}
