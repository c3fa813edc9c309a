//! Acceptance run: one line per criterion, nonzero exit if any fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gaudin_aba::bethe::{self, coverage, ed_spectra, validate_solution, SolveConfig};
use gaudin_aba::identities::{
    check_commutation_relations, check_modified_term, check_offshell_action, check_sector_stability,
    check_yang_baxter_family, Verifier, VerificationReport,
};
use gaudin_aba::kernel::nu;
use gaudin_aba::matrix::Matrix;
use gaudin_aba::sampling::Sampler;
use gaudin_aba::spectral::{self, spectrum_match};
use gaudin_aba::{BoundaryParams, Chain, ChainConfig, Rational, Regime, Scalar, Spin};

type C = Complex64;

const SEED: u64 = 20240917;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn q(n: i64, d: i64) -> Rational {
    Rational::ratio(n, d)
}

fn cf(p: &BoundaryParams<Rational>, c: &ChainConfig<Rational>) -> (BoundaryParams<C>, ChainConfig<C>) {
    (p.map(C::from_rational), c.map(C::from_rational))
}

fn test_points() -> Vec<C> {
    vec![C::new(0.37, 0.0), C::new(2.9, 0.4)]
}

/// Every named check present, passing, exactly zero, with enough trials.
fn exact_checks(r: &VerificationReport, names: &[&str], min_trials: usize) -> Result<String, String> {
    for n in names {
        let c = r.get(n).ok_or_else(|| format!("{n} missing"))?;
        if !c.pass || c.worst != 0.0 {
            return Err(format!("{n} failed: worst={:e} witness={:?}", c.worst, c.witness));
        }
        if c.trials < min_trials {
            return Err(format!("{n} ran {} trials, need {min_trials}", c.trials));
        }
    }
    Ok(format!("{} checks exact", names.len()))
}

fn all_exact(r: &VerificationReport, min_trials: usize) -> Result<String, String> {
    let names: Vec<&str> = r.checks.iter().map(|c| c.name.as_str()).collect();
    exact_checks(r, &names, min_trials)
}

fn c1_yang_baxter() -> Verdict {
    let t = Instant::now();
    let r = check_yang_baxter_family::<Rational>(None, 20, SEED);
    let dt = t.elapsed();
    let names = ["cybe.r", "skew.r", "reflection.k", "cybe.r_tilde", "r_tilde.dual_construction"];
    match exact_checks(&r, &names, 20) {
        Ok(d) => verdict(dt < Duration::from_secs(30), format!("{d} at 20 points, {:.2}s", dt.as_secs_f64())),
        Err(e) => verdict(false, e),
    }
}

fn c2_commutation() -> Verdict {
    let mut s = Sampler::new(SEED, 2);
    let mut parts = Vec::new();
    for spins in [[Spin::HALF, Spin::HALF], [Spin::HALF, Spin::ONE]] {
        let p = s.generic_params();
        let c = s.chain(&spins);
        let r = check_commutation_relations::<Rational>(&p, &c, 10, SEED);
        let required = ["comm.AA", "comm.BB", "comm.CC", "comm.AB", "comm.AC", "comm.CB", "exchange.transfer_b"];
        if let Err(e) = exact_checks(&r, &required, 10).and_then(|_| all_exact(&r, 10)) {
            return verdict(false, format!("spins {spins:?}: {e}"));
        }
        parts.push(format!("2s={},{}: {} checks", spins[0].twice(), spins[1].twice(), r.checks.len()));
    }
    verdict(true, format!("{} at 10 points", parts.join("; ")))
}

fn c3_offshell() -> Verdict {
    let mut s = Sampler::new(SEED, 3);
    let p = s.generic_params();
    let c = s.chain(&[Spin::HALF; 3]);
    for m in [1, 2] {
        let r = check_offshell_action::<Rational>(&p, &c, m, 5, SEED);
        if let Err(e) = exact_checks(&r, &[&format!("offshell.vacuum.M{m}")], 5) {
            return verdict(false, e);
        }
    }
    verdict(true, "L=3, M=1,2 at 5 points, exact")
}

fn c4_modified_term() -> Verdict {
    let mut s = Sampler::new(SEED, 4);
    let names = [
        "bhat.lower_triangular",
        "script_m.simple_poles",
        "script_m.inversion",
        "script_m.residues",
        "modified.expansion",
    ];
    for spins in [vec![Spin::HALF, Spin::HALF], vec![Spin::ONE]] {
        let p = s.generic_params();
        let c = s.chain(&spins);
        let r = check_modified_term::<Rational>(&p, &c, 5, SEED);
        if let Err(e) = exact_checks(&r, &names, 5) {
            return verdict(false, format!("L={}: {e}", spins.len()));
        }
    }
    verdict(true, "L=2 spin-1/2 and L=1 spin-1 at 5 points, exact")
}

fn c5_commuting_family() -> Verdict {
    let mut s = Sampler::new(SEED, 5);
    let p = s.generic_params();
    let c = s.chain(&[Spin::HALF; 3]);
    let v = Verifier::new(SEED);
    let comm = v.commutation_relations::<Rational>(&p, &c, 10);
    let ham = v.hamiltonians::<Rational>(&p, &c, 10);
    if let Err(e) = exact_checks(&comm, &["transfer.commute"], 10) {
        return verdict(false, e);
    }
    if let Err(e) = exact_checks(&ham, &["hamiltonian.commute"], 10) {
        return verdict(false, e);
    }
    match ham.get("hamiltonian.residue") {
        Some(r) if r.pass && r.worst <= 1e-6 => {
            verdict(true, format!("exact commutators at 10 pairs, residue deviation {:.2e}", r.worst))
        }
        Some(r) => verdict(false, format!("residue deviation {:e}", r.worst)),
        None => verdict(false, "hamiltonian.residue missing"),
    }
}

fn c6_sectors() -> Verdict {
    let mut s = Sampler::new(SEED, 6);
    let p = s.generic_params();
    let c3 = s.chain(&[Spin::HALF; 3]);
    let r = check_sector_stability::<Rational>(&p, &c3, SEED);
    if let Err(e) = exact_checks(&r, &["sector.odd_split"], 1) {
        return verdict(false, e);
    }
    let c2 = s.chain(&[Spin::HALF; 2]);
    let r = check_sector_stability::<Rational>(&p, &c2, SEED);
    match r.get("sector.even_no_split").and_then(|c| c.note.as_deref()) {
        Some("no stable split") => {}
        other => return verdict(false, format!("L=2 reported {other:?}")),
    }
    let pd = s.diagonal_params();
    let r = check_sector_stability::<Rational>(&pd, &c3, SEED);
    if let Err(e) = exact_checks(&r, &["sector.diagonal_conservation"], 1) {
        return verdict(false, e);
    }
    verdict(true, "odd split exact, L=2 no split, diagonal blocks exact")
}

fn triangular_model() -> (BoundaryParams<Rational>, ChainConfig<Rational>) {
    let p = BoundaryParams::new(q(3, 2), q(2, 3), q(5, 7), q(2, 3)).unwrap();
    let c = ChainConfig::spin_half(vec![q(2, 1), q(-3, 1), q(5, 7)]).unwrap();
    (p, c)
}

fn c7_triangular() -> Verdict {
    let t = Instant::now();
    let (p, c) = triangular_model();
    let (pf, cf) = cf(&p, &c);
    let chain = Chain::new(pf.clone(), cf.clone()).unwrap();
    let xs = test_points();
    let spectra = ed_spectra(&chain, &xs, 1e-10).unwrap();
    let cfg = SolveConfig { seed: SEED, starts: 200, ..SolveConfig::default() };
    let mut found = Vec::new();
    let mut counts = Vec::new();
    for m in 0..=3 {
        let sols = bethe::solve(Regime::Triangular, m, &pf, &cf, &cfg, &xs).unwrap();
        counts.push(format!("M={m}:{}", sols.len()));
        for sol in sols {
            let rep = validate_solution(&sol, &chain, &xs, &spectra, 1e-8, 1e-9).unwrap();
            if !rep.eigenvalue_matched() {
                return verdict(false, format!("M={m} roots {:?} off by {:e}", sol.roots, rep.worst_distance()));
            }
            found.push(rep.points[0].eigenvalue);
        }
    }
    let dt = t.elapsed();
    let cov = coverage(&found, &spectra[0], 1e-9);
    verdict(
        dt < Duration::from_secs(120),
        format!(
            "{}; all match within 1e-9 at 2 points; distinct coverage {}/{}; {:.2}s",
            counts.join(" "),
            cov.distinct_matched,
            cov.distinct_total,
            dt.as_secs_f64()
        ),
    )
}

/// Spectra of `t(x)` restricted to the positive and negative total-spin blocks.
fn sector_spectra(chain: &Chain<C>, x: &C) -> (Vec<C>, Vec<C>) {
    let t = chain.transfer(x, 0).unwrap();
    let spin = chain.total_spin_twice();
    let block = |sel: &dyn Fn(i64) -> bool| {
        let idx: Vec<usize> = (0..spin.len()).filter(|&i| sel(spin[i])).collect();
        let m = Matrix::from_rows(t.block(&idx, &idx));
        spectral::eigenvalues(&m, 1e-10).unwrap().eigenvalues
    };
    (block(&|s| s > 0), block(&|s| s < 0))
}

fn c8_odd_sector() -> Verdict {
    let p = BoundaryParams::new(q(3, 2), q(1, 3), q(-2, 5), q(7, 4)).unwrap();
    let c = ChainConfig::spin_half(vec![q(2, 1), q(-3, 1), q(5, 2)]).unwrap();
    let (pf, cf) = cf(&p, &c);
    let chain = Chain::new(pf.clone(), cf.clone()).unwrap();
    let xs = test_points();
    let spectra = ed_spectra(&chain, &xs, 1e-10).unwrap();
    let cfg = SolveConfig { seed: SEED, starts: 400, ..SolveConfig::default() };
    let sols = bethe::solve(Regime::OddSector, 1, &pf, &cf, &cfg, &xs).unwrap();
    if sols.is_empty() {
        return verdict(false, "no solutions");
    }
    let mut worst = 0.0f64;
    let (mut plain, mut conj) = (vec![Vec::new(); xs.len()], vec![Vec::new(); xs.len()]);
    for sol in &sols {
        let rep = validate_solution(sol, &chain, &xs, &spectra, 1e-8, 1e-8).unwrap();
        for (k, pt) in rep.points.iter().enumerate() {
            let (Some(r), Some(rc)) = (pt.residual, pt.conjugate_residual) else {
                return verdict(false, format!("vanishing vector for roots {:?}", sol.roots));
            };
            worst = worst.max(r).max(rc);
            if r >= 1e-8 || rc >= 1e-8 {
                return verdict(false, format!("roots {:?}: residuals {r:e}, {rc:e}", sol.roots));
            }
            // the conjugate eigenvalue is read off the vector, not the formula
            let t = chain.transfer(&pt.x, 0).unwrap();
            let w = chain.bethe_vector(&sol.roots, &gaudin_aba::BetheVariant::Conjugate).unwrap();
            let tw = t.apply(&w);
            let (i, _) = w.iter().enumerate().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm())).unwrap();
            plain[k].push(pt.eigenvalue);
            conj[k].push(tw[i] / w[i]);
        }
    }
    for k in 0..xs.len() {
        let m = spectrum_match(&plain[k], &conj[k], 1e-8);
        if !m.all_matched() || plain[k].len() != conj[k].len() {
            return verdict(false, format!("plain and conjugate eigenvalues differ at x={}", xs[k]));
        }
        let (pos, neg) = sector_spectra(&chain, &xs[k]);
        let m = spectrum_match(&pos, &neg, 1e-8);
        if !m.all_matched() || pos.len() != neg.len() {
            return verdict(false, format!("sector spectra differ at x={}", xs[k]));
        }
    }
    verdict(
        true,
        format!("{} solutions, worst residual {worst:.2e}, sector spectra coincide", sols.len()),
    )
}

fn c9_even() -> Verdict {
    let t = Instant::now();
    let p = BoundaryParams::new(q(3, 2), q(1, 3), q(-2, 5), q(7, 4)).unwrap();
    let c = ChainConfig::spin_half(vec![q(2, 1), q(-3, 1)]).unwrap();
    let (pf, cf) = cf(&p, &c);
    let chain = Chain::new(pf.clone(), cf.clone()).unwrap();
    let xs = test_points();
    let spectra = ed_spectra(&chain, &xs, 1e-10).unwrap();
    let cfg = SolveConfig { seed: SEED, starts: 2000, ..SolveConfig::default() };
    let sols = bethe::solve(Regime::EvenModified, 2, &pf, &cf, &cfg, &xs).unwrap();
    let mut ev = Vec::new();
    let mut worst = 0.0f64;
    for sol in &sols {
        let rep = validate_solution(sol, &chain, &xs, &spectra, 1e-8, 1e-8).unwrap();
        if !rep.eigenvalue_matched() {
            return verdict(false, format!("roots {:?} off by {:e}", sol.roots, rep.worst_distance()));
        }
        worst = worst.max(rep.worst_distance());
        ev.push(rep.points[0].eigenvalue);
    }
    let cov = coverage(&ev, &spectra[0], 1e-8);
    let dt = t.elapsed();
    verdict(
        !sols.is_empty(),
        format!(
            "{} solutions, worst distance {worst:.2e}, coverage {}/{} (target 3), {:.2}s",
            sols.len(),
            cov.matched,
            cov.total,
            dt.as_secs_f64()
        ),
    )
}

fn c10_alpha_independence() -> Verdict {
    let (p, c) = triangular_model();
    let mut p2 = p.clone();
    p2.alpha = q(-7, 11);
    let mut worst = 0.0f64;
    for x in test_points() {
        let spec = |p: &BoundaryParams<Rational>| {
            let (pf, cf) = cf(p, &c);
            let ch = Chain::new(pf, cf).unwrap();
            spectral::eigenvalues(&ch.transfer(&x, 0).unwrap(), 1e-10).unwrap().eigenvalues
        };
        let (a, b) = (spec(&p), spec(&p2));
        let m = spectrum_match(&a, &b, 1e-10);
        if !m.all_matched() {
            return verdict(false, format!("spectra differ at x={x}"));
        }
        worst = m.matched.iter().map(|m| m.distance).fold(worst, f64::max);
    }
    verdict(true, format!("alpha 3/2 vs -7/11, worst distance {worst:.2e}"))
}

fn c11_eigensolver() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let m = Matrix::from_fn(16, |_, _| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        match spectral::eigenvalues(&m, 1e-10) {
            Ok(r) if r.eigenvalues.len() == 16 => worst = worst.max(r.certificate),
            Ok(r) => return verdict(false, format!("{} eigenvalues", r.eigenvalues.len())),
            Err(e) => return verdict(false, e.to_string()),
        }
    }
    verdict(worst < 1e-10, format!("50 matrices, worst certificate {worst:.2e}"))
}

fn c12_nu_reduction() -> Verdict {
    let mut s = Sampler::new(SEED, 12);
    let mut n = 0;
    while n < 20 {
        let p = s.triangular_params();
        let z = s.rational();
        let Ok(lhs) = nu(&z, &p) else { continue };
        let (b, g) = (&p.beta, &p.gamma);
        let one = |num: Rational, den: Rational| (!den.is_zero()).then(|| num / den);
        let (Some(u), Some(w)) = (
            one(g * &z - b, g * &z + b),
            one(b * &z - g, b * &z + g),
        ) else {
            continue;
        };
        let rhs = (u + w) / q(2, 1);
        if lhs != rhs {
            return verdict(false, format!("z={z} beta={b} gamma={g}: {lhs} vs {rhs}"));
        }
        n += 1;
    }
    verdict(true, "20 random triangular points, exact equality")
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn c13_determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let model2 = r#""model": {"boundary": {"alpha": "3/2", "beta": "1/3", "gamma": "-2/5", "rho": "7/4"},
        "inhomogeneities": ["2", "-3"]}"#;
    let model3 = r#""model": {"boundary": {"alpha": "3/2", "beta": "2/3", "gamma": "5/7", "rho": "2/3"},
        "inhomogeneities": ["2", "-3", "5/7"]}"#;
    let runs = [
        ("verify", write_config(dir.path(), "v.json", &format!("{{{model2}, \"seed\": 5, \"trials\": 2}}"))),
        ("spectrum", write_config(dir.path(), "s.json", &format!("{{{model3}, \"seed\": 5}}"))),
        (
            "bethe",
            write_config(
                dir.path(),
                "b.json",
                &format!("{{{model2}, \"seed\": 5, \"bethe\": {{\"regime\": \"even-modified\", \"starts\": 300}}}}"),
            ),
        ),
    ];
    let mut checked = 0;
    for (cmd, cfg) in &runs {
        for format in ["json", "csv"] {
            let out = |k: usize| {
                let o = dir.path().join(format!("{cmd}.{k}.{format}"));
                let status = Command::new(env!("CARGO_BIN_EXE_gaudin"))
                    .args([cmd, "--config"])
                    .arg(cfg)
                    .args(["--format", format, "--out"])
                    .arg(&o)
                    .status()
                    .unwrap();
                (status.code(), std::fs::read(&o).unwrap_or_default())
            };
            let (a, b) = (out(0), out(1));
            if a.0 != Some(0) || a.1.is_empty() {
                return verdict(false, format!("{cmd} --format {format} exited {:?}", a.0));
            }
            if a != b {
                return verdict(false, format!("{cmd} --format {format} differs between runs"));
            }
            checked += 1;
        }
    }
    verdict(true, format!("{checked} workflow/format pairs byte-identical"))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 13] = [
        ("exact Yang-Baxter family", c1_yang_baxter),
        ("commutation relations L=2", c2_commutation),
        ("off-shell action L=3", c3_offshell),
        ("modified term certificates", c4_modified_term),
        ("commuting transfer matrices and Hamiltonians", c5_commuting_family),
        ("sector stabilization", c6_sectors),
        ("triangular Bethe spectrum", c7_triangular),
        ("odd-sector Bethe vectors", c8_odd_sector),
        ("even inhomogeneous Bethe equations", c9_even),
        ("alpha independence", c10_alpha_independence),
        ("eigensolver certificate", c11_eigensolver),
        ("nu triangular reduction", c12_nu_reduction),
        ("determinism", c13_determinism),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let v = f();
        if !v.pass {
            failed += 1;
        }
        println!("criterion {:>2} {}: {} ({})", k + 1, if v.pass { "PASS" } else { "FAIL" }, name, v.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
