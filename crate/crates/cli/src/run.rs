//! Command implementations. Every command writes its report under the
//! output directory and prints a one-line summary; exit status is derived
//! from the returned outcome.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use shapiro::geometry::HyperPoint;
use shapiro::report::VerificationReport;
use shapiro::suites::{
    self, classical_suite, plancherel_suite, quantum_suite, CLASSICAL_RELATIONS,
    PLANCHEREL_RELATIONS, QUANTUM_RELATIONS,
};
use shapiro::transform::{
    cone_section_of, forward_at, forward_transform, inverse_transform, mellin, plancherel_check,
    roundtrip_l2_error, test_function, HyperFunction, SpectralFunction,
};

use crate::config::{validate_tolerances, Resolved};

pub enum Failure {
    Config(String),
    Numeric(String),
}

/// Ok(true) = all checks passed, Ok(false) = a verification row failed.
pub type Outcome = Result<bool, Failure>;

fn ensure_out(cfg: &Resolved) -> Result<(), Failure> {
    std::fs::create_dir_all(&cfg.out)
        .map_err(|e| Failure::Numeric(format!("cannot create {}: {e}", cfg.out.display())))
}

/// Write via a temp file and rename so readers never see a partial file.
fn write_atomic(path: &Path, contents: &str) -> Result<(), Failure> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let io = |e: std::io::Error| Failure::Numeric(format!("cannot write {}: {e}", path.display()));
    std::fs::write(&tmp, contents).map_err(io)?;
    std::fs::rename(&tmp, path).map_err(io)?;
    Ok(())
}

fn write_report(cfg: &Resolved, base: &str, report: &VerificationReport) -> Result<(), Failure> {
    if cfg.format.json() {
        let path = cfg.out.join(format!("{base}.report.json"));
        write_atomic(&path, &report.to_json())?;
        println!("wrote {}", path.display());
    }
    if cfg.format.csv() {
        let path = cfg.out.join(format!("{base}.report.csv"));
        write_atomic(&path, &report.to_csv())?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn summarize(report: &VerificationReport) {
    let verdict = if report.pass { "PASS" } else { "FAIL" };
    match report.worst_row() {
        Some(w) => println!(
            "suite {}: {verdict} ({} rows; worst {} at {:.3e} against {:.1e})",
            report.suite,
            report.rows.len(),
            w.relation,
            w.residual,
            w.tolerance
        ),
        None => println!("suite {}: {verdict} (no rows)", report.suite),
    }
}

/// Apply the strict-mode policy: quadrature warnings become a failure.
fn finish(cfg: &Resolved, pass: bool, warnings: &[String]) -> Outcome {
    for w in warnings {
        eprintln!("warning: {w}");
    }
    if cfg.strict && !warnings.is_empty() {
        return Err(Failure::Numeric(format!(
            "strict mode: {} quadrature warning(s) treated as fatal",
            warnings.len()
        )));
    }
    Ok(pass)
}

pub fn verify_classical(cfg: &Resolved) -> Outcome {
    validate_tolerances(&cfg.tolerances, &CLASSICAL_RELATIONS).map_err(Failure::Config)?;
    ensure_out(cfg)?;
    let report = classical_suite(cfg.seed, &cfg.tolerances, &cfg.command_line);
    summarize(&report);
    write_report(cfg, "classical", &report)?;
    Ok(report.pass)
}

pub fn verify_quantum(cfg: &Resolved) -> Outcome {
    validate_tolerances(&cfg.tolerances, &QUANTUM_RELATIONS).map_err(Failure::Config)?;
    ensure_out(cfg)?;
    let report = quantum_suite(
        cfg.seed,
        &cfg.tolerances,
        cfg.rho_grid.as_deref(),
        &cfg.quad,
        &cfg.command_line,
    );
    summarize(&report);
    write_report(cfg, "quantum", &report)?;

    let mut profile = suites::eigenvalue_profile(cfg.seed, cfg.rho_grid.as_deref());
    profile.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut plot = String::from("rho,residual\n");
    for (rho, residual) in profile {
        let _ = writeln!(plot, "{rho:.17e},{residual:.17e}");
    }
    let path = cfg.out.join("plot-eigenvalue-residual.csv");
    write_atomic(&path, &plot)?;
    println!("wrote {}", path.display());

    Ok(report.pass)
}

fn named_function(name: &str, params: &[f64]) -> Result<HyperFunction, Failure> {
    test_function(name, params).ok_or_else(|| {
        Failure::Config(format!(
            "unknown test function {name:?} (expected gaussian, offcenter, bump, \
             modwave or narrow)"
        ))
    })
}

fn spectrum_plot(phi: &SpectralFunction) -> String {
    let mut plot = String::from("rho,abs_phi_max\n");
    for (m, rho) in phi.rho.iter().enumerate() {
        let amp = phi
            .values
            .iter()
            .map(|row| row[m].norm())
            .fold(0.0f64, f64::max);
        let _ = writeln!(plot, "{rho:.17e},{amp:.17e}");
    }
    plot
}

/// Sampled reconstruction along the three coordinate axes. The table depends
/// only on the spectrum, so an in-memory spectrum and one reloaded from its
/// own CSV produce byte-identical output.
fn reconstruction_table(phi: &SpectralFunction) -> (String, Vec<String>) {
    let mut table = String::from("nx,ny,nz,r,re,im\n");
    let mut warnings: Vec<String> = Vec::new();
    for axis in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] {
        for j in 0..=24 {
            let r = 0.125 * j as f64;
            let x = HyperPoint::lift([axis[0] * r, axis[1] * r, axis[2] * r]);
            let value = inverse_transform(phi, &x);
            for w in &value.warnings {
                if !warnings.contains(w) {
                    warnings.push(w.clone());
                }
            }
            let _ = writeln!(
                table,
                "{:.17e},{:.17e},{:.17e},{r:.17e},{:.17e},{:.17e}",
                axis[0], axis[1], axis[2], value.value.re, value.value.im
            );
        }
    }
    (table, warnings)
}

fn forward_cmd(cfg: &Resolved, name: &str, params: &[f64]) -> Outcome {
    ensure_out(cfg)?;
    let f = named_function(name, params)?;
    let phi = forward_transform(&f, &cfg.quad).map_err(|e| Failure::Numeric(e.to_string()))?;

    let path = cfg.out.join(format!("spectrum-{name}.csv"));
    write_atomic(&path, &phi.value.to_csv())?;
    println!("wrote {}", path.display());
    let path = cfg.out.join(format!("plot-spectrum-{name}.csv"));
    write_atomic(&path, &spectrum_plot(&phi.value))?;
    println!("wrote {}", path.display());

    let mut report = VerificationReport::new(
        &format!("transform-forward-{name}"),
        cfg.seed,
        &cfg.command_line,
    );
    for w in &phi.warnings {
        report.note(format!("warning: {w}"));
    }
    report.note(format!(
        "spectral tail mass fraction: {:.3e}",
        phi.value.tail_mass_fraction()
    ));
    report.finalize();
    write_report(cfg, &format!("transform-forward-{name}"), &report)?;
    finish(cfg, true, &phi.warnings)
}

fn inverse_cmd(cfg: &Resolved, target: &str) -> Outcome {
    ensure_out(cfg)?;
    let text = std::fs::read_to_string(target)
        .map_err(|e| Failure::Config(format!("cannot read spectrum file {target:?}: {e}")))?;
    let phi = SpectralFunction::from_csv(&text)
        .map_err(|e| Failure::Config(format!("cannot parse spectrum file {target:?}: {e}")))?;

    let stem = Path::new(target)
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("spectrum");
    let (table, warnings) = reconstruction_table(&phi);
    let path = cfg.out.join(format!("reconstruction-{stem}.csv"));
    write_atomic(&path, &table)?;
    println!("wrote {}", path.display());

    let mut report = VerificationReport::new(
        &format!("transform-inverse-{stem}"),
        cfg.seed,
        &cfg.command_line,
    );
    for w in &warnings {
        report.note(format!("warning: {w}"));
    }
    report.note(format!("reconstructed 75 axis points from {target}"));
    report.finalize();
    write_report(cfg, &format!("transform-inverse-{stem}"), &report)?;
    finish(cfg, true, &warnings)
}

fn roundtrip_cmd(cfg: &Resolved, name: &str, params: &[f64]) -> Outcome {
    validate_tolerances(&cfg.tolerances, &["roundtrip-l2"]).map_err(Failure::Config)?;
    ensure_out(cfg)?;
    let f = named_function(name, params)?;
    let phi = forward_transform(&f, &cfg.quad).map_err(|e| Failure::Numeric(e.to_string()))?;

    let path = cfg.out.join(format!("spectrum-{name}.csv"));
    write_atomic(&path, &phi.value.to_csv())?;
    println!("wrote {}", path.display());
    let path = cfg.out.join(format!("plot-spectrum-{name}.csv"));
    write_atomic(&path, &spectrum_plot(&phi.value))?;
    println!("wrote {}", path.display());
    let (table, mut warnings) = reconstruction_table(&phi.value);
    let path = cfg.out.join(format!("reconstruction-{name}.csv"));
    write_atomic(&path, &table)?;
    println!("wrote {}", path.display());

    let err = roundtrip_l2_error(&f, &cfg.quad, 15, 32)
        .map_err(|e| Failure::Numeric(e.to_string()))?;
    for w in err.warnings {
        if !warnings.contains(&w) {
            warnings.push(w);
        }
    }
    println!("relative L2 reconstruction error: {:.6e}", err.value);

    let mut report = VerificationReport::new(
        &format!("transform-roundtrip-{name}"),
        cfg.seed,
        &cfg.command_line,
    );
    let tol = cfg.tolerances.get("roundtrip-l2").copied().unwrap_or(1e-2);
    report.push("roundtrip-l2", "transform/roundtrip-ball", err.value, tol);
    for w in &warnings {
        report.note(format!("warning: {w}"));
    }
    report.finalize();
    summarize(&report);
    write_report(cfg, &format!("transform-roundtrip-{name}"), &report)?;
    finish(cfg, report.pass, &warnings)
}

fn plancherel_cmd(cfg: &Resolved, target: &str, params: &[f64]) -> Outcome {
    ensure_out(cfg)?;
    if target == "suite" {
        validate_tolerances(&cfg.tolerances, &PLANCHEREL_RELATIONS).map_err(Failure::Config)?;
        let report = plancherel_suite(cfg.seed, &cfg.tolerances, &cfg.quad, &cfg.command_line);
        for note in &report.notes {
            println!("{note}");
        }
        summarize(&report);
        write_report(cfg, "plancherel", &report)?;
        let warnings: Vec<String> = report
            .notes
            .iter()
            .filter(|n| n.starts_with("warning: "))
            .map(|n| n["warning: ".len()..].to_string())
            .collect();
        return finish(cfg, report.pass, &warnings);
    }

    let f = named_function(target, params)?;
    let check =
        plancherel_check(&f, &cfg.quad).map_err(|e| Failure::Numeric(e.to_string()))?;
    println!(
        "norm identity: lhs {:.8e}, rhs {:.8e}, ratio {:.8}",
        check.value.lhs, check.value.rhs, check.value.ratio
    );
    let mut report = VerificationReport::new(
        &format!("transform-plancherel-{target}"),
        cfg.seed,
        &cfg.command_line,
    );
    report.note(format!(
        "lhs {:.8e}, rhs {:.8e}, ratio {:.8}",
        check.value.lhs, check.value.rhs, check.value.ratio
    ));
    for w in &check.warnings {
        report.note(format!("warning: {w}"));
    }
    report.finalize();
    write_report(cfg, &format!("transform-plancherel-{target}"), &report)?;
    finish(cfg, true, &check.warnings)
}

fn ggpath_cmd(cfg: &Resolved, name: &str, params: &[f64]) -> Outcome {
    validate_tolerances(&cfg.tolerances, &["triangle"]).map_err(Failure::Config)?;
    ensure_out(cfg)?;
    let f = named_function(name, params)?;
    let section = cone_section_of(&f, &cfg.quad);

    // Horospherical path versus the direct transform at matched labels.
    let mut worst = 0.0f64;
    for n in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] {
        for rho in [0.5, 1.5] {
            let via_path = mellin(&section, n, rho, &cfg.quad)
                .map_err(|e| Failure::Numeric(e.to_string()))?;
            let direct = forward_at(&f, n, rho, &cfg.quad)
                .map_err(|e| Failure::Numeric(e.to_string()))?;
            let diff = (via_path - direct).norm();
            if diff > worst {
                worst = diff;
            }
        }
    }
    println!("triangle max |difference|: {worst:.3e}");

    let mut report = VerificationReport::new(
        &format!("transform-ggpath-{name}"),
        cfg.seed,
        &cfg.command_line,
    );
    let tol = cfg.tolerances.get("triangle").copied().unwrap_or(1e-4);
    report.push("triangle", "transform/path-consistency", worst, tol);
    report.finalize();
    summarize(&report);
    write_report(cfg, &format!("transform-ggpath-{name}"), &report)?;
    finish(cfg, report.pass, &[])
}

pub fn transform(cfg: &Resolved, direction: &str, target: &str, params: &[f64]) -> Outcome {
    match direction {
        "forward" => forward_cmd(cfg, target, params),
        "inverse" => inverse_cmd(cfg, target),
        "roundtrip" => roundtrip_cmd(cfg, target, params),
        "plancherel" => plancherel_cmd(cfg, target, params),
        "ggpath" => ggpath_cmd(cfg, target, params),
        other => Err(Failure::Config(format!(
            "unknown direction {other:?} (expected forward, inverse, roundtrip, \
             plancherel or ggpath)"
        ))),
    }
}
