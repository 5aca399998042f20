//! Run configuration. Defaults live in `Resolved::default`; a key=value
//! config file may override them; command-line flags win over the file.
//! Unknown keys and malformed values are configuration errors.

use std::path::{Path, PathBuf};

use shapiro::quad::QuadratureSpec;
use shapiro::suites::ToleranceMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Both,
}

impl Format {
    pub fn parse(s: &str) -> Result<Format, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "both" => Ok(Format::Both),
            other => Err(format!(
                "unknown format {other:?}; expected json, csv or both"
            )),
        }
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }

    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }
}

#[derive(Debug, Clone)]
pub struct Resolved {
    pub seed: u64,
    pub tolerances: ToleranceMap,
    pub quad: QuadratureSpec,
    pub out: PathBuf,
    pub format: Format,
    pub strict: bool,
    pub rho_grid: Option<Vec<f64>>,
    pub command_line: String,
}

impl Default for Resolved {
    fn default() -> Self {
        Resolved {
            seed: 42,
            tolerances: ToleranceMap::new(),
            quad: QuadratureSpec::default(),
            out: PathBuf::from("."),
            format: Format::Json,
            strict: false,
            rho_grid: None,
            command_line: String::new(),
        }
    }
}

/// Raw flag values as clap delivered them; `None` means not given.
pub struct Flags<'a> {
    pub seed: Option<u64>,
    pub tolerance: &'a [String],
    pub quad: &'a [String],
    pub out: Option<&'a Path>,
    pub format: Option<&'a str>,
    pub strict: bool,
    pub rho_grid: Option<&'a str>,
}

pub fn resolve(config_file: Option<&Path>, flags: &Flags) -> Result<Resolved, String> {
    let mut r = Resolved::default();
    if let Some(path) = config_file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config file {}: {e}", path.display()))?;
        apply_file(&mut r, &text)?;
    }
    if let Some(s) = flags.seed {
        r.seed = s;
    }
    for t in flags.tolerance {
        apply_tolerance(&mut r.tolerances, t)?;
    }
    for q in flags.quad {
        apply_quad(&mut r.quad, q)?;
    }
    if let Some(o) = flags.out {
        r.out = o.to_path_buf();
    }
    if let Some(f) = flags.format {
        r.format = Format::parse(f)?;
    }
    if flags.strict {
        r.strict = true;
    }
    if let Some(g) = flags.rho_grid {
        r.rho_grid = Some(parse_rho_grid(g)?);
    }
    r.command_line = std::env::args().collect::<Vec<_>>().join(" ");
    Ok(r)
}

fn apply_file(r: &mut Resolved, text: &str) -> Result<(), String> {
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let n = idx + 1;
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {n}: expected key=value, got {line:?}"))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "seed" => {
                r.seed = value
                    .parse()
                    .map_err(|_| format!("config line {n}: bad seed {value:?}"))?;
            }
            "tolerance" => apply_tolerance(&mut r.tolerances, value)?,
            "quad" => apply_quad(&mut r.quad, value)?,
            "out" => r.out = PathBuf::from(value),
            "format" => r.format = Format::parse(value)?,
            "strict" => {
                r.strict = match value {
                    "true" => true,
                    "false" => false,
                    _ => {
                        return Err(format!(
                            "config line {n}: strict must be true or false, got {value:?}"
                        ))
                    }
                };
            }
            "rho-grid" => r.rho_grid = Some(parse_rho_grid(value)?),
            other => return Err(format!("config line {n}: unknown key {other:?}")),
        }
    }
    Ok(())
}

fn apply_tolerance(map: &mut ToleranceMap, spec: &str) -> Result<(), String> {
    let (rel, val) = spec
        .split_once('=')
        .ok_or_else(|| format!("tolerance {spec:?}: expected relation=value"))?;
    let v: f64 = val
        .trim()
        .parse()
        .map_err(|_| format!("tolerance {spec:?}: bad value {val:?}"))?;
    if !v.is_finite() || v <= 0.0 {
        return Err(format!(
            "tolerance {spec:?}: value must be positive and finite"
        ));
    }
    map.insert(rel.trim().to_string(), v);
    Ok(())
}

fn apply_quad(quad: &mut QuadratureSpec, spec: &str) -> Result<(), String> {
    let (key, val) = spec
        .split_once('=')
        .ok_or_else(|| format!("quad {spec:?}: expected key=value"))?;
    let key = key.trim().replace('_', "-");
    let val = val.trim();
    let as_count = |min: usize| -> Result<usize, String> {
        let v: usize = val
            .parse()
            .map_err(|_| format!("quad {spec:?}: bad integer {val:?}"))?;
        if v < min {
            return Err(format!("quad {spec:?}: value must be at least {min}"));
        }
        Ok(v)
    };
    let as_positive = || -> Result<f64, String> {
        let v: f64 = val
            .parse()
            .map_err(|_| format!("quad {spec:?}: bad number {val:?}"))?;
        if !v.is_finite() || v <= 0.0 {
            return Err(format!("quad {spec:?}: value must be positive and finite"));
        }
        Ok(v)
    };
    match key.as_str() {
        "spherical-degree" => quad.spherical_degree = as_count(1)?,
        "radial-order" => quad.radial_order = as_count(2)?,
        "radial-cutoff" => quad.radial_cutoff = as_positive()?,
        "rho-max" => quad.rho_max = as_positive()?,
        "rho-count" => quad.rho_count = as_count(2)?,
        other => {
            return Err(format!(
                "quad {spec:?}: unknown key {other:?} (expected spherical-degree, \
                 radial-order, radial-cutoff, rho-max or rho-count)"
            ))
        }
    }
    Ok(())
}

fn parse_rho_grid(s: &str) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let v: f64 = part
            .parse()
            .map_err(|_| format!("rho-grid: bad value {part:?}"))?;
        if !v.is_finite() {
            return Err(format!("rho-grid: value {part:?} is not finite"));
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err("rho-grid: no values given".into());
    }
    Ok(out)
}

/// Reject overrides whose relation id no row of this command will carry.
pub fn validate_tolerances(map: &ToleranceMap, allowed: &[&str]) -> Result<(), String> {
    for key in map.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(format!(
                "tolerance override {key:?} matches no relation of this command \
                 (expected one of {allowed:?})"
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags_precedence() {
        let mut r = Resolved::default();
        apply_file(
            &mut r,
            "# comment\nseed = 9\nquad = spherical-degree=13\ntolerance = structure=1e-5\n",
        )
        .unwrap();
        assert_eq!(r.seed, 9);
        assert_eq!(r.quad.spherical_degree, 13);
        assert_eq!(r.tolerances["structure"], 1e-5);
        apply_tolerance(&mut r.tolerances, "structure=1e-7").unwrap();
        assert_eq!(r.tolerances["structure"], 1e-7);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut r = Resolved::default();
        assert!(apply_file(&mut r, "sead = 9\n").is_err());
        assert!(apply_quad(&mut r.quad, "order=10").is_err());
        assert!(apply_tolerance(&mut r.tolerances, "structure").is_err());
        assert!(apply_tolerance(&mut r.tolerances, "structure=-1").is_err());
        assert!(validate_tolerances(&r.tolerances, &["structure"]).is_ok());
        apply_tolerance(&mut r.tolerances, "nonsense=1e-3").unwrap();
        assert!(validate_tolerances(&r.tolerances, &["structure"]).is_err());
    }

    #[test]
    fn rho_grid_parses_signed_values() {
        let g = parse_rho_grid("-3, -1, 0.5, 2").unwrap();
        assert_eq!(g, vec![-3.0, -1.0, 0.5, 2.0]);
        assert!(parse_rho_grid("a,b").is_err());
        assert!(parse_rho_grid(" , ").is_err());
    }
}
