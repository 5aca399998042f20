//! Machine-readable verification reports: one row per checked relation,
//! an environment stamp for reproducibility, and JSON/CSV writers.
//!
//! The volatile fields (wall time, timestamp) are grouped at the end of the
//! JSON document and omitted from CSV entirely, so reports from identical
//! (seed, config) runs compare byte-for-byte once those two lines are
//! dropped.

use std::time::Instant;

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    /// Short relation id, stable across releases; tolerance overrides key
    /// on this string.
    pub relation: String,
    /// Audit tag locating the identity inside the library.
    pub tag: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub seed: u64,
    pub build_id: String,
    pub command: String,
    pub rows: Vec<ReportRow>,
    pub notes: Vec<String>,
    pub pass: bool,
    pub wall_ms: f64,
    pub timestamp_utc: String,
    #[serde(skip)]
    started: Option<Instant>,
}

impl VerificationReport {
    pub fn new(suite: &str, seed: u64, command: &str) -> Self {
        VerificationReport {
            suite: suite.to_string(),
            seed,
            build_id: format!("shapiro-{}", env!("CARGO_PKG_VERSION")),
            command: command.to_string(),
            rows: Vec::new(),
            notes: Vec::new(),
            pass: true,
            wall_ms: 0.0,
            timestamp_utc: String::new(),
            started: Some(Instant::now()),
        }
    }

    pub fn push(&mut self, relation: &str, tag: &str, residual: f64, tolerance: f64) {
        let pass = residual.is_finite() && residual < tolerance;
        self.rows.push(ReportRow {
            relation: relation.to_string(),
            tag: tag.to_string(),
            residual,
            tolerance,
            pass,
        });
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    /// Seals pass/fail and the volatile stamp; call once, after all rows.
    pub fn finalize(&mut self) {
        self.pass = self.rows.iter().all(|r| r.pass);
        if let Some(t0) = self.started.take() {
            self.wall_ms = t0.elapsed().as_secs_f64() * 1e3;
        }
        let unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs_f64())
            .unwrap_or(0.0);
        self.timestamp_utc = format!("unix:{unix:.3}");
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// CSV form: stamp comment, column header, one line per row. Contains
    /// no volatile fields, so identical runs produce identical bytes.
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# suite={} seed={} build={} pass={}\n",
            self.suite, self.seed, self.build_id, self.pass
        );
        out.push_str("relation,tag,residual,tolerance,pass\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{:e},{:e},{}\n",
                r.relation, r.tag, r.residual, r.tolerance, r.pass
            ));
        }
        out
    }

    pub fn worst_row(&self) -> Option<&ReportRow> {
        self.rows
            .iter()
            .max_by(|a, b| {
                let ra = a.residual / a.tolerance;
                let rb = b.residual / b.tolerance;
                ra.partial_cmp(&rb).unwrap_or(std::cmp::Ordering::Equal)
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_iff_every_row_passes() {
        let mut r = VerificationReport::new("demo", 7, "demo-cmd");
        r.push("a", "t/a", 1e-12, 1e-8);
        r.push("b", "t/b", 1e-3, 1e-8);
        r.finalize();
        assert!(!r.pass);
        assert!(r.rows[0].pass && !r.rows[1].pass);
        assert_eq!(r.worst_row().unwrap().relation, "b");
    }

    #[test]
    fn nan_residual_fails() {
        let mut r = VerificationReport::new("demo", 7, "demo-cmd");
        r.push("a", "t/a", f64::NAN, 1e-8);
        r.finalize();
        assert!(!r.pass);
    }

    #[test]
    fn csv_has_no_volatile_fields() {
        let mut r = VerificationReport::new("demo", 7, "demo-cmd");
        r.push("a", "t/a", 1e-12, 1e-8);
        r.finalize();
        let csv = r.to_csv();
        assert!(!csv.contains("unix:"));
        assert!(csv.lines().count() == 3);
        let json = r.to_json();
        assert!(json.contains("timestamp_utc"));
    }
}
