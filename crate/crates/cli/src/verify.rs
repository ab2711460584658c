//! Cell-by-cell comparison of recomputed CSVs against a baseline directory.

use std::path::Path;

use crate::experiment::Artifacts;
use crate::CliError;

/// Per-cell tolerance, relative to `max(1, |baseline|)`.
pub const CELL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub file: String,
    /// 1-based line number, header included.
    pub line: usize,
    pub column: String,
    pub baseline: String,
    pub recomputed: String,
}

impl std::fmt::Display for Mismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}:{} column `{}`: baseline {} vs recomputed {}",
            self.file, self.line, self.column, self.baseline, self.recomputed
        )
    }
}

fn cells_agree(a: &str, b: &str) -> bool {
    if a == b {
        return true;
    }
    match (a.parse::<f64>(), b.parse::<f64>()) {
        (Ok(x), Ok(y)) if x.is_finite() && y.is_finite() => (x - y).abs() <= CELL_TOL * x.abs().max(1.0),
        _ => false,
    }
}

/// First disagreeing cell between two CSV texts, if any.
pub fn diff_csv(file: &str, baseline: &str, recomputed: &str) -> Option<Mismatch> {
    let base: Vec<&str> = baseline.lines().collect();
    let ours: Vec<&str> = recomputed.lines().collect();
    let header: Vec<&str> = ours.first().map(|h| h.split(',').collect()).unwrap_or_default();
    for i in 0..base.len().max(ours.len()) {
        let (Some(b), Some(o)) = (base.get(i), ours.get(i)) else {
            return Some(Mismatch {
                file: file.into(),
                line: i + 1,
                column: "<row>".into(),
                baseline: base.get(i).unwrap_or(&"<missing>").to_string(),
                recomputed: ours.get(i).unwrap_or(&"<missing>").to_string(),
            });
        };
        let bc: Vec<&str> = b.split(',').collect();
        let oc: Vec<&str> = o.split(',').collect();
        for j in 0..bc.len().max(oc.len()) {
            let (x, y) = (bc.get(j).copied().unwrap_or("<missing>"), oc.get(j).copied().unwrap_or("<missing>"));
            if !cells_agree(x, y) {
                return Some(Mismatch {
                    file: file.into(),
                    line: i + 1,
                    column: header.get(j).map_or_else(|| format!("#{j}"), |h| h.to_string()),
                    baseline: x.into(),
                    recomputed: y.into(),
                });
            }
        }
    }
    None
}

/// Compares every CSV of a fresh computation with the baseline directory.
pub fn verify_artifacts(fresh: &Artifacts, baseline: &Path) -> Result<(), CliError> {
    if !baseline.is_dir() {
        return Err(CliError::MissingBaseline(baseline.display().to_string()));
    }
    for (name, text) in fresh.files.iter().filter(|(n, _)| n.ends_with(".csv")) {
        let path = baseline.join(name);
        let base = std::fs::read_to_string(&path).map_err(|_| CliError::MissingBaseline(path.display().to_string()))?;
        if let Some(m) = diff_csv(name, &base, text) {
            return Err(CliError::Mismatch(m.to_string()));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_and_naming() {
        let a = "h,x\nabc,1.00000000000e0\n";
        assert_eq!(diff_csv("t.csv", a, a), None);
        assert_eq!(diff_csv("t.csv", a, "h,x\nabc,1.0000000000001e0\n"), None);
        let m = diff_csv("t.csv", a, "h,x\nabc,1.1e0\n").unwrap();
        assert_eq!((m.line, m.column.as_str()), (2, "x"));
        let m = diff_csv("t.csv", a, "h,x\n").unwrap();
        assert_eq!(m.column, "<row>");
        assert!(cells_agree("inf", "inf"));
        assert!(!cells_agree("inf", "1e300"));
    }
}
