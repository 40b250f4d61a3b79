//! Bound reports: one measured quantity against one quantitative bound.

use crate::error::Result;
use std::fmt;
use std::io::Write;
use std::path::Path;

/// Parameters a bound depends on; absent fields print as empty CSV cells.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ReportParams {
    pub delta: Option<f64>,
    pub tau: Option<f64>,
    pub l: Option<f64>,
    pub c: Option<f64>,
    pub r: Option<f64>,
}

/// One measured quantity vs. one bound.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    pub margin: f64,
    pub pass: bool,
    pub slack: f64,
    pub params: ReportParams,
    pub grid: String,
    /// Set when the hypotheses held nowhere, so the report is vacuous.
    pub vacuous: bool,
}

impl BoundReport {
    pub fn new(name: impl Into<String>, measured: f64, bound: f64, slack: f64) -> Self {
        let margin = bound - measured;
        Self {
            name: name.into(),
            measured,
            bound,
            margin,
            pass: margin >= -slack,
            slack,
            params: ReportParams::default(),
            grid: String::new(),
            vacuous: false,
        }
    }

    pub fn with_params(mut self, params: ReportParams) -> Self {
        self.params = params;
        self
    }

    pub fn with_grid(mut self, grid: impl Into<String>) -> Self {
        self.grid = grid.into();
        self
    }

    pub fn vacuous(mut self) -> Self {
        self.vacuous = true;
        self
    }
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: measured {:.6e} vs bound {:.6e} (margin {:+.3e}) -> {}{}",
            self.name,
            self.measured,
            self.bound,
            self.margin,
            if self.pass { "pass" } else { "FAIL" },
            if self.vacuous { " [vacuous]" } else { "" },
        )
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Row of the curve-lamination report CSV.
/// Header: `check,delta,tau,L,C,R,measured,bound,margin,pass`.
pub const SECTION4_HEADER: &str = "check,delta,tau,L,C,R,measured,bound,margin,pass";

pub fn section4_row(r: &BoundReport) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        r.name,
        fmt_opt(r.params.delta),
        fmt_opt(r.params.tau),
        fmt_opt(r.params.l),
        fmt_opt(r.params.c),
        fmt_opt(r.params.r),
        r.measured,
        r.bound,
        r.margin,
        r.pass
    )
}

/// Row of the plane-lamination report CSV.
/// Header: `experiment,family,delta,J,sup_err_c0,sup_err_c1,bound_c0,bound_c1,pass`.
pub const SECTION2_HEADER: &str =
    "experiment,family,delta,J,sup_err_c0,sup_err_c1,bound_c0,bound_c1,pass";

#[derive(Debug, Clone, PartialEq)]
pub struct PlaneRow {
    pub experiment: String,
    pub family: String,
    pub delta: f64,
    pub j: u32,
    pub sup_err_c0: f64,
    pub sup_err_c1: f64,
    pub bound_c0: f64,
    pub bound_c1: f64,
    pub pass: bool,
}

pub fn section2_row(r: &PlaneRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}",
        r.experiment,
        r.family,
        r.delta,
        r.j,
        r.sup_err_c0,
        r.sup_err_c1,
        r.bound_c0,
        r.bound_c1,
        r.pass
    )
}

/// Surface-lamination CSV: the leafwise C1 column splits per base axis.
pub const SECTION3_HEADER: &str =
    "experiment,family,delta,J,sup_err_c0,sup_err_c1x,sup_err_c1y,bound_c0,bound_c1,pass";

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceRow {
    pub experiment: String,
    pub family: String,
    pub delta: f64,
    pub j: u32,
    pub sup_err_c0: f64,
    pub sup_err_c1x: f64,
    pub sup_err_c1y: f64,
    pub bound_c0: f64,
    pub bound_c1: f64,
    pub pass: bool,
}

pub fn section3_row(r: &SurfaceRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        r.experiment,
        r.family,
        r.delta,
        r.j,
        r.sup_err_c0,
        r.sup_err_c1x,
        r.sup_err_c1y,
        r.bound_c0,
        r.bound_c1,
        r.pass
    )
}

pub fn write_csv(path: &Path, header: &str, rows: &[String]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "{header}")?;
    for row in rows {
        writeln!(f, "{row}")?;
    }
    Ok(())
}

/// Plot data: whitespace-separated `x measured bound` triples, one check per file.
pub fn write_plot_data(path: &Path, triples: &[(f64, f64, f64)]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    for (x, measured, bound) in triples {
        writeln!(f, "{x} {measured} {bound}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_iff_margin_at_least_minus_slack() {
        let r = BoundReport::new("t", 1.0, 0.999999, 1e-5);
        assert!(r.pass);
        let r = BoundReport::new("t", 1.0, 0.99, 1e-5);
        assert!(!r.pass);
    }

    #[test]
    fn section4_row_empty_cells_for_missing_params() {
        let r = BoundReport::new("lemma3-c0", 0.5, 1.0, 0.0).with_params(ReportParams {
            delta: Some(0.01),
            c: Some(10.0),
            ..Default::default()
        });
        assert_eq!(section4_row(&r), "lemma3-c0,0.01,,,10,,0.5,1,0.5,true");
    }
}
