//! Sweep orchestration: run the per-section check suites over the configured
//! (delta, J) grid, in parallel, with deterministic report ordering.

use crate::catalog;
use crate::chi::CutoffChi;
use crate::config::ExperimentConfig;
use crate::curve3d::{CanonicalOsgoodCurves3D, CurveFamily3D};
use crate::domain::{Box2, Box3, Interval};
use crate::error::{Error, Result};
use crate::family2d::Phi2;
use crate::ode::integrate_refined;
use crate::report::{
    section2_row, section3_row, section4_row, write_csv, write_plot_data, BoundReport, PlaneRow,
    SurfaceRow, SECTION2_HEADER, SECTION3_HEADER, SECTION4_HEADER,
};
use crate::slope::{L_FLOOR, SlopeField3D};
use crate::smooth2d::{build_h_delta, h_delta_errors, report_theorem1};
use crate::smooth3d_curve::{
    build_f_delta, check_corollary1, check_grad_pi_and_final, check_leaf_separation,
    select_polydisk, BuildParams,
};
use rayon::prelude::*;
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

/// One executed sweep cell.
#[derive(Debug)]
pub struct SweepCell {
    pub check: String,
    pub delta: f64,
    pub j: u32,
    pub pass: bool,
    pub summary: String,
    pub rows2: Vec<PlaneRow>,
    pub rows3: Vec<SurfaceRow>,
    pub rows4: Vec<BoundReport>,
    /// (x, measured, bound) triples for the plot-data emitter.
    pub plot: Vec<(f64, f64, f64)>,
    pub wall: Duration,
}

#[derive(Debug)]
pub struct SweepResult {
    pub cells: Vec<SweepCell>,
    pub pass: bool,
}

/// Worker-count resolution: the environment variable wins, then the CLI
/// value, then the config, then all cores.
pub fn resolve_workers(cli: Option<usize>, config: Option<usize>) -> usize {
    if let Ok(v) = std::env::var("LAMIN_SMOOTH_WORKERS") {
        if let Ok(n) = v.parse::<usize>() {
            if n > 0 {
                return n;
            }
        }
    }
    cli.or(config)
        .filter(|&n| n > 0)
        .unwrap_or_else(num_cpus)
}

fn num_cpus() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

fn plane_box(config: &ExperimentConfig) -> Result<Box2> {
    Ok(Box2::new(
        Interval::new(config.domain.x[0], config.domain.x[1])?,
        Interval::new(config.domain.y[0], config.domain.y[1])?,
    ))
}

fn field_box(config: &ExperimentConfig) -> Result<Box3> {
    Ok(Box3::new(
        Interval::new(config.domain.x[0], config.domain.x[1])?,
        Interval::new(config.domain.y[0], config.domain.y[1])?,
        Interval::new(config.domain.y2[0], config.domain.y2[1])?,
    ))
}

/// Leaves of an arbitrary slope field, integrated on demand; the reference
/// lamination for section-4 checks on user-supplied fields.
struct FieldCurves3D {
    field: Arc<dyn SlopeField3D>,
    a_box: (Interval, Interval),
    params: crate::ode::IntegratorParams,
}

impl CurveFamily3D for FieldCurves3D {
    fn eval(&self, a: [f64; 2], x: f64) -> Result<[f64; 2]> {
        let f = |x: f64, y: [f64; 2]| self.field.eval(x, y);
        integrate_refined(&f, 0.0, a, x, &self.params, &|_| true)
    }
    fn slope(&self, a: [f64; 2], x: f64) -> Result<[f64; 2]> {
        let y = self.eval(a, x)?;
        Ok(self.field.eval(x, y))
    }
    fn a_box(&self) -> (Interval, Interval) {
        self.a_box
    }
}

#[derive(PartialEq)]
enum CellSpec {
    HDelta { delta: f64 },
    Theorem1 { delta: f64, j: u32 },
    Lemma3 { delta: f64 },
    Corollary1 { delta: f64 },
    LeafSeparation { delta: f64 },
    FinalBound { delta: f64 },
}

fn run_plane_cell(config: &ExperimentConfig, spec: &CellSpec) -> Result<SweepCell> {
    let family = catalog::plane_family(&config.family)?;
    let k = plane_box(config)?;
    let chi = CutoffChi::new(config.smoothing.chi);
    let l = L_FLOOR;
    let fd = crate::diff::default_step(k.x.len());
    match *spec {
        CellSpec::HDelta { delta } => {
            let s = build_h_delta(family, delta, chi, &k)?;
            let (c0, c1) = h_delta_errors(
                &s,
                config.sampling.nx,
                config.sampling.ny,
                config.sampling.leaves,
                fd,
            )?;
            let r_x = k.x.lo.abs().max(k.x.hi.abs());
            let bound_c1 = delta
                * chi.deriv_bound()
                * (l * 4.0f64.ln() + 2.0 * l * (1.0 / delta).ln() * (l * r_x).exp());
            let pass = c0 <= delta && c1 <= bound_c1;
            Ok(SweepCell {
                check: "h-delta".into(),
                delta,
                j: 0,
                pass,
                summary: format!("sup|h-pi| = {c0:.3e} (<= {delta}), sup|dh/dx| = {c1:.3e}"),
                rows2: vec![PlaneRow {
                    experiment: "h-delta".into(),
                    family: config.family.clone(),
                    delta,
                    j: 0,
                    sup_err_c0: c0,
                    sup_err_c1: c1,
                    bound_c0: delta,
                    bound_c1,
                    pass,
                }],
                rows3: vec![],
                rows4: vec![],
                plot: vec![],
                wall: Duration::ZERO,
            })
        }
        CellSpec::Theorem1 { delta, j } => {
            // phi = the transversal coordinate; its leafwise derivative is
            // the family slope, so both error columns are informative.
            let phi = Phi2::new(|_, y| y);
            let epsilon = 4.0 / j as f64;
            let (c0, c1) = report_theorem1(
                &phi,
                family,
                &k,
                epsilon,
                delta,
                j,
                chi,
                config.sampling.leaves,
                config.sampling.nx,
            )?;
            let pass = c0.pass && c1.pass;
            Ok(SweepCell {
                check: "theorem1".into(),
                delta,
                j,
                pass,
                summary: format!(
                    "sup|psi-phi| = {:.3e}, sup leafwise C1 error = {:.3e} (eps = {epsilon:.3e})",
                    c0.measured, c1.measured
                ),
                rows2: vec![PlaneRow {
                    experiment: "theorem1".into(),
                    family: config.family.clone(),
                    delta,
                    j,
                    sup_err_c0: c0.measured,
                    sup_err_c1: c1.measured,
                    bound_c0: c0.bound,
                    bound_c1: c1.bound,
                    pass,
                }],
                rows3: vec![],
                rows4: vec![],
                plot: vec![],
                wall: Duration::ZERO,
            })
        }
        _ => Err(Error::Parameter("not a plane-suite cell".into())),
    }
}

fn run_field_cell(config: &ExperimentConfig, spec: &CellSpec) -> Result<SweepCell> {
    let (field, default_box) = catalog::slope_field_3d(&config.family)?;
    let bb = if config.family.starts_with("slope-field:") {
        default_box
    } else {
        field_box(config)?
    };
    let params = config.integrator;
    let truth: Box<dyn CurveFamily3D> = if config.family == "canonical-osgood-3d" {
        Box::new(CanonicalOsgoodCurves3D)
    } else {
        Box::new(FieldCurves3D {
            field: field.clone(),
            a_box: (bb.y1, bb.y2),
            params,
        })
    };
    let delta = match *spec {
        CellSpec::Lemma3 { delta }
        | CellSpec::Corollary1 { delta }
        | CellSpec::LeafSeparation { delta }
        | CellSpec::FinalBound { delta } => delta,
        _ => return Err(Error::Parameter("not a field-suite cell".into())),
    };
    let sf = build_f_delta(field, delta, bb, L_FLOOR, &BuildParams::default())?;
    match *spec {
        CellSpec::Lemma3 { .. } => {
            let (sup_err, sup_jac) = sf.measure_sups(17, config.sampling.ny.min(40))?;
            let log_inv = (1.0 / delta).ln();
            let rp = crate::report::ReportParams {
                delta: Some(delta),
                l: Some(sf.l),
                c: Some(sf.c),
                ..Default::default()
            };
            let c0 = BoundReport::new("lemma3-c0", sup_err, sf.c * delta * log_inv, 0.0)
                .with_params(rp);
            let jac = BoundReport::new("lemma3-jac", sup_jac, 0.5 * sf.c * log_inv, 0.0)
                .with_params(rp);
            let pass = c0.pass && jac.pass;
            Ok(SweepCell {
                check: "lemma3".into(),
                delta,
                j: 0,
                pass,
                summary: format!(
                    "sup|F_delta-F| = {:.3e}, sup|J_y| = {:.3e}, C = {:.3} ({:?})",
                    c0.measured, jac.measured, sf.c, sf.c_source
                ),
                rows2: vec![],
                rows3: vec![],
                rows4: vec![c0, jac],
                plot: vec![],
                wall: Duration::ZERO,
            })
        }
        CellSpec::Corollary1 { .. } => {
            let a1_iv = bb.y1.inset(0.15);
            let a2_iv = bb.y2.inset(0.1);
            let mut a_samples = Vec::new();
            for a1 in a1_iv.linspace(5) {
                for a2 in a2_iv.linspace(5) {
                    a_samples.push([a1, a2]);
                }
            }
            let report = check_corollary1(
                &sf,
                truth.as_ref(),
                &a_samples,
                config.smoothing.tau,
                config.sampling.nx.min(60),
                &params,
                0.0,
            )?;
            Ok(SweepCell {
                check: "corollary1".into(),
                delta,
                j: 0,
                pass: report.pass,
                summary: format!(
                    "max deviation {:.3e} vs delta^tau = {:.3e}",
                    report.measured, report.bound
                ),
                rows2: vec![],
                rows3: vec![],
                rows4: vec![report],
                plot: vec![],
                wall: Duration::ZERO,
            })
        }
        CellSpec::LeafSeparation { .. } => {
            let window = (0.98 * 0.5 / sf.c).min(bb.x.hi.min(-bb.x.lo));
            let a = [bb.y1.mid(), bb.y2.mid()];
            let out = check_leaf_separation(&sf, a, [7e-5, 7e-5], window, 21, &params, 1e-9)?;
            let pass = out.lower.pass && out.upper.pass && out.diff_ineq.pass;
            Ok(SweepCell {
                check: "leaf-separation".into(),
                delta,
                j: 0,
                pass,
                summary: format!(
                    "envelope ratios {:.6} / {:.6} vs 1 on |x| <= {window:.4}",
                    out.lower.measured, out.upper.measured
                ),
                rows2: vec![],
                rows3: vec![],
                rows4: vec![out.lower, out.upper, out.diff_ineq],
                plot: out.profile,
                wall: Duration::ZERO,
            })
        }
        CellSpec::FinalBound { .. } => {
            let disk = select_polydisk(&sf, [bb.y1.mid(), bb.y2.mid()], &params)?;
            let (grad, fin) = check_grad_pi_and_final(
                &sf,
                truth.as_ref(),
                &disk,
                (3, 5),
                (9, 5),
                &params,
                0.0,
            )?;
            let pass = grad.pass && fin.pass;
            Ok(SweepCell {
                check: "final-bound".into(),
                delta,
                j: 0,
                pass,
                summary: format!(
                    "sup|grad pi_delta| = {:.3e} (<= {:.3e}), leafwise {:.3e} (<= {:.3e}), R = {:.4}",
                    grad.measured, grad.bound, fin.measured, fin.bound, disk.radius
                ),
                rows2: vec![],
                rows3: vec![],
                rows4: vec![grad, fin],
                plot: vec![],
                wall: Duration::ZERO,
            })
        }
        _ => unreachable!(),
    }
}

fn failed_cell(spec: &CellSpec, err: &Error) -> SweepCell {
    let (check, delta, j) = match *spec {
        CellSpec::HDelta { delta } => ("h-delta", delta, 0),
        CellSpec::Theorem1 { delta, j } => ("theorem1", delta, j),
        CellSpec::Lemma3 { delta } => ("lemma3", delta, 0),
        CellSpec::Corollary1 { delta } => ("corollary1", delta, 0),
        CellSpec::LeafSeparation { delta } => ("leaf-separation", delta, 0),
        CellSpec::FinalBound { delta } => ("final-bound", delta, 0),
    };
    SweepCell {
        check: check.into(),
        delta,
        j,
        pass: false,
        summary: format!("aborted: {err}"),
        rows2: vec![],
        rows3: vec![],
        rows4: vec![],
        plot: vec![],
        wall: Duration::ZERO,
    }
}

/// Execute the suite selected by the configured family over its (delta, J)
/// grid. Cells run in parallel; failed cells are recorded and do not stop
/// the rest.
pub fn run_sweep(config: &ExperimentConfig, workers: usize) -> Result<SweepResult> {
    config.validate()?;
    let is_plane = catalog::PLANE_FAMILIES.contains(&config.family.as_str());
    let mut specs = Vec::new();
    for &delta in &config.smoothing.deltas {
        if is_plane {
            specs.push(CellSpec::HDelta { delta });
            for &j in &config.smoothing.grid_j {
                // Keep the smoother error negligible against the 1/J sampling
                // error: the grid gap never exceeds 1/J^2. Capping can collapse
                // several listed deltas onto the same cell; keep one.
                let delta = delta.min(1.0 / (j as f64 * j as f64));
                let spec = CellSpec::Theorem1 { delta, j };
                if !specs.contains(&spec) {
                    specs.push(spec);
                }
            }
        } else {
            specs.push(CellSpec::Lemma3 { delta });
            specs.push(CellSpec::Corollary1 { delta });
            specs.push(CellSpec::LeafSeparation { delta });
            specs.push(CellSpec::FinalBound { delta });
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let mut cells: Vec<SweepCell> = pool.install(|| {
        specs
            .par_iter()
            .map(|spec| {
                let start = Instant::now();
                let mut cell = if is_plane {
                    run_plane_cell(config, spec)
                } else {
                    run_field_cell(config, spec)
                }
                .unwrap_or_else(|e| failed_cell(spec, &e));
                cell.wall = start.elapsed();
                cell
            })
            .collect()
    });
    // Deterministic ordering: by check name, then delta descending, then J.
    cells.sort_by(|a, b| {
        a.check
            .cmp(&b.check)
            .then(b.delta.total_cmp(&a.delta))
            .then(a.j.cmp(&b.j))
    });
    let pass = cells.iter().all(|c| c.pass);
    Ok(SweepResult { cells, pass })
}

/// The surface-lamination suite: smoother accuracy, the radial derivative
/// bounds, and the composite approximant, per configured (delta, J).
pub fn run_surface_sweep(config: &ExperimentConfig, workers: usize) -> Result<SweepResult> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let base = plane_box(config)?;
    let z = Interval::new(config.domain.y2[0], config.domain.y2[1])?;
    let chi = CutoffChi::new(config.smoothing.chi);
    let n = config.sampling.nx.min(48);
    let deltas = &config.smoothing.deltas;
    let mut cells: Vec<SweepCell> = pool.install(|| {
        deltas
            .par_iter()
            .map(|&delta| {
                let start = Instant::now();
                let mut cell = surface_cell(config, delta, &base, z, chi, n)
                    .unwrap_or_else(|e| failed_cell(&CellSpec::HDelta { delta }, &e));
                cell.check = "surface-prop2".into();
                cell.wall = start.elapsed();
                cell
            })
            .collect()
    });
    cells.sort_by(|a, b| b.delta.total_cmp(&a.delta));
    let pass = cells.iter().all(|c| c.pass);
    Ok(SweepResult { cells, pass })
}

fn surface_cell(
    config: &ExperimentConfig,
    delta: f64,
    base: &Box2,
    z: Interval,
    chi: CutoffChi,
    n: usize,
) -> Result<SweepCell> {
    use crate::smooth3d_surface::{build_h_delta_surface, check_prop2_bounds, RADIAL_L_FACTOR};
    use crate::surface3d::project_pi_surface;

    let family = catalog::surface_family(&config.family)?;
    let s = build_h_delta_surface(family.clone(), delta, chi, base, z)?;
    let mut sup_c0: f64 = 0.0;
    for x in base.x.linspace(n) {
        for y in base.y.linspace(n) {
            for zz in z.inset(0.02).linspace(n.min(24)) {
                let h = s.eval(x, y, zz)?;
                let a = project_pi_surface(&family, x, y, zz)?;
                sup_c0 = sup_c0.max((h - a).abs());
            }
        }
    }
    // Mid-gap leaves at a quarter, half, and three quarters of the z range.
    let fd = crate::diff::default_step(base.x.len());
    let mut worst_dx: f64 = 0.0;
    let mut worst_dy: f64 = 0.0;
    let mut bound_c1: f64 = 0.0;
    let mut pass = sup_c0 <= delta;
    for frac in [0.25, 0.5, 0.75] {
        let a_mid = project_pi_surface(&family, base.x.mid(), base.y.mid(), z.inset(0.1).lo)?
            * (1.0 - frac)
            + project_pi_surface(&family, base.x.mid(), base.y.mid(), z.inset(0.1).hi)? * frac;
        let b = (a_mid / delta).floor() * delta + 0.5 * delta;
        let (dx, dy) = check_prop2_bounds(&s, b, L_FLOOR, RADIAL_L_FACTOR, n.min(32), fd, 0.0)?;
        pass &= dx.pass && dy.pass;
        worst_dx = worst_dx.max(dx.measured);
        worst_dy = worst_dy.max(dy.measured);
        bound_c1 = bound_c1.max(dx.bound.max(dy.bound));
    }
    Ok(SweepCell {
        check: "surface-prop2".into(),
        delta,
        j: 0,
        pass,
        summary: format!(
            "sup|h-pi| = {sup_c0:.3e} (<= {delta}), leafwise partials {worst_dx:.3e} / {worst_dy:.3e}"
        ),
        rows2: vec![],
        rows3: vec![SurfaceRow {
            experiment: "prop2".into(),
            family: config.family.clone(),
            delta,
            j: 0,
            sup_err_c0: sup_c0,
            sup_err_c1x: worst_dx,
            sup_err_c1y: worst_dy,
            bound_c0: delta,
            bound_c1,
            pass,
        }],
        rows4: vec![],
        plot: vec![],
        wall: Duration::ZERO,
    })
}

/// Write the CSV and plot-data outputs and print one summary line per cell.
pub fn emit_reports(result: &SweepResult, out_dir: &Path, plot_data: bool) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let rows2: Vec<String> = result
        .cells
        .iter()
        .flat_map(|c| c.rows2.iter().map(section2_row))
        .collect();
    let rows4: Vec<String> = result
        .cells
        .iter()
        .flat_map(|c| c.rows4.iter().map(section4_row))
        .collect();
    let rows3: Vec<String> = result
        .cells
        .iter()
        .flat_map(|c| c.rows3.iter().map(section3_row))
        .collect();
    write_csv(&out_dir.join("sweep_plane.csv"), SECTION2_HEADER, &rows2)?;
    write_csv(&out_dir.join("sweep_surface.csv"), SECTION3_HEADER, &rows3)?;
    write_csv(&out_dir.join("sweep_bounds.csv"), SECTION4_HEADER, &rows4)?;
    if plot_data {
        for cell in &result.cells {
            if !cell.plot.is_empty() {
                let name = format!("plot_{}_{}.txt", cell.check, cell.delta);
                write_plot_data(&out_dir.join(name), &cell.plot)?;
            }
        }
    }
    for cell in &result.cells {
        println!(
            "[{}] {} delta={} J={} ({:.2}s): {}",
            if cell.pass { "pass" } else { "FAIL" },
            cell.check,
            cell.delta,
            cell.j,
            cell.wall.as_secs_f64(),
            cell.summary
        );
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worker_resolution_prefers_env() {
        // Serialized by the env var name being unique to this test body.
        std::env::set_var("LAMIN_SMOOTH_WORKERS", "3");
        assert_eq!(resolve_workers(Some(8), Some(2)), 3);
        std::env::remove_var("LAMIN_SMOOTH_WORKERS");
        assert_eq!(resolve_workers(Some(8), Some(2)), 8);
        assert_eq!(resolve_workers(None, Some(2)), 2);
        assert!(resolve_workers(None, None) >= 1);
    }

    #[test]
    fn flat_family_sweep_all_zero() {
        let mut config = ExperimentConfig::default();
        config.family = "flat".into();
        config.smoothing.deltas = vec![0.1];
        config.smoothing.grid_j = vec![8];
        config.sampling.nx = 16;
        config.sampling.ny = 16;
        config.sampling.leaves = 8;
        let result = run_sweep(&config, 2).unwrap();
        assert!(result.pass);
        assert_eq!(result.cells.len(), 2);
        // Nothing depends on x for flat leaves, so every leafwise derivative
        // error vanishes; the C0 columns stay within their bounds.
        for cell in &result.cells {
            for row in &cell.rows2 {
                assert!(row.sup_err_c0 <= row.bound_c0, "{}: {}", cell.check, row.sup_err_c0);
                assert!(row.sup_err_c1 < 1e-9, "{}: {}", cell.check, row.sup_err_c1);
            }
        }
    }

    #[test]
    fn field_suite_produces_all_checks() {
        let mut config = ExperimentConfig::default();
        config.family = "canonical-osgood-3d".into();
        config.smoothing.deltas = vec![0.02];
        config.sampling.nx = 20;
        config.sampling.ny = 20;
        let result = run_sweep(&config, 2).unwrap();
        let mut checks: Vec<&str> = result.cells.iter().map(|c| c.check.as_str()).collect();
        checks.sort();
        assert_eq!(
            checks,
            vec!["corollary1", "final-bound", "leaf-separation", "lemma3"]
        );
        assert!(result.pass, "{:#?}", result.cells);
    }

    #[test]
    fn cells_sorted_by_check_then_delta_desc() {
        let mut config = ExperimentConfig::default();
        config.family = "flat".into();
        config.smoothing.deltas = vec![0.05, 0.1];
        config.smoothing.grid_j = vec![4];
        config.sampling.nx = 8;
        config.sampling.ny = 8;
        config.sampling.leaves = 4;
        let result = run_sweep(&config, 1).unwrap();
        let keys: Vec<(String, f64)> = result
            .cells
            .iter()
            .map(|c| (c.check.clone(), c.delta))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.total_cmp(&a.1)));
        assert_eq!(keys, sorted);
    }
}
