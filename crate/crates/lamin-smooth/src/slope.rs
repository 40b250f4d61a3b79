//! Slope fields and the log-Lipschitz modulus.
//!
//! A slope field gives leaf tangents at a point. The basic assumption bounds
//! its transversal modulus of continuity by `L t log(1/t)`; the constant `L`
//! is estimated here by ratio maximization over sampled pairs.

use crate::domain::{Box2, Box3};
use crate::error::{Error, Result};
use crate::report::{BoundReport, ReportParams};
use rand::Rng;
use std::path::Path;
use std::sync::Arc;

pub trait SlopeField2D: Send + Sync {
    fn eval(&self, x: f64, y: f64) -> f64;
}

pub trait SlopeField3D: Send + Sync {
    fn eval(&self, x: f64, y: [f64; 2]) -> [f64; 2];
}

pub struct FnField2D<F: Fn(f64, f64) -> f64 + Send + Sync>(pub F);

impl<F: Fn(f64, f64) -> f64 + Send + Sync> SlopeField2D for FnField2D<F> {
    fn eval(&self, x: f64, y: f64) -> f64 {
        (self.0)(x, y)
    }
}

pub struct FnField3D<F: Fn(f64, [f64; 2]) -> [f64; 2] + Send + Sync>(pub F);

impl<F: Fn(f64, [f64; 2]) -> [f64; 2] + Send + Sync> SlopeField3D for FnField3D<F> {
    fn eval(&self, x: f64, y: [f64; 2]) -> [f64; 2] {
        (self.0)(x, y)
    }
}

impl SlopeField2D for Arc<dyn SlopeField2D> {
    fn eval(&self, x: f64, y: f64) -> f64 {
        (**self).eval(x, y)
    }
}

impl SlopeField3D for Arc<dyn SlopeField3D> {
    fn eval(&self, x: f64, y: [f64; 2]) -> [f64; 2] {
        (**self).eval(x, y)
    }
}

/// Separations are restricted to this window: `t log(1/t)` degenerates at
/// both ends.
pub const SEP_MIN: f64 = 1e-6;
pub const SEP_MAX: f64 = 0.5;

/// Floor honoring `L log 2 > 1`.
pub const L_FLOOR: f64 = 1.45;

#[derive(Debug, Clone, Copy)]
pub struct PairWitness {
    pub x: f64,
    pub y: [f64; 2],
    pub y_other: [f64; 2],
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct LogLipschitzEstimate {
    pub l: f64,
    pub l_effective: f64,
    pub samples: usize,
    pub witness: Option<PairWitness>,
}

impl LogLipschitzEstimate {
    fn from_ratios(ratios: impl Iterator<Item = PairWitness>) -> Result<Self> {
        let mut l: f64 = 0.0;
        let mut witness = None;
        let mut samples = 0usize;
        for w in ratios {
            samples += 1;
            if w.ratio > l {
                l = w.ratio;
                witness = Some(w);
            }
        }
        if samples == 0 {
            return Err(Error::Input("no valid sample pairs".into()));
        }
        Ok(Self {
            l,
            l_effective: l.max(L_FLOOR),
            samples,
            witness,
        })
    }
}

fn modulus(t: f64) -> f64 {
    t * (1.0 / t).ln()
}

/// Log-spaced separations inside the admissible window, capped by `t_max`.
fn separations(t_max: f64) -> Vec<f64> {
    let t_max = t_max.min(SEP_MAX);
    let mut out = Vec::new();
    let n = 12;
    for i in 0..n {
        let t = SEP_MIN * (t_max / SEP_MIN).powf(i as f64 / (n - 1) as f64);
        if t > SEP_MIN * 0.999 && t <= t_max {
            out.push(t);
        }
    }
    out
}

/// Supremum of `|F(x,y') - F(x,y)| / (t log(1/t))` over a structured grid plus
/// randomized pairs; coincident pairs are skipped.
pub fn estimate_log_lipschitz_2d(
    field: &dyn SlopeField2D,
    domain: &Box2,
    random_pairs: usize,
    rng: &mut impl Rng,
) -> Result<LogLipschitzEstimate> {
    let xs = domain.x.linspace(21);
    let ys = domain.y.linspace(41);
    let seps = separations(domain.y.len());
    let mut witnesses = Vec::new();
    let mut push = |x: f64, y: f64, yp: f64| {
        let t = (yp - y).abs();
        if t <= SEP_MIN || t > SEP_MAX {
            return;
        }
        let num = (field.eval(x, yp) - field.eval(x, y)).abs();
        witnesses.push(PairWitness {
            x,
            y: [y, 0.0],
            y_other: [yp, 0.0],
            ratio: num / modulus(t),
        });
    };
    for &x in &xs {
        for &y in &ys {
            for &t in &seps {
                if domain.y.contains(y + t) {
                    push(x, y, y + t);
                }
            }
        }
    }
    for _ in 0..random_pairs {
        let x = rng.gen_range(domain.x.lo..=domain.x.hi);
        let y = rng.gen_range(domain.y.lo..=domain.y.hi);
        let t = SEP_MIN * (SEP_MAX / SEP_MIN).powf(rng.gen::<f64>());
        let yp = y + t;
        if domain.y.contains(yp) {
            push(x, y, yp);
        }
    }
    LogLipschitzEstimate::from_ratios(witnesses.into_iter())
}

/// Same as [`estimate_log_lipschitz_2d`] for a field over a transversal square.
pub fn estimate_log_lipschitz_3d(
    field: &dyn SlopeField3D,
    domain: &Box3,
    random_pairs: usize,
    rng: &mut impl Rng,
) -> Result<LogLipschitzEstimate> {
    let xs = domain.x.linspace(9);
    let y1s = domain.y1.linspace(17);
    let y2s = domain.y2.linspace(17);
    let seps = separations(domain.y1.len().min(domain.y2.len()));
    let mut witnesses = Vec::new();
    let mut push = |x: f64, y: [f64; 2], yp: [f64; 2]| {
        let t = ((yp[0] - y[0]).powi(2) + (yp[1] - y[1]).powi(2)).sqrt();
        if t <= SEP_MIN || t > SEP_MAX {
            return;
        }
        let (a, b) = (field.eval(x, y), field.eval(x, yp));
        let num = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        witnesses.push(PairWitness {
            x,
            y,
            y_other: yp,
            ratio: num / modulus(t),
        });
    };
    for &x in &xs {
        for &y1 in &y1s {
            for &y2 in &y2s {
                for &t in &seps {
                    if domain.y1.contains(y1 + t) {
                        push(x, [y1, y2], [y1 + t, y2]);
                    }
                    if domain.y2.contains(y2 + t) {
                        push(x, [y1, y2], [y1, y2 + t]);
                    }
                }
            }
        }
    }
    for _ in 0..random_pairs {
        let x = rng.gen_range(domain.x.lo..=domain.x.hi);
        let y = [
            rng.gen_range(domain.y1.lo..=domain.y1.hi),
            rng.gen_range(domain.y2.lo..=domain.y2.hi),
        ];
        let t = SEP_MIN * (SEP_MAX / SEP_MIN).powf(rng.gen::<f64>());
        let phi = rng.gen_range(0.0..std::f64::consts::TAU);
        let yp = [y[0] + t * phi.cos(), y[1] + t * phi.sin()];
        if domain.contains_y(yp) {
            push(x, y, yp);
        }
    }
    LogLipschitzEstimate::from_ratios(witnesses.into_iter())
}

/// Check a declared `L` against the sampled modulus ratios.
/// Pass iff the worst ratio is at most `L (1 + slack)`.
pub fn check_basic_assumption_2d(
    field: &dyn SlopeField2D,
    domain: &Box2,
    l: f64,
    random_pairs: usize,
    slack: f64,
    rng: &mut impl Rng,
) -> Result<BoundReport> {
    if l <= 0.0 {
        return Err(Error::Parameter("L must be positive".into()));
    }
    let est = estimate_log_lipschitz_2d(field, domain, random_pairs, rng)?;
    Ok(
        BoundReport::new("basic-assumption", est.l, l, l * slack)
            .with_params(ReportParams {
                l: Some(l),
                ..Default::default()
            })
            .with_grid(format!("{} sampled pairs", est.samples)),
    )
}

pub fn check_basic_assumption_3d(
    field: &dyn SlopeField3D,
    domain: &Box3,
    l: f64,
    random_pairs: usize,
    slack: f64,
    rng: &mut impl Rng,
) -> Result<BoundReport> {
    if l <= 0.0 {
        return Err(Error::Parameter("L must be positive".into()));
    }
    let est = estimate_log_lipschitz_3d(field, domain, random_pairs, rng)?;
    Ok(
        BoundReport::new("basic-assumption", est.l, l, l * slack)
            .with_params(ReportParams {
                l: Some(l),
                ..Default::default()
            })
            .with_grid(format!("{} sampled pairs", est.samples)),
    )
}

/// A slope field read from a sampled-grid text file.
///
/// Format: a header line `nx ny1 ny2`, then `nx*ny1*ny2` rows
/// `x y1 y2 F1 F2`. The grid must be a full regular product grid; rows may
/// appear in any order. Evaluation is trilinear with clamping at the edges.
pub struct SampledField3D {
    xs: Vec<f64>,
    y1s: Vec<f64>,
    y2s: Vec<f64>,
    values: Vec<[f64; 2]>,
}

impl SampledField3D {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let (_, header) = lines.next().ok_or("empty file")?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| format!("bad header: {header:?}")))
            .collect::<std::result::Result<_, _>>()?;
        let [nx, ny1, ny2] = dims[..] else {
            return Err(format!("header must be `nx ny1 ny2`, got {header:?}"));
        };
        if nx < 2 || ny1 < 2 || ny2 < 2 {
            return Err("each grid dimension needs at least 2 nodes".into());
        }
        let mut rows = Vec::with_capacity(nx * ny1 * ny2);
        for (lineno, line) in lines {
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|t| {
                    t.parse()
                        .map_err(|_| format!("line {}: bad number {t:?}", lineno + 1))
                })
                .collect::<std::result::Result<_, _>>()?;
            let [x, y1, y2, f1, f2] = vals[..] else {
                return Err(format!("line {}: expected 5 columns", lineno + 1));
            };
            rows.push((x, y1, y2, [f1, f2]));
        }
        if rows.len() != nx * ny1 * ny2 {
            return Err(format!(
                "expected {} rows, got {}",
                nx * ny1 * ny2,
                rows.len()
            ));
        }
        let axis = |pick: fn(&(f64, f64, f64, [f64; 2])) -> f64, n: usize, name: &str| {
            let mut vals: Vec<f64> = rows.iter().map(pick).collect();
            vals.sort_by(f64::total_cmp);
            vals.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
            if vals.len() != n {
                return Err(format!("{name}: expected {n} distinct values, got {}", vals.len()));
            }
            Ok(vals)
        };
        let xs = axis(|r| r.0, nx, "x axis")?;
        let y1s = axis(|r| r.1, ny1, "y1 axis")?;
        let y2s = axis(|r| r.2, ny2, "y2 axis")?;
        let locate = |vals: &[f64], v: f64| {
            vals.binary_search_by(|p| p.total_cmp(&v))
                .or_else(|_| {
                    vals.iter()
                        .position(|p| (p - v).abs() < 1e-12)
                        .ok_or(())
                })
                .map_err(|_| format!("value {v} off grid"))
        };
        let mut values = vec![[f64::NAN, f64::NAN]; nx * ny1 * ny2];
        for (x, y1, y2, f) in &rows {
            let i = locate(&xs, *x)?;
            let j = locate(&y1s, *y1)?;
            let k = locate(&y2s, *y2)?;
            values[(i * ny1 + j) * ny2 + k] = *f;
        }
        if values.iter().any(|v| v[0].is_nan()) {
            return Err("grid has missing nodes (duplicate rows elsewhere)".into());
        }
        Ok(Self {
            xs,
            y1s,
            y2s,
            values,
        })
    }

    pub fn bounding_box(&self) -> Box3 {
        use crate::domain::Interval;
        Box3 {
            x: Interval {
                lo: self.xs[0],
                hi: *self.xs.last().unwrap(),
            },
            y1: Interval {
                lo: self.y1s[0],
                hi: *self.y1s.last().unwrap(),
            },
            y2: Interval {
                lo: self.y2s[0],
                hi: *self.y2s.last().unwrap(),
            },
        }
    }

    fn at(&self, i: usize, j: usize, k: usize) -> [f64; 2] {
        self.values[(i * self.y1s.len() + j) * self.y2s.len() + k]
    }
}

fn bracket(vals: &[f64], v: f64) -> (usize, f64) {
    let v = v.clamp(vals[0], *vals.last().unwrap());
    let i = match vals.binary_search_by(|p| p.total_cmp(&v)) {
        Ok(i) => i.min(vals.len() - 2),
        Err(i) => i.saturating_sub(1).min(vals.len() - 2),
    };
    let w = (v - vals[i]) / (vals[i + 1] - vals[i]);
    (i, w)
}

impl SlopeField3D for SampledField3D {
    fn eval(&self, x: f64, y: [f64; 2]) -> [f64; 2] {
        let (i, wx) = bracket(&self.xs, x);
        let (j, w1) = bracket(&self.y1s, y[0]);
        let (k, w2) = bracket(&self.y2s, y[1]);
        let mut out = [0.0; 2];
        for (di, fx) in [(0, 1.0 - wx), (1, wx)] {
            for (dj, f1) in [(0, 1.0 - w1), (1, w1)] {
                for (dk, f2) in [(0, 1.0 - w2), (1, w2)] {
                    let v = self.at(i + di, j + dj, k + dk);
                    let w = fx * f1 * f2;
                    out[0] += w * v[0];
                    out[1] += w * v[1];
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Interval;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(12)
    }

    fn unit_box2() -> Box2 {
        Box2::new(
            Interval::new(-1.0, 1.0).unwrap(),
            Interval::new(0.0, 0.5).unwrap(),
        )
    }

    #[test]
    fn constant_field_gives_zero_l() {
        let f = FnField2D(|_x, _y| 3.0);
        let est = estimate_log_lipschitz_2d(&f, &unit_box2(), 1000, &mut rng()).unwrap();
        assert_eq!(est.l, 0.0);
        assert_eq!(est.l_effective, L_FLOOR);
    }

    #[test]
    fn osgood_field_ratio_approaches_one() {
        // F(x,y) = y log(1/y): the modulus ratio tends to 1 as y -> 0.
        let f = FnField2D(|_x, y: f64| if y > 0.0 { y * (1.0 / y).ln() } else { 0.0 });
        let dom = Box2::new(
            Interval::new(-1.0, 1.0).unwrap(),
            Interval::new(0.0, 0.5).unwrap(),
        );
        let est = estimate_log_lipschitz_2d(&f, &dom, 5000, &mut rng()).unwrap();
        assert!(est.l > 0.9 && est.l < 1.05, "L = {}", est.l);
    }

    #[test]
    fn linear_field_l_matches_one_dimensional_maximum() {
        // F(x,y) = 2y: sup_t 2t / (t log 1/t) = 2 / log 2 at t = 1/2.
        let f = FnField2D(|_x, y: f64| 2.0 * y);
        let dom = Box2::new(
            Interval::new(0.0, 1.0).unwrap(),
            Interval::new(0.0, 0.5).unwrap(),
        );
        // Brute-force oracle over a separation grid.
        let mut oracle: f64 = 0.0;
        for i in 1..=10_000 {
            let t = 0.5 * i as f64 / 10_000.0;
            if t > SEP_MIN {
                oracle = oracle.max(2.0 * t / (t * (1.0 / t).ln()));
            }
        }
        assert!((oracle - 2.0 / 2.0f64.ln()).abs() < 1e-3);
        let est = estimate_log_lipschitz_2d(&f, &dom, 5000, &mut rng()).unwrap();
        assert!((est.l - oracle).abs() < 0.02, "L = {} vs {}", est.l, oracle);
    }

    #[test]
    fn basic_assumption_flat_family_passes() {
        let f = FnField2D(|_x, _y| 0.0);
        let rep =
            check_basic_assumption_2d(&f, &unit_box2(), L_FLOOR, 500, 0.05, &mut rng()).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.measured, 0.0);
    }

    #[test]
    fn sampled_field_parses_and_interpolates() {
        let mut text = String::from("2 2 2\n");
        for x in [0.0, 1.0] {
            for y1 in [0.0, 1.0] {
                for y2 in [0.0, 1.0] {
                    // F = (x + y1, y2)
                    text.push_str(&format!("{x} {y1} {y2} {} {}\n", x + y1, y2));
                }
            }
        }
        let f = SampledField3D::parse(&text).unwrap();
        let v = f.eval(0.5, [0.25, 0.75]);
        assert!((v[0] - 0.75).abs() < 1e-12);
        assert!((v[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn sampled_field_rejects_bad_row_count() {
        let text = "2 2 2\n0 0 0 1 1\n";
        assert!(SampledField3D::parse(text).is_err());
    }
}
