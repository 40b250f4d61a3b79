//! Finite-difference derivatives used to measure leafwise smoothness.

/// Plain central difference.
pub fn central<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Central difference with one Richardson extrapolation level.
///
/// Combines steps `h` and `h/2`, cancelling the leading O(h^2) error term.
pub fn central_richardson<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
    let h2 = 0.5 * h;
    let d2 = (f(x + h2) - f(x - h2)) / (2.0 * h2);
    (4.0 * d2 - d1) / 3.0
}

/// Vector-valued central difference with one Richardson level.
pub fn central_richardson2<F: Fn(f64) -> [f64; 2]>(f: F, x: f64, h: f64) -> [f64; 2] {
    let (p1, m1) = (f(x + h), f(x - h));
    let h2 = 0.5 * h;
    let (p2, m2) = (f(x + h2), f(x - h2));
    let mut out = [0.0; 2];
    for k in 0..2 {
        let d1 = (p1[k] - m1[k]) / (2.0 * h);
        let d2 = (p2[k] - m2[k]) / (2.0 * h2);
        out[k] = (4.0 * d2 - d1) / 3.0;
    }
    out
}

/// Default step for leafwise differentiation: 1e-5 of the domain width.
pub fn default_step(domain_width: f64) -> f64 {
    1e-5 * domain_width.max(1e-3)
}
