//! The cutoff used to blend between consecutive grid leaves.
//!
//! The cutoff equals 1 on [0, 1/4] and 0 on [3/4, 1]; in between the default
//! variant is a cubic smoothstep (C1, derivative bound 3). A C-infinity
//! exponential-bump variant is available behind [`ChiVariant::Bump`].

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ChiVariant {
    #[default]
    Cubic,
    Bump,
}

#[derive(Debug, Clone, Copy)]
pub struct CutoffChi {
    variant: ChiVariant,
    deriv_bound: f64,
}

impl CutoffChi {
    pub fn new(variant: ChiVariant) -> Self {
        let deriv_bound = match variant {
            ChiVariant::Cubic => 3.0,
            ChiVariant::Bump => {
                // No closed-form max; dense sample of |chi'| with headroom
                // covering the sampling error near the peak.
                let mut m: f64 = 0.0;
                for i in 0..=65_536 {
                    let t = i as f64 / 65_536.0;
                    m = m.max(bump_deriv(t).abs());
                }
                m * 1.0001
            }
        };
        Self {
            variant,
            deriv_bound,
        }
    }

    pub fn cubic() -> Self {
        Self::new(ChiVariant::Cubic)
    }

    pub fn variant(&self) -> ChiVariant {
        self.variant
    }

    /// chi(t): 1 below 1/4, 0 above 3/4, monotone decreasing in between.
    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.25 {
            return 1.0;
        }
        if t >= 0.75 {
            return 0.0;
        }
        match self.variant {
            ChiVariant::Cubic => {
                let u = 2.0 * (0.75 - t);
                u * u * (3.0 - 2.0 * u)
            }
            ChiVariant::Bump => bump_eval(t),
        }
    }

    pub fn deriv(&self, t: f64) -> f64 {
        if !(0.25..0.75).contains(&t) {
            return 0.0;
        }
        match self.variant {
            ChiVariant::Cubic => {
                let u = 2.0 * (0.75 - t);
                -12.0 * u * (1.0 - u)
            }
            ChiVariant::Bump => bump_deriv(t),
        }
    }

    /// Bound on |chi'| over [0, 1].
    pub fn deriv_bound(&self) -> f64 {
        self.deriv_bound
    }
}

fn edge(v: f64) -> f64 {
    if v <= 0.0 {
        0.0
    } else {
        (-1.0 / v).exp()
    }
}

fn bump_eval(t: f64) -> f64 {
    let u = 2.0 * (0.75 - t);
    let (a, b) = (edge(u), edge(1.0 - u));
    a / (a + b)
}

fn bump_deriv(t: f64) -> f64 {
    let u = 2.0 * (0.75 - t);
    if !(u > 0.0 && u < 1.0) {
        return 0.0;
    }
    let (a, b) = (edge(u), edge(1.0 - u));
    let da = a / (u * u);
    let db = -b / ((1.0 - u) * (1.0 - u));
    // d/du of a/(a+b), times du/dt = -2.
    let s = a + b;
    -2.0 * (da * s - a * (da + db)) / (s * s)
}
