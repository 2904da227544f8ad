use serde::{Deserialize, Serialize};

use crate::{steps_in, ControlError, ControlSamples};

/// Beyond this many smoothing lengths outside `[0, 2 step]` the tent is set to zero
/// (its tail is below `1e-17` there).
const TAIL_CUTOFF: f64 = 40.0;

/// `ln cosh x`, written to stay finite for large `|x|`.
#[inline]
pub fn lncosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Logistic cutoff `1 / (1 + exp(g / s))`.
#[inline]
pub fn eta(g: f64, s: f64) -> f64 {
    0.5 * (1.0 - (0.5 * g / s).tanh())
}

/// Trigonometric spatial function `l` with exponential cutoff on the normalized interval `[-1, 1]`.
pub fn spatial_trig(l: usize, g: f64, s: f64) -> f64 {
    let k = ((l + 1) / 2) as f64;
    let phase = std::f64::consts::PI * (0.5 * l as f64 + k * (g - 1.0));
    eta(g - 1.0, s) * eta(-g - 1.0, s) * phase.cos()
}

/// Smoothed unit tent on `[0, 2 step]` peaking at `step`; `d` is the smoothing length.
pub fn theta(t: f64, step: f64, d: f64) -> f64 {
    if t < -TAIL_CUTOFF * d || t > 2.0 * step + TAIL_CUTOFF * d {
        return 0.0;
    }
    let pre = (d / step) / -(-step / d).exp_m1();
    let h = 0.5 / d;
    pre * (lncosh((2.0 * step - t) * h) + lncosh(t * h) - 2.0 * lncosh((step - t) * h))
}

/// `int_{-inf}^t theta`, by composite 5-point Gauss-Legendre on panels of width `d / 2`.
pub fn theta_integral(t: f64, step: f64, d: f64) -> f64 {
    let lo = -TAIL_CUTOFF * d;
    let hi = 2.0 * step + TAIL_CUTOFF * d;
    if t <= lo {
        return 0.0;
    }
    gauss_legendre(|s| theta(s, step, d), lo, t.min(hi), 0.5 * d)
}

const GL5_X: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const GL5_W: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
    0.236_926_885_056_189_1,
];

fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panel: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let n = ((b - a) / panel).ceil().max(1.0) as usize;
    let h = (b - a) / n as f64;
    let mut acc = 0.0;
    for p in 0..n {
        let mid = a + (p as f64 + 0.5) * h;
        let mut s = 0.0;
        for (x, w) in GL5_X.iter().zip(GL5_W.iter()) {
            s += w * f(mid + 0.5 * h * x);
        }
        acc += 0.5 * h * s;
    }
    acc
}

/// A smoothed tent with fixed spacing and smoothing length.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TentShape {
    pub step: f64,
    pub d: f64,
}

impl TentShape {
    pub fn eval(&self, t: f64) -> f64 {
        theta(t, self.step, self.d)
    }

    pub fn primitive(&self, t: f64) -> f64 {
        theta_integral(t, self.step, self.d)
    }

    /// Total mass in closed form: the log-cosh corrections integrate to zero.
    pub fn mass(&self) -> f64 {
        self.step / -(-self.step / self.d).exp_m1()
    }

    /// Primitive sampled at `t0 + n dt`, `n < count`, accumulated interval by interval.
    pub fn primitive_on_grid(&self, t0: f64, dt: f64, count: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(count);
        if count == 0 {
            return out;
        }
        let mut acc = self.primitive(t0);
        out.push(acc);
        let hi = 2.0 * self.step + TAIL_CUTOFF * self.d;
        let lo = -TAIL_CUTOFF * self.d;
        for n in 1..count {
            let a = t0 + (n - 1) as f64 * dt;
            let b = t0 + n as f64 * dt;
            let (a, b) = (a.max(lo), b.min(hi));
            acc += gauss_legendre(|s| self.eval(s), a, b, 0.5 * self.d);
            out.push(acc);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpatialFamily {
    /// Cutoff trigonometric functions.
    Trig,
    /// Smoothed tents with spacing `2 / n_gamma` on the normalized interval.
    Tent,
}

/// Basis section of the pipeline configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BasisSpec {
    pub family: SpatialFamily,
    pub n_gamma: usize,
    pub n_t: usize,
    /// Cutoff scale of the trigonometric family (normalized units).
    pub s: f64,
    /// Smoothing length of the temporal tent is `step / d_divisor`.
    pub d_divisor: f64,
    /// Temporal offset; by default `2 d ln(1/offset_eps)` rounded up to the time step.
    pub delta: Option<f64>,
    pub offset_eps: f64,
}

impl Default for BasisSpec {
    fn default() -> Self {
        BasisSpec {
            family: SpatialFamily::Trig,
            n_gamma: 16,
            n_t: 16,
            s: 1.0 / 32.0,
            d_divisor: 64.0,
            delta: None,
            offset_eps: 1e-6,
        }
    }
}

/// Resolved basis: `f_k(gamma, t) = phi_l(gamma) psi_m(t)` with `k = m n_gamma + l`
/// and `psi_m(t) = theta(t - m step - delta)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlBasis {
    pub family: SpatialFamily,
    pub n_gamma: usize,
    pub n_t: usize,
    pub s: f64,
    pub d: f64,
    pub delta: f64,
    /// Temporal spacing `horizon / n_t`.
    pub step: f64,
    pub half_width: f64,
    pub horizon: f64,
    pub dt: f64,
    tent_space: TentShape,
}

impl ControlBasis {
    /// Resolves `spec` for horizon `T`, boundary segment `[-half_width, half_width]` and
    /// time step `dt`, which must divide `T / n_t`.
    pub fn new(spec: &BasisSpec, horizon: f64, half_width: f64, dt: f64) -> Result<Self, ControlError> {
        if spec.n_t == 0 {
            return Err(ControlError::Parameter("n_t must be positive".into()));
        }
        for (name, v) in [("horizon", horizon), ("half_width", half_width), ("dt", dt), ("s", spec.s), ("d_divisor", spec.d_divisor)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(ControlError::Parameter(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(spec.offset_eps > 0.0 && spec.offset_eps < 1.0) {
            return Err(ControlError::Parameter(format!("offset_eps must lie in (0, 1), got {}", spec.offset_eps)));
        }
        let step = horizon / spec.n_t as f64;
        if steps_in(step, dt).is_none() {
            return Err(ControlError::Misaligned { dt, what: "temporal spacing", value: step });
        }
        let d = step / spec.d_divisor;
        let raw = match spec.delta {
            Some(v) if v >= 0.0 && v.is_finite() => v,
            Some(v) => return Err(ControlError::Parameter(format!("delta must be non-negative, got {v}"))),
            None => 2.0 * d * (1.0 / spec.offset_eps).ln(),
        };
        let delta = (raw / dt - 1e-9).ceil().max(0.0) * dt;
        let hs = 2.0 / spec.n_gamma.max(1) as f64;
        Ok(ControlBasis {
            family: spec.family,
            n_gamma: spec.n_gamma,
            n_t: spec.n_t,
            s: spec.s,
            d,
            delta,
            step,
            half_width,
            horizon,
            dt,
            tent_space: TentShape { step: hs, d: hs / spec.d_divisor },
        })
    }

    pub fn len(&self) -> usize {
        self.n_gamma * self.n_t
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, l: usize, m: usize) -> usize {
        m * self.n_gamma + l
    }

    /// `(l, m)` of basis index `k`.
    #[inline]
    pub fn split(&self, k: usize) -> (usize, usize) {
        (k % self.n_gamma, k / self.n_gamma)
    }

    pub fn temporal_shape(&self) -> TentShape {
        TentShape { step: self.step, d: self.d }
    }

    /// Samples of `dt` in one temporal spacing.
    pub fn step_samples(&self) -> usize {
        steps_in(self.step, self.dt).expect("alignment checked at construction")
    }

    pub fn delta_samples(&self) -> usize {
        steps_in(self.delta, self.dt).expect("offset rounded at construction")
    }

    /// Spatial function `l` at physical coordinate `gamma`.
    pub fn spatial(&self, l: usize, gamma: f64) -> f64 {
        let g = gamma / self.half_width;
        match self.family {
            SpatialFamily::Trig => spatial_trig(l, g, self.s),
            SpatialFamily::Tent => {
                let hs = self.tent_space.step;
                let centre = -1.0 + (l as f64 + 0.5) * hs;
                self.tent_space.eval(g - centre + hs)
            }
        }
    }

    pub fn temporal(&self, m: usize, t: f64) -> f64 {
        theta(t - m as f64 * self.step - self.delta, self.step, self.d)
    }

    pub fn eval(&self, k: usize, gamma: f64, t: f64) -> f64 {
        let (l, m) = self.split(k);
        self.spatial(l, gamma) * self.temporal(m, t)
    }

    /// Physical half-width outside which every spatial function is below `1e-8`.
    pub fn support_half_width(&self) -> f64 {
        let ext = match self.family {
            SpatialFamily::Trig => 20.0 * self.s,
            SpatialFamily::Tent => 0.5 * self.tent_space.step + 20.0 * self.tent_space.d,
        };
        self.half_width * (1.0 + ext)
    }

    /// Time at which tent `m` has fully decayed.
    pub fn tent_end(&self, m: usize) -> f64 {
        m as f64 * self.step + self.delta + 2.0 * self.step
    }

    /// Basis indices of the delayed family for `xi = j step`: the temporal indices
    /// `m >= n_t - j`, whose tents start no earlier than `T - xi`.
    pub fn delayed_family(&self, j: usize) -> Vec<usize> {
        let j = j.min(self.n_t);
        ((self.n_t - j)..self.n_t)
            .flat_map(|m| (0..self.n_gamma).map(move |l| (m, l)))
            .map(|(m, l)| self.index(l, m))
            .collect()
    }

    /// Samples `f_k` on `gammas x {n dt}` for `n < n_time`.
    pub fn sample(&self, k: usize, gammas: &[f64], dgamma: f64, n_time: usize) -> ControlSamples {
        let (l, m) = self.split(k);
        let phi: Vec<f64> = gammas.iter().map(|&g| self.spatial(l, g)).collect();
        let psi: Vec<f64> = (0..n_time).map(|n| self.temporal(m, n as f64 * self.dt)).collect();
        let mut out = ControlSamples::zeros(gammas.len(), n_time, dgamma, self.dt);
        for (g, &p) in phi.iter().enumerate() {
            for (v, &q) in out.row_mut(g).iter_mut().zip(psi.iter()) {
                *v = p * q;
            }
        }
        out
    }
}
