use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Grid, MediumError, MediumField, Provenance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    Test1,
    Test2,
    Test3,
    Test4,
    Test5,
    Custom,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Test1 => "test1",
            ScenarioKind::Test2 => "test2",
            ScenarioKind::Test3 => "test3",
            ScenarioKind::Test4 => "test4",
            ScenarioKind::Test5 => "test5",
            ScenarioKind::Custom => "custom",
        }
    }
}

/// Density wedge of the fifth test: a cone with its apex facing the boundary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WedgeSpec {
    pub apex_x1: f64,
    pub apex_x2: f64,
    /// Half opening angle in degrees, measured from the downward vertical.
    pub half_angle_deg: f64,
    pub density: f64,
    /// Mollification half-width in grid cells.
    pub smoothing_cells: f64,
}

impl Default for WedgeSpec {
    fn default() -> Self {
        WedgeSpec { apex_x1: 0.0, apex_x2: -0.3, half_angle_deg: 30.0, density: 5.0, smoothing_cells: 2.0 }
    }
}

/// Gaussian density bump `a * exp(-(x1-x1c)^2/(2 w1^2) - (x2-x2c)^2/(2 w2^2))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bump {
    pub a: f64,
    pub x1: f64,
    pub x2: f64,
    pub w1: f64,
    pub w2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub a: Option<f64>,
    pub xbar1: Option<f64>,
    pub xbar2: Option<f64>,
    pub delta1: Option<f64>,
    pub delta2: Option<f64>,
    /// Rotation angle of the fourth test, radians.
    pub phi: Option<f64>,
    /// Observation horizon T.
    pub horizon: f64,
    /// Half-width L of the controlled boundary patch.
    pub half_width: f64,
    pub n_gamma: usize,
    pub n_t: usize,
    pub wedge: WedgeSpec,
    /// Background speed of the custom scenario.
    pub background_speed: f64,
    pub bumps: Vec<Bump>,
    /// A priori speed bound; computed from the field when absent.
    pub c_star: Option<f64>,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec::preset(ScenarioKind::Test1)
    }
}

/// Test parameters after defaults have been filled in.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Shape {
    pub a: f64,
    pub xbar1: f64,
    pub xbar2: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub phi: f64,
}

impl ScenarioSpec {
    /// Parameters of the published test cases.
    pub fn preset(kind: ScenarioKind) -> Self {
        let (horizon, n_t) = match kind {
            ScenarioKind::Test2 | ScenarioKind::Test3 => (1.5, 32),
            ScenarioKind::Test1 | ScenarioKind::Custom => (1.0, 16),
            ScenarioKind::Test4 | ScenarioKind::Test5 => (1.0, 32),
        };
        ScenarioSpec {
            kind,
            a: None,
            xbar1: None,
            xbar2: None,
            delta1: None,
            delta2: None,
            phi: None,
            horizon,
            half_width: 1.0,
            n_gamma: 16,
            n_t,
            wedge: WedgeSpec::default(),
            background_speed: 1.0,
            bumps: Vec::new(),
            c_star: None,
        }
    }

    pub fn shape(&self) -> Shape {
        let d = match self.kind {
            ScenarioKind::Test1 => Shape { a: 1.0, xbar1: 0.0, xbar2: -0.5, delta1: 0.5, delta2: 0.5, phi: 0.0 },
            ScenarioKind::Test2 | ScenarioKind::Test3 => {
                Shape { a: 0.25, xbar1: 0.0, xbar2: -0.5, delta1: 0.5, delta2: 0.25, phi: 0.0 }
            }
            ScenarioKind::Test4 => Shape { a: 0.25, xbar1: 0.0, xbar2: 0.0, delta1: 0.375, delta2: 0.25, phi: PI / 12.0 },
            ScenarioKind::Test5 | ScenarioKind::Custom => {
                Shape { a: 0.0, xbar1: 0.0, xbar2: 0.0, delta1: 1.0, delta2: 1.0, phi: 0.0 }
            }
        };
        Shape {
            a: self.a.unwrap_or(d.a),
            xbar1: self.xbar1.unwrap_or(d.xbar1),
            xbar2: self.xbar2.unwrap_or(d.xbar2),
            delta1: self.delta1.unwrap_or(d.delta1),
            delta2: self.delta2.unwrap_or(d.delta2),
            phi: self.phi.unwrap_or(d.phi),
        }
    }

    pub fn validate(&self) -> Result<(), MediumError> {
        let bad = |m: String| Err(MediumError::Parameter(m));
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return bad(format!("horizon must be positive, got {}", self.horizon));
        }
        if !(self.half_width > 0.0) || !self.half_width.is_finite() {
            return bad(format!("half_width must be positive, got {}", self.half_width));
        }
        let s = self.shape();
        if !(s.delta1 > 0.0 && s.delta2 > 0.0) {
            return bad(format!("Gaussian widths must be positive, got {} and {}", s.delta1, s.delta2));
        }
        if !s.a.is_finite() || s.a.abs() > 10.0 {
            return bad(format!("amplitude a = {} outside [-10, 10]", s.a));
        }
        if s.phi.abs() >= PI / 2.0 {
            return bad(format!("rotation angle {} outside (-pi/2, pi/2)", s.phi));
        }
        if self.kind == ScenarioKind::Test5 {
            let w = &self.wedge;
            if !(w.half_angle_deg > 0.0 && w.half_angle_deg < 90.0) {
                return bad(format!("wedge half angle {} outside (0, 90) degrees", w.half_angle_deg));
            }
            if !(w.density > 0.0) || !(w.smoothing_cells >= 0.0) {
                return bad("wedge density must be positive and smoothing non-negative".into());
            }
            if w.apex_x2 > 0.0 {
                return bad(format!("wedge apex must lie in the half-plane, got x2 = {}", w.apex_x2));
            }
        }
        if self.kind == ScenarioKind::Custom {
            if !(self.background_speed > 0.0) {
                return bad(format!("background speed must be positive, got {}", self.background_speed));
            }
            if self.bumps.iter().any(|b| !(b.w1 > 0.0 && b.w2 > 0.0)) {
                return bad("bump widths must be positive".into());
            }
        }
        if let Some(c) = self.c_star {
            if !(c > 0.0) {
                return bad(format!("c_star must be positive, got {c}"));
            }
        }
        Ok(())
    }

    /// Closed-form density at a point; `h` is the grid spacing used by the wedge mollifier.
    pub fn density_at(&self, x1: f64, x2: f64, h: f64) -> f64 {
        let s = self.shape();
        let g = |x: f64, xb: f64, d: f64| (-(x - xb).powi(2) / (2.0 * d * d)).exp();
        let dg = |x: f64, xb: f64, d: f64| -(x - xb) / (d * d) * g(x, xb, d);
        match self.kind {
            ScenarioKind::Test1 => 1.0 + s.a * g(x1, s.xbar1, s.delta1) * g(x2, s.xbar2, s.delta2),
            ScenarioKind::Test2 => {
                1.0 - 0.5 * x2 + 0.0625 * x1 * x1 - s.a * g(x1, s.xbar1, s.delta1) * dg(x2, s.xbar2, s.delta2)
            }
            ScenarioKind::Test3 => {
                1.0 - 0.5 * x2 + 0.0625 * x1 * x1
                    + s.a * g(x1, s.xbar1, s.delta1) * (1.0 - x2) * dg(x2, s.xbar2, s.delta2)
            }
            ScenarioKind::Test4 => {
                let (sn, cs) = s.phi.sin_cos();
                let z1 = cs * x1 + sn * (x2 + 0.25);
                let z2 = -sn * x1 + cs * (x2 + 0.25);
                // chain rule: d/dx1 g1(z1) = g1'(z1) * cos(phi)
                1.0 - s.a * g(z2, s.xbar2, s.delta2) * dg(z1, s.xbar1, s.delta1) * cs
            }
            ScenarioKind::Test5 => {
                let w = &self.wedge;
                let d = wedge_distance(x1, x2, w);
                let width = w.smoothing_cells * h;
                1.0 + (w.density - 1.0) * smooth_step(-d, width)
            }
            ScenarioKind::Custom => {
                let base = 1.0 / (self.background_speed * self.background_speed);
                base + self
                    .bumps
                    .iter()
                    .map(|b| b.a * g(x1, b.x1, b.w1) * g(x2, b.x2, b.w2))
                    .sum::<f64>()
            }
        }
    }

    pub fn speed_at(&self, x1: f64, x2: f64, h: f64) -> f64 {
        self.density_at(x1, x2, h).powf(-0.5)
    }

    fn provenance(&self, h: f64) -> Provenance {
        let s = self.shape();
        let mut p = BTreeMap::new();
        p.insert("a".into(), s.a);
        p.insert("xbar1".into(), s.xbar1);
        p.insert("xbar2".into(), s.xbar2);
        p.insert("delta1".into(), s.delta1);
        p.insert("delta2".into(), s.delta2);
        p.insert("phi".into(), s.phi);
        p.insert("horizon".into(), self.horizon);
        p.insert("half_width".into(), self.half_width);
        p.insert("h".into(), h);
        if self.kind == ScenarioKind::Test5 {
            p.insert("wedge_apex_x1".into(), self.wedge.apex_x1);
            p.insert("wedge_apex_x2".into(), self.wedge.apex_x2);
            p.insert("wedge_half_angle_deg".into(), self.wedge.half_angle_deg);
            p.insert("wedge_density".into(), self.wedge.density);
            p.insert("wedge_smoothing_cells".into(), self.wedge.smoothing_cells);
        }
        Provenance { scenario: self.kind.name().to_string(), params: p }
    }
}

/// Signed distance to the wedge (negative inside).
fn wedge_distance(x1: f64, x2: f64, w: &WedgeSpec) -> f64 {
    let (sa, ca) = w.half_angle_deg.to_radians().sin_cos();
    let q1 = (x1 - w.apex_x1).abs();
    let q2 = w.apex_x2 - x2;
    if q1 * sa + q2 * ca < 0.0 {
        (q1 * q1 + q2 * q2).sqrt()
    } else {
        q1 * ca - q2 * sa
    }
}

/// C^1 cubic step from 0 (z <= -w) to 1 (z >= w).
fn smooth_step(z: f64, w: f64) -> f64 {
    if w <= 0.0 {
        return if z > 0.0 { 1.0 } else if z < 0.0 { 0.0 } else { 0.5 };
    }
    let u = (z / w).clamp(-1.0, 1.0);
    0.5 + 0.75 * u - 0.25 * u * u * u
}

/// Grid resolution and the extent of the controlled patch used to size the domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Resolution {
    pub h: f64,
    /// Effective half-width of the control support on the boundary.
    pub support_half_width: f64,
    pub margin: f64,
}

/// Half-width and depth of the rectangle that no reflected wave can cross
/// back into the measurement strip before `2T`.
pub fn fdi_extent(support_half_width: f64, c_star: f64, horizon: f64, margin: f64) -> (f64, f64) {
    (support_half_width + c_star * horizon + margin, c_star * horizon + margin)
}

pub fn make_scenario(spec: &ScenarioSpec, res: &Resolution) -> Result<MediumField, MediumError> {
    spec.validate()?;
    if !(res.h > 0.0) || !(res.support_half_width > 0.0) || !(res.margin >= 0.0) {
        return Err(MediumError::Parameter(format!("invalid resolution {res:?}")));
    }
    let c_star = match spec.c_star {
        Some(c) => c,
        None => estimate_c_star(spec, res)?,
    };
    let (half, depth) = fdi_extent(res.support_half_width, c_star, spec.horizon, res.margin);
    let grid = Grid::symmetric(half, depth, res.h)?;
    let mut c = Vec::with_capacity(grid.len());
    for j in 0..grid.n2 {
        for i in 0..grid.n1 {
            let rho = spec.density_at(grid.x1(i), grid.x2(j), res.h);
            if !(rho > 0.0) || !rho.is_finite() {
                return Err(MediumError::NonPositive { x1: grid.x1(i), x2: grid.x2(j), value: rho });
            }
            c.push(rho.powf(-0.5));
        }
    }
    MediumField::new(grid, c, c_star, spec.provenance(res.h))
}

/// Largest speed over the domain the bound itself implies; iterated to a fixed point.
fn estimate_c_star(spec: &ScenarioSpec, res: &Resolution) -> Result<f64, MediumError> {
    let mut c_star = 1.0f64;
    for _ in 0..20 {
        let (half, depth) = fdi_extent(res.support_half_width, c_star, spec.horizon, res.margin);
        let grid = Grid::symmetric(half, depth, res.h)?;
        let mut cmax = 0.0f64;
        for j in 0..grid.n2 {
            for i in 0..grid.n1 {
                let rho = spec.density_at(grid.x1(i), grid.x2(j), res.h);
                if !(rho > 0.0) {
                    return Err(MediumError::NonPositive { x1: grid.x1(i), x2: grid.x2(j), value: rho });
                }
                cmax = cmax.max(rho.powf(-0.5));
            }
        }
        if cmax <= c_star {
            return Ok(c_star);
        }
        c_star = cmax;
    }
    Ok(c_star)
}
