//! Schwarz's lantern: the polyhedron of `2mn` congruent isosceles triangles
//! inscribed in a cylinder of radius `r` and height `H`, whose area need not
//! converge to `2πrH`.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::rate::{fit_finest_half, RateFit};
use crate::trigeo::Triangle;

/// Largest `m * n` the explicit 3D construction accepts.
pub const ORACLE_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanternParams {
    pub m: u64,
    pub n: u64,
    pub r: f64,
    pub h: f64,
}

impl LanternParams {
    pub fn new(m: u64, n: u64, r: f64, h: f64) -> Result<Self> {
        if m < 1 || n < 1 || !(r > 0.0) || !(h > 0.0) || !r.is_finite() || !h.is_finite() {
            return Err(Error::Domain(format!("lantern needs m, n >= 1 and r, H > 0; got m={m} n={n} r={r} H={h}")));
        }
        Ok(Self { m, n, r, h })
    }

    pub fn unit(m: u64, n: u64) -> Self {
        Self { m, n, r: 1.0, h: 1.0 }
    }

    pub fn cylinder_area(&self) -> f64 {
        2.0 * PI * self.r * self.h
    }

    /// Base `2r sin(π/n)` and height of one triangle.
    pub fn triangle_base_height(&self) -> (f64, f64) {
        let n = self.n as f64;
        let base = 2.0 * self.r * (PI / n).sin();
        // 1 - cos(π/n) written as 2 sin^2(π/2n) to avoid cancellation.
        let sag = 2.0 * self.r * (PI / (2.0 * n)).sin().powi(2);
        let height = (self.h / self.m as f64).hypot(sag);
        (base, height)
    }
}

/// `A_E = 2mnr sin(π/n) sqrt((H/m)^2 + r^2 (1 - cos(π/n))^2)`.
pub fn lantern_area(p: &LanternParams) -> f64 {
    let (base, height) = p.triangle_base_height();
    p.m as f64 * p.n as f64 * base * height
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

/// Circumradius of each lantern triangle, in the sinc form
/// `(H^2/m + π^2 r^2 (m/n^2) s^2) / (2 sqrt(H^2 + π^4 r^2/4 (m/n^2)^2 s^4))`
/// with `s = sin(π/2n) / (π/2n)`.
pub fn lantern_circumradius(p: &LanternParams) -> f64 {
    let (m, n) = (p.m as f64, p.n as f64);
    let q = m / (n * n);
    let s2 = sinc(PI / (2.0 * n)).powi(2);
    let num = p.h * p.h / m + PI * PI * p.r * p.r * q * s2;
    let den = 2.0 * (p.h * p.h + 0.25 * PI.powi(4) * p.r * p.r * q * q * s2 * s2).sqrt();
    num / den
}

/// Planar isosceles triangle congruent to the lantern triangles.
pub fn lantern_planar_triangle(p: &LanternParams) -> Triangle {
    let (base, height) = p.triangle_base_height();
    Triangle::isosceles(base, height)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleResult {
    pub area: f64,
    pub max_circumradius: f64,
    pub triangles: u64,
}

type P3 = [f64; 3];

fn sub3(a: P3, b: P3) -> P3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm3(a: P3) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

fn cross3(a: P3, b: P3) -> P3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Builds every triangle on the cylinder and sums areas from cross products;
/// circumradii come from edge lengths as `abc / 4S`.
pub fn lantern_oracle(p: &LanternParams) -> Result<OracleResult> {
    if p.n < 2 {
        return Err(Error::Domain("lantern with n = 1 has zero-area triangles".into()));
    }
    if p.m.saturating_mul(p.n) > ORACLE_CAP {
        return Err(Error::SizeCap {
            size: p.m.saturating_mul(p.n),
            cap: ORACLE_CAP,
        });
    }
    let (m, n) = (p.m as usize, p.n as usize);
    let vertex = |j: usize, k: usize| -> P3 {
        let theta = (2 * k + j % 2) as f64 * PI / n as f64;
        [p.r * theta.cos(), p.r * theta.sin(), j as f64 * p.h / m as f64]
    };
    let mut area = 0.0;
    let mut max_r: f64 = 0.0;
    let mut count = 0u64;
    let mut add = |a: P3, b: P3, c: P3| {
        let s = 0.5 * norm3(cross3(sub3(b, a), sub3(c, a)));
        let (ea, eb, ec) = (norm3(sub3(b, c)), norm3(sub3(c, a)), norm3(sub3(a, b)));
        area += s;
        max_r = max_r.max(ea * eb * ec / (4.0 * s));
        count += 1;
    };
    for j in 0..m {
        for k in 0..n {
            let k1 = (k + 1) % n;
            let (l0, l1, u0, u1) = (vertex(j, k), vertex(j, k1), vertex(j + 1, k), vertex(j + 1, k1));
            if j % 2 == 0 {
                // Upper row shifted by +π/n: u0 sits above the gap l0..l1.
                add(l0, l1, u0);
                add(u0, l1, u1);
            } else {
                // Lower row shifted: l0 sits below the gap u0..u1.
                add(l0, u1, u0);
                add(l0, l1, u1);
            }
        }
    }
    Ok(OracleResult {
        area,
        max_circumradius: max_r,
        triangles: count,
    })
}

/// `m(n) = floor(n^beta)`, at least 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequenceRule {
    pub beta: f64,
}

impl SequenceRule {
    pub fn power(beta: f64) -> Result<Self> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::Domain(format!("sequence exponent must be >= 0, got {beta}")));
        }
        Ok(Self { beta })
    }

    pub fn m(&self, n: u64) -> u64 {
        // The nudge keeps exact powers such as 16^2 from flooring to 255.
        ((n as f64).powf(self.beta) * (1.0 + 1e-12)).floor().max(1.0) as u64
    }
}

impl fmt::Display for SequenceRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m=n^{}", self.beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanternRow {
    pub n: u64,
    pub m: u64,
    pub m_over_n2: f64,
    pub a_e: f64,
    pub r: f64,
    pub area_gap_to_cylinder: f64,
}

pub fn lantern_row(p: &LanternParams) -> LanternRow {
    let a_e = lantern_area(p);
    LanternRow {
        n: p.n,
        m: p.m,
        m_over_n2: p.m as f64 / (p.n as f64 * p.n as f64),
        a_e,
        r: lantern_circumradius(p),
        area_gap_to_cylinder: (a_e - p.cylinder_area()).abs(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitClass {
    ConvergesToCylinder,
    ConvergesElsewhere,
    Diverges,
}

impl fmt::Display for LimitClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LimitClass::ConvergesToCylinder => "converges-to-cylinder",
            LimitClass::ConvergesElsewhere => "converges-elsewhere",
            LimitClass::Diverges => "diverges",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub rows: Vec<LanternRow>,
    /// Verdict read from the trend of `m/n^2`.
    pub from_ratio: LimitClass,
    /// Whether `R` tends to zero.
    pub radius_to_zero: bool,
    /// Verdict read from `A_E`.
    pub from_area: LimitClass,
    pub ratio_slope: f64,
    pub radius_slope: f64,
    pub gap_slope: f64,
    pub area_slope: f64,
    /// Relative change of `A_E` between the last two samples.
    pub cauchy: f64,
}

impl Classification {
    pub fn verdict(&self) -> LimitClass {
        self.from_ratio
    }

    /// `A_E -> 2πrH  <=>  m/n^2 -> 0  <=>  R -> 0`, and the ratio and area
    /// verdicts agree on the remaining cases.
    pub fn equivalence_holds(&self) -> bool {
        let cyl = self.from_ratio == LimitClass::ConvergesToCylinder;
        cyl == self.radius_to_zero && self.from_ratio == self.from_area
    }
}

/// Trend threshold on fitted log-log slopes.
pub const SLOPE_TOL: f64 = 0.02;
/// Cauchy criterion for finite limits.
pub const CAUCHY_TOL: f64 = 0.05;

/// `n = 16, 32, ...` up to `n_max`; `[n_max]` when `n_max < 16`.
pub fn sample_ns(n_max: u64) -> Vec<u64> {
    let mut ns = Vec::new();
    let mut n = 16;
    while n <= n_max {
        ns.push(n);
        n *= 2;
    }
    if ns.is_empty() && n_max >= 1 {
        ns.push(n_max);
    }
    ns
}

fn slope(rows: &[LanternRow], y: impl Fn(&LanternRow) -> f64) -> Option<RateFit> {
    let xs: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let ys: Vec<f64> = rows.iter().map(y).collect();
    fit_finest_half(&xs, &ys)
}

fn trend(s: f64) -> LimitClass {
    if s < -SLOPE_TOL {
        LimitClass::ConvergesToCylinder
    } else if s > SLOPE_TOL {
        LimitClass::Diverges
    } else {
        LimitClass::ConvergesElsewhere
    }
}

/// Estimates the limits of `m/n^2`, `R` and `A_E` along the rule, on a
/// unit cylinder, from log-log trends over the finest half of the samples.
pub fn classify_sequence(rule: &SequenceRule, n_max: u64) -> Result<Classification> {
    classify_sequence_with(rule, n_max, 1.0, 1.0)
}

pub fn classify_sequence_with(rule: &SequenceRule, n_max: u64, r: f64, h: f64) -> Result<Classification> {
    let ns = sample_ns(n_max);
    let rows: Vec<LanternRow> = ns
        .iter()
        .map(|&n| LanternParams::new(rule.m(n), n, r, h).map(|p| lantern_row(&p)))
        .collect::<Result<_>>()?;
    if rows.len() < 3 {
        return Err(Error::Inconclusive(format!(
            "{rule}: {} sample(s) up to n = {n_max}; need n_max >= 64",
            rows.len()
        )));
    }
    let fit = |y: &dyn Fn(&LanternRow) -> f64| {
        slope(&rows, y).ok_or_else(|| Error::Inconclusive(format!("{rule}: degenerate trend data")))
    };
    let ratio_slope = fit(&|r| r.m_over_n2)?.slope;
    let radius_slope = fit(&|r| r.r)?.slope;
    let area_slope = fit(&|r| r.a_e)?.slope;
    // An exactly reproduced cylinder cannot happen for n >= 2; guard anyway.
    let gap_slope = fit(&|r| r.area_gap_to_cylinder.max(f64::MIN_POSITIVE))?.slope;

    let from_ratio = trend(ratio_slope);
    let radius_to_zero = radius_slope < -SLOPE_TOL;
    let from_area = if gap_slope < -SLOPE_TOL {
        LimitClass::ConvergesToCylinder
    } else if area_slope > SLOPE_TOL {
        LimitClass::Diverges
    } else {
        LimitClass::ConvergesElsewhere
    };
    let last = rows[rows.len() - 1].a_e;
    let prev = rows[rows.len() - 2].a_e;
    let cauchy = (last - prev).abs() / last.abs();
    if from_area != LimitClass::Diverges && cauchy > CAUCHY_TOL {
        return Err(Error::Inconclusive(format!(
            "{rule}: A_E changed by {:.2}% between n = {} and n = {}",
            100.0 * cauchy,
            rows[rows.len() - 2].n,
            rows[rows.len() - 1].n
        )));
    }
    Ok(Classification {
        rows,
        from_ratio,
        radius_to_zero,
        from_area,
        ratio_slope,
        radius_slope,
        gap_slope,
        area_slope,
        cauchy,
    })
}
