//! Supporting curves of thin inclusions: evaluation, arclength, and the two
//! samplings used by the forward models (a fine quadrature and the coarse
//! half-wavelength segmentation).

use crate::error::{Error, Result};
use nalgebra::Vector2;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

pub type Vec2 = Vector2<f64>;

const FRAME_EPS: f64 = 1e-14;
/// Panels of the composite Gauss-Legendre rule used for arclength.
const ARCLENGTH_PANELS: usize = 256;
const GAUSS_ORDER: usize = 10;

fn default_z_range() -> [f64; 2] {
    [-0.5, 0.5]
}

/// Shape of a supporting curve.
///
/// `Sigma1` and `Sigma2` are the two analytic test curves
/// `(z - 0.2, -0.5 z^2 - 1.5)` and `(z + 0.2, z^3 + z^2 - 2.5)`.
/// `Points` is a discrete set of isolated nodes, each standing for a short
/// piece of inclusion of length `weight`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveShape {
    Sigma1 {
        #[serde(default = "default_z_range")]
        z_range: [f64; 2],
    },
    Sigma2 {
        #[serde(default = "default_z_range")]
        z_range: [f64; 2],
    },
    Polyline {
        vertices: Vec<[f64; 2]>,
    },
    Points {
        points: Vec<[f64; 2]>,
        weight: f64,
        /// Tangent angle per point (radians from the x1 axis); zero when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tangent_angles: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParametricCurve {
    pub label: String,
    pub shape: CurveShape,
    /// Half-thickness `h` of the layer around the curve.
    pub thickness: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSample {
    pub z: f64,
    pub point: Vec2,
    pub tangent: Vec2,
    pub normal: Vec2,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveFrame {
    pub point: Vec2,
    pub tangent: Vec2,
    pub normal: Vec2,
}

/// `n` is `tau` rotated by +90 degrees.
pub fn rotate_ccw(t: Vec2) -> Vec2 {
    Vec2::new(-t.y, t.x)
}

impl ParametricCurve {
    pub fn sigma1(thickness: f64) -> Self {
        Self {
            label: "sigma1".into(),
            shape: CurveShape::Sigma1 {
                z_range: default_z_range(),
            },
            thickness,
        }
    }

    pub fn sigma2(thickness: f64) -> Self {
        Self {
            label: "sigma2".into(),
            shape: CurveShape::Sigma2 {
                z_range: default_z_range(),
            },
            thickness,
        }
    }

    pub fn polyline(label: impl Into<String>, vertices: Vec<[f64; 2]>, thickness: f64) -> Self {
        Self {
            label: label.into(),
            shape: CurveShape::Polyline { vertices },
            thickness,
        }
    }

    pub fn points(
        label: impl Into<String>,
        points: Vec<[f64; 2]>,
        weight: f64,
        thickness: f64,
    ) -> Self {
        Self {
            label: label.into(),
            shape: CurveShape::Points {
                points,
                weight,
                tangent_angles: None,
            },
            thickness,
        }
    }

    pub fn z_range(&self) -> (f64, f64) {
        match &self.shape {
            CurveShape::Sigma1 { z_range } | CurveShape::Sigma2 { z_range } => {
                (z_range[0], z_range[1])
            }
            CurveShape::Polyline { vertices } => (0.0, vertices.len().saturating_sub(1) as f64),
            CurveShape::Points { points, .. } => (0.0, points.len().saturating_sub(1) as f64),
        }
    }

    /// Structural checks: parameter range, vertex counts, finite data,
    /// positive thickness, and that the curve stays strictly below `x2 = 0`.
    pub fn check(&self) -> Result<()> {
        let fail = |reason: String| {
            Err(Error::InvalidCurve {
                label: self.label.clone(),
                reason,
            })
        };
        if !(self.thickness.is_finite() && self.thickness > 0.0) {
            return fail(format!("thickness must be positive, got {}", self.thickness));
        }
        match &self.shape {
            CurveShape::Sigma1 { z_range } | CurveShape::Sigma2 { z_range } => {
                if !(z_range[0].is_finite() && z_range[1].is_finite() && z_range[0] < z_range[1]) {
                    return fail(format!("empty parameter range {z_range:?}"));
                }
            }
            CurveShape::Polyline { vertices } => {
                if vertices.len() < 2 {
                    return fail("a polyline needs at least two vertices".into());
                }
                if vertices.iter().flatten().any(|c| !c.is_finite()) {
                    return fail("non-finite vertex".into());
                }
                for w in vertices.windows(2) {
                    let d = Vec2::from(w[1]) - Vec2::from(w[0]);
                    if d.norm() <= FRAME_EPS {
                        return fail("repeated vertex gives a zero tangent".into());
                    }
                }
            }
            CurveShape::Points {
                points,
                weight,
                tangent_angles,
            } => {
                if points.is_empty() {
                    return fail("no points".into());
                }
                if points.iter().flatten().any(|c| !c.is_finite()) {
                    return fail("non-finite point".into());
                }
                if !(weight.is_finite() && *weight > 0.0) {
                    return fail(format!("point weight must be positive, got {weight}"));
                }
                if let Some(angles) = tangent_angles {
                    if angles.len() != points.len() {
                        return fail("tangent_angles length differs from points".into());
                    }
                }
            }
        }
        let top = self.max_depth_coordinate();
        if top >= 0.0 {
            return fail(format!(
                "curve reaches x2 = {top}, it must lie strictly below the interface"
            ));
        }
        Ok(())
    }

    /// Largest `x2` over the curve (dense check for analytic shapes).
    pub fn max_depth_coordinate(&self) -> f64 {
        match &self.shape {
            CurveShape::Polyline { vertices } => {
                vertices.iter().map(|v| v[1]).fold(f64::NEG_INFINITY, f64::max)
            }
            CurveShape::Points { points, .. } => {
                points.iter().map(|v| v[1]).fold(f64::NEG_INFINITY, f64::max)
            }
            _ => {
                let (lo, hi) = self.z_range();
                (0..=2000)
                    .map(|i| self.position(lo + (hi - lo) * i as f64 / 2000.0).y)
                    .fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    fn position(&self, z: f64) -> Vec2 {
        match &self.shape {
            CurveShape::Sigma1 { .. } => Vec2::new(z - 0.2, -0.5 * z * z - 1.5),
            CurveShape::Sigma2 { .. } => Vec2::new(z + 0.2, z * z * z + z * z - 2.5),
            CurveShape::Polyline { vertices } => {
                let (i, t) = polyline_piece(vertices.len(), z);
                let a = Vec2::from(vertices[i]);
                let b = Vec2::from(vertices[i + 1]);
                a + (b - a) * t
            }
            CurveShape::Points { points, .. } => Vec2::from(points[point_index(points.len(), z)]),
        }
    }

    fn derivative(&self, z: f64) -> Vec2 {
        match &self.shape {
            CurveShape::Sigma1 { .. } => Vec2::new(1.0, -z),
            CurveShape::Sigma2 { .. } => Vec2::new(1.0, 3.0 * z * z + 2.0 * z),
            CurveShape::Polyline { vertices } => {
                let (i, _) = polyline_piece(vertices.len(), z);
                Vec2::from(vertices[i + 1]) - Vec2::from(vertices[i])
            }
            CurveShape::Points { tangent_angles, points, .. } => {
                let angle = tangent_angles
                    .as_ref()
                    .map_or(0.0, |a| a[point_index(points.len(), z)]);
                Vec2::new(angle.cos(), angle.sin())
            }
        }
    }

    /// Point, unit tangent and unit normal at parameter `z`.
    pub fn eval(&self, z: f64) -> Result<CurveFrame> {
        let (lo, hi) = self.z_range();
        let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
        if !(z >= lo - slack && z <= hi + slack) {
            return Err(Error::OutOfRange { z, lo, hi });
        }
        let z = z.clamp(lo, hi);
        let d = self.derivative(z);
        let len = d.norm();
        if len <= FRAME_EPS {
            return Err(Error::InvalidCurve {
                label: self.label.clone(),
                reason: format!("zero tangent at z = {z}"),
            });
        }
        let tangent = d / len;
        Ok(CurveFrame {
            point: self.position(z),
            tangent,
            normal: rotate_ccw(tangent),
        })
    }

    /// Total length of the curve. For `Points` this is `count * weight`.
    pub fn arclength(&self) -> f64 {
        match &self.shape {
            CurveShape::Polyline { vertices } => vertices
                .windows(2)
                .map(|w| (Vec2::from(w[1]) - Vec2::from(w[0])).norm())
                .sum(),
            CurveShape::Points { points, weight, .. } => points.len() as f64 * weight,
            _ => {
                let (lo, hi) = self.z_range();
                self.integrate_speed(lo, hi)
            }
        }
    }

    fn integrate_speed(&self, a: f64, b: f64) -> f64 {
        let (lo, hi) = self.z_range();
        let width = (hi - lo) / ARCLENGTH_PANELS as f64;
        // Panel edges are fixed so s(z) is built from identical pieces.
        let first = (((a - lo) / width).floor() as usize).min(ARCLENGTH_PANELS - 1);
        let last = (((b - lo) / width).ceil() as usize).clamp(first + 1, ARCLENGTH_PANELS);
        (first..last)
            .map(|p| {
                let p0 = (lo + p as f64 * width).max(a);
                let p1 = (lo + (p + 1) as f64 * width).min(b);
                if p1 > p0 {
                    gauss_legendre_integrate(|z| self.derivative(z).norm(), p0, p1)
                } else {
                    0.0
                }
            })
            .sum()
    }

    /// Parameter at which the arclength from the start equals `s`.
    pub fn parameter_at_arclength(&self, s: f64) -> f64 {
        let (lo, hi) = self.z_range();
        match &self.shape {
            CurveShape::Polyline { vertices } => {
                let mut acc = 0.0;
                for (i, w) in vertices.windows(2).enumerate() {
                    let len = (Vec2::from(w[1]) - Vec2::from(w[0])).norm();
                    if s <= acc + len || i + 2 == vertices.len() {
                        return (i as f64 + ((s - acc) / len).clamp(0.0, 1.0)).min(hi);
                    }
                    acc += len;
                }
                hi
            }
            _ => {
                // Newton on s(z) - s with a bisection bracket.
                let (mut a, mut b) = (lo, hi);
                let total = self.integrate_speed(lo, hi);
                let mut z = lo + (hi - lo) * (s / total).clamp(0.0, 1.0);
                for _ in 0..100 {
                    let f = self.integrate_speed(lo, z) - s;
                    if f.abs() < 1e-14 * total.max(1.0) {
                        break;
                    }
                    if f > 0.0 {
                        b = z;
                    } else {
                        a = z;
                    }
                    let step = f / self.derivative(z).norm();
                    let candidate = z - step;
                    z = if candidate > a && candidate < b {
                        candidate
                    } else {
                        0.5 * (a + b)
                    };
                    if b - a < 1e-15 * (hi - lo) {
                        break;
                    }
                }
                z
            }
        }
    }

    fn sample_at(&self, z: f64, weight: f64) -> Result<CurveSample> {
        let frame = self.eval(z)?;
        Ok(CurveSample {
            z,
            point: frame.point,
            tangent: frame.tangent,
            normal: frame.normal,
            weight,
        })
    }

    fn point_samples(&self) -> Result<Vec<CurveSample>> {
        let CurveShape::Points { points, weight, .. } = &self.shape else {
            unreachable!("point_samples on a continuous curve");
        };
        (0..points.len())
            .map(|i| self.sample_at(i as f64, *weight))
            .collect()
    }

    /// `count` equal-arclength pieces, one node at each arclength midpoint.
    fn equal_arclength_midpoints(&self, count: usize) -> Result<Vec<CurveSample>> {
        let total = self.arclength();
        let piece = total / count as f64;
        (0..count)
            .map(|i| {
                let z = self.parameter_at_arclength((i as f64 + 0.5) * piece);
                self.sample_at(z, piece)
            })
            .collect()
    }

    /// Composite midpoint rule in arclength with node spacing at most
    /// `spacing`. Weights sum to the arclength. `Points` curves return
    /// their nodes unchanged.
    pub fn sample(&self, spacing: f64) -> Result<Vec<CurveSample>> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::Domain(format!("spacing must be positive, got {spacing}")));
        }
        self.check()?;
        if matches!(self.shape, CurveShape::Points { .. }) {
            return self.point_samples();
        }
        let count = piece_count(self.arclength(), spacing);
        self.equal_arclength_midpoints(count)
    }

    /// One representative node per piece of length about half a wavelength:
    /// `M = max(1, ceil(L / (wavelength / 2)))` arclength midpoints, each
    /// weighted `L / M`.
    pub fn segments(&self, wavelength: f64) -> Result<Vec<CurveSample>> {
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(Error::Domain(format!(
                "wavelength must be positive, got {wavelength}"
            )));
        }
        self.check()?;
        if matches!(self.shape, CurveShape::Points { .. }) {
            return self.point_samples();
        }
        let count = piece_count(self.arclength(), 0.5 * wavelength);
        self.equal_arclength_midpoints(count)
    }
}

/// `max(1, ceil(length / piece))`, tolerant to round-off at exact multiples.
fn piece_count(length: f64, piece: f64) -> usize {
    let ratio = length / piece;
    let count = (ratio * (1.0 - 1e-12)).ceil();
    (count as usize).max(1)
}

fn polyline_piece(vertex_count: usize, z: f64) -> (usize, f64) {
    let last = vertex_count - 2;
    let i = (z.floor().max(0.0) as usize).min(last);
    (i, z - i as f64)
}

fn point_index(count: usize, z: f64) -> usize {
    (z.round().max(0.0) as usize).min(count - 1)
}

pub fn eval_curve(curve: &ParametricCurve, z: f64) -> Result<CurveFrame> {
    curve.eval(z)
}

pub fn sample_curve(curve: &ParametricCurve, spacing: f64) -> Result<Vec<CurveSample>> {
    curve.sample(spacing)
}

pub fn split_into_segments(curve: &ParametricCurve, wavelength: f64) -> Result<Vec<CurveSample>> {
    curve.segments(wavelength)
}

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton on the Legendre recurrence).
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

fn gauss_legendre_integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    let rule = RULE.get_or_init(|| gauss_legendre(GAUSS_ORDER));
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    half * rule.iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>()
}
