//! Experiment configuration: JSON scenario files, validation and the preset
//! catalog of the published test configurations.

use crate::error::{Error, Result};
use crate::forward::{build_directions, ForwardModel, Inclusion, DEFAULT_QUAD_FRACTION};
use crate::geometry::ParametricCurve;
use crate::imaging::{Rect, SteeringConfig, DEFAULT_GRID_STEP, DEFAULT_SVD_THRESHOLD};
use crate::media::{HalfSpaceMedium, InclusionMaterial};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, PI};

pub const DEFAULT_THICKNESS: f64 = 0.015;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_METRIC_LEVEL: f64 = 0.7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveEntry {
    #[serde(flatten)]
    pub curve: ParametricCurve,
    pub material: InclusionMaterial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionsConfig {
    pub count: usize,
    pub alpha: f64,
    pub beta: f64,
    /// Propagating count listed with the experiment, for comparison only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tabulated_n_plus: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyConfig {
    pub count: usize,
    pub omega_min: f64,
    pub omega_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForwardConfig {
    pub model: ForwardModel,
    /// Fine quadrature spacing as a fraction of the lower-medium wavelength.
    pub quad_fraction: f64,
    /// Multiple-scattering coupling for the Foldy-Lax model.
    pub coupling: bool,
}

impl Default for ForwardConfig {
    fn default() -> Self {
        Self {
            model: ForwardModel::Fine,
            quad_fraction: DEFAULT_QUAD_FRACTION,
            coupling: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImagingConfig {
    pub domain: Rect,
    pub grid_step: f64,
    pub svd_threshold: f64,
    /// Explicit `c`; derived from the contrast when absent.
    #[serde(default)]
    pub steering: Option<SteeringConfig>,
    pub metric_level: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// `None` means noiseless data.
    pub snr_db: Option<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    /// 8 or 16.
    pub pgm_depth: u8,
    pub png: bool,
    /// Also write the dataset as CSV.
    pub dataset_csv: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            pgm_depth: 8,
            png: true,
            dataset_csv: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub curves: Vec<CurveEntry>,
    pub medium: HalfSpaceMedium,
    pub directions: DirectionsConfig,
    pub frequencies: FrequencyConfig,
    #[serde(default)]
    pub forward: ForwardConfig,
    pub imaging: ImagingConfig,
    pub noise: NoiseConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}: {}: {}", self.path, self.message)
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scenario serializes");
        s.push('\n');
        s
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn inclusions(&self) -> Vec<Inclusion> {
        self.curves
            .iter()
            .map(|c| Inclusion {
                curve: c.curve.clone(),
                material: c.material,
            })
            .collect()
    }

    pub fn materials(&self) -> Vec<InclusionMaterial> {
        self.curves.iter().map(|c| c.material).collect()
    }

    pub fn truth_curves(&self) -> Vec<ParametricCurve> {
        self.curves.iter().map(|c| c.curve.clone()).collect()
    }

    pub fn frequency_list(&self) -> Vec<f64> {
        frequency_list(&self.frequencies)
    }

    pub fn validate(&self) -> Vec<Diagnostic> {
        validate(self)
    }

    pub fn has_errors(&self) -> bool {
        self.validate().iter().any(|d| d.severity == Severity::Error)
    }
}

/// `count` values linear in omega with both ends included (`count = 1`
/// gives the midpoint).
pub fn frequency_list(cfg: &FrequencyConfig) -> Vec<f64> {
    let (a, b) = (cfg.omega_min, cfg.omega_max);
    match cfg.count {
        0 => Vec::new(),
        1 => vec![0.5 * (a + b)],
        n => (0..n)
            .map(|f| {
                if f + 1 == n {
                    b
                } else {
                    a + (b - a) * f as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

pub fn validate(s: &Scenario) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut error = |path: String, message: String| {
        out.push(Diagnostic {
            severity: Severity::Error,
            path,
            message,
        })
    };

    if s.curves.is_empty() {
        error("curves".into(), "at least one inclusion is required".into());
    }
    for (i, c) in s.curves.iter().enumerate() {
        if let Err(e) = c.curve.check() {
            error(format!("curves[{i}]"), e.to_string());
        }
        if let Err(e) = c.material.check() {
            error(format!("curves[{i}].material"), e.to_string());
        }
    }
    if let Err(e) = s.medium.check() {
        error("medium".into(), e.to_string());
    }
    let d = &s.directions;
    if d.count < 2 {
        error("directions.count".into(), format!("need at least 2, got {}", d.count));
    }
    if !(d.alpha > 0.0 && d.alpha < d.beta && d.beta < PI) {
        error(
            "directions".into(),
            format!("need 0 < alpha < beta < pi, got [{}, {}]", d.alpha, d.beta),
        );
    }
    let f = &s.frequencies;
    if f.count < 1 {
        error("frequencies.count".into(), "need at least one frequency".into());
    }
    for (key, w) in [("omega_min", f.omega_min), ("omega_max", f.omega_max)] {
        if !(w.is_finite() && w > 0.0) {
            error(format!("frequencies.{key}"), format!("must be positive, got {w}"));
        }
    }
    if !(s.forward.quad_fraction > 0.0 && s.forward.quad_fraction <= 0.5) {
        error(
            "forward.quad_fraction".into(),
            format!("must be in (0, 0.5], got {}", s.forward.quad_fraction),
        );
    }
    let im = &s.imaging;
    let r = &im.domain;
    if !(r.x1_min < r.x1_max && r.x2_min < r.x2_max) {
        error("imaging.domain".into(), "empty rectangle".into());
    }
    if r.x2_max >= 0.0 {
        error(
            "imaging.domain".into(),
            format!("search domain must lie below the interface, x2_max = {}", r.x2_max),
        );
    }
    if !(im.grid_step.is_finite() && im.grid_step > 0.0) {
        error("imaging.grid_step".into(), format!("must be positive, got {}", im.grid_step));
    }
    if !(im.svd_threshold > 0.0 && im.svd_threshold < 1.0) {
        error(
            "imaging.svd_threshold".into(),
            format!("must be in (0, 1), got {}", im.svd_threshold),
        );
    }
    if !(im.metric_level > 0.0 && im.metric_level < 1.0) {
        error(
            "imaging.metric_level".into(),
            format!("must be in (0, 1), got {}", im.metric_level),
        );
    }
    if let Some(c) = im.steering {
        if let Err(e) = SteeringConfig::new(c.a, c.b1, c.b2) {
            error("imaging.steering".into(), e.to_string());
        }
    }
    if let Some(snr) = s.noise.snr_db {
        if !snr.is_finite() {
            error("noise.snr_db".into(), format!("must be finite, got {snr}"));
        }
    }
    if !matches!(s.output.pgm_depth, 8 | 16) {
        error(
            "output.pgm_depth".into(),
            format!("must be 8 or 16, got {}", s.output.pgm_depth),
        );
    }
    let medium_ok = s.medium.check().is_ok();
    let omega_ok = f.omega_min > 0.0 && f.omega_max > 0.0 && f.omega_min.is_finite() && f.omega_max.is_finite();
    if medium_ok && omega_ok && d.count >= 2 && d.alpha > 0.0 && d.alpha < d.beta && d.beta < PI {
        let ctx = s.medium.frequency_context(f.omega_min).expect("checked");
        if let Ok(dirs) = build_directions(d.count, d.alpha, d.beta, &ctx) {
            if dirs.n_plus == 0 {
                error("directions".into(), "no incidence propagates into the lower medium".into());
            }
        }
    }

    // Warnings.
    for (i, c) in s.curves.iter().enumerate() {
        if c.curve.check().is_err() {
            continue;
        }
        let inside = match c.curve.sample(0.01) {
            Ok(nodes) => nodes.iter().all(|n| im.domain.contains(n.point)),
            Err(_) => true,
        };
        if !inside {
            out.push(Diagnostic {
                severity: Severity::Warning,
                path: format!("curves[{i}]"),
                message: format!("curve `{}` leaves the search domain", c.curve.label),
            });
        }
        if medium_ok && omega_ok {
            let top = f.omega_min.max(f.omega_max);
            let ctx = s.medium.frequency_context(top).expect("checked");
            if c.curve.thickness > ctx.lambda_minus / 10.0 {
                out.push(Diagnostic {
                    severity: Severity::Warning,
                    path: format!("curves[{i}].thickness"),
                    message: format!(
                        "thickness {} exceeds a tenth of the lower-medium wavelength {} at omega = {}",
                        c.curve.thickness, ctx.lambda_minus, top
                    ),
                });
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
enum Contrast {
    Permittivity,
    Permeability,
    Both,
}

#[derive(Debug, Clone, Copy)]
enum Target {
    Gamma1,
    Gamma2,
    GammaM,
}

struct Row {
    table: u8,
    target: Target,
    n: usize,
    n_plus: usize,
    f: usize,
    lambda_lo: f64,
    lambda_hi: f64,
}

const ROWS: &[Row] = &[
    Row { table: 1, target: Target::Gamma1, n: 32, n_plus: 24, f: 30, lambda_lo: 0.4, lambda_hi: 0.2 },
    Row { table: 1, target: Target::Gamma2, n: 40, n_plus: 28, f: 36, lambda_lo: 0.3, lambda_hi: 0.1 },
    Row { table: 1, target: Target::GammaM, n: 48, n_plus: 32, f: 40, lambda_lo: 0.2, lambda_hi: 0.1 },
    Row { table: 2, target: Target::Gamma1, n: 36, n_plus: 28, f: 32, lambda_lo: 0.4, lambda_hi: 0.2 },
    Row { table: 2, target: Target::Gamma2, n: 42, n_plus: 36, f: 36, lambda_lo: 0.3, lambda_hi: 0.2 },
    Row { table: 2, target: Target::GammaM, n: 50, n_plus: 40, f: 42, lambda_lo: 0.2, lambda_hi: 0.1 },
    Row { table: 3, target: Target::Gamma1, n: 40, n_plus: 32, f: 36, lambda_lo: 0.4, lambda_hi: 0.2 },
    Row { table: 3, target: Target::Gamma2, n: 48, n_plus: 40, f: 40, lambda_lo: 0.3, lambda_hi: 0.2 },
    Row { table: 3, target: Target::GammaM, n: 60, n_plus: 50, f: 48, lambda_lo: 0.2, lambda_hi: 0.1 },
];

fn contrast_of(table: u8) -> Contrast {
    match table {
        1 => Contrast::Permittivity,
        2 => Contrast::Permeability,
        _ => Contrast::Both,
    }
}

fn target_name(t: Target) -> &'static str {
    match t {
        Target::Gamma1 => "gamma1",
        Target::Gamma2 => "gamma2",
        Target::GammaM => "gammaM",
    }
}

/// Backgrounds: the denser upper half-space (`5 / 4`) or, with `lower`,
/// the air-like upper half-space (`1 / 3`). Only the contrasted parameter
/// changes; the others are 1.
fn background(contrast: Contrast, lower_denser: bool) -> HalfSpaceMedium {
    let (up, down) = if lower_denser { (1.0, 3.0) } else { (5.0, 4.0) };
    match contrast {
        Contrast::Permittivity => HalfSpaceMedium { eps_plus: up, mu_plus: 1.0, eps_minus: down, mu_minus: 1.0 },
        Contrast::Permeability => HalfSpaceMedium { eps_plus: 1.0, mu_plus: up, eps_minus: 1.0, mu_minus: down },
        Contrast::Both => HalfSpaceMedium { eps_plus: up, mu_plus: up, eps_minus: down, mu_minus: down },
    }
}

/// Inclusion material with contrast value `value` in the contrasted
/// parameters and the background value elsewhere.
fn material(contrast: Contrast, medium: &HalfSpaceMedium, value: f64) -> InclusionMaterial {
    match contrast {
        Contrast::Permittivity => InclusionMaterial { eps: value, mu: medium.mu_minus },
        Contrast::Permeability => InclusionMaterial { eps: medium.eps_minus, mu: value },
        Contrast::Both => InclusionMaterial { eps: value, mu: value },
    }
}

fn build_preset(row: &Row, lower_denser: bool, values: (f64, f64), name: String) -> Scenario {
    let contrast = contrast_of(row.table);
    let medium = background(contrast, lower_denser);
    let entry = |curve: ParametricCurve, v: f64| CurveEntry {
        curve,
        material: material(contrast, &medium, v),
    };
    let curves = match row.target {
        Target::Gamma1 => vec![entry(ParametricCurve::sigma1(DEFAULT_THICKNESS), values.0)],
        Target::Gamma2 => vec![entry(ParametricCurve::sigma2(DEFAULT_THICKNESS), values.0)],
        Target::GammaM => vec![
            entry(ParametricCurve::sigma1(DEFAULT_THICKNESS), values.0),
            entry(ParametricCurve::sigma2(DEFAULT_THICKNESS), values.1),
        ],
    };
    Scenario {
        name,
        curves,
        medium,
        directions: DirectionsConfig {
            count: row.n,
            alpha: FRAC_PI_4,
            beta: 3.0 * FRAC_PI_4,
            // the air-like background keeps every direction
            tabulated_n_plus: Some(if lower_denser { row.n } else { row.n_plus }),
        },
        frequencies: FrequencyConfig {
            count: row.f,
            omega_min: 2.0 * PI / row.lambda_lo,
            omega_max: 2.0 * PI / row.lambda_hi,
        },
        forward: ForwardConfig::default(),
        imaging: ImagingConfig {
            domain: Rect::new(-1.0, 1.0, -3.0, -1.0),
            grid_step: DEFAULT_GRID_STEP,
            svd_threshold: DEFAULT_SVD_THRESHOLD,
            steering: None,
            metric_level: DEFAULT_METRIC_LEVEL,
        },
        noise: NoiseConfig {
            snr_db: Some(20.0),
            seed: DEFAULT_SEED,
        },
        output: OutputConfig::default(),
    }
}

fn catalog() -> Vec<(String, &'static Row, bool, (f64, f64))> {
    let mut out = Vec::new();
    for row in ROWS {
        for lower in [false, true] {
            let base = format!(
                "table{}-{}{}",
                row.table,
                target_name(row.target),
                if lower { "-b" } else { "" }
            );
            out.push((base.clone(), row, lower, (5.0, 5.0)));
            if matches!(row.target, Target::GammaM) {
                out.push((format!("{base}-contrast-10-5"), row, lower, (10.0, 5.0)));
            }
        }
    }
    out
}

/// Names of all presets. `tableT-TARGET` uses the denser upper half-space,
/// `tableT-TARGET-b` the air-like one; `-contrast-10-5` gives the first
/// inclusion of a pair the larger contrast.
pub fn preset_names() -> Vec<String> {
    catalog().into_iter().map(|(name, ..)| name).collect()
}

pub fn preset(name: &str) -> Result<Scenario> {
    catalog()
        .into_iter()
        .find(|(n, ..)| n == name)
        .map(|(n, row, lower, values)| build_preset(row, lower, values, n))
        .ok_or_else(|| Error::UnknownPreset {
            name: name.into(),
            available: preset_names().join(", "),
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn table_rows() {
        let s = preset("table1-gamma1").unwrap();
        assert_eq!(s.directions.count, 32);
        assert_eq!(s.frequencies.count, 30);
        assert_abs_diff_eq!(s.frequencies.omega_min, 2.0 * PI / 0.4);
        assert_abs_diff_eq!(s.frequencies.omega_max, 2.0 * PI / 0.2);
        assert_eq!(s.medium, HalfSpaceMedium { eps_plus: 5.0, mu_plus: 1.0, eps_minus: 4.0, mu_minus: 1.0 });
        assert_eq!(s.curves[0].material, InclusionMaterial { eps: 5.0, mu: 1.0 });
        assert_eq!(s.curves[0].curve.thickness, 0.015);
        assert_eq!(s.noise.snr_db, Some(20.0));

        let m = preset("table2-gammaM").unwrap();
        assert_eq!((m.directions.count, m.frequencies.count), (50, 42));
        assert_abs_diff_eq!(m.frequencies.omega_min, 2.0 * PI / 0.2);
        assert_abs_diff_eq!(m.frequencies.omega_max, 2.0 * PI / 0.1);
        assert_eq!(m.curves.len(), 2);

        let g = preset("table3-gamma2").unwrap();
        assert_eq!((g.directions.count, g.frequencies.count), (48, 40));
        assert_abs_diff_eq!(g.frequencies.omega_min, 2.0 * PI / 0.3);
        assert_abs_diff_eq!(g.frequencies.omega_max, 2.0 * PI / 0.2);
    }

    #[test]
    fn contrast_variants() {
        let s = preset("table1-gammaM-contrast-10-5").unwrap();
        assert_eq!(s.curves[0].material.eps, 10.0);
        assert_eq!(s.curves[1].material.eps, 5.0);
        let b = preset("table3-gamma1-b").unwrap();
        assert_eq!(b.medium, HalfSpaceMedium { eps_plus: 1.0, mu_plus: 1.0, eps_minus: 3.0, mu_minus: 3.0 });
    }

    #[test]
    fn unknown_preset_lists_catalog() {
        match preset("nope") {
            Err(Error::UnknownPreset { available, .. }) => assert!(available.contains("table1-gamma1")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn presets_have_no_errors() {
        for name in preset_names() {
            let s = preset(&name).unwrap();
            let errors: Vec<_> = s
                .validate()
                .into_iter()
                .filter(|d| d.severity == Severity::Error)
                .collect();
            assert!(errors.is_empty(), "{name}: {errors:?}");
        }
    }

    #[test]
    fn preset_json_round_trip() {
        for name in preset_names() {
            let s = preset(&name).unwrap();
            let text = s.to_json();
            let back = Scenario::from_json(&text).unwrap();
            assert_eq!(back, s);
            assert_eq!(back.to_json(), text);
        }
    }

    #[test]
    fn curve_above_interface_is_an_error() {
        let mut s = preset("table1-gamma1").unwrap();
        s.curves[0].curve = ParametricCurve::polyline("bad", vec![[0.0, -0.5], [0.2, 0.2]], 0.015);
        let d = s.validate();
        assert!(d
            .iter()
            .any(|d| d.severity == Severity::Error && d.path == "curves[0]" && d.message.contains("bad")));
    }

    #[test]
    fn thick_inclusion_warning() {
        let mut s = preset("table1-gammaM").unwrap();
        // lambda- at omega = 2 pi / 0.1 with eps- = 4 is 0.05
        s.curves[0].curve.thickness = 0.05 / 5.0;
        let d = s.validate();
        assert!(d.iter().any(|d| d.severity == Severity::Warning && d.path == "curves[0].thickness"));
        s.curves[0].curve.thickness = 0.004;
        assert!(!s.validate().iter().any(|d| d.path == "curves[0].thickness"));
    }

    #[test]
    fn frequency_lists() {
        let cfg = |count, a, b| FrequencyConfig { count, omega_min: a, omega_max: b };
        assert_eq!(frequency_list(&cfg(2, 3.0, 7.0)), vec![3.0, 7.0]);
        let three = frequency_list(&cfg(3, 2.0 * PI / 0.4, 2.0 * PI / 0.2));
        assert_abs_diff_eq!(three[1], 23.561_944_901_923_447, epsilon = 1e-12);
        assert_eq!(frequency_list(&cfg(1, 2.0, 4.0)), vec![3.0]);
        let thirty = preset("table1-gamma1").unwrap().frequency_list();
        assert_eq!(thirty.len(), 30);
        assert!(thirty.windows(2).all(|w| w[1] > w[0]));
        let fwd = frequency_list(&cfg(7, 1.0, 9.0));
        let mut rev = frequency_list(&cfg(7, 9.0, 1.0));
        rev.reverse();
        for (a, b) in fwd.iter().zip(&rev) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }
}
