#![allow(dead_code)]

use halfspace_imaging::forward::CMatrix;
use halfspace_imaging::geometry::CurveSample;
use halfspace_imaging::media::{HalfSpaceMedium, InclusionMaterial};
use halfspace_imaging::Vec2;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Refracted direction and transmission factor from the textbook formulas,
/// for downgoing incidences `-(cos z, sin z)`.
pub fn oracle_waves(medium: &HalfSpaceMedium, omega: f64, zeta: &[f64]) -> Vec<(Vec2, f64)> {
    let kp = omega * (medium.eps_plus * medium.mu_plus).sqrt();
    let km = omega * (medium.eps_minus * medium.mu_minus).sqrt();
    let xi = kp / km;
    zeta.iter()
        .map(|z| (-z.cos(), -z.sin()))
        .filter(|(x1, _)| (xi * x1).abs() < 1.0)
        .map(|(x1, x2)| {
            let root = (1.0 - xi * xi * x1 * x1).sqrt();
            let v = Vec2::new(xi * x1, -root);
            let t = 2.0 * medium.mu_minus * xi * x2
                / (medium.mu_minus * xi * x2 - medium.mu_plus * root);
            (v, t)
        })
        .collect()
}

pub fn angles(n: usize, alpha: f64, beta: f64) -> Vec<f64> {
    (0..n)
        .map(|j| alpha + (beta - alpha) * j as f64 / (n - 1) as f64)
        .collect()
}

/// The discrete MSR sum written out entry by entry.
pub fn direct_sum(
    nodes: &[CurveSample],
    material: &InclusionMaterial,
    medium: &HalfSpaceMedium,
    omega: f64,
    zeta: &[f64],
    h: f64,
) -> CMatrix {
    let waves = oracle_waves(medium, omega, zeta);
    let kp = omega * (medium.eps_plus * medium.mu_plus).sqrt();
    let km = omega * (medium.eps_minus * medium.mu_minus).sqrt();
    let c = Complex64::new(1.0, 1.0) * h * km * km * medium.mu_plus
        / (4.0 * medium.mu_minus * (kp * PI).sqrt());
    let eps_term = material.eps / medium.eps_minus - 1.0;
    let lt = 2.0 * (medium.mu_minus / material.mu - 1.0);
    let ln = 2.0 * (1.0 - material.mu / medium.mu_minus);
    let n = waves.len();
    let mut k = CMatrix::zeros(n, n);
    for j in 0..n {
        for l in 0..n {
            let (vj, tj) = waves[j];
            let (vl, tl) = waves[l];
            let mut sum = Complex64::new(0.0, 0.0);
            for node in nodes {
                let x = node.point;
                let bracket = eps_term
                    + lt * vj.dot(&node.tangent) * vl.dot(&node.tangent)
                    + ln * vj.dot(&node.normal) * vl.dot(&node.normal);
                let phase = km * (vj + vl).dot(&x);
                sum += node.weight * bracket * Complex64::from_polar(1.0, phase);
            }
            k[(j, l)] = c * tj * tl * sum;
        }
    }
    k
}

pub fn rel_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm() / b.norm()
}
