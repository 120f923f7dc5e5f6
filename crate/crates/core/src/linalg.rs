//! Complex singular value decomposition by one-sided Jacobi rotations.
//!
//! nalgebra's bidiagonal QR SVD returns inaccurate factors for many
//! rank-deficient complex matrices, which is exactly the structure of MSR
//! data, so the imaging code uses this routine instead.

use crate::forward::CMatrix;
use num_complex::Complex64;

const MAX_SWEEPS: usize = 80;

/// `K = U diag(s) V^H` with `s` sorted in decreasing order.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    pub singular_values: Vec<f64>,
    pub v: CMatrix,
}

pub fn jacobi_svd(k: &CMatrix) -> Svd {
    let (rows, cols) = k.shape();
    let mut a = k.clone();
    let mut v = CMatrix::identity(cols, cols);
    let tol = f64::EPSILON * (rows.max(cols) as f64);

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dotc(&a.column(q));
                let g = gamma.norm();
                if g == 0.0 || g <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // rotate the phase of column q so the pair's Gram entry is real
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut a, p, q, phase, c, s);
                rotate(&mut v, p, q, phase, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = (0..cols).map(|j| a.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let mut u = CMatrix::zeros(rows, cols);
    let mut v_sorted = CMatrix::zeros(cols, cols);
    let mut singular_values = Vec::with_capacity(cols);
    for (dst, &src) in order.iter().enumerate() {
        let s = norms[src];
        if s > 0.0 {
            u.set_column(dst, &(a.column(src) / Complex64::new(s, 0.0)));
        }
        v_sorted.set_column(dst, &v.column(src));
        singular_values.push(s);
    }
    Svd {
        u,
        singular_values,
        v: v_sorted,
    }
}

/// Columns `p, q <- (c x_p - s e^{-i phi} x_q, s x_p + c e^{-i phi} x_q)`
/// where `e^{i phi}` is `phase`.
fn rotate(m: &mut CMatrix, p: usize, q: usize, phase: Complex64, c: f64, s: f64) {
    let back = phase.conj();
    for r in 0..m.nrows() {
        let xp = m[(r, p)];
        let xq = m[(r, q)] * back;
        m[(r, p)] = xp * c - xq * s;
        m[(r, q)] = xp * s + xq * c;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(k: &CMatrix) {
        let svd = jacobi_svd(k);
        let s = CMatrix::from_diagonal(&crate::forward::CVector::from_iterator(
            svd.singular_values.len(),
            svd.singular_values.iter().map(|&x| Complex64::new(x, 0.0)),
        ));
        let rebuilt = &svd.u * s * svd.v.adjoint();
        assert!((rebuilt - k).norm() <= 1e-13 * k.norm().max(1e-300));
        let vv = svd.v.adjoint() * &svd.v;
        assert!((vv - CMatrix::identity(k.ncols(), k.ncols())).norm() < 1e-12);
        assert!(svd.singular_values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn low_rank_symmetric() {
        let a = CMatrix::from_fn(20, 3, |j, l| {
            Complex64::from_polar(1.0 + l as f64, 0.7 * (j * (l + 1)) as f64)
        });
        check(&(&a * a.transpose()));
    }

    #[test]
    fn general_and_tiny() {
        check(&CMatrix::from_fn(7, 7, |j, l| {
            Complex64::new(((j * 7 + l) as f64).sin(), ((j + 3 * l) as f64).cos())
        }));
        check(&CMatrix::from_fn(1, 1, |_, _| Complex64::new(0.0, -2.0)));
        let z = jacobi_svd(&CMatrix::zeros(4, 4));
        assert!(z.singular_values.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn known_diagonal() {
        let k = CMatrix::from_diagonal(&crate::forward::CVector::from_vec(vec![
            Complex64::new(0.0, 2.0),
            Complex64::new(-5.0, 0.0),
            Complex64::new(1.0, 0.0),
        ]));
        let svd = jacobi_svd(&k);
        assert_eq!(svd.singular_values, vec![5.0, 2.0, 1.0]);
    }
}
