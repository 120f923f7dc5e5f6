mod common;

use common::{direct_sum, rel_diff};
use halfspace_imaging::forward::{
    amplitude_constant, assemble_msr_factored, assemble_msr_fine, assemble_msr_foldylax,
    build_directions, symmetry_defect, CMatrix, FoldyLaxOptions, Inclusion, IncidenceTable,
};
use halfspace_imaging::geometry::{split_into_segments, ParametricCurve};
use halfspace_imaging::imaging::truncate_svd;
use halfspace_imaging::media::{HalfSpaceMedium, InclusionMaterial};
use halfspace_imaging::special::hankel1_0;
use halfspace_imaging::Vec2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

const ALPHA: f64 = PI / 4.0;
const BETA: f64 = 3.0 * PI / 4.0;

fn random_polyline(rng: &mut ChaCha8Rng) -> ParametricCurve {
    let count = rng.random_range(2..5);
    let mut x = rng.random_range(-0.8..-0.2);
    let vertices = (0..count)
        .map(|_| {
            x += rng.random_range(0.1..0.4);
            [x, rng.random_range(-2.6..-1.2)]
        })
        .collect();
    ParametricCurve::polyline("random", vertices, 0.015)
}

#[test]
fn factored_product_matches_direct_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..6 {
        let medium = HalfSpaceMedium::new(
            rng.random_range(1.0..5.0),
            rng.random_range(1.0..3.0),
            rng.random_range(1.0..5.0),
            rng.random_range(1.0..3.0),
        )
        .unwrap();
        let material = InclusionMaterial::new(rng.random_range(1.0..8.0), rng.random_range(1.0..8.0)).unwrap();
        let curve = random_polyline(&mut rng);
        let omega = rng.random_range(5.0..20.0);
        let ctx = medium.frequency_context(omega).unwrap();
        let dirs = build_directions(16, ALPHA, BETA, &ctx).unwrap();
        let zeta: Vec<f64> = dirs
            .zeta
            .iter()
            .zip(&dirs.propagating)
            .filter(|(_, &p)| p)
            .map(|(z, _)| *z)
            .collect();
        let inc = [Inclusion { curve: curve.clone(), material }];
        let factored = assemble_msr_factored(&inc, &medium, &ctx, &dirs).unwrap();
        let nodes = split_into_segments(&curve, ctx.lambda_minus).unwrap();
        let oracle = direct_sum(&nodes, &material, &medium, omega, &zeta, 0.015);
        let err = rel_diff(&factored.product(), &oracle);
        assert!(err <= 1e-12, "case {case}: {err}");
        assert_eq!(factored.segments, nodes.len());
    }
}

#[test]
fn single_point_is_rank_one_closed_form() {
    let medium = HalfSpaceMedium::new(1.0, 1.0, 3.0, 1.0).unwrap();
    let material = InclusionMaterial::new(5.0, 1.0).unwrap();
    let ctx = medium.frequency_context(12.0).unwrap();
    let dirs = build_directions(20, ALPHA, BETA, &ctx).unwrap();
    let x = Vec2::new(0.2, -1.7);
    let w = 0.03;
    let inc = [Inclusion {
        curve: ParametricCurve::points("p", vec![[x.x, x.y]], w, 0.015),
        material,
    }];
    let k = assemble_msr_fine(&inc, &medium, &ctx, &dirs, 0.01).unwrap();
    let table = IncidenceTable::new(&ctx, &medium, &dirs).unwrap();
    let c = amplitude_constant(&ctx, &medium, 0.015);
    let a = table.plane_waves(x);
    let expected = &a * a.transpose() * (c * w * (5.0 / 3.0 - 1.0));
    assert!(rel_diff(&k, &expected) < 1e-13);
    let svd = truncate_svd(&k, 1e-8).unwrap();
    assert_eq!(svd.retained, 1);
}

#[test]
fn one_segment_with_both_contrasts_has_rank_three() {
    let medium = HalfSpaceMedium::new(1.0, 1.0, 3.0, 2.0).unwrap();
    let material = InclusionMaterial::new(5.0, 4.0).unwrap();
    let ctx = medium.frequency_context(2.0).unwrap();
    let dirs = build_directions(24, PI / 12.0, 11.0 * PI / 12.0, &ctx).unwrap();
    let curve = ParametricCurve::polyline("short", vec![[-0.1, -1.5], [0.05, -1.6]], 0.015);
    assert_eq!(split_into_segments(&curve, ctx.lambda_minus).unwrap().len(), 1);
    let inc = [Inclusion { curve, material }];
    let k = assemble_msr_factored(&inc, &medium, &ctx, &dirs).unwrap().product();
    let s = truncate_svd(&k, 0.5).unwrap().singular_values;
    assert!(s[2] / s[0] > 1e-6, "{s:?}");
    assert!(s[3] / s[0] < 1e-12, "{s:?}");
}

#[test]
fn permittivity_only_rank_equals_segments() {
    let medium = HalfSpaceMedium::new(1.0, 1.0, 3.0, 1.0).unwrap();
    let material = InclusionMaterial::new(5.0, 1.0).unwrap();
    let ctx = medium.frequency_context(2.0 * PI / 0.6).unwrap();
    let dirs = build_directions(40, PI / 12.0, 11.0 * PI / 12.0, &ctx).unwrap();
    let inc = [Inclusion { curve: ParametricCurve::sigma1(0.015), material }];
    let f = assemble_msr_factored(&inc, &medium, &ctx, &dirs).unwrap();
    assert!(f.e.iter().skip(f.segments).all(|e| *e == Complex64::new(0.0, 0.0)));
    let s = truncate_svd(&f.product(), 0.5).unwrap().singular_values;
    assert!(s[f.segments] / s[0] < 1e-12);
}

#[test]
fn fine_quadrature_converges_at_second_order() {
    let medium = HalfSpaceMedium::new(5.0, 1.0, 4.0, 1.0).unwrap();
    let material = InclusionMaterial::new(5.0, 1.0).unwrap();
    let ctx = medium.frequency_context(2.0 * PI / 0.3).unwrap();
    let dirs = build_directions(24, ALPHA, BETA, &ctx).unwrap();
    let inc = [Inclusion { curve: ParametricCurve::sigma1(0.015), material }];
    let reference = assemble_msr_fine(&inc, &medium, &ctx, &dirs, ctx.lambda_minus / 640.0).unwrap();
    let errors: Vec<f64> = [10.0, 20.0, 40.0]
        .iter()
        .map(|d| rel_diff(&assemble_msr_fine(&inc, &medium, &ctx, &dirs, ctx.lambda_minus / d).unwrap(), &reference))
        .collect();
    for pair in errors.windows(2) {
        let ratio = pair[0] / pair[1];
        assert!(ratio > 3.0 && ratio < 5.0, "{errors:?}");
    }
    // the coarse half-wavelength model is a visibly cruder approximation
    let coarse = assemble_msr_factored(&inc, &medium, &ctx, &dirs).unwrap().product();
    assert!(rel_diff(&coarse, &reference) > errors[0]);
}

#[test]
fn permittivity_response_is_linear_in_contrast() {
    let medium = HalfSpaceMedium::new(1.0, 1.0, 3.0, 1.0).unwrap();
    let ctx = medium.frequency_context(15.0).unwrap();
    let dirs = build_directions(16, ALPHA, BETA, &ctx).unwrap();
    let k_of = |eps: f64| {
        let inc = [Inclusion {
            curve: ParametricCurve::sigma2(0.015),
            material: InclusionMaterial::new(eps, 1.0).unwrap(),
        }];
        assemble_msr_fine(&inc, &medium, &ctx, &dirs, 0.01).unwrap()
    };
    let k4 = k_of(4.0);
    let k7 = k_of(7.0);
    // contrasts 1/3 and 4/3
    assert!(rel_diff(&(k4 * Complex64::new(4.0, 0.0)), &k7) < 1e-12);
}

#[test]
fn models_are_symmetric() {
    let medium = HalfSpaceMedium::new(1.0, 1.0, 3.0, 2.0).unwrap();
    let material = InclusionMaterial::new(5.0, 4.0).unwrap();
    let ctx = medium.frequency_context(8.0).unwrap();
    let dirs = build_directions(20, ALPHA, BETA, &ctx).unwrap();
    let inc = [Inclusion { curve: ParametricCurve::sigma1(0.015), material }];
    let spacing = ctx.lambda_minus / 20.0;
    let fine = assemble_msr_fine(&inc, &medium, &ctx, &dirs, spacing).unwrap();
    let fl = assemble_msr_foldylax(&inc, &medium, &ctx, &dirs, spacing, FoldyLaxOptions::default()).unwrap();
    assert!(symmetry_defect(&fine) < 1e-12);
    assert!(symmetry_defect(&fl) < 1e-10, "{}", symmetry_defect(&fl));
    assert!(rel_diff(&fl, &fine) > 1e-6);
}

#[test]
fn uncoupled_foldy_lax_equals_fine() {
    let medium = HalfSpaceMedium::new(5.0, 1.0, 4.0, 3.0).unwrap();
    let material = InclusionMaterial::new(2.0, 5.0).unwrap();
    let ctx = medium.frequency_context(10.0).unwrap();
    let dirs = build_directions(18, ALPHA, BETA, &ctx).unwrap();
    let inc = [Inclusion { curve: ParametricCurve::sigma2(0.015), material }];
    let fine = assemble_msr_fine(&inc, &medium, &ctx, &dirs, 0.02).unwrap();
    let off = assemble_msr_foldylax(&inc, &medium, &ctx, &dirs, 0.02, FoldyLaxOptions { coupling: false }).unwrap();
    assert!(rel_diff(&off, &fine) < 1e-12);

    let single = [Inclusion {
        curve: ParametricCurve::points("p", vec![[0.1, -2.0]], 0.05, 0.015),
        material,
    }];
    let fine = assemble_msr_fine(&single, &medium, &ctx, &dirs, 0.02).unwrap();
    let on = assemble_msr_foldylax(&single, &medium, &ctx, &dirs, 0.02, FoldyLaxOptions::default()).unwrap();
    assert!(rel_diff(&on, &fine) < 1e-12);
}

/// Two monopoles: the coupled answer minus the Born term matches the
/// second Neumann term up to O(contrast^2) relative to the Born term.
#[test]
fn two_node_neumann_series() {
    let medium = HalfSpaceMedium::new(1.0, 1.0, 3.0, 1.0).unwrap();
    let omega = 6.0;
    let ctx = medium.frequency_context(omega).unwrap();
    let dirs = build_directions(12, ALPHA, BETA, &ctx).unwrap();
    let (x1, x2) = (Vec2::new(-0.1, -1.5), Vec2::new(0.15, -1.62));
    let w = 0.04;
    let k = ctx.k_minus;
    let g = Complex64::new(0.0, 0.25) * hankel1_0(k * (x1 - x2).norm());
    let table = IncidenceTable::new(&ctx, &medium, &dirs).unwrap();
    let (a1, a2) = (table.plane_waves(x1), table.plane_waves(x2));
    let far = amplitude_constant(&ctx, &medium, 0.015) / (0.015 * k * k);

    let mut deviation = Vec::new();
    for q in [1e-3, 1e-2, 1e-1] {
        let material = InclusionMaterial::new(3.0 * (1.0 + q), 1.0).unwrap();
        let inc = [Inclusion {
            curve: ParametricCurve::points("pair", vec![[x1.x, x1.y], [x2.x, x2.y]], w, 0.015),
            material,
        }];
        let coupled = assemble_msr_foldylax(&inc, &medium, &ctx, &dirs, 0.01, FoldyLaxOptions::default()).unwrap();
        let born = assemble_msr_fine(&inc, &medium, &ctx, &dirs, 0.01).unwrap();
        let s = Complex64::new(k * k * 0.015 * w * q, 0.0);
        // u_1 = a_1 + g s u_2, u_2 = a_2 + g s u_1, truncated after one bounce
        let second: CMatrix = (&a1 * a2.transpose() + &a2 * a1.transpose()) * (far * s * s * g);
        let rel = (&coupled - &born).norm() / born.norm();
        let remainder = (&coupled - &born - &second).norm() / born.norm();
        assert!(remainder < 10.0 * rel * rel.max(q), "q={q}: {remainder} vs {rel}");
        deviation.push(rel / q);
    }
    // deviation from Born is O(contrast)
    let spread = deviation.iter().cloned().fold(0.0, f64::max) / deviation.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(spread < 1.5, "{deviation:?}");
}
