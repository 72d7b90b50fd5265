//! Oracles shared by the integration tests, written without the crate's
//! own kernel code.
#![allow(dead_code)]

use holelab_core::kernels::zonal;
use holelab_core::mesh3::Vec3;
use holelab_core::quadrature::GaussLegendre;
use holelab_core::Dimension;
use std::f64::consts::PI;

/// |S^{m-1}| by the two-step recursion, independent of the crate's gamma code.
pub fn sphere_measure(m: usize) -> f64 {
    match m {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI / (m - 2) as f64 * sphere_measure(m - 2),
    }
}

pub fn fundamental(n: usize, r: f64) -> f64 {
    r.powi(2 - n as i32) / ((2.0 - n as f64) * sphere_measure(n))
}

/// The single layer of Y_l on the sphere of radius a, evaluated at the
/// interior point r·e on the axis, divided by (r/a)^l: the eigenvalue, since
/// the potential inside is λ (r/a)^l Y_l.
pub fn eigenvalue_from_interior(n: usize, a: f64, l: usize) -> f64 {
    let dim = Dimension::new(n).unwrap();
    let r = 0.5 * a;
    let gl = GaussLegendre::new(200);
    let ring = sphere_measure(n - 1) * a.powi(n as i32 - 1);
    // y = a(cos φ e + sin φ ω): |x − y|² = r² + a² − 2ra cos φ, dσ = ring sin^{n−2} φ dφ
    let integral = gl.integrate(0.0, PI, |phi| {
        let t = phi.cos();
        let d = (r * r + a * a - 2.0 * r * a * t).sqrt();
        fundamental(n, d) * zonal(dim, l, t) * phi.sin().powi(n as i32 - 2)
    });
    ring * integral / 0.5f64.powi(l as i32)
}

/// Points spread over directions at radii between `lo` and `hi`.
pub fn shell_points(count: usize, lo: f64, hi: f64) -> Vec<Vec3> {
    (0..count)
        .map(|k| {
            // Fibonacci directions
            let z = 1.0 - (2 * k + 1) as f64 / count as f64;
            let phi = k as f64 * 2.399_963_229_728_653;
            let s = (1.0 - z * z).sqrt();
            let r = lo + (hi - lo) * k as f64 / (count.max(2) - 1) as f64;
            Vec3::new(s * phi.cos(), s * phi.sin(), z) * r
        })
        .collect()
}

/// Partial sum of the Gegenbauer generating function
/// Σ C_l^ν(t) r^l / R^{l+2ν}, against |x − y|^{−2ν} for |x| = r < |y| = R.
pub fn generating_function_gap(
    nu: f64,
    ratio: f64,
    big_r: f64,
    t: f64,
    eval: impl Fn(usize) -> f64,
) -> f64 {
    let r = ratio * big_r;
    // |C_l(t)| ≤ C_l(1) grows polynomially; pick L so the geometric tail is negligible
    let mut l_max = 0;
    while l_max < 64 && ratio.powi(l_max as i32) * (l_max as f64 + 1.0).powf(2.0 * nu) > 1e-14 {
        l_max += 1;
    }
    let series: f64 = (0..=l_max)
        .map(|l| eval(l) * r.powi(l as i32) / big_r.powf(l as f64 + 2.0 * nu))
        .sum();
    let exact = (r * r + big_r * big_r - 2.0 * r * big_r * t).powf(-nu);
    (series - exact).abs() / exact
}
