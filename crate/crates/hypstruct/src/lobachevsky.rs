//! The Lobachevsky function and volumes of ideal tetrahedra.
//!
//! `lob` reduces its argument to `(0, π/2]` using oddness and π-periodicity and
//! then evaluates
//!
//! ```text
//! Λ(t) = t (1 − log 2t) + Σ_{k≥1} ζ(2k) / (k (2k+1)) · t^{2k+1} / π^{2k}
//! ```
//!
//! which follows from integrating `log(sin u / u) = −Σ ζ(2k)/k (u/π)^{2k}`
//! term by term. On the reduced range the ratio of consecutive terms is at
//! most 1/4, so 28 terms reach full double precision.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::shapes::ShapeAssignment;

const TERMS: usize = 28;

fn coefficients() -> &'static [f64; TERMS] {
    static COEFFS: OnceLock<[f64; TERMS]> = OnceLock::new();
    COEFFS.get_or_init(|| {
        let mut c = [0.0; TERMS];
        for (i, slot) in c.iter_mut().enumerate() {
            let k = (i + 1) as i32;
            let zeta = zeta_even(k);
            *slot = zeta / (k as f64 * (2 * k + 1) as f64) / PI.powi(2 * k);
        }
        c
    })
}

/// ζ(2k) for k ≥ 1: closed forms for k = 1, 2 and a direct sum with an
/// Euler–Maclaurin tail otherwise.
fn zeta_even(k: i32) -> f64 {
    match k {
        1 => PI * PI / 6.0,
        2 => PI.powi(4) / 90.0,
        _ => {
            let s = (2 * k) as f64;
            let n = 50.0_f64;
            let head: f64 = (1..50).map(|m| (m as f64).powf(-s)).sum();
            let tail = n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s) + s * n.powf(-s - 1.0) / 12.0
                - s * (s + 1.0) * (s + 2.0) * n.powf(-s - 3.0) / 720.0;
            head + tail
        }
    }
}

fn lob_reduced(t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let t2 = t * t;
    let mut power = t; // t^{2k+1}
    let mut series = 0.0;
    for c in coefficients() {
        power *= t2;
        series += c * power;
    }
    t * (1.0 - (2.0 * t).ln()) + series
}

/// The Lobachevsky function `Λ(θ) = −∫₀^θ log|2 sin u| du`.
pub fn lob(theta: f64) -> f64 {
    if !theta.is_finite() {
        return f64::NAN;
    }
    let mut t = theta.rem_euclid(PI);
    let mut sign = 1.0;
    if t > PI / 2.0 {
        t = PI - t;
        sign = -1.0;
    }
    sign * lob_reduced(t)
}

/// Dihedral angles of an ideal tetrahedron, one per pair of opposite edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleTriple {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl AngleTriple {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self { alpha, beta, gamma }
    }

    /// True when some angle is 0 or π (to 1e-12).
    pub fn is_degenerate(&self) -> bool {
        [self.alpha, self.beta, self.gamma]
            .iter()
            .any(|a| a.abs() < 1e-12 || (a - PI).abs() < 1e-12)
    }

    pub fn sum_defect(&self) -> f64 {
        self.alpha + self.beta + self.gamma - PI
    }
}

/// Volume `Λ(α) + Λ(β) + Λ(γ)` of the ideal tetrahedron with the given angles.
pub fn tet_volume(a: AngleTriple) -> f64 {
    lob(a.alpha) + lob(a.beta) + lob(a.gamma)
}

/// Signed volume of the ideal tetrahedron with edge invariant `z`.
///
/// Uses the principal arguments of `z`, `1/(1−z)` and `(z−1)/z`, so a
/// negatively oriented shape gives a negative volume and a flat one gives 0.
pub fn tet_volume_z(z: Complex64) -> f64 {
    let one = Complex64::new(1.0, 0.0);
    if z == Complex64::new(0.0, 0.0) || z == one {
        return 0.0;
    }
    if z.im == 0.0 {
        return 0.0;
    }
    let a = z.arg();
    let b = -(one - z).arg();
    let c = ((z - one) / z).arg();
    lob(a) + lob(b) + lob(c)
}

/// Sum of the signed tetrahedron volumes of a shape assignment.
pub fn total_volume(s: &ShapeAssignment) -> f64 {
    s.z.iter().map(|&z| tet_volume_z(z)).sum()
}
