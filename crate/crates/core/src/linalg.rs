//! Dense 2×2 real matrices.

use std::ops::{Add, Mul, Sub};

/// Row-major 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([[0.0, 0.0], [0.0, 0.0]]);
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn diag(a: f64, d: f64) -> Self {
        Mat2::new(a, 0.0, 0.0, d)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[row][col]
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> f64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2::new(self.0[0][0], self.0[1][0], self.0[0][1], self.0[1][1])
    }

    pub fn scale(&self, k: f64) -> Mat2 {
        let [[a, b], [c, d]] = self.0;
        Mat2::new(k * a, k * b, k * c, k * d)
    }

    /// Sum of squared entries (squared Frobenius norm).
    pub fn frobenius_sq(&self) -> f64 {
        self.0.iter().flatten().map(|v| v * v).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }

    pub fn mul_vec(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.0[0][0] * v[0] + self.0[0][1] * v[1],
            self.0[1][0] * v[0] + self.0[1][1] * v[1],
        ]
    }

    pub fn column(&self, col: usize) -> [f64; 2] {
        [self.0[0][col], self.0[1][col]]
    }

    /// Eigenvalues as `(re, im)` pairs, larger real part first.
    pub fn eigenvalues(&self) -> [(f64, f64); 2] {
        let half_tr = 0.5 * self.trace();
        let disc = half_tr * half_tr - self.det();
        if disc >= 0.0 {
            let r = disc.sqrt();
            [(half_tr + r, 0.0), (half_tr - r, 0.0)]
        } else {
            let i = (-disc).sqrt();
            [(half_tr, i), (half_tr, -i)]
        }
    }

    pub fn max_real_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0].0
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let [[a, b], [c, d]] = self.0;
        let [[e, f], [g, h]] = rhs.0;
        Mat2::new(a + e, b + f, c + g, d + h)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        let [[a, b], [c, d]] = self.0;
        let [[e, f], [g, h]] = rhs.0;
        Mat2::new(a - e, b - f, c - g, d - h)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let [[a, b], [c, d]] = self.0;
        let [[e, f], [g, h]] = rhs.0;
        Mat2::new(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)
    }
}

/// Largest singular value of a 2×2 matrix.
///
/// Uses `sqrt((f + sqrt(f² − 4 det²)) / 2)` with `f` the sum of squared
/// entries. The discriminant is evaluated in the factored form
/// `((a−d)² + (b+c)²)((a+d)² + (b−c)²)`, which equals `f² − 4 det²` but is
/// never negative and does not cancel when the singular values are close.
pub fn spectral_norm_2x2(m: &Mat2) -> f64 {
    let [[a, b], [c, d]] = m.0;
    let f = m.frobenius_sq();
    let disc_sqrt = (a - d).hypot(b + c) * (a + d).hypot(b - c);
    (0.5 * (f + disc_sqrt)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_examples() {
        assert_eq!(spectral_norm_2x2(&Mat2::IDENTITY), 1.0);
        assert_eq!(spectral_norm_2x2(&Mat2::diag(2.0, 1.0)), 2.0);
        assert_eq!(spectral_norm_2x2(&Mat2::new(0.0, 1.0, 0.0, 0.0)), 1.0);
        assert_eq!(spectral_norm_2x2(&Mat2::ZERO), 0.0);
    }

    #[test]
    fn factored_discriminant_matches_textbook_form() {
        let m = Mat2::new(0.3, -1.7, 2.2, 0.9);
        let f = m.frobenius_sq();
        let textbook = (f * f - 4.0 * m.det() * m.det()).sqrt();
        let [[a, b], [c, d]] = m.0;
        let factored = (a - d).hypot(b + c) * (a + d).hypot(b - c);
        assert!((textbook - factored).abs() < 1e-12 * f);
    }

    #[test]
    fn complex_eigenvalues() {
        // [[0,1],[-1,-1]] has eigenvalues (-1 ± i√3)/2
        let ev = Mat2::new(0.0, 1.0, -1.0, -1.0).eigenvalues();
        assert!((ev[0].0 + 0.5).abs() < 1e-15);
        assert!((ev[0].1.abs() - 3f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn product_and_transpose() {
        let a = Mat2::new(1.0, 2.0, 3.0, 4.0);
        let b = Mat2::new(0.0, 1.0, 1.0, 0.0);
        assert_eq!(a * b, Mat2::new(2.0, 1.0, 4.0, 3.0));
        assert_eq!((a * b).transpose(), b.transpose() * a.transpose());
    }
}
