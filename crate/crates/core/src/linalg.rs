//! Small dense kernels for 3×3 tangent frames.

use nalgebra::{Matrix3, Vector3};

/// QR factorisation of the columns of `m` by modified Gram–Schmidt with one
/// re-orthogonalisation pass. `R` has a non-negative diagonal.
pub fn gram_schmidt(m: &Matrix3<f64>) -> (Matrix3<f64>, Matrix3<f64>) {
    let mut q = Matrix3::zeros();
    let mut r = Matrix3::zeros();
    for j in 0..3 {
        let mut v: Vector3<f64> = m.column(j).into();
        for _pass in 0..2 {
            for i in 0..j {
                let qi: Vector3<f64> = q.column(i).into();
                let c = qi.dot(&v);
                r[(i, j)] += c;
                v -= qi * c;
            }
        }
        let n = v.norm();
        r[(j, j)] = n;
        if n > 0.0 {
            q.set_column(j, &(v / n));
        }
    }
    (q, r)
}

/// A matrix `diag(exp(log_scale)) * rows` kept with unit-norm rows, so that
/// products of many triangular factors with widely separated growth rates
/// stay representable.
#[derive(Debug, Clone, Copy)]
pub struct GradedRows {
    pub log_scale: [f64; 3],
    pub rows: Matrix3<f64>,
}

impl GradedRows {
    pub fn from_matrix(m: &Matrix3<f64>) -> Self {
        let mut g = GradedRows {
            log_scale: [0.0; 3],
            rows: *m,
        };
        for i in 0..3 {
            g.normalize_row(i);
        }
        g
    }

    fn normalize_row(&mut self, i: usize) {
        let n = self.rows.row(i).norm();
        if n > 0.0 {
            self.log_scale[i] += n.ln();
            let row = self.rows.row(i) / n;
            self.rows.set_row(i, &row);
        } else {
            self.log_scale[i] = f64::NEG_INFINITY;
        }
    }

    /// Replaces `self` by `a * self`.
    pub fn left_multiply(&mut self, a: &Matrix3<f64>) {
        let mut rows = Matrix3::zeros();
        let mut scale = [0.0; 3];
        for i in 0..3 {
            let lead = (0..3)
                .filter(|&j| a[(i, j)] != 0.0 && self.log_scale[j].is_finite())
                .map(|j| self.log_scale[j] + a[(i, j)].abs().ln())
                .fold(f64::NEG_INFINITY, f64::max);
            if !lead.is_finite() {
                scale[i] = f64::NEG_INFINITY;
                continue;
            }
            let mut row = nalgebra::RowVector3::zeros();
            for j in 0..3 {
                if a[(i, j)] != 0.0 && self.log_scale[j].is_finite() {
                    row += self.rows.row(j) * (a[(i, j)] * (self.log_scale[j] - lead).exp());
                }
            }
            rows.set_row(i, &row);
            scale[i] = lead;
        }
        self.rows = rows;
        self.log_scale = scale;
        for i in 0..3 {
            if self.log_scale[i].is_finite() {
                self.normalize_row(i);
            }
        }
    }

    /// Natural logarithms of the singular values, sorted non-increasing.
    ///
    /// One-sided Jacobi on the rows, carried out in the scaled
    /// representation: rotations between rows of very different magnitude
    /// reduce to projections without forming the large ratio explicitly.
    pub fn log_singular_values(&self) -> [f64; 3] {
        let mut l = self.log_scale;
        let mut u: [Vector3<f64>; 3] = [0, 1, 2].map(|i| self.rows.row(i).transpose());
        for _sweep in 0..60 {
            let mut rotated = false;
            for i in 0..3 {
                for j in (i + 1)..3 {
                    if !(l[i].is_finite() && l[j].is_finite()) {
                        continue;
                    }
                    let mu = u[i].dot(&u[j]);
                    if mu.abs() <= 1e-15 {
                        continue;
                    }
                    rotated = true;
                    // Big row first.
                    let (a, b) = if l[i] >= l[j] { (i, j) } else { (j, i) };
                    let delta = l[a] - l[b];
                    let e = (-2.0 * delta).exp();
                    let h = (1.0 - e) / (2.0 * mu.abs());
                    // tau = tan(theta) * exp(delta); sign(zeta) = -sign(mu).
                    let tau = -mu.signum() / (h + (e + h * h).sqrt());
                    let t = tau * (-delta).exp();
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let ua = (u[a] - u[b] * (tau * e)) * c;
                    let ub = (u[a] * tau + u[b]) * c;
                    let na = ua.norm();
                    let nb = ub.norm();
                    l[a] += na.ln();
                    l[b] += nb.ln();
                    u[a] = ua / na;
                    u[b] = ub / nb;
                }
            }
            if !rotated {
                break;
            }
        }
        l.sort_by(|x, y| y.total_cmp(x));
        l
    }

    /// Dense matrix; only meaningful when the scales are within range.
    pub fn to_matrix(&self) -> Matrix3<f64> {
        let mut m = self.rows;
        for i in 0..3 {
            let k = self.log_scale[i].exp();
            for j in 0..3 {
                m[(i, j)] *= k;
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng) -> Matrix3<f64> {
        Matrix3::from_fn(|_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn gram_schmidt_factorises() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let m = random_matrix(&mut rng);
            let (q, r) = gram_schmidt(&m);
            assert!((q.transpose() * q - Matrix3::identity()).norm() < 1e-12);
            assert!((q * r - m).norm() < 1e-12);
            for i in 0..3 {
                assert!(r[(i, i)] >= 0.0);
                for j in 0..i {
                    assert_eq!(r[(i, j)], 0.0);
                }
            }
        }
    }

    #[test]
    fn jacobi_matches_nalgebra_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let m = random_matrix(&mut rng);
            let got = GradedRows::from_matrix(&m).log_singular_values();
            let mut sv: Vec<f64> = m.svd(false, false).singular_values.iter().map(|s| s.ln()).collect();
            sv.sort_by(|a, b| b.total_cmp(a));
            for k in 0..3 {
                assert!((got[k] - sv[k]).abs() < 1e-9, "{got:?} vs {sv:?}");
            }
        }
    }

    #[test]
    fn product_of_graded_factors() {
        // diag(e^40, 1, e^-300) applied 3 times to a random upper factor:
        // the smallest singular value is far below what a dense SVD resolves.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut g = GradedRows::from_matrix(&Matrix3::identity());
        let mut expected = [0.0; 3];
        let rates: [f64; 3] = [40.0, 0.0, -300.0];
        for _ in 0..3 {
            let mut r = Matrix3::zeros();
            for i in 0..3 {
                r[(i, i)] = (rates[i] / 3.0).exp();
                expected[i] += rates[i] / 3.0;
                for j in (i + 1)..3 {
                    r[(i, j)] = rng.random_range(-1.0..1.0) * r[(i, i)].max(1.0);
                }
            }
            g.left_multiply(&r);
        }
        let got = g.log_singular_values();
        // Strongly graded: log singular values equal log diagonal up to O(1).
        for k in 0..3 {
            assert!((got[k] - expected[k]).abs() < 3.0, "{got:?} vs {expected:?}");
        }
        assert!(got[2] < -250.0);
        let sum: f64 = got.iter().sum();
        let det_log: f64 = expected.iter().sum();
        assert!((sum - det_log).abs() < 1e-9);
    }
}
