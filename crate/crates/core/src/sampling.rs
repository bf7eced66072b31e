//! Seeded low-discrepancy sampling of boxes and balls.
//!
//! Points come from the additive recurrence `u_n = frac(shift + n * alpha)`
//! with `alpha` built from the plastic-number generalisation of the golden
//! ratio. The shift is drawn from a seeded ChaCha stream, so a given seed
//! always produces the same points while different seeds give independent
//! randomisations of the same sequence.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::StateVec;

/// Unique real root of `x^4 = x + 1`.
const PHI3: f64 = 1.220_744_084_605_759_5;

#[derive(Debug, Clone)]
pub struct QuasiRandom {
    alpha: [f64; 3],
    shift: [f64; 3],
    index: u64,
}

impl QuasiRandom {
    /// `stream` selects an independent shift for the same seed.
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self {
            alpha: [1.0 / PHI3, 1.0 / (PHI3 * PHI3), 1.0 / (PHI3 * PHI3 * PHI3)],
            shift: [rng.random(), rng.random(), rng.random()],
            index: 0,
        }
    }

    /// Next point of the unit cube `[0, 1)^3`.
    pub fn next_unit(&mut self) -> [f64; 3] {
        self.index += 1;
        let n = self.index as f64;
        std::array::from_fn(|i| (self.shift[i] + n * self.alpha[i]).fract())
    }

    /// Next point of the axis-aligned box `center ± half_width`.
    pub fn next_in_box(&mut self, center: &StateVec, half_width: f64) -> StateVec {
        let u = self.next_unit();
        let c = center.to_array();
        StateVec::from_array(std::array::from_fn(|i| c[i] + half_width * (2.0 * u[i] - 1.0)))
    }

    /// Next point of the closed ball; the map from the cube preserves volume
    /// so the points are uniformly spread.
    pub fn next_in_ball(&mut self, center: &StateVec, radius: f64) -> StateVec {
        let [u, v, w] = self.next_unit();
        let rho = radius * u.cbrt();
        let cos_t = 2.0 * v - 1.0;
        let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
        let phi = std::f64::consts::TAU * w;
        *center + StateVec::new(rho * sin_t * phi.cos(), rho * sin_t * phi.sin(), rho * cos_t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plastic_root() {
        assert!((PHI3.powi(4) - PHI3 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn deterministic_per_seed() {
        let a: Vec<_> = (0..10).scan(QuasiRandom::new(7, 0), |q, _| Some(q.next_unit())).collect();
        let b: Vec<_> = (0..10).scan(QuasiRandom::new(7, 0), |q, _| Some(q.next_unit())).collect();
        let c: Vec<_> = (0..10).scan(QuasiRandom::new(7, 1), |q, _| Some(q.next_unit())).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn ball_points_inside_and_spread() {
        let mut q = QuasiRandom::new(1, 0);
        let c = StateVec::new(0.0, 0.0, 38.0);
        let n = 20_000;
        let mut inner = 0;
        for _ in 0..n {
            let s = q.next_in_ball(&c, 10.0);
            let d = s.distance(&c);
            assert!(d <= 10.0 + 1e-12);
            if d <= 10.0 * 0.5f64.cbrt() {
                inner += 1;
            }
        }
        // Half the volume lies within radius R / 2^(1/3).
        assert!((inner as f64 / n as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn box_marginals_are_uniform() {
        let mut q = QuasiRandom::new(3, 0);
        let n = 10_000;
        let mean = (0..n).map(|_| q.next_in_box(&StateVec::ORIGIN, 2.0).x).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.01);
    }
}
