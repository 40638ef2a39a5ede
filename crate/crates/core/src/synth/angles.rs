use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `(lo, hi)` of the six tilt intervals in degrees. Negative intervals are
/// closed at `lo`, positive ones at `hi`: `[-10,-7) [-7,-4) [-4,-1)
/// (1,4] (4,7] (7,10]`.
pub const ANGLE_INTERVALS: [(f64, f64); 6] = [
    (-10.0, -7.0),
    (-7.0, -4.0),
    (-4.0, -1.0),
    (1.0, 4.0),
    (4.0, 7.0),
    (7.0, 10.0),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleSample {
    pub degrees: f64,
    pub interval_index: usize,
}

impl AngleSample {
    pub fn in_interval(&self) -> bool {
        let Some(&(lo, hi)) = ANGLE_INTERVALS.get(self.interval_index) else {
            return false;
        };
        if self.interval_index < 3 {
            lo <= self.degrees && self.degrees < hi
        } else {
            lo < self.degrees && self.degrees <= hi
        }
    }
}

/// One uniform draw per interval, in interval order.
pub fn sample_angles(seed: u64) -> [AngleSample; 6] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    std::array::from_fn(|k| {
        let (lo, hi) = ANGLE_INTERVALS[k];
        let t: f64 = rng.random();
        let degrees = if k < 3 {
            lo + (hi - lo) * t
        } else {
            hi - (hi - lo) * t
        };
        AngleSample {
            degrees,
            interval_index: k,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_draw_per_interval_with_signs() {
        for seed in 0..500 {
            let a = sample_angles(seed);
            for (k, s) in a.iter().enumerate() {
                assert_eq!(s.interval_index, k);
                assert!(s.in_interval(), "{s:?}");
                assert!(s.degrees.abs() > 1.0 && s.degrees.abs() <= 10.0);
                assert_eq!(s.degrees < 0.0, k < 3);
            }
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(sample_angles(42), sample_angles(42));
        assert_ne!(sample_angles(42), sample_angles(43));
    }

    #[test]
    fn uniform_within_intervals() {
        const SEEDS: u64 = 10_000;
        const BINS: usize = 10;
        let mut hist = [[0u32; BINS]; 6];
        for seed in 0..SEEDS {
            for s in sample_angles(seed) {
                let (lo, hi) = ANGLE_INTERVALS[s.interval_index];
                let b = (((s.degrees - lo) / (hi - lo)) * BINS as f64) as usize;
                hist[s.interval_index][b.min(BINS - 1)] += 1;
            }
        }
        // chi-square with 9 degrees of freedom: mean 9, sd sqrt(18)
        let limit = 9.0 + 3.0 * 18f64.sqrt();
        let expected = SEEDS as f64 / BINS as f64;
        for h in &hist {
            let chi2: f64 = h.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
            assert!(chi2 < limit, "chi2 {chi2} for {h:?}");
        }
    }
}
