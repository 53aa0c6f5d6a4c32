//! Portable deterministic pseudo-random generator.
//!
//! The whole pipeline draws randomness from this generator so that a run is
//! reproducible from its root seed on any platform. The generator is
//! xoshiro256++ (Blackman & Vigna) with its state expanded from a 64-bit seed
//! by splitmix64; both algorithms are fully specified here by their constants,
//! so the stream does not depend on any external crate's implementation
//! choices.
//!
//! Stage and per-item seeds are derived from the root seed with
//! [`derive_seed`], which folds the stage name and item index into the seed
//! through the splitmix64 mixer. Two runs with the same root seed therefore
//! agree on every draw, and a stage can be re-run in isolation.

/// splitmix64 output mixer. One full step of the splitmix64 generator
/// advancing from `state`, returning the mixed output.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed for one unit of work from the root seed.
///
/// The stage name keeps different pipeline stages on independent streams even
/// when they share an index; the index separates items within a stage.
pub fn derive_seed(root: u64, stage: &str, index: u64) -> u64 {
    let mut state = root;
    let mut acc = splitmix64(&mut state);
    for &b in stage.as_bytes() {
        state ^= u64::from(b);
        acc ^= splitmix64(&mut state);
    }
    state ^= index;
    acc ^ splitmix64(&mut state)
}

/// xoshiro256++ generator seeded via splitmix64.
#[derive(Debug, Clone)]
pub struct Rng {
    state: [u64; 4],
}

impl Rng {
    pub fn from_seed(seed: u64) -> Self {
        let mut sm = seed;
        Rng {
            state: [
                splitmix64(&mut sm),
                splitmix64(&mut sm),
                splitmix64(&mut sm),
                splitmix64(&mut sm),
            ],
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.state;
        let result = s[0]
            .wrapping_add(s[3])
            .rotate_left(23)
            .wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform integer in `[0, n)` using Lemire's multiply-shift rejection
    /// method, which is unbiased and uses an explicit, portable algorithm.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0) is undefined");
        loop {
            let x = self.next_u64();
            let m = (x as u128) * (n as u128);
            let low = m as u64;
            if low < n {
                let threshold = n.wrapping_neg() % n;
                if low < threshold {
                    continue;
                }
            }
            return (m >> 64) as u64;
        }
    }

    /// Uniform integer in the inclusive range `[lo, hi]`.
    pub fn range_inclusive(&mut self, lo: i64, hi: i64) -> i64 {
        assert!(lo <= hi);
        let span = (hi - lo) as u64 + 1;
        lo + self.below(span) as i64
    }

    /// Uniform index into a collection of length `len`.
    pub fn index(&mut self, len: usize) -> usize {
        self.below(len as u64) as usize
    }

    /// Uniform f64 in [0, 1) from the top 53 bits.
    pub fn f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Fair coin.
    pub fn coin(&mut self) -> bool {
        self.next_u64() & 1 == 1
    }

    /// Standard normal deviate via the Box-Muller transform. Draws exactly two
    /// uniform values per call so the stream position is predictable.
    pub fn normal(&mut self) -> f64 {
        let u1 = loop {
            let u = self.f64();
            if u > 0.0 {
                break u;
            }
        };
        let u2 = self.f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.index(i + 1);
            items.swap(i, j);
        }
    }

    /// Uniform sample of `k` distinct indices from `0..n`, returned in
    /// ascending order. Panics if `k > n`.
    pub fn sample_indices(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.index(n - i);
            pool.swap(i, j);
        }
        let mut picked: Vec<usize> = pool.into_iter().take(k).collect();
        picked.sort_unstable();
        picked
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = Rng::from_seed(7);
        let mut b = Rng::from_seed(7);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn reference_stream_is_frozen() {
        // First outputs for seed 0, pinned so any change to the generator or
        // its seeding is caught immediately.
        let mut rng = Rng::from_seed(0);
        let first: Vec<u64> = (0..4).map(|_| rng.next_u64()).collect();
        assert_eq!(
            first,
            vec![
                5987356902031041503,
                7051070477665621255,
                6633766593972829180,
                211316841551650330
            ]
        );
    }

    #[test]
    fn below_stays_in_bounds_and_hits_all_values() {
        let mut rng = Rng::from_seed(123);
        let mut seen = [false; 7];
        for _ in 0..1000 {
            let v = rng.below(7);
            assert!(v < 7);
            seen[v as usize] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn derive_seed_separates_stages_and_indices() {
        let a = derive_seed(42, "sample", 0);
        let b = derive_seed(42, "sample", 1);
        let c = derive_seed(42, "export", 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, derive_seed(42, "sample", 0));
    }

    #[test]
    fn range_inclusive_covers_endpoints() {
        let mut rng = Rng::from_seed(9);
        let mut lo_seen = false;
        let mut hi_seen = false;
        for _ in 0..2000 {
            let v = rng.range_inclusive(1, 5);
            assert!((1..=5).contains(&v));
            lo_seen |= v == 1;
            hi_seen |= v == 5;
        }
        assert!(lo_seen && hi_seen);
    }

    #[test]
    fn sample_indices_are_distinct_and_sorted() {
        let mut rng = Rng::from_seed(5);
        for _ in 0..100 {
            let picked = rng.sample_indices(10, 4);
            assert_eq!(picked.len(), 4);
            assert!(picked.windows(2).all(|w| w[0] < w[1]));
            assert!(picked.iter().all(|&i| i < 10));
        }
    }

    #[test]
    fn normal_mean_and_spread_look_sane() {
        let mut rng = Rng::from_seed(77);
        let n = 20000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let x = rng.normal();
            sum += x;
            sumsq += x * x;
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        assert!(mean.abs() < 0.05, "mean {mean}");
        assert!((var - 1.0).abs() < 0.1, "var {var}");
    }
}
