//! Primality and random prime sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

fn mul_mod(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 * b as u128) % n as u128) as u64
}

pub fn pow_mod(mut a: u64, mut e: u64, n: u64) -> u64 {
    let mut r = 1 % n;
    a %= n;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, n);
        }
        a = mul_mod(a, a, n);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin; the first twelve prime bases are exact for
/// every 64-bit input.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for p in BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// The RNG for trial `trial` of a run seeded with `seed`. Each trial gets its
/// own ChaCha stream, so results do not depend on how trials are scheduled.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Random integers below `2^min(c_const * n, bit_cap)`, for the random-prime
/// coefficient test. `n` is the size of the circuit under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeSampler {
    pub c_const: u32,
    pub bit_cap: u32,
    pub seed: u64,
}

impl PrimeSampler {
    pub fn new(seed: u64) -> Self {
        PrimeSampler {
            c_const: 3,
            bit_cap: 62,
            seed,
        }
    }

    pub fn with_c(mut self, c_const: u32) -> Self {
        self.c_const = c_const;
        self
    }

    /// Bit length of the sampling range for circuits of size `n`; at least 2.
    pub fn bits(&self, n: usize) -> u32 {
        let b = (self.c_const as u64).saturating_mul(n as u64);
        b.clamp(2, self.bit_cap.clamp(2, 63) as u64) as u32
    }

    /// Trials after which a nonzero coefficient escapes detection with
    /// probability at most `delta`, from the per-trial bound `1 - 1/(c·n)`.
    pub fn trials_for_confidence(&self, n: usize, delta: f64) -> u64 {
        let q = 1.0 - 1.0 / (self.c_const.max(1) as f64 * n.max(1) as f64);
        if q <= 0.0 {
            return 1;
        }
        (delta.ln() / q.ln()).ceil().max(1.0) as u64
    }

    pub fn rng(&self, trial: u64) -> ChaCha8Rng {
        trial_rng(self.seed, trial)
    }

    /// Uniform in `[2, 2^bits(n))`. Composite values are returned as is.
    pub fn sample<R: Rng>(&self, n: usize, rng: &mut R) -> u64 {
        rng.gen_range(2..1u64 << self.bits(n))
    }

    /// Bit length for evaluation primes on circuits of size `n`: as `bits`,
    /// but never below 32.
    pub fn field_bits(&self, n: usize) -> u32 {
        let b = (self.c_const as u64).saturating_mul(n as u64);
        b.clamp(32, self.bit_cap.clamp(32, 63) as u64) as u32
    }

    /// A prime of at least 32 bits for evaluation-based tests.
    pub fn field_prime<R: Rng>(&self, n: usize, rng: &mut R) -> u64 {
        Self::sample_prime(32, self.field_bits(n), rng)
    }

    /// A prime uniform among the primes in `[2^(lo_bits-1), 2^hi_bits)`, by
    /// rejection.
    pub fn sample_prime<R: Rng>(lo_bits: u32, hi_bits: u32, rng: &mut R) -> u64 {
        let lo = 1u64 << (lo_bits.max(2) - 1);
        let hi = 1u64 << hi_bits.clamp(lo_bits.max(2), 63);
        loop {
            let p = rng.gen_range(lo..hi);
            if is_prime(p) {
                return p;
            }
        }
    }
}
