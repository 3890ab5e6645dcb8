//! SplitMix64, pinned so that every platform reproduces the same streams.

use std::f64::consts::TAU;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng { state: seed }
    }

    pub fn state(&self) -> u64 {
        self.state
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform on `[0, 1)` from the top 53 bits. One draw.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `(0, 1]`. One draw.
    pub fn uniform_open0(&mut self) -> f64 {
        1.0 - self.uniform()
    }

    /// Fair coin from the top bit. One draw.
    pub fn bernoulli(&mut self) -> bool {
        self.next_u64() >> 63 == 1
    }

    /// `floor(u · n / 2^64)`; one draw, bias below `n / 2^64`.
    pub fn below(&mut self, n: u64) -> u64 {
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    /// Standard normal by Box–Muller, cosine branch only. Two draws.
    pub fn normal(&mut self) -> f64 {
        let r = (-2.0 * self.uniform_open0().ln()).sqrt();
        r * (TAU * self.uniform()).cos()
    }

    /// Pareto with scale `x_m` and tail index `shape` by inversion. One draw.
    pub fn pareto(&mut self, x_m: f64, shape: f64) -> f64 {
        x_m * self.uniform_open0().powf(-1.0 / shape)
    }
}
