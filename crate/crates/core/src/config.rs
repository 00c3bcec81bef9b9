/// Bounds on quantification over properties and relations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuantConfig {
    /// Properties of a side are enumerated exhaustively when it has at most this many traces.
    pub cap_bits: u32,
    /// Pairs of properties are enumerated exhaustively when both sides together have at most this many traces.
    pub pair_cap_bits: u32,
    /// Number of seeded samples used beyond the exhaustive limits.
    pub samples: usize,
    pub seed: u64,
}

impl Default for QuantConfig {
    fn default() -> Self {
        QuantConfig { cap_bits: 16, pair_cap_bits: 24, samples: 10_000, seed: 0 }
    }
}

impl QuantConfig {
    pub fn with_seed(self, seed: u64) -> Self {
        QuantConfig { seed, ..self }
    }
}
