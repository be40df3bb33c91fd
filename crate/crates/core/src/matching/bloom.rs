use crate::caching::CacheIndex;
use crate::catalogue::{ContentId, UeProfile};
use crate::error::ConfigError;

/// `round((m/n) ln 2)`, at least 1.
pub fn bloom_optimal_k(bits: usize, items: usize) -> usize {
    assert!(bits >= 1 && items >= 1, "bloom sizing needs m, n >= 1");
    let k = (bits as f64 / items as f64 * std::f64::consts::LN_2).round() as usize;
    k.max(1)
}

/// `(1 - e^{-kn/m})^k`.
pub fn bloom_theoretical_fpr(bits: usize, items: usize, hashes: usize) -> f64 {
    if items == 0 {
        return 0.0;
    }
    let fill = 1.0 - (-(hashes as f64) * items as f64 / bits as f64).exp();
    fill.powi(hashes as i32)
}

// splitmix64 finaliser
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Bloom filter over content identifiers with double hashing
/// `h1 + i*h2 (mod m)` for `i in 0..k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BloomFilter {
    bits: Vec<u64>,
    len_bits: usize,
    hashes: usize,
    seed_a: u64,
    seed_b: u64,
    inserted: usize,
}

impl BloomFilter {
    pub fn new(bits: usize, hashes: usize, seed: u64) -> Result<Self, ConfigError> {
        if bits == 0 {
            return Err(ConfigError::invalid(
                "m",
                "bloom filter needs at least one bit",
            ));
        }
        if hashes == 0 {
            return Err(ConfigError::invalid(
                "k",
                "bloom filter needs at least one hash",
            ));
        }
        let seed_a = mix64(seed);
        let seed_b = mix64(seed_a ^ 0xD1B5_4A32_D192_ED03);
        Ok(BloomFilter {
            bits: vec![0; bits.div_ceil(64)],
            len_bits: bits,
            hashes,
            seed_a,
            seed_b,
            inserted: 0,
        })
    }

    /// Encodes a cache index with `k` sized for the index.
    pub fn from_index(index: &CacheIndex, bits: usize, seed: u64) -> Result<Self, ConfigError> {
        let k = bloom_optimal_k(bits, index.len().max(1));
        let mut bf = BloomFilter::new(bits, k, seed)?;
        for id in index.items() {
            bf.insert(*id);
        }
        Ok(bf)
    }

    pub fn bits(&self) -> usize {
        self.len_bits
    }

    pub fn hashes(&self) -> usize {
        self.hashes
    }

    pub fn inserted(&self) -> usize {
        self.inserted
    }

    pub fn theoretical_fpr(&self) -> f64 {
        bloom_theoretical_fpr(self.len_bits, self.inserted, self.hashes)
    }

    fn positions(&self, id: ContentId) -> impl Iterator<Item = usize> {
        let key = id.rank() as u64;
        let h1 = mix64(key ^ self.seed_a);
        let h2 = mix64(key ^ self.seed_b);
        let m = self.len_bits as u64;
        (0..self.hashes as u64).map(move |i| (h1.wrapping_add(i.wrapping_mul(h2)) % m) as usize)
    }

    pub fn insert(&mut self, id: ContentId) {
        let positions: Vec<usize> = self.positions(id).collect();
        for p in positions {
            self.bits[p / 64] |= 1 << (p % 64);
        }
        self.inserted += 1;
    }

    pub fn contains(&self, id: ContentId) -> bool {
        self.positions(id)
            .all(|p| self.bits[p / 64] & (1 << (p % 64)) != 0)
    }
}

/// Match ratio of `profile` against a Bloom-encoded index. Never below the
/// exact ratio for the encoded index.
pub fn approx_match_f(profile: &UeProfile, filter: &BloomFilter) -> Result<f64, ConfigError> {
    if profile.is_empty() {
        return Err(ConfigError::invalid(
            "profile",
            "cannot match an empty profile",
        ));
    }
    let found = profile
        .items()
        .iter()
        .filter(|id| filter.contains(**id))
        .count();
    Ok(found as f64 / profile.len() as f64)
}
