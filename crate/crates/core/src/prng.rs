//! Counter-based random streams.
//!
//! Every seeded operation in the crate draws from Philox4x32-10 keyed by the
//! user seed, with the 128-bit counter split into a 64-bit block index and a
//! 64-bit hash of a domain tag (`"subset-sample"`, `"remix-class-3"`, ...).
//! A block depends only on `(seed, domain, counter)`, so streams are
//! reproducible on every platform and independent of execution order.
//!
//! Derived draws:
//! * `next_u64`: words 0 and 1 of the block, little-endian (`w0 | w1 << 32`).
//! * uniform `f64` in `[0, 1)`: top 53 bits of a `u64` times `2^-53`.
//! * bounded integers: Lemire's multiply-and-reject on `u64`.
//! * `gauss`: Box–Muller cosine branch from two consecutive uniforms.

const PHILOX_M0: u32 = 0xD251_1F53;
const PHILOX_M1: u32 = 0xCD9E_8D57;
const PHILOX_W0: u32 = 0x9E37_79B9;
const PHILOX_W1: u32 = 0xBB67_AE85;
const ROUNDS: usize = 10;

/// Philox4x32 with 10 rounds.
pub fn philox4x32(counter: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut ctr = counter;
    let mut k = key;
    for round in 0..ROUNDS {
        if round > 0 {
            k[0] = k[0].wrapping_add(PHILOX_W0);
            k[1] = k[1].wrapping_add(PHILOX_W1);
        }
        let p0 = u64::from(PHILOX_M0) * u64::from(ctr[0]);
        let p1 = u64::from(PHILOX_M1) * u64::from(ctr[2]);
        let (hi0, lo0) = ((p0 >> 32) as u32, p0 as u32);
        let (hi1, lo1) = ((p1 >> 32) as u32, p1 as u32);
        ctr = [hi1 ^ ctr[1] ^ k[0], lo1, hi0 ^ ctr[3] ^ k[1], lo0];
    }
    ctr
}

/// FNV-1a, 64-bit. Used only to fold domain tags into the counter.
pub fn domain_hash(domain: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in domain.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Fully specifies one 64-bit draw.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub seed: u64,
    pub domain: String,
    pub counter: u64,
}

impl StreamKey {
    pub fn new(seed: u64, domain: impl Into<String>, counter: u64) -> Self {
        Self {
            seed,
            domain: domain.into(),
            counter,
        }
    }
}

fn block_u64(seed: u64, dom: u64, counter: u64) -> u64 {
    let out = philox4x32(
        [counter as u32, (counter >> 32) as u32, dom as u32, (dom >> 32) as u32],
        [seed as u32, (seed >> 32) as u32],
    );
    u64::from(out[0]) | (u64::from(out[1]) << 32)
}

/// Stateless draw for a fully specified key.
pub fn next_u64(key: &StreamKey) -> u64 {
    block_u64(key.seed, domain_hash(&key.domain), key.counter)
}

/// Sequential view over the blocks of one `(seed, domain)` pair.
///
/// The stream holds nothing but the key and a counter; cloning it and
/// advancing both copies yields the same values.
#[derive(Debug, Clone)]
pub struct Stream {
    seed: u64,
    dom: u64,
    counter: u64,
}

impl Stream {
    pub fn new(seed: u64, domain: &str) -> Self {
        Self {
            seed,
            dom: domain_hash(domain),
            counter: 0,
        }
    }

    /// Starts at an arbitrary block, so chunked workers can jump straight to
    /// their slice of the stream.
    pub fn at(seed: u64, domain: &str, counter: u64) -> Self {
        Self {
            seed,
            dom: domain_hash(domain),
            counter,
        }
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    pub fn next_u64(&mut self) -> u64 {
        let v = block_u64(self.seed, self.dom, self.counter);
        self.counter = self.counter.wrapping_add(1);
        v
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, bound)`; `bound` must be nonzero.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "below(0)");
        let mut m = u128::from(self.next_u64()) * u128::from(bound);
        let mut low = m as u64;
        if low < bound {
            let threshold = bound.wrapping_neg() % bound;
            while low < threshold {
                m = u128::from(self.next_u64()) * u128::from(bound);
                low = m as u64;
            }
        }
        (m >> 64) as u64
    }

    /// Standard normal via Box–Muller (cosine branch only).
    pub fn gauss(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// In-place Fisher–Yates.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }

    /// `m` distinct indices from `0..n`, in draw order (partial Fisher–Yates).
    pub fn sample_without_replacement(&mut self, n: usize, m: usize) -> crate::Result<Vec<usize>> {
        if m > n {
            return Err(crate::Error::InvalidArgument(format!(
                "cannot sample {m} distinct indices from {n}"
            )));
        }
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..m {
            let j = i + self.below((n - i) as u64) as usize;
            pool.swap(i, j);
        }
        pool.truncate(m);
        Ok(pool)
    }
}

/// Standard normal draw for a fully specified key; consumes blocks
/// `counter` and `counter + 1`.
pub fn gauss(key: &StreamKey) -> f64 {
    Stream::at(key.seed, &key.domain, key.counter).gauss()
}

pub fn shuffle<T: Clone>(key: &StreamKey, items: &[T]) -> Vec<T> {
    let mut out = items.to_vec();
    Stream::at(key.seed, &key.domain, key.counter).shuffle(&mut out);
    out
}

pub fn sample_without_replacement(key: &StreamKey, n: usize, m: usize) -> crate::Result<Vec<usize>> {
    Stream::at(key.seed, &key.domain, key.counter).sample_without_replacement(n, m)
}
