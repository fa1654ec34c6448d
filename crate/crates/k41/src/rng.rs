//! Counter-based random numbers keyed by (seed, lattice index), so a field
//! does not depend on the order modes are visited in.

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub struct ModeRng {
    key: u64,
    counter: u64,
}

impl ModeRng {
    pub fn new(seed: u64, m: [i64; 3]) -> Self {
        let mut h = splitmix(seed);
        for v in m {
            h = splitmix(h ^ (v as u64));
        }
        ModeRng { key: h, counter: 0 }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter += 1;
        splitmix(self.key ^ splitmix(self.counter))
    }

    /// Uniform on (0, 1].
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box–Muller (one of the pair is discarded).
    pub fn normal(&mut self) -> f64 {
        let (a, b) = (self.uniform(), self.uniform());
        (-2.0 * a.ln()).sqrt() * (2.0 * std::f64::consts::PI * b).cos()
    }
}
