//! Unnormalized 3-D complex FFTs on an N³ row-major cube.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

pub struct Fft3 {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

static PLANS: OnceLock<Mutex<HashMap<usize, Arc<Fft3>>>> = OnceLock::new();

impl Fft3 {
    pub fn get(n: usize) -> Arc<Fft3> {
        let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().expect("fft plan cache poisoned");
        map.entry(n)
            .or_insert_with(|| {
                let mut p = FftPlanner::new();
                Arc::new(Fft3 {
                    n,
                    fwd: p.plan_fft_forward(n),
                    inv: p.plan_fft_inverse(n),
                })
            })
            .clone()
    }

    /// In-place Σ_x a(x) e^{-2πi k·x/N}.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.apply(data, &self.fwd);
    }

    /// In-place Σ_k a(k) e^{+2πi k·x/N} (no 1/N³).
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.apply(data, &self.inv);
    }

    fn apply(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        let n2 = n * n;
        assert_eq!(data.len(), n2 * n);
        // last axis: contiguous lines
        data.par_chunks_mut(n2).for_each(|slab| plan.process(slab));
        // middle axis: transpose each slab
        data.par_chunks_mut(n2).for_each(|slab| {
            let mut t = vec![Complex64::default(); n2];
            for j in 0..n {
                for l in 0..n {
                    t[l * n + j] = slab[j * n + l];
                }
            }
            plan.process(&mut t);
            for j in 0..n {
                for l in 0..n {
                    slab[j * n + l] = t[l * n + j];
                }
            }
        });
        // first axis: gather (i, l) planes for each j
        let src: &[Complex64] = data;
        let planes: Vec<Vec<Complex64>> = (0..n)
            .into_par_iter()
            .map(|j| {
                let mut t = vec![Complex64::default(); n2];
                for i in 0..n {
                    for l in 0..n {
                        t[l * n + i] = src[i * n2 + j * n + l];
                    }
                }
                plan.process(&mut t);
                t
            })
            .collect();
        for (j, t) in planes.iter().enumerate() {
            for i in 0..n {
                for l in 0..n {
                    data[i * n2 + j * n + l] = t[l * n + i];
                }
            }
        }
    }
}

/// Per-slot lattice data for an N³ grid.
pub struct Lattice {
    pub n: usize,
    pub m: Vec<[i64; 3]>,
    pub m2: Vec<i64>,
    /// Slot of −m (meaningless on the Nyquist planes).
    pub mirror: Vec<usize>,
    pub nyquist: Vec<bool>,
    /// Inside the 2/3-rule band, all |m_i| <= N/3.
    pub kept: Vec<bool>,
}

static LATTICES: OnceLock<Mutex<HashMap<usize, Arc<Lattice>>>> = OnceLock::new();

impl Lattice {
    pub fn get(n: usize) -> Arc<Lattice> {
        let cache = LATTICES.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().expect("lattice cache poisoned");
        map.entry(n).or_insert_with(|| Arc::new(Lattice::build(n))).clone()
    }

    fn build(n: usize) -> Lattice {
        let total = n * n * n;
        let h = n as i64 / 2;
        let mut m = Vec::with_capacity(total);
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    m.push([freq(i, n), freq(j, n), freq(l, n)]);
                }
            }
        }
        let m2 = m.iter().map(|v| v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).collect();
        let mirror = m
            .iter()
            .map(|v| (slot(-v[0] % n as i64, n) * n + slot(-v[1] % n as i64, n)) * n + slot(-v[2] % n as i64, n))
            .collect();
        let nyquist = m.iter().map(|v| v.iter().any(|&c| c == -h)).collect();
        let kept = m.iter().map(|v| v.iter().all(|&c| 3 * c.unsigned_abs() as usize <= n)).collect();
        Lattice { n, m, m2, mirror, nyquist, kept }
    }
}

/// Signed wavenumber index of FFT slot `i`.
#[inline]
pub fn freq(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// FFT slot of signed wavenumber `m` (must lie in [-N/2, N/2)).
#[inline]
pub fn slot(m: i64, n: usize) -> usize {
    if m >= 0 {
        m as usize
    } else {
        (m + n as i64) as usize
    }
}
