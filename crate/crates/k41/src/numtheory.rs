//! Sums of three squares: Box₃ membership, r₃(n), and the shell sums that
//! control the discrete Stokes spectrum of the periodic box.

use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{K41Error, Result};

/// True iff `n` is not of the form 4^p(8q+7).
pub fn is_sum_of_three_squares(n: u64) -> bool {
    if n == 0 {
        return true;
    }
    let mut m = n;
    while m % 4 == 0 {
        m /= 4;
    }
    m % 8 != 7
}

/// Exact integer square root.
pub fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).map_or(true, |s| s > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).map_or(false, |s| s <= n) {
        r += 1;
    }
    r
}

// Number of signed, permuted lattice points generated by 0 <= x <= y <= z.
fn orbit_size(x: u64, y: u64, z: u64) -> u64 {
    let perms = if x == y && y == z {
        1
    } else if x == y || y == z {
        3
    } else {
        6
    };
    let nonzero = [x, y, z].iter().filter(|&&v| v != 0).count() as u32;
    perms << nonzero
}

fn r3_slice(n: u64, x: u64) -> u64 {
    let rest = n - x * x;
    // y <= z means y^2 <= rest/2
    let ymax = isqrt(rest / 2);
    let mut acc = 0u64;
    for y in x..=ymax {
        let zz = rest - y * y;
        let z = isqrt(zz);
        if z * z == zz {
            acc += orbit_size(x, y, z);
        }
    }
    acc
}

/// Number of z ∈ Z³ with |z|² = n.
///
/// Cost grows linearly in n; around 10¹⁰ this takes tens of seconds even
/// with the outer loop split over workers.
pub fn r3(n: u64) -> Result<u64> {
    if n > 1_000_000_000_000 {
        return Err(K41Error::Overflow(format!("r3({n}) beyond supported range")));
    }
    if n == 0 {
        return Ok(1);
    }
    if !is_sum_of_three_squares(n) {
        return Ok(0);
    }
    let xmax = isqrt(n / 3);
    let total = if n < 1_000_000 {
        (0..=xmax).map(|x| r3_slice(n, x)).sum()
    } else {
        (0..=xmax).into_par_iter().map(|x| r3_slice(n, x)).sum()
    };
    Ok(total)
}

/// r₃(n)/(8π³√n).
pub fn c_ratio(n: u64) -> Result<f64> {
    if n == 0 {
        return Err(K41Error::Domain("c_ratio needs n >= 1".into()));
    }
    Ok(c_ratio_from_count(n, r3(n)?))
}

pub fn c_ratio_from_count(n: u64, count: u64) -> f64 {
    count as f64 / (8.0 * PI.powi(3) * (n as f64).sqrt())
}

/// Box₃ membership over [0, n_max] plus optional r₃ counts.
#[derive(Debug, Clone)]
pub struct Box3Table {
    n_max: u64,
    bits: Vec<u64>,
    r3: Option<Vec<u32>>,
}

impl Box3Table {
    pub fn new(n_max: u64) -> Self {
        let words = (n_max / 64 + 1) as usize;
        let mut bits = vec![0u64; words];
        for n in 0..=n_max {
            if is_sum_of_three_squares(n) {
                bits[(n / 64) as usize] |= 1 << (n % 64);
            }
        }
        Box3Table { n_max, bits, r3: None }
    }

    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    pub fn contains(&self, n: u64) -> bool {
        n <= self.n_max && self.bits[(n / 64) as usize] >> (n % 64) & 1 == 1
    }

    /// Fill r₃ for every n ≤ n_max by enumerating 0 ≤ x ≤ y ≤ z.
    pub fn populate_r3(&mut self) {
        if self.r3.is_some() {
            return;
        }
        let nm = self.n_max;
        let mut counts = vec![0u32; nm as usize + 1];
        let xmax = isqrt(nm / 3);
        for x in 0..=xmax {
            let mut y = x;
            while x * x + 2 * y * y <= nm {
                let mut z = y;
                loop {
                    let s = x * x + y * y + z * z;
                    if s > nm {
                        break;
                    }
                    counts[s as usize] += orbit_size(x, y, z) as u32;
                    z += 1;
                }
                y += 1;
            }
        }
        self.r3 = Some(counts);
    }

    pub fn r3(&self, n: u64) -> Option<u64> {
        self.r3.as_ref().and_then(|v| v.get(n as usize)).map(|&c| c as u64)
    }

    /// Members in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (0..=self.n_max).filter(move |&n| self.contains(n))
    }
}

/// Largest C(n) over 1 ≤ n ≤ n_max, with its argument.
pub fn c_ratio_max(n_max: u64) -> (u64, f64) {
    let mut t = Box3Table::new(n_max);
    t.populate_r3();
    let mut best = (1, 0.0);
    for n in 1..=n_max {
        let c = c_ratio_from_count(n, t.r3(n).unwrap_or(0));
        if c > best.1 {
            best = (n, c);
        }
    }
    best
}

fn shell_sum(n: u64, rel_width: f64, restrict: bool) -> f64 {
    let sn = (n as f64).sqrt();
    let lo = ((1.0 - rel_width) * sn).max(0.0);
    let hi = (1.0 + rel_width) * sn;
    let mut first = isqrt((lo * lo).floor() as u64);
    first = first * first;
    let last = (hi * hi).ceil() as u64 + 1;
    let mut acc = 0.0;
    for m in first.max(1)..=last {
        let sm = (m as f64).sqrt();
        if (sm - sn).abs() > rel_width * sn {
            continue;
        }
        if restrict && !is_sum_of_three_squares(m) {
            continue;
        }
        acc += 1.0 / sm;
    }
    acc / (rel_width * sn)
}

/// (1/(w√n)) Σ 1/√n′ over n′ ∈ Box₃ with |√n′ − √n| ≤ w√n.
pub fn shell_sum_ratio(n: u64, rel_width: f64) -> f64 {
    shell_sum(n, rel_width, true)
}

/// Same sum over every positive integer n′ (no Box₃ restriction).
pub fn shell_sum_ratio_unrestricted(n: u64, rel_width: f64) -> f64 {
    shell_sum(n, rel_width, false)
}

/// Min and max of (K_{j+1}² − K_j²)·L² over consecutive Stokes eigenvalues
/// with n ≤ n_max. These equal (2π)²·(n_{j+1} − n_j) for every L.
pub fn stokes_gap_stats(n_max: u64, l: f64) -> Result<(f64, f64)> {
    if n_max < 10 {
        return Err(K41Error::Domain("stokes_gap_stats needs n_max >= 10".into()));
    }
    let scale = (2.0 * PI / l).powi(2) * l * l;
    let mut prev: Option<u64> = None;
    let (mut gmin, mut gmax) = (u64::MAX, 0u64);
    for n in 1..=n_max {
        if !is_sum_of_three_squares(n) {
            continue;
        }
        if let Some(p) = prev {
            gmin = gmin.min(n - p);
            gmax = gmax.max(n - p);
        }
        prev = Some(n);
    }
    // (K_{j+1}^2 - K_j^2) L^2 = (2π)^2 (n_{j+1} - n_j) independently of L
    Ok((gmin as f64 * scale, gmax as f64 * scale))
}
