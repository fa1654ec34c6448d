//! Inequality checks. Every verdict reads lhs ≤ slack·rhs, with asymptotic
//! prefactors set to their limits; failures are data, never errors.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{least_squares, Domain, HistoryStats, K41Report};
use crate::error::{K41Error, Result};
use crate::numtheory::r3;
use crate::spectrum::{trapezoid, AveragedSpectrum};

/// 15√15/(32√2).
pub const NINTERM_T3: f64 = 1.283_724_744_152_733;
/// 3√3/4.
pub const NINTERM_R3: f64 = 1.299_038_105_676_658;

pub const TIMESCALE_LOWER: f64 = 3375.0 / 2048.0;

pub fn timescale_upper_constant() -> f64 {
    128.0 / (3375.0 * PI.powi(4))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub id: String,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
    pub slack: f64,
}

impl Verdict {
    /// Non-finite sides fail and are stored as ±f64::MAX so the JSON
    /// stays numeric and round-trips.
    pub fn new(id: &str, lhs: f64, rhs: f64, slack: f64) -> Self {
        let pass = lhs <= slack * rhs;
        let clamp = |x: f64| if x.is_finite() { x } else if x < 0.0 { -f64::MAX } else { f64::MAX };
        Verdict { id: id.to_string(), lhs: clamp(lhs), rhs: clamp(rhs), pass: pass && lhs.is_finite() && rhs.is_finite(), slack }
    }
}

/// Scale bounds on K₊, K₋ and K₋³Vol, plus C(n₋) < 1 on the torus.
pub fn range_bound_verdicts(r: &K41Report) -> Vec<Verdict> {
    let s = r.slack;
    let (kp, km, kv) = match r.domain {
        Domain::Torus => ((0.260, 0.625), (0.907, 48.7), (8.33e-3, 248.1)),
        Domain::Whole => ((0.260, 1.25), (1.83, 6.46), (0.711, 1.0)),
    };
    let vol3 = r.k_minus.powi(3) * r.vol;
    let mut v = vec![
        Verdict::new("rangethm.kplus.lower", kp.0 * r.k_d, r.k_plus, s),
        Verdict::new("rangethm.kplus.upper", r.k_plus, kp.1 * r.k_d, s),
        Verdict::new("rangethm.kminus.lower", km.0 * r.k_c, r.k_minus, s),
        Verdict::new("rangethm.kminus.upper", r.k_minus, km.1 * r.k_c, s),
        Verdict::new("rangethm.vol.lower", kv.0, vol3, s),
        Verdict::new("rangethm.vol.upper", vol3, kv.1, s),
    ];
    if r.domain == Domain::Torus {
        v.push(Verdict::new("rangethm.cnminus", r.c_nminus, 1.0, s));
    }
    v
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowFreq {
    pub max_ratio: f64,
    pub worst_n: Option<u64>,
    pub first_violation: Option<u64>,
    pub verdict: Verdict,
}

/// Ē†(K) against Vol·K²·Ē·r₃(n)/(8π³√n) on every shell.
pub fn low_freq_verdict(avg: &AveragedSpectrum, vol: f64, slack: f64) -> Result<LowFreq> {
    let mut max_ratio: f64 = 0.0;
    let mut worst_n = None;
    let mut first_violation = None;
    for sh in &avg.spectrum.shells {
        let bound = vol * sh.k * sh.k * avg.ebar * r3(sh.n)? as f64 / (8.0 * PI.powi(3) * (sh.n as f64).sqrt());
        let ratio = sh.e_dagger / bound;
        if ratio > max_ratio || worst_n.is_none() {
            max_ratio = max_ratio.max(ratio);
            worst_n = Some(sh.n);
        }
        if !(ratio <= slack) && first_violation.is_none() {
            first_violation = Some(sh.n);
        }
    }
    Ok(LowFreq { max_ratio, worst_n, first_violation, verdict: Verdict::new("ebarlow.shell", max_ratio, 1.0, slack) })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub tau: f64,
    /// ½min{√(ν(t−T₀)), C₀√(ντ)} per sample.
    pub delta: Vec<f64>,
    /// Minus the slope of log(E†/K) against K on the upper half of the
    /// nonzero shells; NaN for samples with fewer than 8 of them.
    pub delta_fit: Vec<f64>,
    pub c_fit: f64,
    pub verdict: Verdict,
}

/// Fits E†(K,t) ≤ C·(K/L)·L³·E₀·e^{−δ(t)K}; C₀ rescales δ.
pub fn high_freq_envelope(stats: &HistoryStats, c0: f64, slack: f64) -> Result<Envelope> {
    let nu = stats.nu;
    let l = stats.l;
    let sup = stats.samples.iter().map(|s| s.grad_sq).fold(0.0, f64::max);
    if sup == 0.0 {
        return Err(K41Error::Degenerate("gradient vanishes on the whole window".into()));
    }
    let tau = nu.powi(3) / (sup * sup);
    let t0 = stats.t0();
    let e0 = stats.e0();
    let mut delta = Vec::with_capacity(stats.samples.len());
    let mut delta_fit = Vec::with_capacity(stats.samples.len());
    let mut worst = f64::NEG_INFINITY;
    let mut used = 0;
    for s in &stats.samples {
        let d = 0.5 * (nu * (s.t - t0)).sqrt().min(c0 * (nu * tau).sqrt());
        delta.push(d);
        let nz: Vec<_> = s.spectrum.shells.iter().filter(|sh| sh.e_dagger > 0.0).collect();
        if nz.len() < 8 {
            delta_fit.push(f64::NAN);
            continue;
        }
        used += 1;
        let kmax = nz.last().unwrap().k;
        let upper: Vec<_> = nz.iter().filter(|sh| sh.k >= 0.5 * kmax).collect();
        let pts: Vec<(f64, f64)> = upper.iter().map(|sh| (sh.k, (sh.e_dagger / sh.k).ln())).collect();
        delta_fit.push(-least_squares(&pts).0);
        for sh in &upper {
            let y = sh.e_dagger.ln() + d * sh.k - (sh.k * l * l).ln() - e0.ln();
            worst = worst.max(y);
        }
    }
    if used == 0 {
        return Err(K41Error::InsufficientShells(
            stats.samples.iter().map(|s| s.spectrum.shells.len()).max().unwrap_or(0),
        ));
    }
    let c_fit = worst.exp();
    Ok(Envelope { tau, delta, delta_fit, c_fit, verdict: Verdict::new("thhigh.envelope", c_fit, 1.0, slack) })
}

/// Smooth-energy consistency, the Ē bound by dissipation fluctuations and
/// the lower bound on temporal intermittency.
pub fn intermittency_verdict(stats: &HistoryStats, r: &K41Report) -> Vec<Verdict> {
    let s = r.slack;
    let dt = r.t1 - r.t0;
    let times = stats.times();
    let dev = trapezoid(&times, &stats.series(|x| (x.dissipation - r.epsbar).abs()));
    // round-off allowance for the exactly-constant case
    let floor = 1e-12 * r.e0;
    let mut v = vec![
        Verdict::new("smooth.epsilon", (r.epsbar - (r.e0 - r.e1) / dt).abs(), 1e-3 * r.epsbar + floor / dt, s),
        Verdict::new("intermittency.ebar", (r.ebar - 0.5 * (r.e0 + r.e1)).abs(), dev + floor, s),
    ];
    let (id, c) = match r.domain {
        Domain::Torus => ("ninterm.t3", NINTERM_T3),
        Domain::Whole => ("ninterm.r3", NINTERM_R3),
    };
    let lhs = c * (r.reynolds * r.transfer_time / dt).sqrt();
    v.push(Verdict::new(id, lhs, (r.e0 + r.e1) / (2.0 * r.e0) + dev / r.e0, s));
    v
}

pub fn timescale_verdict(r: &K41Report) -> Vec<Verdict> {
    let s = r.slack;
    let dt = r.t1 - r.t0;
    let rt = r.reynolds * r.transfer_time;
    let mut v = vec![
        Verdict::new("timescale.lower", TIMESCALE_LOWER * rt, dt, s),
        Verdict::new("timescale.upper", dt, timescale_upper_constant() / rt * r.l.powi(4) / (r.nu * r.nu), s),
    ];
    if r.domain == Domain::Torus && r.c_nminus < 1.0 {
        let x = (r.ebar / r.e0).powi(2) * dt / rt;
        v.push(Verdict::new("timescale.sharp.lower", TIMESCALE_LOWER, x, s));
        v.push(Verdict::new("timescale.sharp.upper", x, 864.0 / (1.0 - r.c_nminus).powi(2), s));
    }
    v
}

/// Reynolds-number bounds from the analyticity radius, with C = 1 and the
/// configured C₀. δ₀ and δ₁ coincide since the window is taken as the whole
/// recorded history.
pub fn analyticity_verdict(stats: &HistoryStats, r: &K41Report) -> Vec<Verdict> {
    let s = r.slack;
    let dt = r.t1 - r.t0;
    let sup_om = stats.samples.iter().map(|x| 2.0 * x.grad_sq).fold(0.0, f64::max);
    let tau = r.nu.powi(3) / (sup_om * sup_om);
    let d0 = r.c0 * r.nu * r.nu / (2.0 * sup_om);
    let dk = d0 * r.k_plus;
    let re = r.reynolds;
    let (front, power, log_re) = match r.domain {
        Domain::Torus => (1.0 - r.c_nminus, 2.0, 2.0 * re.ln()),
        Domain::Whole => (1.0 - re.powf(-0.5), 0.5, 0.5 * re.ln()),
    };
    let growth = re.powf(1.5 * r.gamma);
    let brace = (-dk).exp() + dk / (1.0 + dk.powi(3)) * 3.0 * r.c0 * r.c0 * tau / dt;
    vec![
        Verdict::new("polyreynolds", front / growth * r.ebar / r.e0, re.powf(power) * brace, s),
        Verdict::new("expreynolds", dk, (growth / front).ln() + (r.e0 / r.ebar).ln() + log_re, s),
    ]
}
