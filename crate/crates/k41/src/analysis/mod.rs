//! Volume functional, K41 test, inertial-range detection, Kolmogorov scales
//! and the report that gathers them with the inequality verdicts.

mod flux;
mod report;
mod verdicts;

pub use flux::{cascade_flux, flux_profile, shell_budget, ShellBudget};
pub use report::{build_report, K41Report, K41TestResult, ReportOptions};
pub use verdicts::{
    analyticity_verdict, high_freq_envelope, intermittency_verdict, low_freq_verdict, range_bound_verdicts,
    timescale_verdict, Envelope, LowFreq, Verdict, NINTERM_R3, NINTERM_T3,
};

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{K41Error, Result};
use crate::evolve::FlowHistory;
use crate::field::SpectralField;
use crate::numtheory::is_sum_of_three_squares;
use crate::spectrum::{average_spectra, shell_average, shell_k, spectrum_discrete, AveragedSpectrum, ShellSpectrum};
use crate::sum::compensated_sum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    #[default]
    Torus,
    Whole,
}

/// Per-sample scalars and spectrum; enough to analyse a run without
/// keeping its fields.
#[derive(Debug, Clone)]
pub struct SampleStats {
    pub t: f64,
    pub energy: f64,
    pub dissipation: f64,
    pub l1: f64,
    pub l2_sq: f64,
    pub grad_sq: f64,
    pub spectrum: ShellSpectrum,
}

impl SampleStats {
    pub fn of(f: &SpectralField) -> Self {
        SampleStats {
            t: f.t,
            energy: f.energy(),
            dissipation: f.dissipation(),
            l1: f.l1_norm(),
            l2_sq: f.l2_norm_sq(),
            grad_sq: f.grad_norm_sq(),
            spectrum: spectrum_discrete(f),
        }
    }
}

#[derive(Debug, Clone)]
pub struct HistoryStats {
    pub n: usize,
    pub l: f64,
    pub nu: f64,
    pub samples: Vec<SampleStats>,
}

impl HistoryStats {
    pub fn new(n: usize, l: f64, nu: f64) -> Self {
        HistoryStats { n, l, nu, samples: Vec::new() }
    }

    pub fn push(&mut self, f: &SpectralField) -> Result<()> {
        if let Some(last) = self.samples.last() {
            if !(f.t > last.t) {
                return Err(K41Error::Window(format!("times not increasing at t = {}", f.t)));
            }
        }
        self.samples.push(SampleStats::of(f));
        Ok(())
    }

    pub fn from_history(h: &FlowHistory) -> Self {
        let f0 = &h.samples[0];
        HistoryStats { n: f0.n, l: f0.l, nu: f0.nu, samples: h.samples.iter().map(SampleStats::of).collect() }
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn series(&self, g: impl Fn(&SampleStats) -> f64) -> Vec<f64> {
        self.samples.iter().map(g).collect()
    }

    pub fn t0(&self) -> f64 {
        self.samples[0].t
    }

    pub fn t1(&self) -> f64 {
        self.samples[self.samples.len() - 1].t
    }

    pub fn e0(&self) -> f64 {
        self.samples[0].energy
    }

    pub fn e1(&self) -> f64 {
        self.samples[self.samples.len() - 1].energy
    }

    pub fn average(&self) -> Result<AveragedSpectrum> {
        let spectra: Vec<ShellSpectrum> = self.samples.iter().map(|s| s.spectrum.clone()).collect();
        average_spectra(&self.times(), &spectra, &self.series(|s| s.energy), &self.series(|s| s.dissipation))
    }

    /// Same samples relabelled with viscosity ν (dissipation rescaled).
    pub fn with_nu(&self, nu: f64) -> HistoryStats {
        let r = nu / self.nu;
        let mut out = self.clone();
        out.nu = nu;
        for s in out.samples.iter_mut() {
            s.dissipation *= r;
        }
        out
    }
}

/// Trapezoid time average; a single sample averages to itself.
pub fn time_mean(times: &[f64], values: &[f64]) -> Result<f64> {
    if times.len() == 1 {
        return Ok(values[0]);
    }
    let w = crate::spectrum::trapezoid_weights(times)?;
    Ok(compensated_sum(w.iter().zip(values).map(|(a, b)| a * b)))
}

/// ⟨‖u‖²_{L¹}⟩ / ⟨‖u‖²_{L²}⟩ from sampled norms.
pub fn volume_from_norms(times: &[f64], l1: &[f64], l2_sq: &[f64]) -> Result<f64> {
    let num = time_mean(times, &l1.iter().map(|v| v * v).collect::<Vec<_>>())?;
    let den = time_mean(times, l2_sq)?;
    if den == 0.0 {
        return Err(K41Error::Degenerate("time-averaged L2 norm vanishes; volume is +inf".into()));
    }
    Ok(num / den)
}

pub fn volume(stats: &HistoryStats) -> Result<f64> {
    volume_from_norms(&stats.times(), &stats.series(|s| s.l1), &stats.series(|s| s.l2_sq))
}

pub fn volume_of_history(h: &FlowHistory) -> Result<f64> {
    volume(&HistoryStats::from_history(h))
}

/// Closed form of the volume for the R³ heat kernel on [T₀, T₁].
pub fn heat_kernel_volume(nu: f64, t0: f64, t1: f64) -> f64 {
    8.0 * 2f64.sqrt() * PI.powf(1.5) * nu * (t1 - t0) / (1.0 / (nu * t0).sqrt() - 1.0 / (nu * t1).sqrt())
}

/// C = ∫K²Ē†dμ / ∫_{K ≥ vol^{-1/3}} K²Ē†dμ; K41 iff C < 2.
pub fn k41_test(avg: &AveragedSpectrum, vol: f64) -> Result<(bool, f64)> {
    if !(vol > 0.0) {
        return Err(K41Error::Domain("volume must be positive".into()));
    }
    let total = avg.spectrum.enstrophy();
    let part = avg.spectrum.enstrophy_between(vol.powf(-1.0 / 3.0), f64::INFINITY);
    if part == 0.0 {
        return Err(K41Error::DivisionByZero("no enstrophy above vol^(-1/3)".into()));
    }
    let c = total / part;
    Ok((c < 2.0, c))
}

/// ∫_{K ≥ κ} K²Ē†dμ for every non-empty shell κ.
pub fn enstrophy_profile(avg: &AveragedSpectrum) -> Vec<(f64, f64)> {
    let sh = &avg.spectrum.shells;
    let mut out = vec![(0.0, 0.0); sh.len()];
    let mut acc = crate::sum::Compensated::new();
    for (i, s) in sh.iter().enumerate().rev() {
        acc.add(s.k * s.k * s.e_dagger * s.mu_weight);
        out[i] = (s.k, acc.value());
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InertialRange {
    pub k_minus: f64,
    pub k_plus: f64,
    pub n_minus: u64,
    pub n_plus: u64,
    pub reynolds: f64,
    pub gamma: f64,
    /// Least-squares log-log slope over the range (diagnostic only).
    pub slope_fit: f64,
}

/// n of K₋: 1 when vol/L³ ≥ (2π)⁻³, else the largest Stokes eigenvalue
/// not exceeding vol^{-1/3}.
pub fn k_minus_index(vol: f64, l: f64) -> u64 {
    if vol / l.powi(3) >= (2.0 * PI).powi(-3) {
        return 1;
    }
    let x = (vol.powf(-1.0 / 3.0) * l / (2.0 * PI)).powi(2);
    let mut n = x.floor() as u64;
    while n > 1 && (!is_sum_of_three_squares(n) || shell_k(n, l) > vol.powf(-1.0 / 3.0)) {
        n -= 1;
    }
    n.max(1)
}

/// Slope spread of consecutive shells: |log(E₂/E₁)/log(K₂/K₁) + 5/3|.
fn slope_gap(e1: f64, e2: f64, k1: f64, k2: f64) -> f64 {
    if e1 <= 0.0 || e2 <= 0.0 {
        return f64::INFINITY;
    }
    ((e2 / e1).ln() / (k2 / k1).ln() + 5.0 / 3.0).abs()
}

pub fn detect_inertial_range(avg: &AveragedSpectrum, vol: f64, gamma_max: f64) -> Result<InertialRange> {
    if avg.spectrum.shells.is_empty() {
        return Err(K41Error::NoRange("empty spectrum".into()));
    }
    if !(gamma_max > 0.0) {
        return Err(K41Error::Domain("gamma_max must be positive".into()));
    }
    let s = &avg.spectrum;
    let l = s.l;
    let (_, c) = k41_test(avg, vol)?;
    let n_minus = k_minus_index(vol, l);
    let top = s.shells.last().unwrap().n;
    let mut gamma: f64 = 0.0;
    let mut last_ok: Option<(u64, f64)> = None;
    let mut prev = n_minus;
    for n in n_minus + 1..=top {
        if !is_sum_of_three_squares(n) {
            continue;
        }
        let g = slope_gap(s.edagger(prev), s.edagger(n), shell_k(prev, l), shell_k(n, l));
        let run = gamma.max(g);
        if run > gamma_max {
            break;
        }
        gamma = run;
        last_ok = Some((n, gamma));
        prev = n;
    }
    let (n_plus, gamma) = last_ok.ok_or_else(|| {
        K41Error::NoRange(format!("slope test fails on the first step after K- = {}", shell_k(n_minus, l)))
    })?;
    let (k_minus, k_plus) = (shell_k(n_minus, l), shell_k(n_plus, l));
    let inside = s.enstrophy_between(k_minus, k_plus);
    if s.enstrophy() > (1.0 + c) * inside {
        return Err(K41Error::NoRange(format!(
            "enstrophy on [{k_minus}, {k_plus}] is below 1/(1+C) of the total"
        )));
    }
    let pts: Vec<(f64, f64)> = s
        .shells
        .iter()
        .filter(|sh| sh.n >= n_minus && sh.n <= n_plus)
        .map(|sh| (sh.k.ln(), sh.e_dagger.ln()))
        .collect();
    Ok(InertialRange {
        k_minus,
        k_plus,
        n_minus,
        n_plus,
        reynolds: (k_plus / k_minus).powf(4.0 / 3.0),
        gamma,
        slope_fit: least_squares(&pts).0,
    })
}

/// (slope, intercept) of y on x.
pub fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return (f64::NAN, f64::NAN);
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let b = sxy / sxx;
    (b, my - b * mx)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scales {
    pub alpha: f64,
    pub k_d: f64,
    pub k_c: f64,
    pub r_lambda: f64,
}

pub fn kolmogorov_scales(avg: &AveragedSpectrum, k_plus: f64, nu: f64) -> Result<Scales> {
    let eps = avg.epsbar;
    let fluct = avg.ebar - avg.spectrum.mean_energy;
    if !(eps > 0.0) || !(nu > 0.0) || !(fluct > 0.0) || !(k_plus > 0.0) {
        return Err(K41Error::Domain("scales need epsbar > 0, nu > 0 and energy above the mean flow".into()));
    }
    let e_star = shell_average(&avg.spectrum, k_plus, k_plus / 10.0)?;
    let alpha = e_star / (eps.powf(2.0 / 3.0) * k_plus.powf(-5.0 / 3.0));
    if !(alpha > 0.0) {
        return Err(K41Error::Domain("Kolmogorov constant is not positive".into()));
    }
    Ok(Scales {
        alpha,
        k_d: alpha.powf(-0.75) * (eps / nu.powi(3)).powf(0.25),
        k_c: alpha.powf(1.5) * eps * fluct.powf(-1.5),
        r_lambda: (avg.ebar * avg.ebar / (alpha.powi(3) * nu * eps)).sqrt(),
    })
}

/// 𝒯 = (α³ν²/ρ)·∫‖ω‖²dt / ‖u₀‖⁴ with ‖ω‖² = 2‖∇u‖².
pub fn transfer_time(stats: &HistoryStats, alpha: f64) -> Result<f64> {
    let u0 = stats.samples[0].l2_sq;
    if u0 == 0.0 {
        return Err(K41Error::Domain("initial data vanish".into()));
    }
    let rho = stats.l.powi(-3);
    let om = crate::spectrum::trapezoid(&stats.times(), &stats.series(|s| 2.0 * s.grad_sq));
    Ok(alpha.powi(3) * stats.nu * stats.nu / rho * om / (u0 * u0))
}
