//! Datasets behind the five reference figures, shared by the CLI and tests.

use rayon::prelude::*;
use std::f64::consts::PI;

use crate::analysis::{least_squares, volume_from_norms};
use crate::error::{K41Error, Result};
use crate::field::gen_oseen_cylinder;
use crate::numtheory::{c_ratio_from_count, shell_sum_ratio, shell_sum_ratio_unrestricted, Box3Table};
use crate::structfn::{corrector_chi, corrector_fit, local_slope_precision, log_grid, s2_from_spectrum, CorrectorFit, SpectrumProfile};

#[derive(Debug, Clone, PartialEq)]
pub struct ShellSumRow {
    pub n: u64,
    pub ratio: f64,
    pub unrestricted: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShellSumSummary {
    pub min: f64,
    pub min_n: u64,
    pub max: f64,
    pub max_n: u64,
    /// Mean ratio over the top 10% of n.
    pub tail_mean: f64,
    pub tail_mean_unrestricted: f64,
}

/// Box₃-restricted and unrestricted shell sums at relative width 10% for
/// n ∈ [2, n_max] ∩ Box₃.
pub fn fig1(n_max: u64) -> (Vec<ShellSumRow>, ShellSumSummary) {
    let t = Box3Table::new(n_max);
    let ns: Vec<u64> = t.iter().filter(|&n| n >= 2).collect();
    let rows: Vec<ShellSumRow> = ns
        .par_iter()
        .map(|&n| ShellSumRow { n, ratio: shell_sum_ratio(n, 0.1), unrestricted: shell_sum_ratio_unrestricted(n, 0.1) })
        .collect();
    let mut s = ShellSumSummary {
        min: f64::INFINITY,
        min_n: 0,
        max: f64::NEG_INFINITY,
        max_n: 0,
        tail_mean: 0.0,
        tail_mean_unrestricted: 0.0,
    };
    for r in &rows {
        if r.ratio < s.min {
            s.min = r.ratio;
            s.min_n = r.n;
        }
        if r.ratio > s.max {
            s.max = r.ratio;
            s.max_n = r.n;
        }
    }
    let tail: Vec<&ShellSumRow> = rows.iter().filter(|r| r.n * 10 >= n_max * 9).collect();
    s.tail_mean = tail.iter().map(|r| r.ratio).sum::<f64>() / tail.len() as f64;
    s.tail_mean_unrestricted = tail.iter().map(|r| r.unrestricted).sum::<f64>() / tail.len() as f64;
    (rows, s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OseenRow {
    pub t: f64,
    /// ‖u(t)‖²_{L¹}/‖u(t)‖²_{L²} over Vol(Ω).
    pub instant: f64,
    /// Vol(u;[t/2, t]) over Vol(Ω); NaN for the first twelfth-octave points.
    pub window: f64,
    /// 4√(νt)/Vol(Ω)^{1/3}.
    pub x: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OseenFit {
    pub t_peak: f64,
    pub peak: f64,
    pub slope: f64,
    pub prefactor: f64,
    pub t_lo: f64,
    pub t_hi: f64,
}

/// Volume curve of the Oseen vortex restricted to {r < 1, 0 < z < 1} on an
/// np² radial-plane grid. Times run over a 2^{1/12} geometric grid so that
/// each window [t/2, t] is made of 13 grid times (trapezoid in t).
pub fn fig2(gamma: f64, nu: f64, np: usize, t_lo: f64, t_hi: f64) -> Result<Vec<OseenRow>> {
    if !(t_lo > 0.0 && t_hi > t_lo) {
        return Err(K41Error::Domain("need 0 < t_lo < t_hi".into()));
    }
    let ratio = 2f64.powf(1.0 / 12.0);
    let steps = ((t_hi / t_lo).ln() / ratio.ln()).ceil() as i64;
    let ts: Vec<f64> = (-12..=steps).map(|i| t_lo * ratio.powi(i as i32)).collect();
    let vol_omega = PI;
    let norms: Vec<(f64, f64)> = ts
        .par_iter()
        .map(|&t| {
            let f = gen_oseen_cylinder(gamma, nu, t, np, 1.0, 1.0)?;
            Ok((f.l1_norm(), f.l2_norm_sq()))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for i in 12..ts.len() {
        let w = &ts[i - 12..=i];
        let l1: Vec<f64> = norms[i - 12..=i].iter().map(|x| x.0).collect();
        let l2: Vec<f64> = norms[i - 12..=i].iter().map(|x| x.1).collect();
        rows.push(OseenRow {
            t: ts[i],
            instant: norms[i].0.powi(2) / norms[i].1 / vol_omega,
            window: volume_from_norms(w, &l1, &l2)? / vol_omega,
            x: 4.0 * (nu * ts[i]).sqrt() / vol_omega.cbrt(),
        });
    }
    Ok(rows)
}

/// Peak of the windowed curve and the log-log power fit over [fit_lo, fit_hi].
pub fn fig2_fit(rows: &[OseenRow], fit_lo: f64, fit_hi: f64) -> Result<OseenFit> {
    let peak = rows.iter().max_by(|a, b| a.window.total_cmp(&b.window)).ok_or(K41Error::Window("no rows".into()))?;
    let pts: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.t >= fit_lo && r.t <= fit_hi).map(|r| (r.x.ln(), r.window.ln())).collect();
    if pts.len() < 2 {
        return Err(K41Error::Window("fewer than two points in the fit range".into()));
    }
    let (slope, b) = least_squares(&pts);
    Ok(OseenFit { t_peak: peak.t, peak: peak.window, slope, prefactor: b.exp(), t_lo: fit_lo, t_hi: fit_hi })
}

/// C(n) = r₃(n)/(8π³√n) for n ∈ [1, n_max]; the maximum and its argument.
pub fn fig3(n_max: u64) -> (Vec<(u64, u64, f64)>, (u64, f64)) {
    let mut t = Box3Table::new(n_max);
    t.populate_r3();
    let rows: Vec<(u64, u64, f64)> = (1..=n_max)
        .map(|n| {
            let c = t.r3(n).unwrap_or(0);
            (n, c, c_ratio_from_count(n, c))
        })
        .collect();
    let best = rows.iter().fold((1, 0.0), |a, r| if r.2 > a.1 { (r.0, r.2) } else { a });
    (rows, best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct S2Row {
    pub profile: String,
    pub ell: f64,
    pub s2: f64,
    pub precision: f64,
}

pub fn profile_label(p: &SpectrumProfile) -> String {
    match p {
        SpectrumProfile::Ideal53 { r } => format!("ideal:R={r:e}"),
        SpectrumProfile::Real53 { r, delta } => format!("real:R={r:e},delta={delta:e}"),
        SpectrumProfile::Tabulated { .. } => "tab".to_string(),
    }
}

/// S₂ and its slope precision on a log grid of ℓ.
pub fn s2_curve(p: &SpectrumProfile, ells: &[f64]) -> Result<Vec<S2Row>> {
    let label = profile_label(p);
    ells.par_iter()
        .map(|&ell| {
            Ok(S2Row { profile: label.clone(), ell, s2: s2_from_spectrum(p, ell)?, precision: local_slope_precision(p, ell)? })
        })
        .collect()
}

/// Ideal profiles for R ∈ {10², 10³, 10⁴} on [1/R, 10] and real ones for
/// R = 10³, δ ∈ {10⁻², 10⁻³, 10⁻⁴} on [10⁻⁴, 10], 40 points per decade.
pub fn fig4() -> Result<Vec<S2Row>> {
    let mut out = Vec::new();
    for r in [1e2, 1e3, 1e4] {
        out.extend(s2_curve(&SpectrumProfile::Ideal53 { r }, &log_grid(1.0 / r, 10.0, 40))?);
    }
    for delta in [1e-2, 1e-3, 1e-4] {
        out.extend(s2_curve(&SpectrumProfile::Real53 { r: 1e3, delta }, &log_grid(1e-4, 10.0, 40))?);
    }
    Ok(out)
}

/// Rows (K, χ_δ, cK^{-5/3}, relative error) on [0.1, 10/δ] and the fit summary.
pub fn fig5(delta: f64) -> Result<(Vec<[f64; 4]>, CorrectorFit)> {
    let fit = corrector_fit(delta)?;
    let rows = log_grid(0.1, 10.0 / delta, 40)
        .into_iter()
        .map(|k| {
            let chi = corrector_chi(delta, k);
            let r = fit.prefactor * k.powf(-5.0 / 3.0);
            [k, chi, r, chi / r - 1.0]
        })
        .collect();
    Ok((rows, fit))
}
