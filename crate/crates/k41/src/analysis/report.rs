use serde::{Deserialize, Serialize};

use super::verdicts::{
    analyticity_verdict, high_freq_envelope, intermittency_verdict, low_freq_verdict, range_bound_verdicts,
    timescale_verdict, Verdict,
};
use super::{detect_inertial_range, k41_test, kolmogorov_scales, transfer_time, volume, Domain, HistoryStats};
use crate::error::Result;
use crate::numtheory::c_ratio;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportOptions {
    pub gamma_max: f64,
    pub slack: f64,
    pub c0: f64,
    pub domain: Domain,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions { gamma_max: 0.1, slack: 1.0, c0: 1.0, domain: Domain::Torus }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct K41TestResult {
    pub pass: bool,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct K41Report {
    pub domain: Domain,
    pub slack: f64,
    pub c0: f64,
    pub l: f64,
    pub nu: f64,
    pub t0: f64,
    pub t1: f64,
    pub vol: f64,
    pub k_minus: f64,
    pub k_plus: f64,
    pub n_minus: u64,
    pub n_plus: u64,
    pub reynolds: f64,
    pub gamma: f64,
    pub gamma_regression_slope: f64,
    pub alpha: f64,
    pub k_d: f64,
    pub k_c: f64,
    pub r_lambda: f64,
    pub transfer_time: f64,
    #[serde(rename = "E0")]
    pub e0: f64,
    #[serde(rename = "E1")]
    pub e1: f64,
    #[serde(rename = "Ebar")]
    pub ebar: f64,
    pub epsbar: f64,
    pub c_nminus: f64,
    pub k41_test: K41TestResult,
    pub verdicts: Vec<Verdict>,
}

impl K41Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises") + "\n"
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| crate::error::K41Error::Format(e.to_string()))
    }

    pub fn verdict(&self, id: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.id == id)
    }
}

/// Scales, range and every verdict for a sampled history.
pub fn build_report(stats: &HistoryStats, opts: &ReportOptions) -> Result<K41Report> {
    let avg = stats.average()?;
    let vol = volume(stats)?;
    let (pass, c) = k41_test(&avg, vol)?;
    let range = detect_inertial_range(&avg, vol, opts.gamma_max)?;
    let scales = kolmogorov_scales(&avg, range.k_plus, stats.nu)?;
    let mut r = K41Report {
        domain: opts.domain,
        slack: opts.slack,
        c0: opts.c0,
        l: stats.l,
        nu: stats.nu,
        t0: stats.t0(),
        t1: stats.t1(),
        vol,
        k_minus: range.k_minus,
        k_plus: range.k_plus,
        n_minus: range.n_minus,
        n_plus: range.n_plus,
        reynolds: range.reynolds,
        gamma: range.gamma,
        gamma_regression_slope: range.slope_fit,
        alpha: scales.alpha,
        k_d: scales.k_d,
        k_c: scales.k_c,
        r_lambda: scales.r_lambda,
        transfer_time: transfer_time(stats, scales.alpha)?,
        e0: stats.e0(),
        e1: stats.e1(),
        ebar: avg.ebar,
        epsbar: avg.epsbar,
        c_nminus: c_ratio(range.n_minus)?,
        k41_test: K41TestResult { pass, c },
        verdicts: Vec::new(),
    };
    let mut v = range_bound_verdicts(&r);
    v.push(low_freq_verdict(&avg, vol, opts.slack)?.verdict);
    // too few resolved shells leaves the envelope unchecked rather than failing the report
    if let Ok(env) = high_freq_envelope(stats, opts.c0, opts.slack) {
        v.push(env.verdict);
    }
    v.extend(intermittency_verdict(stats, &r));
    v.extend(timescale_verdict(&r));
    v.extend(analyticity_verdict(stats, &r));
    r.verdicts = v;
    Ok(r)
}
