//! Shell spectra on the discrete Stokes spectrum Σ* = {2π√n/L : n ∈ Box₃}.

use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{K41Error, Result};
use crate::field::SpectralField;
use crate::numtheory::{is_sum_of_three_squares, isqrt};
use crate::quad::gauss_legendre;
use crate::sum::{compensated_sum, Compensated};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shell {
    pub n: u64,
    pub k: f64,
    pub e_dagger: f64,
    pub mu_weight: f64,
}

/// Non-zero shells of E†, sorted by n, plus the mean-flow energy (∫ρu)².
#[derive(Debug, Clone, PartialEq)]
pub struct ShellSpectrum {
    pub l: f64,
    pub shells: Vec<Shell>,
    pub mean_energy: f64,
}

/// μ({K}) = (2π/L)·(2π/(KL)) for K = 2π√n/L.
pub fn mu_weight(n: u64, l: f64) -> f64 {
    2.0 * PI / l / (n as f64).sqrt()
}

pub fn shell_k(n: u64, l: f64) -> f64 {
    2.0 * PI / l * (n as f64).sqrt()
}

/// Integer n with 2π√n/L = K, if K is (numerically) a Stokes eigenvalue.
pub fn shell_index(k: f64, l: f64) -> Option<u64> {
    let x = (k * l / (2.0 * PI)).powi(2);
    let n = x.round() as u64;
    let close = (shell_k(n, l) - k).abs() <= 1e-9 * k.max(1e-300);
    (close && n >= 1 && is_sum_of_three_squares(n)).then_some(n)
}

impl ShellSpectrum {
    pub fn empty(l: f64) -> Self {
        ShellSpectrum { l, shells: Vec::new(), mean_energy: 0.0 }
    }

    pub fn from_edagger(l: f64, pairs: impl IntoIterator<Item = (u64, f64)>, mean_energy: f64) -> Self {
        let mut shells: Vec<Shell> = pairs
            .into_iter()
            .filter(|&(_, e)| e != 0.0)
            .map(|(n, e)| Shell { n, k: shell_k(n, l), e_dagger: e, mu_weight: mu_weight(n, l) })
            .collect();
        shells.sort_by_key(|s| s.n);
        ShellSpectrum { l, shells, mean_energy }
    }

    pub fn get(&self, n: u64) -> Option<&Shell> {
        self.shells.binary_search_by_key(&n, |s| s.n).ok().map(|i| &self.shells[i])
    }

    /// E†(K_n), zero on empty shells.
    pub fn edagger(&self, n: u64) -> f64 {
        self.get(n).map_or(0.0, |s| s.e_dagger)
    }

    /// Σ E†·μ (energy of the fluctuation).
    pub fn fluctuation_energy(&self) -> f64 {
        compensated_sum(self.shells.iter().map(|s| s.e_dagger * s.mu_weight))
    }

    /// Mean-flow energy plus Σ E†·μ.
    pub fn total_energy(&self) -> f64 {
        self.mean_energy + self.fluctuation_energy()
    }

    /// ∫ K² E† dμ restricted to lo ≤ K ≤ hi.
    pub fn enstrophy_between(&self, lo: f64, hi: f64) -> f64 {
        compensated_sum(
            self.shells
                .iter()
                .filter(|s| s.k >= lo * (1.0 - 1e-12) && s.k <= hi * (1.0 + 1e-12))
                .map(|s| s.k * s.k * s.e_dagger * s.mu_weight),
        )
    }

    pub fn enstrophy(&self) -> f64 {
        self.enstrophy_between(0.0, f64::INFINITY)
    }

    pub fn k_max(&self) -> f64 {
        self.shells.last().map_or(0.0, |s| s.k)
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W, header: Option<&str>) -> Result<()> {
        let mut w = w;
        if let Some(h) = header {
            writeln!(w, "# {h}")?;
        }
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["n", "K", "E_dagger", "mu_weight"]).map_err(csv_err)?;
        for s in &self.shells {
            wr.write_record(&[
                s.n.to_string(),
                format!("{:e}", s.k),
                format!("{:e}", s.e_dagger),
                format!("{:e}", s.mu_weight),
            ])
            .map_err(csv_err)?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Reads the `n,K,E_dagger,mu_weight` table; `#` lines are skipped.
    pub fn read_csv<R: std::io::Read>(r: R, l: f64) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(r);
        let mut pairs = Vec::new();
        for rec in rd.records() {
            let rec = rec.map_err(csv_err)?;
            let n: u64 = field(&rec, 0)?;
            let e: f64 = field(&rec, 2)?;
            pairs.push((n, e));
        }
        Ok(Self::from_edagger(l, pairs, 0.0))
    }
}

fn csv_err(e: csv::Error) -> K41Error {
    K41Error::Format(e.to_string())
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize) -> Result<T> {
    rec.get(i)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| K41Error::Format(format!("bad column {i} in row {:?}", rec)))
}

/// E†(K) = (2π)⁻² ρ (K/L) Σ_{|k|=K} |û(k)|² for every non-empty shell.
pub fn spectrum_discrete(f: &SpectralField) -> ShellSpectrum {
    let n = f.n;
    let nmax = 3 * (n / 2) * (n / 2);
    // fixed slab chunks merged in order: independent of the worker count
    let partials: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = vec![0.0f64; nmax + 1];
            for q in i * n * n..(i + 1) * n * n {
                let m = f.mode(q);
                let s = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) as usize;
                if s == 0 {
                    continue;
                }
                acc[s] += (0..3).map(|c| f.coeffs[c][q].norm_sqr()).sum::<f64>();
            }
            acc
        })
        .collect();
    let rho = f.rho();
    let mut pairs = Vec::new();
    for s in 1..=nmax {
        let mut acc = Compensated::new();
        for p in &partials {
            acc.add(p[s]);
        }
        let sum = acc.value();
        if sum > 0.0 {
            let k = shell_k(s as u64, f.l);
            pairs.push((s as u64, (2.0 * PI).powi(-2) * rho * (k / f.l) * sum));
        }
    }
    ShellSpectrum::from_edagger(f.l, pairs, f.mean_energy())
}

/// μ-weighted mean of E† over Σ_δ(K) = {κ ∈ Σ* : |κ − K| ≤ δ}.
///
/// Σ_δ(K) always contains K itself, so the band is never empty for K ∈ Σ*.
pub fn shell_average(s: &ShellSpectrum, k: f64, delta: f64) -> Result<f64> {
    let l = s.l;
    if shell_index(k, l).is_none() {
        return Err(K41Error::Domain(format!("K = {k} is not a Stokes eigenvalue")));
    }
    if !(delta > 0.0 && delta < k) {
        return Err(K41Error::Domain(format!("need 0 < delta < K, got delta = {delta}")));
    }
    let (num, den) = band_sums(s, k, delta);
    if den == 0.0 {
        return Err(K41Error::EmptyShell(k));
    }
    Ok(num / den)
}

/// (Σ E†μ, Σ μ) over the Stokes eigenvalues within δ of K.
pub fn band_sums(s: &ShellSpectrum, k: f64, delta: f64) -> (f64, f64) {
    let l = s.l;
    let scale = l / (2.0 * PI);
    let lo = ((k - delta).max(0.0) * scale).powi(2);
    let hi = ((k + delta) * scale).powi(2);
    let first = isqrt(lo.floor() as u64).pow(2).max(1);
    let last = hi.ceil() as u64 + 1;
    let (mut num, mut den) = (Compensated::new(), Compensated::new());
    for n in first..=last {
        if !is_sum_of_three_squares(n) {
            continue;
        }
        let kn = shell_k(n, l);
        if (kn - k).abs() > delta * (1.0 + 1e-12) {
            continue;
        }
        let mu = mu_weight(n, l);
        num.add(s.edagger(n) * mu);
        den.add(mu);
    }
    (num.value(), den.value())
}

/// Smooth cutoff χ with χ = 1 on [0, 1/2], 0 on [2, ∞), and derivative.
pub trait Cutoff: Sync {
    fn chi(&self, r: f64) -> f64;
    fn dchi(&self, r: f64) -> f64;
    /// ψ(r) = −2rχχ′.
    fn psi(&self, r: f64) -> f64 {
        -2.0 * r * self.chi(r) * self.dchi(r)
    }
}

/// χ(r) = 1 − B(s)/B(1) with s = log₂(2r) − 1 ∈ [−1, 1] and
/// B(s) = ∫_{−1}^{s} exp(1 − 1/(1−σ²)) dσ.
#[derive(Debug, Clone, Copy, Default)]
pub struct DefaultCutoff;

const TABLE: usize = 4096;

fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

fn bump_integral_table() -> &'static Vec<f64> {
    static T: OnceLock<Vec<f64>> = OnceLock::new();
    T.get_or_init(|| {
        let (x, w) = gauss_legendre(16);
        let h = 2.0 / TABLE as f64;
        let mut out = vec![0.0; TABLE + 1];
        for i in 0..TABLE {
            let a = -1.0 + i as f64 * h;
            let seg: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * bump(a + 0.5 * h * (xi + 1.0))).sum();
            out[i + 1] = out[i] + 0.5 * h * seg;
        }
        out
    })
}

fn bump_cumulative(s: f64) -> f64 {
    let t = bump_integral_table();
    if s <= -1.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return t[TABLE];
    }
    let h = 2.0 / TABLE as f64;
    let pos = (s + 1.0) / h;
    let i = (pos.floor() as usize).min(TABLE - 1);
    let a = -1.0 + i as f64 * h;
    // cubic Hermite on [a, a+h] with exact derivative values
    let u = (s - a) / h;
    let (y0, y1) = (t[i], t[i + 1]);
    let (d0, d1) = (bump(a) * h, bump(a + h) * h);
    let h00 = 2.0 * u.powi(3) - 3.0 * u * u + 1.0;
    let h10 = u.powi(3) - 2.0 * u * u + u;
    let h01 = -2.0 * u.powi(3) + 3.0 * u * u;
    let h11 = u.powi(3) - u * u;
    h00 * y0 + h10 * d0 + h01 * y1 + h11 * d1
}

impl Cutoff for DefaultCutoff {
    fn chi(&self, r: f64) -> f64 {
        if r <= 0.5 {
            return 1.0;
        }
        if r >= 2.0 {
            return 0.0;
        }
        let s = (2.0 * r).log2() - 1.0;
        1.0 - bump_cumulative(s) / bump_integral_table()[TABLE]
    }

    fn dchi(&self, r: f64) -> f64 {
        if r <= 0.5 || r >= 2.0 {
            return 0.0;
        }
        let s = (2.0 * r).log2() - 1.0;
        -bump(s) / bump_integral_table()[TABLE] / (r * std::f64::consts::LN_2)
    }
}

/// ∫₀^∞ ψ(r) dr/r by composite Gauss–Legendre on the support [1/2, 2].
pub fn psi_normalization<C: Cutoff + ?Sized>(chi: &C) -> f64 {
    let (x, w) = gauss_legendre(16);
    let panels = 256;
    let (a, b) = (0.5f64.ln(), 2.0f64.ln());
    let h = (b - a) / panels as f64;
    let mut acc = Compensated::new();
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            let r = (lo + 0.5 * h * (xi + 1.0)).exp();
            acc.add(0.5 * h * wi * chi.psi(r));
        }
    }
    acc.value()
}

/// (ρ/K) Σ_k ψ(|k|/K) |û(k)|² L⁻³, with ψ rescaled so ∫ψ dr/r = 1.
pub fn smooth_spectrum<C: Cutoff + ?Sized>(f: &SpectralField, k: f64, chi: &C) -> f64 {
    let norm = psi_normalization(chi);
    let k0 = f.k0();
    let mut acc = Compensated::new();
    for q in 1..f.n.pow(3) {
        let m = f.mode(q);
        let kk = k0 * ((m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) as f64).sqrt();
        let r = kk / k;
        if r <= 0.5 || r >= 2.0 {
            continue;
        }
        let a: f64 = (0..3).map(|c| f.coeffs[c][q].norm_sqr()).sum();
        acc.add(chi.psi(r) * a);
    }
    f.rho() / k * acc.value() * f.rho() / norm
}

/// Time-averaged spectrum and scalars over [T₀, T₁].
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedSpectrum {
    pub spectrum: ShellSpectrum,
    pub ebar: f64,
    pub epsbar: f64,
    pub t0: f64,
    pub t1: f64,
}

impl AveragedSpectrum {
    pub fn header(&self) -> String {
        format!("T0={:e},T1={:e},Ebar={:e},epsbar={:e}", self.t0, self.t1, self.ebar, self.epsbar)
    }

    /// Spectrum treated as stationary over [t0, t1].
    pub fn stationary(spectrum: ShellSpectrum, epsbar: f64, t0: f64, t1: f64) -> Self {
        let ebar = spectrum.total_energy();
        AveragedSpectrum { spectrum, ebar, epsbar, t0, t1 }
    }
}

/// Trapezoid weights on the sample times, normalised to sum to 1.
pub fn trapezoid_weights(times: &[f64]) -> Result<Vec<f64>> {
    if times.len() < 2 {
        return Err(K41Error::Window(format!("{} sample(s), need at least 2", times.len())));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(K41Error::Window("sample times must increase strictly".into()));
    }
    let span = times[times.len() - 1] - times[0];
    let mut w = vec![0.0; times.len()];
    for i in 0..times.len() - 1 {
        let h = 0.5 * (times[i + 1] - times[i]) / span;
        w[i] += h;
        w[i + 1] += h;
    }
    Ok(w)
}

/// ∫ g dt over the samples by the trapezoid rule.
pub fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    let mut acc = Compensated::new();
    for i in 0..times.len().saturating_sub(1) {
        acc.add(0.5 * (times[i + 1] - times[i]) * (values[i] + values[i + 1]));
    }
    acc.value()
}

/// Trapezoid time average of spectra, energies and dissipations.
pub fn average_spectra(times: &[f64], spectra: &[ShellSpectrum], energy: &[f64], dissipation: &[f64]) -> Result<AveragedSpectrum> {
    let w = trapezoid_weights(times)?;
    let l = spectra[0].l;
    let mut acc: BTreeMap<u64, Compensated> = BTreeMap::new();
    let mut mean = Compensated::new();
    for (wi, s) in w.iter().zip(spectra) {
        for sh in &s.shells {
            acc.entry(sh.n).or_default().add(wi * sh.e_dagger);
        }
        mean.add(wi * s.mean_energy);
    }
    let spectrum = ShellSpectrum::from_edagger(l, acc.into_iter().map(|(n, c)| (n, c.value())), mean.value());
    Ok(AveragedSpectrum {
        spectrum,
        ebar: compensated_sum(w.iter().zip(energy).map(|(a, b)| a * b)),
        epsbar: compensated_sum(w.iter().zip(dissipation).map(|(a, b)| a * b)),
        t0: times[0],
        t1: times[times.len() - 1],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{gen_random_spectrum, gen_single_mode};

    #[test]
    fn single_mode_spectrum() {
        let l = 1.3;
        let f = gen_single_mode(2.0, [0, 1, 0], [1.0, 0.0, 0.0], 8, l, 0.1).unwrap();
        let s = spectrum_discrete(&f);
        assert_eq!(s.shells.len(), 1);
        let e = f.energy();
        assert!((s.shells[0].e_dagger - e * l / (2.0 * PI)).abs() < 1e-12);
        assert!((s.shells[0].mu_weight - 2.0 * PI / l).abs() < 1e-15);
        assert!((s.total_energy() - e).abs() < 1e-12);
    }

    #[test]
    fn zero_field_is_empty() {
        let f = SpectralField::zeros(8, 1.0, 0.1).unwrap();
        assert!(spectrum_discrete(&f).shells.is_empty());
    }

    #[test]
    fn constant_band_average() {
        let l = 1.0;
        let s = ShellSpectrum::from_edagger(l, (1..400).filter(|&n| is_sum_of_three_squares(n)).map(|n| (n, 2.5)), 0.0);
        let k = shell_k(100, l);
        assert!((shell_average(&s, k, k / 10.0).unwrap() - 2.5).abs() < 1e-14);
    }

    #[test]
    fn narrow_band_returns_shell_value() {
        let l = 1.0;
        let s = ShellSpectrum::from_edagger(l, (1..400).map(|n| (n, n as f64)), 0.0);
        let k = shell_k(50, l);
        let v = shell_average(&s, k, 1e-3).unwrap();
        assert_eq!(v, 50.0);
        assert!(shell_average(&s, k + 0.1, 1e-3).is_err());
    }

    #[test]
    fn default_cutoff_shape() {
        let c = DefaultCutoff;
        assert_eq!(c.chi(0.3), 1.0);
        assert_eq!(c.chi(2.5), 0.0);
        assert!((c.chi(1.0) - 0.5).abs() < 1e-12);
        assert!((psi_normalization(&c) - 1.0).abs() < 1e-8);
        // derivative against a central difference
        for &r in &[0.6, 0.9, 1.4, 1.9] {
            let h = 1e-6;
            let fd = (c.chi(r + h) - c.chi(r - h)) / (2.0 * h);
            assert!((fd - c.dchi(r)).abs() < 1e-6, "{r}");
        }
    }

    #[test]
    fn smooth_spectrum_support_and_riemann_sum() {
        let f = gen_single_mode(1.0, [2, 0, 0], [0.0, 0.0, 1.0], 16, 1.0, 0.1).unwrap();
        let k0 = 2.0 * 2.0 * PI;
        assert_eq!(smooth_spectrum(&f, 2.01 * k0, &DefaultCutoff), 0.0);
        assert_eq!(smooth_spectrum(&f, 0.49 * k0, &DefaultCutoff), 0.0);
        let g = gen_random_spectrum(|k| if k < 40.0 { k.powf(-5.0 / 3.0) } else { 0.0 }, 2, 16, 1.0, 0.1).unwrap();
        let (a, b, m) = (1.0f64.ln(), 200.0f64.ln(), 2000);
        let h = (b - a) / m as f64;
        let riemann: f64 = (0..m)
            .map(|i| {
                let k = (a + (i as f64 + 0.5) * h).exp();
                smooth_spectrum(&g, k, &DefaultCutoff) * k * h
            })
            .sum();
        assert!((riemann / g.energy() - 1.0).abs() < 0.01);
    }

    #[test]
    fn trapezoid_weights_sum_to_one() {
        let w = trapezoid_weights(&[0.0, 0.1, 0.5, 2.0]).unwrap();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(trapezoid_weights(&[1.0]).is_err());
        assert!(trapezoid_weights(&[1.0, 1.0]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let s = ShellSpectrum::from_edagger(2.0, vec![(1, 0.5), (3, 0.25), (9, 1e-7)], 0.0);
        let mut buf = Vec::new();
        s.write_csv(&mut buf, Some("T0=0")).unwrap();
        let back = ShellSpectrum::read_csv(buf.as_slice(), 2.0).unwrap();
        assert_eq!(back.shells.len(), 3);
        for (a, b) in s.shells.iter().zip(&back.shells) {
            assert_eq!(a.n, b.n);
            assert_eq!(a.e_dagger, b.e_dagger);
        }
    }
}
