//! Pseudo-spectral Navier–Stokes on T³: RK4 with an exact viscous
//! integrating factor, 2/3-rule dealiasing and Leray projection.

use num_complex::Complex64;

use crate::error::{K41Error, Result};
use crate::fft::{Fft3, Lattice};
use crate::field::{leray_project, SpectralField};

pub type Coeffs = [Vec<Complex64>; 3];

/// Ordered samples of one run; grid, box and viscosity shared.
#[derive(Debug, Clone)]
pub struct FlowHistory {
    pub samples: Vec<SpectralField>,
}

impl FlowHistory {
    pub fn new(samples: Vec<SpectralField>) -> Result<Self> {
        if samples.is_empty() {
            return Err(K41Error::Window("empty history".into()));
        }
        let f0 = &samples[0];
        for w in samples.windows(2) {
            if !(w[1].t > w[0].t) {
                return Err(K41Error::Window(format!("times not increasing at t = {}", w[1].t)));
            }
        }
        if samples.iter().any(|s| s.n != f0.n || s.l != f0.l || s.nu != f0.nu) {
            return Err(K41Error::Domain("samples differ in N, L or nu".into()));
        }
        Ok(FlowHistory { samples })
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn t0(&self) -> f64 {
        self.samples[0].t
    }

    pub fn t1(&self) -> f64 {
        self.samples[self.samples.len() - 1].t
    }

    pub fn nu(&self) -> f64 {
        self.samples[0].nu
    }

    pub fn l(&self) -> f64 {
        self.samples[0].l
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Same fields with a different viscosity label.
    pub fn with_nu(&self, nu: f64) -> FlowHistory {
        let samples = self
            .samples
            .iter()
            .map(|s| SpectralField { nu, ..s.clone() })
            .collect();
        FlowHistory { samples }
    }
}

/// Zero every mode with some |m_i| > N/3.
pub fn dealias(f: &SpectralField) -> SpectralField {
    let lat = Lattice::get(f.n);
    let mut out = f.clone();
    for q in 0..f.n.pow(3) {
        if !lat.kept[q] {
            for c in 0..3 {
                out.coeffs[c][q] = Complex64::default();
            }
        }
    }
    out
}

/// Splits Z = FFT(p + iq) of two real arrays into (P, Q) at slot q.
#[inline]
fn unpack(z: &[Complex64], q: usize, mirror: usize) -> (Complex64, Complex64) {
    let a = z[q];
    let b = z[mirror].conj();
    ((a + b) * 0.5, (a - b) * Complex64::new(0.0, -0.5))
}

/// −P[∇·(u⊗u)]^ computed from the dealiased velocity, truncated to the
/// retained band. Real fields are transformed two at a time.
pub fn nonlinear_term(f: &SpectralField) -> Coeffs {
    let n = f.n;
    let total = n.pow(3);
    let fft = Fft3::get(n);
    let lat = Lattice::get(n);
    let i = Complex64::i();
    let mut a: Vec<Complex64> = (0..total)
        .map(|q| if lat.kept[q] { f.coeffs[0][q] + i * f.coeffs[1][q] } else { Complex64::default() })
        .collect();
    let mut b: Vec<Complex64> = (0..total)
        .map(|q| if lat.kept[q] { f.coeffs[2][q] } else { Complex64::default() })
        .collect();
    fft.inverse(&mut a);
    fft.inverse(&mut b);
    let inv = f.l.powi(-3);
    // u0 = Re a, u1 = Im a, u2 = Re b (times L⁻³)
    let mut z1 = Vec::with_capacity(total);
    let mut z2 = Vec::with_capacity(total);
    let mut z3 = Vec::with_capacity(total);
    for q in 0..total {
        let (u0, u1, u2) = (a[q].re * inv, a[q].im * inv, b[q].re * inv);
        z1.push(Complex64::new(u0 * u0, u0 * u1));
        z2.push(Complex64::new(u0 * u2, u1 * u1));
        z3.push(Complex64::new(u1 * u2, u2 * u2));
    }
    drop(a);
    drop(b);
    fft.forward(&mut z1);
    fft.forward(&mut z2);
    fft.forward(&mut z3);
    let fwd = (f.l / n as f64).powi(3);
    let k0 = f.k0();
    let mut out: Coeffs = std::array::from_fn(|_| vec![Complex64::default(); total]);
    for q in 0..total {
        if !lat.kept[q] || lat.nyquist[q] || q == 0 {
            continue;
        }
        let r = lat.mirror[q];
        let (t00, t01) = unpack(&z1, q, r);
        let (t02, t11) = unpack(&z2, q, r);
        let (t12, t22) = unpack(&z3, q, r);
        let m = lat.m[q];
        let k = [k0 * m[0] as f64, k0 * m[1] as f64, k0 * m[2] as f64];
        let t = [[t00, t01, t02], [t01, t11, t12], [t02, t12, t22]];
        let mut v = [Complex64::default(); 3];
        for j in 0..3 {
            let s = t[0][j] * k[0] + t[1][j] * k[1] + t[2][j] * k[2];
            v[j] = -i * s * fwd;
        }
        let kk = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        let d = (v[0] * k[0] + v[1] * k[1] + v[2] * k[2]) / kk;
        for j in 0..3 {
            out[j][q] = v[j] - d * k[j];
        }
    }
    out
}

/// dû/dt = −ν|k|²û + nonlinear_term.
pub fn tendency(f: &SpectralField) -> Coeffs {
    let mut nl = nonlinear_term(f);
    let lat = Lattice::get(f.n);
    let k0 = f.k0();
    for q in 0..f.n.pow(3) {
        let kk = k0 * k0 * lat.m2[q] as f64;
        for c in 0..3 {
            nl[c][q] -= f.coeffs[c][q] * (f.nu * kk);
        }
    }
    nl
}

/// 0.5·(L/N)/max|u|, infinite for the zero field.
pub fn cfl_bound(f: &SpectralField) -> f64 {
    let vmax = f.max_speed();
    if vmax == 0.0 {
        f64::INFINITY
    } else {
        0.5 * (f.l / f.n as f64) / vmax
    }
}

fn with_coeffs(f: &SpectralField, c: Coeffs) -> SpectralField {
    SpectralField { coeffs: c, ..f.clone() }
}

/// One integrating-factor RK4 step of length dt.
pub fn step(f: &SpectralField, dt: f64) -> Result<SpectralField> {
    if !(dt > 0.0) {
        return Err(K41Error::Domain(format!("time step must be positive, got {dt}")));
    }
    let bound = cfl_bound(f);
    if dt > bound * (1.0 + 1e-12) {
        return Err(K41Error::Cfl { dt, bound });
    }
    let total = f.n.pow(3);
    let lat = Lattice::get(f.n);
    let k0 = f.k0();
    let half: Vec<f64> = lat.m2.iter().map(|&m2| (-0.5 * f.nu * k0 * k0 * m2 as f64 * dt).exp()).collect();
    let u0 = &f.coeffs;
    let stage = |g: &dyn Fn(usize, usize) -> Complex64| -> SpectralField {
        let coeffs: Coeffs = std::array::from_fn(|c| (0..total).map(|q| g(c, q)).collect());
        with_coeffs(f, coeffs)
    };
    let n1 = nonlinear_term(f);
    let n2 = nonlinear_term(&stage(&|c, q| half[q] * (u0[c][q] + n1[c][q] * (0.5 * dt))));
    let n3 = nonlinear_term(&stage(&|c, q| half[q] * u0[c][q] + n2[c][q] * (0.5 * dt)));
    let n4 = nonlinear_term(&stage(&|c, q| half[q] * half[q] * u0[c][q] + half[q] * n3[c][q] * dt));
    let mut out = stage(&|c, q| {
        let e = half[q];
        e * e * u0[c][q] + (e * e * n1[c][q] + e * (n2[c][q] + n3[c][q]) * 2.0 + n4[c][q]) * (dt / 6.0)
    });
    out = leray_project(&out);
    out.t = f.t + dt;
    if out.coeffs.iter().any(|v| v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())) {
        return Err(K41Error::NaN(out.t));
    }
    Ok(out)
}

/// Sample times T₀, T₀+s, T₀+2s, … and T₁.
pub fn sample_times(t0: f64, t1: f64, every: f64) -> Vec<f64> {
    let mut out = vec![t0];
    let mut i = 1u64;
    loop {
        let t = t0 + i as f64 * every;
        if t >= t1 - 1e-9 * every {
            break;
        }
        out.push(t);
        i += 1;
    }
    out.push(t1);
    out
}

/// Integrates from T₀ to T₁ and hands each sample to `sink`.
pub fn run_with<S: FnMut(&SpectralField) -> Result<()>>(f0: &SpectralField, t0: f64, t1: f64, sample_every: f64, mut sink: S) -> Result<()> {
    if !(t1 > t0) || !(sample_every > 0.0) {
        return Err(K41Error::Domain("need T1 > T0 and a positive sampling interval".into()));
    }
    let mut f = f0.clone();
    f.t = t0;
    sink(&f)?;
    let times = sample_times(t0, t1, sample_every);
    for w in times.windows(2) {
        let (a, b) = (w[0], w[1]);
        let target = cfl_bound(&f).min(sample_every / 4.0);
        let steps = ((b - a) / target).ceil().max(1.0) as usize;
        let dt = (b - a) / steps as f64;
        for s in 0..steps {
            let t = f.t;
            f = step(&f, dt).map_err(|e| K41Error::StepFailed { t, source: Box::new(e) })?;
            if s + 1 == steps {
                f.t = b;
            }
        }
        sink(&f)?;
    }
    Ok(())
}

/// Integrates from T₀ to T₁ keeping every sample in memory.
pub fn run(f0: &SpectralField, t0: f64, t1: f64, sample_every: f64) -> Result<FlowHistory> {
    let mut samples = Vec::new();
    run_with(f0, t0, t1, sample_every, |f| {
        samples.push(f.clone());
        Ok(())
    })?;
    FlowHistory::new(samples)
}
