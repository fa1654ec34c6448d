//! Energy transfer across a sharp spectral cutoff.
//!
//! Π(K) is the rate at which energy leaves the ball |k| ≤ K through the
//! nonlinear term, so d/dt E_{≤K} + 2ν‖∇S_K u‖² ρ + Π(K) = 0 and Π > 0
//! means a forward cascade. Products are formed on a 3/2-padded grid, which
//! makes the transfer exact for any field on the N³ lattice.

use num_complex::Complex64;

use crate::evolve::tendency;
use crate::fft::{slot, Fft3, Lattice};
use crate::field::SpectralField;
use crate::sum::Compensated;

fn padded_size(n: usize) -> usize {
    let m = (3 * n).div_ceil(2);
    m + m % 2
}

/// Per-slot contribution 2ρL⁻³ Re Σ_{a,j} (u_a u_j)^ conj(i k_a û_j),
/// i.e. the nonlinear gain of mode k.
fn nonlinear_gain(f: &SpectralField) -> Vec<f64> {
    let n = f.n;
    let m = padded_size(n);
    let lat = Lattice::get(n);
    let plat = Lattice::get(m);
    let fft = Fft3::get(m);
    let tot_m = m * m * m;
    let i = Complex64::i();
    let pslot = |v: [i64; 3]| (slot(v[0], m) * m + slot(v[1], m)) * m + slot(v[2], m);
    let mut a = vec![Complex64::default(); tot_m];
    let mut b = vec![Complex64::default(); tot_m];
    for q in 0..n.pow(3) {
        if lat.nyquist[q] {
            continue;
        }
        let p = pslot(lat.m[q]);
        a[p] = f.coeffs[0][q] + i * f.coeffs[1][q];
        b[p] = f.coeffs[2][q];
    }
    fft.inverse(&mut a);
    fft.inverse(&mut b);
    let inv = f.l.powi(-3);
    let mut z1 = Vec::with_capacity(tot_m);
    let mut z2 = Vec::with_capacity(tot_m);
    let mut z3 = Vec::with_capacity(tot_m);
    for q in 0..tot_m {
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
    let fwd = (f.l / m as f64).powi(3);
    let k0 = f.k0();
    let scale = 2.0 * f.rho() * inv;
    let split = |z: &[Complex64], p: usize| {
        let x = z[p];
        let y = z[plat.mirror[p]].conj();
        ((x + y) * (0.5 * fwd), (x - y) * Complex64::new(0.0, -0.5 * fwd))
    };
    (0..n.pow(3))
        .map(|q| {
            if lat.nyquist[q] {
                return 0.0;
            }
            let p = pslot(lat.m[q]);
            let (t00, t01) = split(&z1, p);
            let (t02, t11) = split(&z2, p);
            let (t12, t22) = split(&z3, p);
            let t = [[t00, t01, t02], [t01, t11, t12], [t02, t12, t22]];
            let mv = lat.m[q];
            let k = [k0 * mv[0] as f64, k0 * mv[1] as f64, k0 * mv[2] as f64];
            let mut s = 0.0;
            for (ai, ka) in k.iter().enumerate() {
                for j in 0..3 {
                    s += (t[ai][j] * (i * *ka * f.coeffs[j][q]).conj()).re;
                }
            }
            scale * s
        })
        .collect()
}

/// Π(K) for each K in `ks`, one padded product for all of them.
pub fn flux_profile(f: &SpectralField, ks: &[f64]) -> Vec<f64> {
    let gain = nonlinear_gain(f);
    let lat = Lattice::get(f.n);
    let k0 = f.k0();
    ks.iter()
        .map(|&kk| {
            let lim = kk * kk;
            let mut acc = Compensated::new();
            for (q, g) in gain.iter().enumerate() {
                if k0 * k0 * lat.m2[q] as f64 <= lim {
                    acc.add(*g);
                }
            }
            -acc.value()
        })
        .collect()
}

pub fn cascade_flux(f: &SpectralField, k: f64) -> f64 {
    flux_profile(f, &[k])[0]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellBudget {
    pub kappa: f64,
    /// d/dt ρ‖S_κ u‖², from the exact tendency.
    pub dedt: f64,
    /// 2ρν‖∇S_κ u‖².
    pub dissipation: f64,
    pub flux: f64,
}

impl ShellBudget {
    pub fn residual(&self) -> f64 {
        self.dedt + self.dissipation + self.flux
    }
}

/// Terms of the low-mode energy budget at each κ.
pub fn shell_budget(f: &SpectralField, kappas: &[f64]) -> Vec<ShellBudget> {
    let tend = tendency(f);
    let flux = flux_profile(f, kappas);
    let lat = Lattice::get(f.n);
    let k0 = f.k0();
    let c = f.rho() * f.l.powi(-3);
    kappas
        .iter()
        .zip(flux)
        .map(|(&kappa, flux)| {
            let lim = kappa * kappa;
            let mut de = Compensated::new();
            let mut di = Compensated::new();
            for q in 0..f.n.pow(3) {
                let kk = k0 * k0 * lat.m2[q] as f64;
                if kk > lim {
                    continue;
                }
                for j in 0..3 {
                    let u = f.coeffs[j][q];
                    de.add(2.0 * c * (u.conj() * tend[j][q]).re);
                    di.add(2.0 * c * f.nu * kk * u.norm_sqr());
                }
            }
            ShellBudget { kappa, dedt: de.value(), dissipation: di.value(), flux }
        })
        .collect()
}
