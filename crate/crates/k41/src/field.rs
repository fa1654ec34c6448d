//! Velocity fields on the periodic box T³ = R³/(LZ)³ stored as Fourier
//! coefficients û(k) = ∫ e^{-ik·x} u(x) dx, plus the synthetic generators.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{K41Error, Result};
use crate::fft::{freq, slot, Fft3, Lattice};
use crate::rng::ModeRng;
use crate::sum::Compensated;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    pub n: usize,
    pub l: f64,
    pub nu: f64,
    pub t: f64,
    /// u₁, u₂, u₃ coefficients in FFT slot order, row-major (i, j, l).
    pub coeffs: [Vec<Complex64>; 3],
    pub div_free: bool,
}

/// Samples on a uniform cell grid. Periodic fields use origin 0 and
/// spacing L/N; the Oseen cylinder uses a masked bounding box.
#[derive(Debug, Clone)]
pub struct PhysicalField {
    pub dims: [usize; 3],
    pub origin: [f64; 3],
    pub spacing: [f64; 3],
    pub t: f64,
    pub values: [Vec<f64>; 3],
    pub mask: Option<Vec<bool>>,
}

impl PhysicalField {
    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn inside(&self, q: usize) -> bool {
        self.mask.as_ref().map_or(true, |m| m[q])
    }

    /// ∫|u| dx over the (masked) grid.
    pub fn l1_norm(&self) -> f64 {
        let mut acc = Compensated::new();
        for q in 0..self.len() {
            if self.inside(q) {
                let s: f64 = (0..3).map(|c| self.values[c][q].powi(2)).sum();
                acc.add(s.sqrt());
            }
        }
        acc.value() * self.cell_volume()
    }

    /// ∫|u|² dx over the (masked) grid.
    pub fn l2_norm_sq(&self) -> f64 {
        let mut acc = Compensated::new();
        for q in 0..self.len() {
            if self.inside(q) {
                acc.add((0..3).map(|c| self.values[c][q].powi(2)).sum());
            }
        }
        acc.value() * self.cell_volume()
    }

    /// Cell-centre coordinates of flat index q.
    pub fn position(&self, q: usize) -> [f64; 3] {
        let [_, ny, nz] = self.dims;
        let idx = [q / (ny * nz), (q / nz) % ny, q % nz];
        let mut x = [0.0; 3];
        for a in 0..3 {
            x[a] = self.origin[a] + idx[a] as f64 * self.spacing[a];
        }
        x
    }
}

impl SpectralField {
    pub fn zeros(n: usize, l: f64, nu: f64) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(K41Error::Domain(format!("grid size {n} must be even and >= 8")));
        }
        if !(l > 0.0) || !(nu >= 0.0) {
            return Err(K41Error::Domain("box length must be positive, viscosity non-negative".into()));
        }
        let z = vec![Complex64::default(); n * n * n];
        Ok(SpectralField { n, l, nu, t: 0.0, coeffs: [z.clone(), z.clone(), z], div_free: true })
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, l: usize) -> usize {
        (i * self.n + j) * self.n + l
    }

    /// Signed lattice index m of flat slot q (k = 2πm/L).
    #[inline]
    pub fn mode(&self, q: usize) -> [i64; 3] {
        let n = self.n;
        [freq(q / (n * n), n), freq((q / n) % n, n), freq(q % n, n)]
    }

    #[inline]
    pub fn slot_of(&self, m: [i64; 3]) -> usize {
        self.index(slot(m[0], self.n), slot(m[1], self.n), slot(m[2], self.n))
    }

    pub fn k0(&self) -> f64 {
        2.0 * PI / self.l
    }

    pub fn is_nyquist(&self, m: [i64; 3]) -> bool {
        let h = -(self.n as i64 / 2);
        m.iter().any(|&v| v == h)
    }

    pub fn rho(&self) -> f64 {
        self.l.powi(-3)
    }

    pub fn zero_nyquist(&mut self) {
        for q in 0..self.n.pow(3) {
            if self.is_nyquist(self.mode(q)) {
                for c in 0..3 {
                    self.coeffs[c][q] = Complex64::default();
                }
            }
        }
    }

    pub fn from_physical(p: &PhysicalField, l: f64, nu: f64) -> Result<Self> {
        let n = p.dims[0];
        if p.dims != [n, n, n] {
            return Err(K41Error::Domain("periodic transform needs a cubic grid".into()));
        }
        let mut f = SpectralField::zeros(n, l, nu)?;
        f.t = p.t;
        let fft = Fft3::get(n);
        let scale = (l / n as f64).powi(3);
        for c in 0..3 {
            let mut buf: Vec<Complex64> = p.values[c].iter().map(|&v| Complex64::new(v, 0.0)).collect();
            fft.forward(&mut buf);
            for v in buf.iter_mut() {
                *v *= scale;
            }
            f.coeffs[c] = buf;
        }
        f.zero_nyquist();
        f.div_free = f.max_divergence() <= 1e-12 * f.max_coeff().max(f64::MIN_POSITIVE) * f.k0() * n as f64;
        Ok(f)
    }

    /// Real part of one component in physical space.
    pub fn component_to_grid(&self, c: usize) -> Vec<f64> {
        let mut buf = self.coeffs[c].clone();
        Fft3::get(self.n).inverse(&mut buf);
        let s = self.l.powi(-3);
        buf.iter().map(|z| z.re * s).collect()
    }

    pub fn to_physical(&self) -> PhysicalField {
        let h = self.l / self.n as f64;
        PhysicalField {
            dims: [self.n; 3],
            origin: [0.0; 3],
            spacing: [h; 3],
            t: self.t,
            values: [self.component_to_grid(0), self.component_to_grid(1), self.component_to_grid(2)],
            mask: None,
        }
    }

    fn sum_modes<F: Fn([i64; 3], f64) -> f64>(&self, w: F) -> f64 {
        let lat = Lattice::get(self.n);
        let mut acc = Compensated::new();
        for q in 0..self.n.pow(3) {
            let a: f64 = (0..3).map(|c| self.coeffs[c][q].norm_sqr()).sum();
            if a != 0.0 {
                acc.add(w(lat.m[q], a));
            }
        }
        acc.value()
    }

    /// ‖u‖² = L⁻³ Σ|û|².
    pub fn l2_norm_sq(&self) -> f64 {
        self.sum_modes(|_, a| a) * self.rho()
    }

    /// ‖∇u‖² = L⁻³ Σ|k|²|û|².
    pub fn grad_norm_sq(&self) -> f64 {
        let k0 = self.k0();
        self.sum_modes(|m, a| k0 * k0 * (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) as f64 * a) * self.rho()
    }

    /// ‖ω‖² = 2‖∇u‖² for divergence-free fields.
    pub fn vorticity_norm_sq(&self) -> f64 {
        2.0 * self.grad_norm_sq()
    }

    /// ρ‖u‖².
    pub fn energy(&self) -> f64 {
        self.rho() * self.l2_norm_sq()
    }

    /// 2ρν‖∇u‖².
    pub fn dissipation(&self) -> f64 {
        2.0 * self.rho() * self.nu * self.grad_norm_sq()
    }

    /// (∫ρu dx)² = L⁻⁶|û(0)|².
    pub fn mean_energy(&self) -> f64 {
        let a: f64 = (0..3).map(|c| self.coeffs[c][0].norm_sqr()).sum();
        a * self.rho() * self.rho()
    }

    pub fn l1_norm(&self) -> f64 {
        self.to_physical().l1_norm()
    }

    pub fn max_speed(&self) -> f64 {
        let fft = Fft3::get(self.n);
        let mut a: Vec<Complex64> = self.coeffs[0].iter().zip(&self.coeffs[1]).map(|(x, y)| x + Complex64::i() * y).collect();
        let mut b = self.coeffs[2].clone();
        fft.inverse(&mut a);
        fft.inverse(&mut b);
        let s = self.l.powi(-3);
        a.iter().zip(&b).map(|(x, y)| (x.norm_sqr() + y.re * y.re).sqrt() * s).fold(0.0, f64::max)
    }

    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().flat_map(|v| v.iter()).map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// max_k |k·û(k)|.
    pub fn max_divergence(&self) -> f64 {
        let k0 = self.k0();
        (0..self.n.pow(3))
            .map(|q| {
                let m = self.mode(q);
                let d: Complex64 = (0..3).map(|c| self.coeffs[c][q] * (k0 * m[c] as f64)).sum();
                d.norm()
            })
            .fold(0.0, f64::max)
    }

    /// max |û(-k) - conj(û(k))| over slots whose mirror is representable.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for q in 0..self.n.pow(3) {
            let m = self.mode(q);
            if self.is_nyquist(m) {
                continue;
            }
            let r = self.slot_of([-m[0], -m[1], -m[2]]);
            for c in 0..3 {
                worst = worst.max((self.coeffs[c][r] - self.coeffs[c][q].conj()).norm());
            }
        }
        worst
    }

    pub fn mean_velocity(&self) -> [f64; 3] {
        let r = self.rho();
        [self.coeffs[0][0].re * r, self.coeffs[1][0].re * r, self.coeffs[2][0].re * r]
    }

    /// Fields on the same grid added coefficient-wise.
    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        if self.n != other.n || self.l != other.l {
            return Err(K41Error::Domain("fields live on different grids".into()));
        }
        let mut out = self.clone();
        for c in 0..3 {
            for (a, b) in out.coeffs[c].iter_mut().zip(&other.coeffs[c]) {
                *a += b;
            }
        }
        out.div_free = self.div_free && other.div_free;
        Ok(out)
    }

    /// u_λ(t, x) = λ u(λ²t, λx): box L/λ, û_λ(k) = λ⁻² û(k/λ).
    pub fn rescale(&self, lambda: f64) -> Result<SpectralField> {
        if !(lambda > 0.0) {
            return Err(K41Error::Domain("rescale factor must be positive".into()));
        }
        let mut out = self.clone();
        out.l = self.l / lambda;
        out.t = self.t / (lambda * lambda);
        let s = lambda.powi(-2);
        for c in 0..3 {
            for z in out.coeffs[c].iter_mut() {
                *z *= s;
            }
        }
        Ok(out)
    }
}

/// û ← û − k(k·û)/|k|² for k ≠ 0.
pub fn leray_project(f: &SpectralField) -> SpectralField {
    let lat = Lattice::get(f.n);
    let mut out = f.clone();
    for q in 1..f.n.pow(3) {
        let m = lat.m[q];
        let kk = lat.m2[q] as f64;
        let d: Complex64 = (0..3).map(|c| f.coeffs[c][q] * m[c] as f64).sum();
        for c in 0..3 {
            out.coeffs[c][q] = f.coeffs[c][q] - d * (m[c] as f64 / kk);
        }
    }
    out.div_free = true;
    out
}

/// L²(T³) inner product Re ∫ u·v dx = L⁻³ Re Σ û·conj(v̂).
pub fn inner(a: &SpectralField, b: &SpectralField) -> f64 {
    let mut acc = Compensated::new();
    for c in 0..3 {
        for (x, y) in a.coeffs[c].iter().zip(&b.coeffs[c]) {
            acc.add((x * y.conj()).re);
        }
    }
    acc.value() * a.rho()
}

/// u = A cos(k·x) e with k = 2πm/L.
pub fn gen_single_mode(amp: f64, m: [i64; 3], e: [f64; 3], n: usize, l: f64, nu: f64) -> Result<SpectralField> {
    let mut f = SpectralField::zeros(n, l, nu)?;
    let h = n as i64 / 2;
    if m.iter().any(|&v| v.abs() >= h) || m == [0, 0, 0] {
        return Err(K41Error::Domain(format!("mode {m:?} not resolved on N = {n}")));
    }
    let c = 0.5 * amp * l.powi(3);
    let (p, q) = (f.slot_of(m), f.slot_of([-m[0], -m[1], -m[2]]));
    for a in 0..3 {
        f.coeffs[a][p] = Complex64::new(c * e[a], 0.0);
        f.coeffs[a][q] = Complex64::new(c * e[a], 0.0);
    }
    let dot: f64 = (0..3).map(|a| m[a] as f64 * e[a]).sum();
    f.div_free = dot == 0.0;
    Ok(f)
}

/// u = A(cos x sin y sin z, −sin x cos y sin z, 0) with x → 2πx/L.
pub fn gen_taylor_green(amp: f64, n: usize, l: f64, nu: f64) -> Result<SpectralField> {
    let mut f = SpectralField::zeros(n, l, nu)?;
    let c = amp * l.powi(3) / 8.0;
    for s1 in [-1i64, 1] {
        for s2 in [-1i64, 1] {
            for s3 in [-1i64, 1] {
                let q = f.slot_of([s1, s2, s3]);
                f.coeffs[0][q] = Complex64::new(-(s2 * s3) as f64 * c, 0.0);
                f.coeffs[1][q] = Complex64::new((s1 * s3) as f64 * c, 0.0);
            }
        }
    }
    Ok(f)
}

/// Divergence-free random field whose shell spectrum equals `target(K)` on
/// every non-empty shell. Phases and directions are keyed by (seed, m).
pub fn gen_random_spectrum<F: Fn(f64) -> f64>(target: F, seed: u64, n: usize, l: f64, nu: f64) -> Result<SpectralField> {
    let mut f = SpectralField::zeros(n, l, nu)?;
    let total = n.pow(3);
    let k0 = f.k0();
    for q in 1..total {
        let m = f.mode(q);
        if f.is_nyquist(m) || !canonical(m) {
            continue;
        }
        let kk = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) as f64;
        let kmod = k0 * kk.sqrt();
        if target(kmod) <= 0.0 {
            continue;
        }
        let mut rng = ModeRng::new(seed, m);
        let mut v = [Complex64::default(); 3];
        for z in v.iter_mut() {
            *z = Complex64::new(rng.normal(), rng.normal());
        }
        let d: Complex64 = (0..3).map(|c| v[c] * m[c] as f64).sum();
        let r = f.slot_of([-m[0], -m[1], -m[2]]);
        for c in 0..3 {
            let w = v[c] - d * (m[c] as f64 / kk);
            f.coeffs[c][q] = w;
            f.coeffs[c][r] = w.conj();
        }
    }
    // per-shell rescale to hit the target exactly
    let h = n as u64 / 2 - 1;
    let nmax = 3 * h * h;
    let mut shell = vec![0.0f64; nmax as usize + 1];
    let mut occupied = vec![false; nmax as usize + 1];
    for q in 1..total {
        let m = f.mode(q);
        if f.is_nyquist(m) {
            continue;
        }
        let s = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) as usize;
        occupied[s] = true;
        shell[s] += (0..3).map(|c| f.coeffs[c][q].norm_sqr()).sum::<f64>();
    }
    let rho = f.rho();
    let mut factor = vec![0.0f64; nmax as usize + 1];
    for s in 1..=nmax as usize {
        if !crate::numtheory::is_sum_of_three_squares(s as u64) {
            continue;
        }
        let kmod = k0 * (s as f64).sqrt();
        let want = target(kmod);
        if want <= 0.0 {
            continue;
        }
        if !occupied[s] || shell[s] == 0.0 {
            return Err(K41Error::UnreachableShell(s as u64));
        }
        let have = (2.0 * PI).powi(-2) * rho * (kmod / l) * shell[s];
        factor[s] = (want / have).sqrt();
    }
    for q in 1..total {
        let m = f.mode(q);
        if f.is_nyquist(m) {
            continue;
        }
        let s = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) as usize;
        for c in 0..3 {
            f.coeffs[c][q] *= factor[s];
        }
    }
    Ok(f)
}

// One representative of each ±m pair.
fn canonical(m: [i64; 3]) -> bool {
    m[0] > 0 || (m[0] == 0 && (m[1] > 0 || (m[1] == 0 && m[2] > 0)))
}

/// Oseen vortex velocity v(ξ) = (Γ/2π) ξ^⊥/|ξ|² (1 − e^{−|ξ|²/4}).
pub fn oseen_profile(gamma: f64, xi: [f64; 2]) -> [f64; 2] {
    let s = xi[0] * xi[0] + xi[1] * xi[1];
    if s == 0.0 {
        return [0.0, 0.0];
    }
    let g = gamma / (2.0 * PI) * (-(-s / 4.0).exp_m1()) / s;
    [-xi[1] * g, xi[0] * g]
}

/// Oseen vortex u(t,x) = (νt)^{-1/2} v(x/√(νt)) sampled at cell centres of
/// `np`² cells covering [−R, R]², extruded over height `height`, with the
/// disk r < R as mask.
pub fn gen_oseen_cylinder(gamma: f64, nu: f64, t: f64, np: usize, radius: f64, height: f64) -> Result<PhysicalField> {
    if !(t > 0.0) {
        return Err(K41Error::Domain("Oseen vortex needs t > 0".into()));
    }
    let h = 2.0 * radius / np as f64;
    let s = (nu * t).sqrt();
    let mut u1 = vec![0.0; np * np];
    let mut u2 = vec![0.0; np * np];
    let mut mask = vec![false; np * np];
    for i in 0..np {
        let x = -radius + (i as f64 + 0.5) * h;
        for j in 0..np {
            let y = -radius + (j as f64 + 0.5) * h;
            let q = i * np + j;
            mask[q] = x * x + y * y < radius * radius;
            let v = oseen_profile(gamma, [x / s, y / s]);
            u1[q] = v[0] / s;
            u2[q] = v[1] / s;
        }
    }
    Ok(PhysicalField {
        dims: [np, np, 1],
        origin: [-radius + 0.5 * h, -radius + 0.5 * h, 0.5 * height],
        spacing: [h, h, height],
        t,
        values: [u1, u2, vec![0.0; np * np]],
        mask: Some(mask),
    })
}
