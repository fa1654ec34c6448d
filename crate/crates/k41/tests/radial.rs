use std::f64::consts::PI;

use k41::field::gen_single_mode;
use k41::spectrum::spectrum_discrete;
use k41::structfn::radial_fourier;

// The sphere-averaged correlation of a single-shell field is E·sinc(Kr), whose
// transform is a measure on |λ| = K. Test it against a smooth bump φ: with a
// Gaussian window of radius R, 4π∫λ²G(λ)φ(λ)dλ tends to (2π)³·E†(K)μ(K)·φ(K),
// with φ(K) = 1.
#[test]
fn single_shell_correlation_has_a_shell_transform() {
    let f = gen_single_mode(0.7, [1, 1, 0], [0.0, 0.0, 1.0], 16, 2.0 * PI, 0.01).unwrap();
    let spec = spectrum_discrete(&f);
    let sh = spec.shells[0];
    let k = sh.k;
    let shell_energy = sh.e_dagger * sh.mu_weight;
    assert!((shell_energy / f.energy() - 1.0).abs() < 1e-14);

    let weak = |r_win: f64| {
        let corr = |r: f64| {
            let x = k * r;
            let s = if x == 0.0 { 1.0 } else { x.sin() / x };
            shell_energy * s * (-(r / r_win).powi(2)).exp()
        };
        let phi = |l: f64| (-(l - k).powi(2) / 0.08).exp();
        let (lo, hi, m) = (k - 1.2, k + 1.2, 800);
        let h = (hi - lo) / m as f64;
        let mut acc = 0.0;
        for i in 0..=m {
            let l = lo + h * i as f64;
            let w = if i == 0 || i == m { 0.5 } else { 1.0 };
            acc += w * 4.0 * PI * l * l * radial_fourier(corr, l, 6.0 * r_win).unwrap() * phi(l);
        }
        acc * h
    };
    // the window smears the shell by ~1/R; remove the O(R⁻²) bias
    let (a, b) = (weak(150.0), weak(150.0 * 2f64.sqrt()));
    let weak = 2.0 * b - a;
    let exact = (2.0 * PI).powi(3) * shell_energy;
    assert!((weak / exact - 1.0).abs() < 1e-4, "{weak} vs {exact}");
}
