use std::f64::consts::PI;

use k41::analysis::{high_freq_envelope, low_freq_verdict, volume, HistoryStats};
use k41::evolve::run;
use k41::field::{gen_random_spectrum, gen_taylor_green, SpectralField};
use k41::spectrum::{AveragedSpectrum, ShellSpectrum};

fn heat(f: &SpectralField, t: f64) -> SpectralField {
    let mut g = f.clone();
    g.t = t;
    let k0 = f.k0();
    for q in 0..f.n.pow(3) {
        let m = f.mode(q);
        let k2 = k0 * k0 * (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) as f64;
        let d = (-f.nu * k2 * t).exp();
        for c in 0..3 {
            g.coeffs[c][q] *= d;
        }
    }
    g
}

#[test]
fn low_freq_bound_holds_for_a_solution() {
    let f = gen_taylor_green(1.0, 32, 2.0 * PI, 0.01).unwrap();
    let h = run(&f, 0.0, 1.0, 0.25).unwrap();
    let s = HistoryStats::from_history(&h);
    let lf = low_freq_verdict(&s.average().unwrap(), volume(&s).unwrap(), 1.0).unwrap();
    assert!(lf.verdict.pass, "{}", lf.max_ratio);
    assert_eq!(lf.first_violation, None);
}

#[test]
fn low_freq_flags_an_inflated_shell() {
    let f = gen_taylor_green(1.0, 32, 2.0 * PI, 0.01).unwrap();
    let h = run(&f, 0.0, 0.5, 0.25).unwrap();
    let s = HistoryStats::from_history(&h);
    let mut avg = s.average().unwrap();
    let target = avg.spectrum.shells.iter().position(|sh| sh.n == 3).unwrap();
    avg.spectrum.shells[target].e_dagger *= 1e6;
    let lf = low_freq_verdict(&avg, volume(&s).unwrap(), 1.0).unwrap();
    assert!(!lf.verdict.pass);
    assert_eq!(lf.first_violation, Some(3));
    assert_eq!(lf.worst_n, Some(3));

    let empty = AveragedSpectrum::stationary(ShellSpectrum::empty(2.0 * PI), 0.0, 0.0, 1.0);
    assert!(low_freq_verdict(&empty, 1.0, 1.0).unwrap().verdict.pass);
}

#[test]
fn heat_decay_passes_the_envelope() {
    let f = gen_random_spectrum(|k| if k <= 12.0 { k.powi(-2) } else { 0.0 }, 2, 32, 2.0 * PI, 0.05).unwrap();
    let mut s = HistoryStats::new(32, 2.0 * PI, 0.05);
    for i in 0..5 {
        s.push(&heat(&f, 0.1 * i as f64)).unwrap();
    }
    let env = high_freq_envelope(&s, 1.0, 1.0).unwrap();
    assert!(env.verdict.pass);
    assert!(env.c_fit < 1e-2, "{}", env.c_fit);
    assert_eq!(env.delta[0], 0.0);
}

#[test]
fn taylor_green_decays_faster_than_the_analytic_envelope() {
    let nu = (2.0 * PI / 64.0) / 100.0;
    let f = gen_taylor_green(1.0, 64, 2.0 * PI, nu).unwrap();
    let h = run(&f, 0.0, 0.4, 0.1).unwrap();
    let s = HistoryStats::from_history(&h);
    let env = high_freq_envelope(&s, 1.0, 1.0).unwrap();
    assert!(env.verdict.pass);
    for (i, t) in s.times().iter().enumerate().skip(1) {
        let analytic = 0.5 * (nu * t).sqrt();
        assert!(env.delta_fit[i] >= analytic, "t={t}: {} < {analytic}", env.delta_fit[i]);
        assert!(env.delta[i] <= analytic);
    }
    assert!(env.delta_fit[1..].windows(2).all(|w| w[1] > w[0]));
}
