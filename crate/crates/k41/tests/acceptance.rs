//! End-to-end acceptance criteria, one PASS/FAIL line each. Runs without the
//! libtest harness so the lines show up in plain `cargo test` output.
//! Set K41_SLOW=1 to include the r₃(10¹⁰+1) spot value in criterion 1.

use std::f64::consts::PI;

use k41::analysis::{build_report, detect_inertial_range, k41_test, shell_budget, volume, HistoryStats, ReportOptions};
use k41::evolve::run;
use k41::field::{gen_random_spectrum, gen_single_mode, gen_taylor_green, SpectralField};
use k41::figures::{fig1, fig2, fig2_fit, fig3};
use k41::numtheory::{c_ratio, is_sum_of_three_squares};
use k41::spectrum::{mu_weight, shell_k, spectrum_discrete};
use k41::structfn::{corrector_fit, local_slope_precision, log_grid, s2_from_spectrum, s_p_direct, validity_window, SpectrumProfile};

/// Whether the criterion holds, and what was measured.
type Outcome = (bool, String);

fn criterion_01_lattice_ratio_scan() -> Outcome {
    let (_, (n, c)) = fig3(100_000);
    let mut ok = c < 0.1;
    let mut detail = format!("max C(n) = {c:.5} at n = {n} for n <= 1e5 (need < 0.1)");
    if std::env::var_os("K41_SLOW").is_some() {
        let spot = c_ratio(10_000_000_001).unwrap();
        ok &= (spot - 9.37e-2).abs() <= 0.01e-2;
        detail += &format!("; C(1e10+1) = {spot:.5e} (need 9.37e-2 +/- 1e-4)");
    } else {
        detail += "; spot value skipped (K41_SLOW unset)";
    }
    (ok, detail)
}

fn criterion_02_shell_sum_ratios() -> Outcome {
    let (_, s) = fig1(10_000);
    let env = s.min >= 3.3 && s.max <= 16.2;
    let tail = (s.tail_mean / 3.335 - 1.0).abs() <= 0.05;
    let free = (s.tail_mean_unrestricted / 4.0 - 1.0).abs() <= 0.02;
    (env && tail && free,
        format!(
            "range [{:.3} (n={}), {:.3} (n={})] within [3.3, 16.2]: {env}; tail mean {:.4} vs 3.335: {tail}; unrestricted {:.4} vs 4: {free}",
            s.min, s.min_n, s.max, s.max_n, s.tail_mean, s.tail_mean_unrestricted
        ),
    )
}

fn criterion_03_oseen_volume_curve() -> Outcome {
    let rows = fig2(1.0, 1.0, 512, 1e-5, 1e2).unwrap();
    let fit = fig2_fit(&rows, 1e-4, 1e-2).unwrap();
    let peak = (4e-2..=1.2e-1).contains(&fit.t_peak);
    let slope = (fit.slope - 0.25).abs() <= 0.03;
    let pre = (fit.prefactor - 1.17).abs() <= 0.1;
    let decades = (fit.t_hi / fit.t_lo).log10() >= 2.0 && fit.t_hi < fit.t_peak;
    (peak && slope && pre && decades,
        format!(
            "peak at t = {:.4} (need [0.04, 0.12]); slope {:.4} (0.25 +/- 0.03); prefactor {:.4} (1.17 +/- 0.1) over t in [{:e}, {:e}]",
            fit.t_peak, fit.slope, fit.prefactor, fit.t_lo, fit.t_hi
        ),
    )
}

fn criterion_04_structure_function_precision() -> Outcome {
    let ideal = SpectrumProfile::Ideal53 { r: 1e3 };
    let worst = log_grid(1e-2, 1.0, 40)
        .into_iter()
        .map(|l| (l, local_slope_precision(&ideal, l).unwrap()))
        .fold((0.0, 0.0f64), |a, b| if b.1.abs() > a.1.abs() { b } else { a });
    let ideal_ok = worst.1.abs() <= 0.0667;
    let dec = |d: f64| {
        validity_window(&SpectrumProfile::Real53 { r: 1e3, delta: d }, 0.1, 1e-4, 10.0)
            .unwrap()
            .map_or(0.0, |w| w.decades())
    };
    let (d2, d3, d4) = (dec(1e-2), dec(1e-3), dec(1e-4));
    let max_at_3 = d3 > d2 && d3 > d4;
    let shrink = d3 >= 3.0 * d4;
    (ideal_ok && max_at_3 && shrink,
        format!(
            "ideal R=1e3 worst |precision| {:.4} at ell = {:.4} (need <= 0.0667); real windows {d2:.3}/{d3:.3}/{d4:.3} decades for delta 1e-2/1e-3/1e-4 (max at 1e-3: {max_at_3}, shrink x3: {shrink})",
            worst.1.abs(),
            worst.0
        ),
    )
}

fn criterion_05_corrector_fit() -> Outcome {
    let c = corrector_fit(1e-3).unwrap();
    let ok = (0.80..=0.90).contains(&c.prefactor) && c.max_rel_err < 0.25 && c.decades >= 3.5;
    (ok,
        format!("prefactor {:.4} (need [0.80, 0.90]); max rel err {:.4} (< 0.25); window {:.2} decades (>= 3.5)", c.prefactor, c.max_rel_err, c.decades),
    )
}

fn criterion_06_spectral_identities() -> Outcome {
    let (n, l, nu) = (32, 2.0 * PI, 0.02);
    let mut worst_e: f64 = 0.0;
    let mut worst_d: f64 = 0.0;
    let mut wrong_fails = 0;
    for seed in 0..100u64 {
        let kmax = 4.0 + (seed % 9) as f64;
        let f = gen_random_spectrum(|k| if k <= kmax { k.powf(-5.0 / 3.0) * (1.0 + 0.1 * (k * seed as f64).sin()) } else { 0.0 }, seed, n, l, nu).unwrap();
        let s = spectrum_discrete(&f);
        let e = s.mean_energy + s.shells.iter().map(|x| x.e_dagger * x.mu_weight).sum::<f64>();
        let d = 2.0 * nu * s.shells.iter().map(|x| x.k * x.k * x.e_dagger * x.mu_weight).sum::<f64>();
        worst_e = worst_e.max((e / f.energy() - 1.0).abs());
        worst_d = worst_d.max((d / f.dissipation() - 1.0).abs());
        // (2π)⁻³ρK²Σ|û|² in place of (2π)⁻²ρ(K/L)Σ|û|²
        let wrong: f64 = s
            .shells
            .iter()
            .map(|x| {
                let raw = x.e_dagger / ((2.0 * PI).powi(-2) * f.rho() * x.k / l);
                (2.0 * PI).powi(-3) * f.rho() * x.k * x.k * raw * mu_weight(x.n, l)
            })
            .sum();
        if (wrong / f.energy() - 1.0).abs() > 0.1 {
            wrong_fails += 1;
        }
    }
    let ok = worst_e <= 1e-10 && worst_d <= 1e-10 && wrong_fails >= 95;
    (ok,
        format!("energy identity worst {worst_e:.2e}, dissipation identity worst {worst_d:.2e} (need <= 1e-10); wrong normalisation off by >10% on {wrong_fails}/100 (need >= 95)"),
    )
}

fn criterion_07_evolution_oracles() -> Outcome {
    let (l, nu) = (2.0 * PI, 0.05);
    let m = [1, 2, 0];
    let f = gen_single_mode(0.8, m, [0.0, 0.0, 1.0], 16, l, nu).unwrap();
    let k2 = (2.0 * PI / l).powi(2) * 5.0;
    let t1 = 1.0 / (nu * k2);
    let h = run(&f, 0.0, t1, t1 / 4.0).unwrap();
    let q = f.slot_of(m);
    let single = h
        .samples
        .iter()
        .map(|s| (s.coeffs[2][q].re / f.coeffs[2][q].re / (-nu * k2 * s.t).exp() - 1.0).abs())
        .fold(0.0, f64::max);

    // grid Reynolds max|u|·(L/N)/ν = 100
    let n = 64;
    let tg_nu = (l / n as f64) / 100.0;
    let tg = gen_taylor_green(1.0, n, l, tg_nu).unwrap();
    let hist = run(&tg, 0.0, 2.0, 0.05).unwrap();
    let times = hist.times();
    let eps: Vec<f64> = hist.samples.iter().map(|s| s.dissipation()).collect();
    let spent = k41::spectrum::trapezoid(&times, &eps);
    let e0 = hist.samples[0].energy();
    let e1 = hist.samples.last().unwrap().energy();
    let balance = ((e0 - e1) / spent - 1.0).abs();
    let k1 = 2.0 * PI / l;
    let poincare = hist.samples.iter().all(|s| s.energy() <= e0 * (-2.0 * tg_nu * k1 * k1 * s.t).exp() * (1.0 + 1e-12));
    let ok = single <= 1e-8 && balance <= 1e-4 && poincare;
    (ok,
        format!("single-mode decay error {single:.2e} (<= 1e-8); Taylor-Green N=64 nu={tg_nu:.3e} energy balance {balance:.2e} (<= 1e-4); Poincare envelope at every sample: {poincare}"),
    )
}

/// Exact αε^{2/3}K^{-5/3} on [2π/L, K₊], a short taper to 1.15K₊, ν set so
/// the field's dissipation equals ε.
fn ideal_k41_history() -> (HistoryStats, f64, f64) {
    let (n, l, alpha, eps): (usize, f64, f64, f64) = (64, 2.0 * PI, 0.5, 1.0);
    let n_plus = (590..=610).rev().find(|&m| is_sum_of_three_squares(m)).unwrap();
    let kp = shell_k(n_plus, l);
    let target = move |k: f64| {
        let base = alpha * eps.powf(2.0 / 3.0) * k.powf(-5.0 / 3.0);
        if k <= kp * (1.0 + 1e-12) {
            base
        } else if k <= 1.15 * kp {
            base * (-0.05 * (k / kp - 1.0)).exp()
        } else {
            0.0
        }
    };
    let mut f = gen_random_spectrum(target, 41, n, l, 1.0).unwrap();
    let enstrophy = spectrum_discrete(&f).enstrophy();
    f.nu = eps / (2.0 * enstrophy);
    let mut stats = HistoryStats::new(n, l, f.nu);
    stats.push(&f).unwrap();
    let mut g = f.clone();
    g.t = 1.0;
    stats.push(&g).unwrap();
    (stats, alpha, kp)
}

fn criterion_08_analysis_round_trip() -> Outcome {
    let (stats, alpha, kp) = ideal_k41_history();
    let avg = stats.average().unwrap();
    let vol = volume(&stats).unwrap();
    let (is_k41, c) = k41_test(&avg, vol).unwrap();
    let range = detect_inertial_range(&avg, vol, 1e-3).unwrap();
    let r = build_report(&stats, &ReportOptions { gamma_max: 1e-3, ..ReportOptions::default() }).unwrap();
    let alpha_err = (r.alpha / alpha - 1.0).abs();
    let range_ids = [
        "rangethm.kplus.lower",
        "rangethm.kplus.upper",
        "rangethm.kminus.lower",
        "rangethm.kminus.upper",
        "rangethm.vol.lower",
        "rangethm.vol.upper",
        "rangethm.cnminus",
    ];
    let failing: Vec<&str> = range_ids.iter().copied().filter(|id| !r.verdict(id).map_or(false, |v| v.pass)).collect();
    let ok = is_k41 && range.gamma <= 1e-6 && (range.k_plus / kp - 1.0).abs() < 1e-12 && alpha_err <= 0.01 && failing.is_empty();
    (ok,
        format!(
            "is_k41 {is_k41} (C = {c:.4}); gamma {:.2e} (<= 1e-6); K+ = {:.4} built at {kp:.4}; alpha {:.5} vs {alpha} (err {alpha_err:.2e}); K+/K_d {:.3}, K-/K_c {:.3}, K-^3 Vol {:.2}; failing range verdicts {failing:?}",
            range.gamma,
            range.k_plus,
            r.alpha,
            r.k_plus / r.k_d,
            r.k_minus / r.k_c,
            r.k_minus.powi(3) * r.vol
        ),
    )
}

fn cross_check(f: &SpectralField) -> f64 {
    let prof = SpectrumProfile::from_shells(&spectrum_discrete(f));
    let (lo, hi) = (4.0 * f.l / f.n as f64, f.l / 4.0);
    let mut worst: f64 = 0.0;
    for i in 0..6 {
        let ell = lo * (hi / lo).powf(i as f64 / 5.0);
        let wk = s2_from_spectrum(&prof, ell).unwrap();
        let direct = s_p_direct(f, ell, 2, 2 * 32 * 32).unwrap();
        worst = worst.max((wk / direct - 1.0).abs());
    }
    worst
}

fn criterion_09_wiener_khinchin_vs_direct() -> Outcome {
    let tg = gen_taylor_green(1.0, 32, 2.0 * PI, 0.01).unwrap();
    let rs = gen_random_spectrum(|k| if k <= 10.0 { k.powf(-5.0 / 3.0) } else { 0.0 }, 9, 32, 2.0 * PI, 0.01).unwrap();
    let (a, b) = (cross_check(&tg), cross_check(&rs));
    (a <= 0.02 && b <= 0.02, format!("worst relative gap on [4L/N, L/4]: Taylor-Green {a:.2e}, random field {b:.2e} (need <= 2e-2)"))
}

fn criterion_10_shell_budget_closure() -> Outcome {
    let l = 2.0 * PI;
    let f = gen_random_spectrum(|k| if k <= 9.0 { (1.0 + k).powf(-2.0) } else { 0.0 }, 5, 32, l, 0.02).unwrap();
    let hist = run(&f, 0.0, 0.3, 0.1).unwrap();
    let kappas: Vec<f64> = (1..=10).map(|i| shell_k(1, l) * 1.3f64.powi(i)).collect();
    let mut worst: f64 = 0.0;
    let mut total: f64 = 0.0;
    for s in &hist.samples {
        for b in shell_budget(s, &kappas) {
            let scale = b.dedt.abs() + b.dissipation + b.flux.abs();
            worst = worst.max(b.residual().abs() / scale);
        }
        let full = shell_budget(s, &[1e6])[0];
        total = total.max(full.flux.abs() / s.dissipation());
    }
    (worst <= 1e-6 && total <= 1e-10, format!("worst budget residual {worst:.2e} (<= 1e-6) at 10 cutoffs over {} samples; total flux {total:.2e} of the dissipation (<= 1e-10)", hist.len()))
}

fn main() {
    // (id, check, wall-clock limit in seconds)
    let criteria: [(u32, fn() -> Outcome, Option<f64>); 10] = [
        (1, criterion_01_lattice_ratio_scan, Some(if std::env::var_os("K41_SLOW").is_some() { 600.0 } else { 30.0 })),
        (2, criterion_02_shell_sum_ratios, Some(10.0)),
        (3, criterion_03_oseen_volume_curve, Some(60.0)),
        (4, criterion_04_structure_function_precision, Some(120.0)),
        (5, criterion_05_corrector_fit, Some(5.0)),
        (6, criterion_06_spectral_identities, None),
        (7, criterion_07_evolution_oracles, Some(300.0)),
        (8, criterion_08_analysis_round_trip, None),
        (9, criterion_09_wiener_khinchin_vs_direct, None),
        (10, criterion_10_shell_budget_closure, None),
    ];
    let mut failed = Vec::new();
    for (id, run, limit) in criteria {
        let start = std::time::Instant::now();
        let (mut ok, mut detail) = std::panic::catch_unwind(run).unwrap_or_else(|_| (false, "panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match limit {
            Some(lim) => {
                ok &= secs < lim;
                detail += &format!("; runtime {secs:.1} s (< {lim} s)");
            }
            None => detail += &format!("; runtime {secs:.1} s"),
        }
        println!("criterion {id}: {} {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
