use std::f64::consts::PI;

use proptest::prelude::*;

use k41::analysis::{cascade_flux, enstrophy_profile, Verdict};
use k41::evolve::step;
use k41::field::{gen_random_spectrum, leray_project, SpectralField};
use k41::io::{read_k41f, write_k41f};
use k41::numtheory::{is_sum_of_three_squares, r3};
use k41::spectrum::{spectrum_discrete, AveragedSpectrum};

fn field(seed: u64, kmax: f64, slope: f64, l: f64) -> SpectralField {
    gen_random_spectrum(move |k| if k <= kmax { k.powf(-slope) } else { 0.0 }, seed, 16, l, 0.03).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn membership_matches_r3(n in 0u64..20_000) {
        prop_assert_eq!(is_sum_of_three_squares(n), r3(n).unwrap() > 0);
        prop_assert_eq!(is_sum_of_three_squares(n), is_sum_of_three_squares(4 * n));
    }

    #[test]
    fn generated_fields_are_valid(seed in any::<u64>(), kmax in 2.0f64..7.0, slope in 0.0f64..3.0, l in 0.5f64..10.0) {
        let f = field(seed, kmax * 2.0 * PI / l, slope, l);
        let scale = f.max_coeff();
        prop_assert!(f.hermitian_defect() <= 1e-12 * scale);
        prop_assert!(f.max_divergence() <= 1e-12 * scale * f.k0() * f.n as f64);
        for q in 0..f.n.pow(3) {
            if f.is_nyquist(f.mode(q)) {
                prop_assert!((0..3).all(|c| f.coeffs[c][q].norm() == 0.0));
            }
        }
        let back = SpectralField::from_physical(&f.to_physical(), f.l, f.nu).unwrap();
        let err = (0..3).flat_map(|c| f.coeffs[c].iter().zip(&back.coeffs[c]).map(|(a, b)| (a - b).norm())).fold(0.0, f64::max);
        prop_assert!(err <= 1e-12 * scale);
    }

    #[test]
    fn energy_identity_and_projection(seed in any::<u64>(), slope in 0.0f64..3.0) {
        let f = field(seed, 6.0, slope, 2.0 * PI);
        let s = spectrum_discrete(&f);
        prop_assert!(s.shells.iter().all(|x| x.e_dagger >= 0.0));
        prop_assert!(s.shells.windows(2).all(|w| w[0].n < w[1].n));
        prop_assert!(rel(s.total_energy(), f.energy()) <= 1e-10);
        let p = leray_project(&f);
        let pp = leray_project(&p);
        for c in 0..3 {
            for (a, b) in p.coeffs[c].iter().zip(&pp.coeffs[c]) {
                prop_assert!((a - b).norm() <= 1e-13 * f.max_coeff());
            }
        }
    }

    #[test]
    fn rescaling_laws(seed in any::<u64>(), lambda in 0.2f64..5.0) {
        let f = field(seed, 5.0, 1.0, 2.0 * PI);
        let g = f.rescale(lambda).unwrap();
        prop_assert!(rel(g.energy(), lambda.powi(2) * f.energy()) <= 1e-12);
        prop_assert!(rel(g.dissipation(), lambda.powi(4) * f.dissipation()) <= 1e-12);
        prop_assert!(rel(g.l, f.l / lambda) <= 1e-15);
    }

    #[test]
    fn k41f_round_trip_is_exact(seed in any::<u64>(), t in 0.0f64..100.0) {
        let mut f = field(seed, 5.0, 1.5, 1.3);
        f.t = t;
        let mut buf = Vec::new();
        write_k41f(&mut buf, &f).unwrap();
        let g = read_k41f(&buf[..]).unwrap();
        prop_assert_eq!((g.n, g.l, g.nu, g.t), (f.n, f.l, f.nu, f.t));
        prop_assert!(g.coeffs == f.coeffs);
        let mut again = Vec::new();
        write_k41f(&mut again, &g).unwrap();
        prop_assert_eq!(buf, again);
    }

    #[test]
    fn verdict_is_a_plain_comparison(lhs in -1e6f64..1e6, rhs in -1e6f64..1e6, slack in 0.5f64..4.0) {
        let v = Verdict::new("x", lhs, rhs, slack);
        prop_assert_eq!(v.pass, lhs <= slack * rhs);
        if rhs >= 0.0 && v.pass {
            prop_assert!(Verdict::new("x", lhs, rhs, slack * 2.0).pass);
        }
        let json = serde_json::to_string(&v).unwrap();
        let w: Verdict = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(v, w);
    }

    #[test]
    fn enstrophy_profile_is_monotone(seed in any::<u64>(), slope in 0.0f64..3.0) {
        let f = field(seed, 7.0, slope, 2.0 * PI);
        let avg = AveragedSpectrum::stationary(spectrum_discrete(&f), f.dissipation(), 0.0, 1.0);
        let prof = enstrophy_profile(&avg);
        prop_assert!(prof.windows(2).all(|w| w[1].1 <= w[0].1));
        prop_assert!(rel(prof[0].1, f.dissipation() / (2.0 * f.nu)) <= 1e-10);
    }

    #[test]
    fn step_keeps_structure(seed in any::<u64>()) {
        let f = field(seed, 4.0, 1.0, 2.0 * PI);
        let g = step(&f, 1e-3).unwrap();
        prop_assert!(g.div_free);
        for c in 0..3 {
            prop_assert_eq!(g.coeffs[c][0], f.coeffs[c][0]);
        }
        prop_assert!(g.energy() < f.energy());
        prop_assert!(g.max_divergence() <= 1e-12 * g.max_coeff() * g.k0() * g.n as f64);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn total_transfer_vanishes(seed in any::<u64>()) {
        let f = field(seed, 7.0, 1.0, 2.0 * PI);
        let total = cascade_flux(&f, 1e6);
        prop_assert!(total.abs() <= 1e-10 * f.dissipation());
    }
}
