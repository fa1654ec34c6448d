use clap::{Args, Parser, Subcommand, ValueEnum};
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use k41::analysis::{build_report, Domain, ReportOptions};
use k41::evolve::run_with;
use k41::field::{gen_oseen_cylinder, gen_random_spectrum, gen_single_mode, gen_taylor_green, SpectralField};
use k41::figures;
use k41::io::{load_history_stats, load_k41f, save_k41f, write_physical_csv, HistoryWriter};
use k41::numtheory::{c_ratio, r3};
use k41::spectrum::spectrum_discrete;
use k41::structfn::{log_grid, SpectrumProfile};
use k41::K41Error;

#[derive(Parser)]
#[command(name = "k41", version, about = "Spectral K41 diagnostics on the periodic box")]
struct Cli {
    /// Worker threads (falls back to K41_THREADS, then all cores).
    #[arg(long, global = true, env = "K41_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Number theory of the Stokes spectrum.
    Nt(NtArgs),
    /// Generate a velocity field.
    Gen(GenArgs),
    /// Evolve a K41F snapshot and write a run directory.
    Evolve(EvolveArgs),
    /// Shell spectrum of a snapshot, or the time-averaged spectrum of a run.
    Spectrum(SpectrumArgs),
    /// Full K41 report of a run directory as JSON.
    Analyze(AnalyzeArgs),
    /// Dataset behind one of the reference figures.
    Fig(FigArgs),
    /// S₂ and slope precision of a spectrum profile.
    Structfn(StructfnArgs),
    /// Corrector χ_δ against a K^{-5/3} fit.
    Corrector(CorrectorArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct NtWhat {
    /// r₃(N), the number of lattice points on the sphere of radius √N.
    #[arg(long, value_name = "N")]
    r3: Option<u64>,
    /// C(n) for n ≤ N_MAX, with the maximum in a trailer.
    #[arg(long, value_name = "N_MAX")]
    cmax: Option<u64>,
    /// Shell-sum ratios at 10% width for n ≤ N_MAX.
    #[arg(long, value_name = "N_MAX")]
    fig1: Option<u64>,
}

#[derive(Args)]
struct NtArgs {
    #[command(flatten)]
    what: NtWhat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Generator {
    TaylorGreen,
    Oseen,
    RandomSpectrum,
    SingleMode,
}

#[derive(Args)]
struct GenArgs {
    generator: Generator,
    #[arg(long = "N", default_value_t = 32)]
    n: usize,
    #[arg(long = "L", default_value_t = std::f64::consts::TAU)]
    l: f64,
    #[arg(long, default_value_t = 0.01)]
    nu: f64,
    /// Amplitude for taylor-green and single-mode.
    #[arg(long, default_value_t = 1.0)]
    amp: f64,
    /// Integer wavevector for single-mode, e.g. 1,0,0.
    #[arg(long, default_value = "1,0,0", value_parser = parse_mode)]
    mode: [i64; 3],
    /// Polarisation for single-mode, e.g. 0,1,0.
    #[arg(long, default_value = "0,1,0", value_parser = parse_vec)]
    polarization: [f64; 3],
    /// Target spectrum for random-spectrum: k53:kmin=..,kmax=..[,alpha=..,eps=..]
    #[arg(long, default_value = "k53:kmin=1,kmax=10")]
    profile: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Oseen circulation.
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Oseen time.
    #[arg(long, default_value_t = 0.07)]
    t: f64,
    /// Oseen radial-plane resolution.
    #[arg(long, default_value_t = 512)]
    np: usize,
    /// Apply u ↦ λu(λ²t, λx) to the generated field.
    #[arg(long, value_name = "LAMBDA")]
    rescale: Option<f64>,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct EvolveArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    t0: f64,
    #[arg(long)]
    t1: f64,
    #[arg(long)]
    sample_every: f64,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, value_name = "LAMBDA")]
    rescale: Option<f64>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct SpectrumSource {
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    history: Option<PathBuf>,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    src: SpectrumSource,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DomainArg {
    Torus,
    Whole,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    history: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    gamma_max: f64,
    /// Multiplicative slack on every verdict.
    #[arg(long, default_value_t = 1.0)]
    slack: f64,
    /// Analyticity-radius constant.
    #[arg(long, default_value_t = 1.0)]
    c0: f64,
    #[arg(long, value_enum, default_value_t = DomainArg::Torus)]
    domain: DomainArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FigId {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

#[derive(Args)]
struct FigArgs {
    id: FigId,
    #[arg(long, default_value_t = 10_000)]
    nmax: u64,
    /// Extra C(n) value for fig3, e.g. 10000000001.
    #[arg(long)]
    spot: Option<u64>,
    #[arg(long, default_value_t = 1e-3)]
    delta: f64,
    #[arg(long, default_value_t = 512)]
    np: usize,
    #[arg(long, default_value_t = 1e-4)]
    fit_lo: f64,
    #[arg(long, default_value_t = 1e-2)]
    fit_hi: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StructfnArgs {
    /// ideal:R=1e3 | real:R=1e3,delta=1e-3 | tab:FILE.csv
    #[arg(long)]
    profile: String,
    /// lo:hi:Nppd
    #[arg(long, default_value = "1e-4:10:40ppd")]
    ell_range: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CorrectorArgs {
    #[arg(long, value_delimiter = ',', default_value = "1e-3")]
    delta: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failure with its exit status.
struct Fail(u8, String);

impl From<K41Error> for Fail {
    fn from(e: K41Error) -> Self {
        let code = match e {
            K41Error::Io(_) => 3,
            K41Error::Format(_) | K41Error::Window(_) => 4,
            K41Error::Domain(_) | K41Error::DirectionRule(_) | K41Error::UnreachableShell(_) => 2,
            _ => 1,
        };
        Fail(code, e.to_string())
    }
}

impl From<io::Error> for Fail {
    fn from(e: io::Error) -> Self {
        Fail(3, e.to_string())
    }
}

fn usage(msg: impl Into<String>) -> Fail {
    Fail(2, msg.into())
}

fn parse_triple<T: std::str::FromStr>(s: &str) -> Result<[T; 3], String> {
    let v: Vec<T> = s.split(',').map(|x| x.trim().parse().map_err(|_| format!("bad component {x:?}"))).collect::<Result<_, _>>()?;
    v.try_into().map_err(|_| "expected three comma-separated values".to_string())
}

fn parse_mode(s: &str) -> Result<[i64; 3], String> {
    parse_triple(s)
}

fn parse_vec(s: &str) -> Result<[f64; 3], String> {
    parse_triple(s)
}

/// `name:k=v,k=v` into the name and its numeric parameters.
fn parse_spec(s: &str) -> Result<(&str, Vec<(&str, f64)>), Fail> {
    let (name, rest) = s.split_once(':').unwrap_or((s, ""));
    let mut kv = Vec::new();
    for part in rest.split(',').filter(|p| !p.is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| usage(format!("expected key=value in {part:?}")))?;
        kv.push((k.trim(), v.trim().parse::<f64>().map_err(|_| usage(format!("bad number in {part:?}")))?));
    }
    Ok((name, kv))
}

fn param(kv: &[(&str, f64)], key: &str, default: Option<f64>) -> Result<f64, Fail> {
    kv.iter().find(|p| p.0 == key).map(|p| p.1).or(default).ok_or_else(|| usage(format!("missing parameter {key}")))
}

fn positive(name: &str, x: f64) -> Result<(), Fail> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(usage(format!("--{name} must be positive, got {x}")))
    }
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>, Fail> {
    Ok(match out {
        Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

fn summary(f: &SpectralField) {
    eprintln!("N={} L={} nu={} t={} energy={:e} dissipation={:e}", f.n, f.l, f.nu, f.t, f.energy(), f.dissipation());
}

fn cmd_nt(a: NtArgs) -> Result<(), Fail> {
    let mut w = sink(&a.out)?;
    writeln!(w, "n,value")?;
    if let Some(n) = a.what.r3 {
        writeln!(w, "{n},{}", r3(n)?)?;
    } else if let Some(n) = a.what.cmax {
        let (rows, best) = figures::fig3(n);
        for (n, _, c) in rows {
            writeln!(w, "{n},{c:e}")?;
        }
        writeln!(w, "# max C(n)={:e} at n={}", best.1, best.0)?;
    } else if let Some(n) = a.what.fig1 {
        let (rows, s) = figures::fig1(n);
        for r in rows {
            writeln!(w, "{},{:e}", r.n, r.ratio)?;
        }
        writeln!(w, "# min={:e} at n={}, max={:e} at n={}, tail_mean={:e}, tail_mean_unrestricted={:e}", s.min, s.min_n, s.max, s.max_n, s.tail_mean, s.tail_mean_unrestricted)?;
    }
    w.flush()?;
    Ok(())
}

fn random_target(spec: &str) -> Result<impl Fn(f64) -> f64, Fail> {
    let (name, kv) = parse_spec(spec)?;
    if name != "k53" {
        return Err(usage(format!("unknown profile {name:?}, expected k53")));
    }
    let kmin = param(&kv, "kmin", None)?;
    let kmax = param(&kv, "kmax", None)?;
    let c = param(&kv, "alpha", Some(1.0))? * param(&kv, "eps", Some(1.0))?.powf(2.0 / 3.0);
    if !(kmin > 0.0 && kmax > kmin) {
        return Err(usage("profile needs 0 < kmin < kmax"));
    }
    // shell radii are rounded, so allow a hair of slack at the ends
    Ok(move |k: f64| if k >= kmin * (1.0 - 1e-9) && k <= kmax * (1.0 + 1e-9) { c * k.powf(-5.0 / 3.0) } else { 0.0 })
}

fn cmd_gen(a: GenArgs) -> Result<(), Fail> {
    positive("nu", a.nu).or_else(|e| if a.nu == 0.0 { Ok(()) } else { Err(e) })?;
    positive("L", a.l)?;
    if let Generator::Oseen = a.generator {
        positive("t", a.t)?;
        let p = gen_oseen_cylinder(a.gamma, a.nu, a.t, a.np, 1.0, 1.0)?;
        write_physical_csv(File::create(&a.out)?, &p)?;
        eprintln!("oseen t={} l1={:e} l2_sq={:e}", a.t, p.l1_norm(), p.l2_norm_sq());
        return Ok(());
    }
    let mut f = match a.generator {
        Generator::TaylorGreen => gen_taylor_green(a.amp, a.n, a.l, a.nu)?,
        Generator::SingleMode => gen_single_mode(a.amp, a.mode, a.polarization, a.n, a.l, a.nu)?,
        Generator::RandomSpectrum => gen_random_spectrum(random_target(&a.profile)?, a.seed, a.n, a.l, a.nu)?,
        Generator::Oseen => unreachable!(),
    };
    if let Some(lam) = a.rescale {
        f = f.rescale(lam)?;
    }
    save_k41f(&a.out, &f)?;
    summary(&f);
    Ok(())
}

fn cmd_evolve(a: EvolveArgs) -> Result<(), Fail> {
    positive("sample-every", a.sample_every)?;
    if !(a.t1 > a.t0) {
        return Err(usage("--t1 must exceed --t0"));
    }
    let mut f = load_k41f(&a.input)?;
    if let Some(lam) = a.rescale {
        f = f.rescale(lam)?;
    }
    let mut out = HistoryWriter::create(&a.out_dir)?;
    run_with(&f, a.t0, a.t1, a.sample_every, |s| out.push(s))?;
    eprintln!("{} samples written to {}", out.rows().len(), a.out_dir.display());
    Ok(())
}

fn cmd_spectrum(a: SpectrumArgs) -> Result<(), Fail> {
    let w = sink(&a.out)?;
    if let Some(p) = a.src.input {
        spectrum_discrete(&load_k41f(&p)?).write_csv(w, None)?;
    } else if let Some(d) = a.src.history {
        let avg = load_history_stats(&d)?.average()?;
        avg.spectrum.write_csv(w, Some(&avg.header()))?;
    }
    Ok(())
}

fn cmd_analyze(a: AnalyzeArgs) -> Result<(), Fail> {
    positive("gamma-max", a.gamma_max)?;
    positive("slack", a.slack)?;
    positive("c0", a.c0)?;
    let stats = load_history_stats(&a.history)?;
    if stats.samples.len() < 2 {
        return Err(Fail(4, format!("history has {} sample, need at least 2", stats.samples.len())));
    }
    let opts = ReportOptions {
        gamma_max: a.gamma_max,
        slack: a.slack,
        c0: a.c0,
        domain: match a.domain {
            DomainArg::Torus => Domain::Torus,
            DomainArg::Whole => Domain::Whole,
        },
    };
    let report = build_report(&stats, &opts)?;
    let mut w = sink(&a.out)?;
    w.write_all(report.to_json().as_bytes())?;
    w.flush()?;
    Ok(())
}

fn cmd_fig(a: FigArgs) -> Result<(), Fail> {
    let mut w = sink(&a.out)?;
    match a.id {
        FigId::Fig1 => {
            let (rows, s) = figures::fig1(a.nmax);
            writeln!(w, "n,ratio,unrestricted")?;
            for r in rows {
                writeln!(w, "{},{:e},{:e}", r.n, r.ratio, r.unrestricted)?;
            }
            writeln!(w, "# min={:.4} at n={}, max={:.4} at n={}, tail_mean={:.4}, tail_mean_unrestricted={:.4}", s.min, s.min_n, s.max, s.max_n, s.tail_mean, s.tail_mean_unrestricted)?;
        }
        FigId::Fig2 => {
            let rows = figures::fig2(1.0, 1.0, a.np, 1e-5, 1e2)?;
            writeln!(w, "t,instant,window,x")?;
            for r in &rows {
                writeln!(w, "{:e},{:e},{:e},{:e}", r.t, r.instant, r.window, r.x)?;
            }
            let fit = figures::fig2_fit(&rows, a.fit_lo, a.fit_hi)?;
            writeln!(w, "# peak={:.4} at t={:.4e}, slope={:.4}, prefactor={:.4} on t in [{:e}, {:e}]", fit.peak, fit.t_peak, fit.slope, fit.prefactor, fit.t_lo, fit.t_hi)?;
        }
        FigId::Fig3 => {
            let (rows, best) = figures::fig3(a.nmax);
            writeln!(w, "n,r3,value")?;
            for (n, c, v) in rows {
                writeln!(w, "{n},{c},{v:e}")?;
            }
            writeln!(w, "# max C(n)={:.6} at n={}", best.1, best.0)?;
            if let Some(n) = a.spot {
                writeln!(w, "# C({n})={:.6e}", c_ratio(n)?)?;
            }
        }
        FigId::Fig4 => {
            writeln!(w, "profile,ell,S2,slope_precision")?;
            for r in figures::fig4()? {
                writeln!(w, "{},{:e},{:e},{:e}", r.profile, r.ell, r.s2, r.precision)?;
            }
        }
        FigId::Fig5 => {
            positive("delta", a.delta)?;
            let (rows, fit) = figures::fig5(a.delta)?;
            writeln!(w, "K,chi,ref53,rel_err")?;
            for r in rows {
                writeln!(w, "{:e},{:e},{:e},{:e}", r[0], r[1], r[2], r[3])?;
            }
            writeln!(w, "# prefactor={:.4},max_rel_err={:.4},decades={:.2}", fit.prefactor, fit.max_rel_err, fit.decades)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn parse_profile(s: &str) -> Result<SpectrumProfile, Fail> {
    if let Some(path) = s.strip_prefix("tab:") {
        return Ok(SpectrumProfile::read_tabulated(File::open(Path::new(path))?)?);
    }
    let (name, kv) = parse_spec(s)?;
    match name {
        "ideal" => Ok(SpectrumProfile::Ideal53 { r: param(&kv, "R", None)? }),
        "real" => Ok(SpectrumProfile::Real53 { r: param(&kv, "R", None)?, delta: param(&kv, "delta", None)? }),
        _ => Err(usage(format!("unknown profile {name:?}"))),
    }
}

fn parse_range(s: &str) -> Result<Vec<f64>, Fail> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || usage(format!("--ell-range expects lo:hi:Nppd, got {s:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].parse().map_err(|_| bad())?;
    let ppd: usize = parts[2].trim_end_matches("ppd").parse().map_err(|_| bad())?;
    if !(lo > 0.0 && hi > lo && ppd > 0) {
        return Err(bad());
    }
    Ok(log_grid(lo, hi, ppd))
}

fn cmd_structfn(a: StructfnArgs) -> Result<(), Fail> {
    let p = parse_profile(&a.profile)?;
    let ells = parse_range(&a.ell_range)?;
    let rows = figures::s2_curve(&p, &ells)?;
    let mut w = sink(&a.out)?;
    writeln!(w, "ell,S2,slope_precision")?;
    for r in rows {
        writeln!(w, "{:e},{:e},{:e}", r.ell, r.s2, r.precision)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_corrector(a: CorrectorArgs) -> Result<(), Fail> {
    let mut w = sink(&a.out)?;
    writeln!(w, "K,chi,ref53,rel_err")?;
    for d in a.delta {
        positive("delta", d)?;
        let (rows, fit) = figures::fig5(d)?;
        for r in rows {
            writeln!(w, "{:e},{:e},{:e},{:e}", r[0], r[1], r[2], r[3])?;
        }
        writeln!(w, "# delta={d:e},prefactor={:.4},max_rel_err={:.4},decades={:.2}", fit.prefactor, fit.max_rel_err, fit.decades)?;
    }
    w.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let res = match cli.cmd {
        Cmd::Nt(a) => cmd_nt(a),
        Cmd::Gen(a) => cmd_gen(a),
        Cmd::Evolve(a) => cmd_evolve(a),
        Cmd::Spectrum(a) => cmd_spectrum(a),
        Cmd::Analyze(a) => cmd_analyze(a),
        Cmd::Fig(a) => cmd_fig(a),
        Cmd::Structfn(a) => cmd_structfn(a),
        Cmd::Corrector(a) => cmd_corrector(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
