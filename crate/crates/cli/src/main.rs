//! `spectra`: spectral systems of towers of fibrations from the command line.

mod config;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use config::TowerConfig;
use spectra_core::chain::ChainError;
use spectra_core::exactlinalg::BasisDivisors;
use spectra_core::homotopy::check_reduction_laws;
use spectra_core::poset::{render_point, t_downset, DownSet, Point, TermTuple};
use spectra_core::serre::{
    coefficient_homology_oracle, compare_two_pages, direct_complex, effective_bottom, pipeline, points_up_to,
    two_page_term, Tower, TowerEquivalences,
};
use spectra_core::simplicial::{check_twisting_identities, ez_reduction, twisted_ez_reduction, SSet};
use spectra_core::spectra::{GenFilteredComplex, SpectralTerm};

#[derive(Parser)]
#[command(name = "spectra", version, about = "Spectral systems of towers of simplicial fibrations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// The 2-page term S*(P;m)_n.
    E2 {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated multi-index, e.g. 0,0,2.
        #[arg(short = 'P', long = "point", allow_hyphen_values = true)]
        point: String,
        #[arg(short = 'n', long)]
        degree: i32,
    },
    /// An arbitrary term S[z,s,p,b]_n.
    ///
    /// Downsets are `empty`, `full`, `T<k>:a,b,...` for the lexicographic
    /// downset T^k_P, or `a,b;c,d;...` for the downset generated by points.
    Term {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[arg(long, allow_hyphen_values = true)]
        s: String,
        #[arg(long, allow_hyphen_values = true)]
        p: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        #[arg(short = 'n', long)]
        degree: i32,
    },
    /// The homology H_n of the total space.
    Final {
        #[arg(long)]
        config: PathBuf,
        #[arg(short = 'n', long)]
        degree: i32,
    },
    /// Runs a check suite; exits with 1 on any mismatch.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        bound: i32,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Laws,
    DirectVsEffective,
    #[value(name = "oracle-2page")]
    Oracle2page,
}

struct Session {
    cfg: TowerConfig,
    tower: Tower,
}

impl Session {
    fn load(path: &PathBuf) -> Result<Session> {
        let name = path.display().to_string();
        let src = std::fs::read_to_string(path).with_context(|| format!("cannot read {name}"))?;
        let cfg = TowerConfig::parse(&src, &name)?;
        // The environment variable takes precedence over the file.
        if std::env::var_os("SPECTRA_BPL_BUDGET").is_none() {
            std::env::set_var("SPECTRA_BPL_BUDGET", cfg.bpl_budget.to_string());
        }
        let tower = cfg.build()?;
        Ok(Session { cfg, tower })
    }

    fn check_degree(&self, n: i32) -> Result<()> {
        if n < 0 || n > self.cfg.max_degree {
            bail!("degree {n} outside 0..={} (max_degree)", self.cfg.max_degree);
        }
        Ok(())
    }

    fn effective(&self) -> Result<GenFilteredComplex> {
        let eq = TowerEquivalences::trivial(&self.tower);
        Ok(effective_bottom(&self.tower, &eq, self.cfg.max_degree as i64)?)
    }
}

fn parse_point(s: &str) -> Result<Point> {
    s.split(',')
        .map(|x| x.trim().parse::<i64>().map_err(|_| anyhow!("`{s}` is not a comma-separated list of integers")))
        .collect()
}

fn parse_downset(s: &str, m: usize) -> Result<DownSet> {
    let t = s.trim();
    let d = match t.to_ascii_lowercase().as_str() {
        "empty" | "nil" => DownSet::Empty,
        "full" => DownSet::Full,
        _ if t.starts_with('T') => {
            let (k, p) = t[1..].split_once(':').ok_or_else(|| anyhow!("`{s}`: expected T<k>:a,b,..."))?;
            let k: usize = k.parse().map_err(|_| anyhow!("`{s}`: bad index k"))?;
            let p = parse_point(p)?;
            check_arity(&p, m)?;
            t_downset(&p, k)?
        }
        _ => {
            let pts = t.split(';').map(parse_point).collect::<Result<Vec<_>>>()?;
            for p in &pts {
                check_arity(p, m)?;
            }
            DownSet::generated(pts)?
        }
    };
    Ok(d)
}

fn check_arity(p: &[i64], m: usize) -> Result<()> {
    if p.len() != m {
        bail!("point {} has {} coordinates, the tower has m = {m}", render_point(p), p.len());
    }
    Ok(())
}

fn render_group(g: &BasisDivisors<impl Sized>) -> String {
    if g.divisors.is_empty() {
        return "NIL\n".into();
    }
    let mut out = String::new();
    for d in &g.divisors {
        if d == &0.into() {
            out.push_str("Component Z\n");
        } else {
            let _ = writeln!(out, "Component Z/{d}Z");
        }
    }
    out
}

fn render_term(term: &SpectralTerm, m: usize, bound: i64) -> String {
    format!(
        "Generalized spectral sequence {}_{{{}}}\n{}",
        term.tuple.render(m, bound),
        term.degree,
        render_group(&term.group)
    )
}

fn cmd_e2(config: &PathBuf, point: &str, n: i32) -> Result<bool> {
    let s = Session::load(config)?;
    s.check_degree(n)?;
    let p = parse_point(point)?;
    check_arity(&p, s.cfg.m())?;
    let fc = s.effective()?;
    let term = two_page_term(&fc, &p, n)?;
    print!("{}", render_term(&term, s.cfg.m(), s.cfg.max_degree as i64));
    Ok(true)
}

fn cmd_term(config: &PathBuf, z: &str, sd: &str, p: &str, b: &str, n: i32) -> Result<bool> {
    let s = Session::load(config)?;
    s.check_degree(n)?;
    let m = s.cfg.m();
    let bound = Some((m, s.cfg.max_degree as i64));
    let tuple = TermTuple::new(
        parse_downset(z, m)?,
        parse_downset(sd, m)?,
        parse_downset(p, m)?,
        parse_downset(b, m)?,
        bound,
    )?;
    let fc = s.effective()?;
    let term = fc.term(&tuple, n)?;
    print!("{}", render_term(&term, m, s.cfg.max_degree as i64));
    Ok(true)
}

fn cmd_final(config: &PathBuf, n: i32) -> Result<bool> {
    let s = Session::load(config)?;
    s.check_degree(n)?;
    let fc = s.effective()?;
    let term = fc.final_group(n)?;
    print!("{}", render_term(&term, s.cfg.m(), s.cfg.max_degree as i64));
    Ok(true)
}

fn report(name: &str, problems: &[String]) -> bool {
    if problems.is_empty() {
        println!("{name}: ok");
        true
    } else {
        println!("{name}: {} violations", problems.len());
        for p in problems.iter().take(20) {
            println!("  {p}");
        }
        false
    }
}

fn verify_laws(s: &Session, bound: i32) -> Result<bool> {
    let t = &s.tower;
    let mut ok = true;
    for i in 0..t.m() {
        let below = t.space(i + 1);
        let tau = &t.twists[i];
        let red = if tau.is_trivial() {
            ez_reduction(t.fibers[i].clone() as SSet, below.clone())
        } else {
            let bad = check_twisting_identities(tau, below.as_ref(), bound.max(0) as usize);
            ok &= report(&format!("twisting operator τ_{i}"), &bad);
            twisted_ez_reduction(t.fibers[i].clone(), tau, below)?.0
        };
        ok &= report(&format!("Eilenberg–Zilber reduction at level {i}"), &check_reduction_laws(&red, bound)?);
    }
    let p = pipeline(t, &TowerEquivalences::trivial(t))?;
    ok &= report("pipeline reduction", &check_reduction_laws(&p.reduction, bound)?);
    let squares: Vec<String> = p.bottom.check_d_squared(bound)?.iter().map(|g| format!("d²({g:?}) ≠ 0")).collect();
    ok &= report("effective differential", &squares);
    ok &= report("effective filtration", &s.effective()?.check_compatibility(bound)?);
    ok &= report("direct filtration", &direct_complex(t, bound as i64).check_compatibility(bound)?);
    Ok(ok)
}

fn divisors(d: &[impl std::fmt::Display]) -> String {
    let parts: Vec<String> = d.iter().map(|x| x.to_string()).collect();
    format!("[{}]", parts.join(" "))
}

fn verify_direct(s: &Session, bound: i32) -> Result<bool> {
    let direct = direct_complex(&s.tower, bound as i64);
    let effective = effective_bottom(&s.tower, &TowerEquivalences::trivial(&s.tower), bound as i64)?;
    let r = compare_two_pages(&direct, &effective, bound)?;
    for mm in &r.mismatches {
        println!(
            "mismatch S*({};{})_{}: direct {} effective {}",
            render_point(&mm.point),
            s.cfg.m(),
            mm.degree,
            divisors(&mm.direct),
            divisors(&mm.effective)
        );
    }
    println!("direct vs effective: {} terms compared, {} mismatches", r.compared, r.mismatches.len());
    Ok(r.ok())
}

fn verify_oracle(s: &Session, bound: i32) -> Result<bool> {
    let fc = effective_bottom(&s.tower, &TowerEquivalences::trivial(&s.tower), bound as i64)?;
    let m = s.cfg.m();
    let (mut compared, mut bad) = (0, 0);
    for n in 0..=bound {
        for p in points_up_to(m, bound as i64) {
            let got = two_page_term(&fc, &p, n)?.group.divisors;
            let want = coefficient_homology_oracle(&s.tower, &p, n)?.divisors;
            compared += 1;
            if got != want {
                bad += 1;
                println!("mismatch S*({};{m})_{n}: 2-page {} oracle {}", render_point(&p), divisors(&got), divisors(&want));
            }
        }
    }
    println!("2-page vs coefficient homology: {compared} terms compared, {bad} mismatches");
    Ok(bad == 0)
}

fn cmd_verify(config: &PathBuf, mode: Mode, bound: i32) -> Result<bool> {
    let s = Session::load(config)?;
    if bound < 0 {
        bail!("bound must be nonnegative");
    }
    match mode {
        Mode::Laws => verify_laws(&s, bound),
        Mode::DirectVsEffective => verify_direct(&s, bound),
        Mode::Oracle2page => verify_oracle(&s, bound),
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::E2 { config, point, degree } => cmd_e2(&config, &point, degree),
        Command::Term { config, z, s, p, b, degree } => cmd_term(&config, &z, &s, &p, &b, degree),
        Command::Final { config, degree } => cmd_final(&config, degree),
        Command::Verify { config, mode, bound } => cmd_verify(&config, mode, bound),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let budget = e.chain().any(|c| matches!(c.downcast_ref(), Some(ChainError::NilpotencyBudgetExceeded { .. })));
            eprintln!("error: {e:#}");
            if budget {
                eprintln!("hint: raise bpl_budget or SPECTRA_BPL_BUDGET");
            }
            ExitCode::from(2)
        }
    }
}
