//! Command-line front end. Every subcommand writes CSV to `--out` or stdout.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use crate::approx::{build_h_a0, build_h_ak, ApproximationResult, DEFAULT_ALPHA_RADIUS};
use crate::error::{Error, Result};
use crate::grid::{self, Method, DEFAULT_RTOL};
use crate::ldrate::{rate_v, rate_vsigma};
use crate::model::{LatticePoint, QueueParams};
use crate::simulate::{mc_pn, mc_py_inf};
use crate::surface::{betas_of_alpha, char_poly, conjugate_alpha};

#[derive(Debug, Parser)]
#[command(name = "qoverflow", version, about = "Overflow probabilities of two parallel queues")]
pub struct Cli {
    /// File of `key = value` lines (lambda1, lambda2, mu1, mu2)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Write output here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true)]
    pub lambda1: Option<f64>,
    #[arg(long, global = true)]
    pub lambda2: Option<f64>,
    #[arg(long, global = true)]
    pub mu1: Option<f64>,
    #[arg(long, global = true)]
    pub mu2: Option<f64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Auto,
    Gs,
    Direct,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Auto => Method::Auto,
            MethodArg::Gs => Method::GaussSeidel,
            MethodArg::Direct => Method::Direct,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Report rates and assumption flags
    Validate,
    /// Roots beta1, beta2 of the characteristic surface at alpha
    Surface {
        /// Complex alpha as `re` or `re,im`
        #[arg(long, value_parser = parse_complex)]
        alpha: Complex64,
    },
    /// Fit h^{a,K} (K = 0 gives h^{a,0}) and certify it
    BuildApprox {
        #[arg(short = 'K', long = "K", default_value_t = 3)]
        k: usize,
        #[arg(long = "alpha-radius", visible_alias = "radius", default_value_t = DEFAULT_ALPHA_RADIUS)]
        radius: f64,
        /// Emit |h(k,k) - 1| for k = 0..=profile
        #[arg(long, default_value_t = 40)]
        profile: i64,
    },
    /// P_x(tau_n < tau_0) on A_n
    Exact {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = parse_point)]
        at: Option<(i64, i64)>,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
    },
    /// P_y(tau < inf) from the truncated wedge
    Limit {
        #[arg(long, value_parser = parse_point)]
        y: (i64, i64),
        #[arg(long, default_value_t = DEFAULT_RTOL)]
        rtol: f64,
    },
    /// Monte Carlo estimate of P_x(tau_n < tau_0)
    Mc {
        #[arg(long)]
        n: i64,
        #[arg(long, value_parser = parse_point)]
        x: (i64, i64),
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Monte Carlo estimate of P_y(tau < inf)
    McLimit {
        #[arg(long, value_parser = parse_point)]
        y: (i64, i64),
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = 100_000)]
        max_steps: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// V and V_sigma(0, .) on a grid over the unit simplex.
    ///
    /// Values at x1 = 0 carry no approximation certificate.
    Ldrate {
        #[arg(long, default_value_t = 0.01)]
        resolution: f64,
    },
    /// Exact p_n against h^{a,K}(T_n x), or a sweep over K at one point
    Compare {
        #[arg(long, default_value_t = 60)]
        n: usize,
        #[arg(short = 'K', long = "K", default_value_t = 20)]
        k: usize,
        #[arg(long = "alpha-radius", visible_alias = "radius", default_value_t = DEFAULT_ALPHA_RADIUS)]
        radius: f64,
        /// Emit `K,value,cstar,argmax` for K = 0..=SWEEP at `--y` instead
        #[arg(long)]
        sweep: Option<usize>,
        #[arg(long, value_parser = parse_point, default_value = "50,0")]
        y: (i64, i64),
    },
}

fn parse_point(s: &str) -> std::result::Result<(i64, i64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `a,b`, got `{s}`"))?;
    let a = a.trim().parse().map_err(|e| format!("{a}: {e}"))?;
    let b = b.trim().parse().map_err(|e| format!("{b}: {e}"))?;
    Ok((a, b))
}

fn parse_complex(s: &str) -> std::result::Result<Complex64, String> {
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t}: {e}"));
    match s.split_once(',') {
        Some((re, im)) => Ok(Complex64::new(parse(re)?, parse(im)?)),
        None => Ok(Complex64::new(parse(s)?, 0.0)),
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Reads `key = value` lines; `#` starts a comment.
pub fn read_config(text: &str) -> Result<[Option<f64>; 4]> {
    let mut out = [None; 4];
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
        let slot = match key.trim() {
            "lambda1" => 0,
            "lambda2" => 1,
            "mu1" => 2,
            "mu2" => 3,
            other => return Err(Error::Config(format!("line {}: unknown key `{other}`", lineno + 1))),
        };
        let v = value
            .trim()
            .parse::<f64>()
            .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        out[slot] = Some(v);
    }
    Ok(out)
}

fn resolve_params(cli: &Cli) -> Result<QueueParams> {
    let mut rates = [None; 4];
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        rates = read_config(&text)?;
    }
    for (slot, flag) in rates.iter_mut().zip([cli.lambda1, cli.lambda2, cli.mu1, cli.mu2]) {
        if flag.is_some() {
            *slot = flag;
        }
    }
    if rates.iter().all(Option::is_none) {
        return Ok(QueueParams::worked_example());
    }
    match rates {
        [Some(l1), Some(l2), Some(m1), Some(m2)] => QueueParams::new(l1, l2, m1, m2),
        _ => Err(Error::Config("give all four of lambda1, lambda2, mu1, mu2 or none".into())),
    }
}

fn emit_approx(out: &mut dyn Write, fit: &ApproximationResult, profile: i64) -> io::Result<()> {
    writeln!(out, "kind,index,re,im")?;
    for (j, c) in fit.coefficients.iter().enumerate() {
        writeln!(out, "coefficient,{j},{},{}", num(c.re), num(c.im))?;
    }
    for (j, a) in fit.alphas.iter().enumerate() {
        writeln!(out, "alpha,{},{},{}", j + 1, num(a.re), num(a.im))?;
    }
    writeln!(out, "cstar,{},{},{}", fit.argmax_diagonal, num(fit.cstar), num(0.0))?;
    writeln!(out, "tail_bound,0,{},{}", num(fit.tail_bound_used), num(0.0))?;
    writeln!(out, "fit_residual,0,{},{}", num(fit.fit_residual), num(0.0))?;
    for (k, v) in fit.diagonal_profile(profile).into_iter().enumerate() {
        writeln!(out, "profile,{k},{},{}", num(v), num(0.0))?;
    }
    Ok(())
}

fn y_point((a, b): (i64, i64)) -> Result<LatticePoint> {
    LatticePoint::y(a, b)
}

fn fit_for(p: &QueueParams, k: usize, radius: f64) -> Result<ApproximationResult> {
    if k == 0 {
        Ok(build_h_a0(p)?.approximation)
    } else {
        build_h_ak(p, k, radius)
    }
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let p = resolve_params(cli)?;
    let io = |e: io::Error| Error::InvalidArgument(format!("write failed: {e}"));
    match &cli.command {
        Command::Validate => {
            let report = p.validate();
            let d = p.rates();
            writeln!(out, "quantity,value").map_err(io)?;
            for (name, v) in [("rho1", d.rho1), ("rho2", d.rho2), ("r", d.r)] {
                writeln!(out, "{name},{}", num(v)).map_err(io)?;
            }
            for (name, ok) in report.flags() {
                writeln!(out, "{name},{ok}").map_err(io)?;
            }
            report.require_harmonic()?;
        }
        Command::Surface { alpha } => {
            let roots = betas_of_alpha(&p, *alpha)?;
            writeln!(out, "quantity,re,im").map_err(io)?;
            let mut row = |name: &str, z: Complex64| writeln!(out, "{name},{},{}", num(z.re), num(z.im));
            row("alpha", *alpha).map_err(io)?;
            row("beta1", roots.beta1).map_err(io)?;
            row("beta2", roots.beta2).map_err(io)?;
            row("discriminant", roots.discriminant).map_err(io)?;
            row("conjugate_alpha_beta1", conjugate_alpha(&p, roots.beta1, *alpha)?).map_err(io)?;
            row("residual_beta1", char_poly(&p, roots.beta1, *alpha)? - 1.0).map_err(io)?;
            row("residual_beta2", char_poly(&p, roots.beta2, *alpha)? - 1.0).map_err(io)?;
        }
        Command::BuildApprox { k, radius, profile } => {
            if *k == 0 {
                let h = build_h_a0(&p)?;
                emit_approx(out, &h.approximation, *profile).map_err(io)?;
                writeln!(out, "c8,0,{},{}", num(h.c8), num(0.0)).map_err(io)?;
                writeln!(out, "x_star,0,{},{}", num(h.x_star), num(0.0)).map_err(io)?;
            } else {
                let fit = build_h_ak(&p, *k, *radius)?;
                if fit.condition_warning {
                    eprintln!("warning: fit residual {:e} exceeds the conditioning threshold", fit.fit_residual);
                }
                emit_approx(out, &fit, *profile).map_err(io)?;
            }
        }
        Command::Exact { n, at, method } => {
            let sol = grid::solve_pn(&p, *n, (*method).into())?;
            writeln!(out, "x1,x2,value").map_err(io)?;
            match at {
                Some((a, b)) => {
                    let v = sol.value_at(LatticePoint::x(*a, *b)?)?;
                    writeln!(out, "{a},{b},{}", num(v)).map_err(io)?;
                }
                None => {
                    for (a, b, v) in sol.rows() {
                        writeln!(out, "{a},{b},{}", num(v)).map_err(io)?;
                    }
                }
            }
        }
        Command::Limit { y, rtol } => {
            let lim = grid::solve_py_inf(&p, y_point(*y)?, *rtol)?;
            writeln!(out, "y1,y2,value,m1,m2,relative_change").map_err(io)?;
            writeln!(out, "{},{},{},{},{},{}", y.0, y.1, num(lim.values[0]), lim.m1, lim.m2, num(lim.relative_change))
                .map_err(io)?;
        }
        Command::Mc { n, x, trials, seed } => {
            let e = mc_pn(&p, LatticePoint::x(x.0, x.1)?, *n, *trials, *seed)?;
            writeln!(out, "n,x1,x2,mean,half_width_95,trials,hits,seed,truncated_paths").map_err(io)?;
            writeln!(
                out,
                "{n},{},{},{},{},{},{},{},{}",
                x.0, x.1, num(e.mean), num(e.half_width_95), e.trials, e.hits, e.seed, e.truncated_paths
            )
            .map_err(io)?;
        }
        Command::McLimit { y, trials, max_steps, seed } => {
            let e = mc_py_inf(&p, y_point(*y)?, *trials, *max_steps, *seed)?;
            writeln!(out, "y1,y2,mean,half_width_95,trials,hits,seed,truncated_paths").map_err(io)?;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                y.0, y.1, num(e.mean), num(e.half_width_95), e.trials, e.hits, e.seed, e.truncated_paths
            )
            .map_err(io)?;
        }
        Command::Ldrate { resolution } => {
            if !(*resolution > 0.0 && *resolution <= 1.0) {
                return Err(Error::InvalidArgument(format!("resolution must lie in (0, 1], got {resolution}")));
            }
            let steps = (1.0 / resolution).round() as i64;
            writeln!(out, "x1,x2,V,Vsigma0").map_err(io)?;
            for i in 0..=steps {
                for j in 0..=steps - i {
                    let x = [i as f64 / steps as f64, j as f64 / steps as f64];
                    writeln!(out, "{},{},{},{}", num(x[0]), num(x[1]), num(rate_v(&p, x)), num(rate_vsigma(&p, 0, x)))
                        .map_err(io)?;
                }
            }
        }
        Command::Compare { n, k, radius, sweep, y } => match sweep {
            Some(k_max) => {
                let at = y_point(*y)?;
                writeln!(out, "K,value,cstar,argmax").map_err(io)?;
                for kk in 0..=*k_max {
                    let fit = fit_for(&p, kk, *radius)?;
                    writeln!(out, "{kk},{},{},{}", num(fit.value(at)), num(fit.cstar), fit.argmax_diagonal)
                        .map_err(io)?;
                }
            }
            None => {
                let sol = grid::solve_pn(&p, *n, Method::Auto)?;
                let fit = fit_for(&p, *k, *radius)?;
                writeln!(out, "x1,x2,exact,approx,rel_error").map_err(io)?;
                let ni = *n as i64;
                for (a, b, exact) in sol.rows() {
                    if a + b >= ni || (a == 0 && b == 0) {
                        continue;
                    }
                    let approx = fit.value(LatticePoint::x(a, b)?.transform_tn(ni)?);
                    let rel = (exact - approx).abs() / exact;
                    writeln!(out, "{a},{b},{},{},{}", num(exact), num(approx), num(rel)).map_err(io)?;
                }
            }
        },
    }
    out.flush().map_err(io)
}

/// Parses `argv` (program name first), runs the command, and returns the
/// process exit code: 0 on success, 2 on a failed assumption, 1 otherwise.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match &cli.out {
        Some(path) => match fs::File::create(path) {
            Ok(f) => execute(&cli, &mut io::BufWriter::new(f)),
            Err(e) => Err(Error::InvalidArgument(format!("{}: {e}", path.display()))),
        },
        None => execute(&cli, &mut io::stdout().lock()),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
