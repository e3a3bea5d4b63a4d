use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use gspkit_cli::{emit, exit_code, run, CliError, Format, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "gspkit", about = "Run verification suites over (g, p, n) grids")]
struct Args {
    /// Suite name, or "all"; repeatable
    #[arg(long = "suite")]
    suites: Vec<String>,
    /// Largest genus
    #[arg(long, default_value_t = 2)]
    g: usize,
    /// Primes; repeatable
    #[arg(long = "p", default_values_t = [2u32, 3])]
    p: Vec<u32>,
    /// Extra moduli for the orders suite; repeatable
    #[arg(long = "n")]
    n: Vec<u32>,
    /// Enumeration cap, integer or float notation
    #[arg(long, default_value = "2e6", value_parser = parse_cap)]
    cap: u128,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output directory; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    /// json, csv or text
    #[arg(long, default_value = "json")]
    format: String,
}

fn parse_cap(s: &str) -> Result<u128, String> {
    if let Ok(v) = s.parse::<u128>() {
        return Ok(v);
    }
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 1.0 && v.fract() == 0.0 => Ok(v as u128),
        _ => Err(format!("`{s}` is not a positive integer")),
    }
}

fn main_inner(args: Args) -> Result<i32, CliError> {
    let cfg = RunConfig {
        g_max: args.g,
        p_list: args.p,
        n_list: args.n,
        cap: args.cap,
        seed: args.seed,
        out: args.out,
        format: args.format.parse::<Format>()?,
        ..RunConfig::default()
    }
    .with_suites(&args.suites)?;
    let reports = run(&cfg)?;
    if let Some(text) = emit(&cfg, &reports)? {
        print!("{text}");
    }
    Ok(exit_code(&reports))
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match main_inner(args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("gspkit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
