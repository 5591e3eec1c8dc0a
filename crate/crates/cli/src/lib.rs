//! Argument handling and report rendering for the `cnlproof` binary.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::Parser;
use cnlproof::language::SearchPath;
use cnlproof::provers::{default_provers, parse_config, ProverConfig};
use cnlproof::verifier::{verify_text, Color, Options, Report, Status};

/// Environment variable naming library directories, separated like `PATH`.
pub const LIB_ENV: &str = "CNLPROOF_LIB";

/// Verify a proof text and report a status per line.
#[derive(Debug, Parser)]
#[command(name = "cnlproof", version)]
pub struct Cli {
    /// Input file; `-` or absent reads standard input.
    pub input: Option<PathBuf>,
    /// Library directory, searched in order (repeatable).
    #[arg(long = "lib", value_name = "DIR")]
    pub libs: Vec<PathBuf>,
    /// Comma-separated prover names to use.
    #[arg(long, value_delimiter = ',', value_name = "NAMES")]
    pub provers: Vec<String>,
    /// TOML file of `[[prover]]` tables replacing the default provers.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Time limit per prover, in seconds.
    #[arg(long, value_name = "SECONDS")]
    pub timeout: Option<f64>,
    /// Write every obligation as `<id>.p` into this directory.
    #[arg(long = "emit-tptp", value_name = "DIR")]
    pub emit_tptp: Option<PathBuf>,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
    /// Show obligations and mark proved ones orange.
    #[arg(long, short)]
    pub verbose: bool,
}

pub const EXIT_VERIFIED: i32 = 0;
pub const EXIT_NOT_VERIFIED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write, color: bool) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_VERIFIED };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match execute(&cli, stdin, out, color) {
        Ok(code) => code,
        Err(message) => {
            let _ = writeln!(err, "cnlproof: {message}");
            EXIT_USAGE
        }
    }
}

fn execute(cli: &Cli, stdin: &mut dyn Read, out: &mut dyn Write, color: bool) -> Result<i32, String> {
    let options = options(cli)?;
    let (name, text) = match cli.input.as_deref() {
        None => ("<stdin>".to_string(), read_all(stdin)?),
        Some(p) if p.as_os_str() == "-" => ("<stdin>".to_string(), read_all(stdin)?),
        Some(p) => (p.display().to_string(), std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?),
    };
    let report = verify_text(&text, &options);
    let written = if cli.json {
        writeln!(out, "{}", report.to_json())
    } else {
        out.write_all(render(&name, &report, cli.verbose, color).as_bytes())
    };
    written.map_err(|e| e.to_string())?;
    Ok(if is_input_error(&report) {
        EXIT_USAGE
    } else if report.verified {
        EXIT_VERIFIED
    } else {
        EXIT_NOT_VERIFIED
    })
}

fn read_all(stdin: &mut dyn Read) -> Result<String, String> {
    let mut text = String::new();
    stdin.read_to_string(&mut text).map_err(|e| format!("standard input: {e}"))?;
    Ok(text)
}

/// The text could not be parsed or its libraries not loaded.
fn is_input_error(report: &Report) -> bool {
    report.statements.iter().any(|s| s.id == "error" && s.status == Status::Error)
}

/// Library directories: `--lib`, else the environment variable, else `./lib`.
pub fn library_dirs(libs: &[PathBuf], env: Option<OsString>) -> Vec<PathBuf> {
    if !libs.is_empty() {
        return libs.to_vec();
    }
    match env {
        Some(v) if !v.is_empty() => std::env::split_paths(&v).collect(),
        _ => vec![PathBuf::from("lib")],
    }
}

fn options(cli: &Cli) -> Result<Options, String> {
    let mut provers = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            parse_config(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => default_provers(),
    };
    if !cli.provers.is_empty() {
        provers = select(&provers, &cli.provers)?;
    }
    if provers.is_empty() {
        return Err("no provers configured".into());
    }
    if let Some(t) = cli.timeout {
        if !t.is_finite() || t <= 0.0 {
            return Err(format!("invalid timeout {t}"));
        }
    }
    Ok(Options {
        search: SearchPath::new(library_dirs(&cli.libs, std::env::var_os(LIB_ENV))),
        provers,
        timeout: cli.timeout,
        emit_dir: cli.emit_tptp.clone(),
        ..Options::default()
    })
}

fn select(available: &[ProverConfig], names: &[String]) -> Result<Vec<ProverConfig>, String> {
    names
        .iter()
        .map(|n| {
            available.iter().find(|p| p.name == *n).cloned().ok_or_else(|| {
                let known: Vec<&str> = available.iter().map(|p| p.name.as_str()).collect();
                format!("unknown prover `{n}` (available: {})", known.join(", "))
            })
        })
        .collect()
}

fn paint(text: &str, color: Color, enabled: bool) -> String {
    if !enabled {
        return text.to_string();
    }
    let code = match color {
        Color::Green => "32",
        Color::Orange => "33",
        Color::Red => "31",
    };
    format!("\x1b[{code}m{text}\x1b[0m")
}

/// Human-readable report: one line per statement, models and messages
/// below failing lines.
pub fn render(name: &str, report: &Report, verbose: bool, color: bool) -> String {
    let mut s = String::new();
    for st in &report.statements {
        let status = format!("{:<8}", format!("{:?}", st.status).to_lowercase());
        let mut line = format!("{:>4}  {}  {}", st.span.start_line, paint(&status, st.color(verbose), color), st.id);
        if let Some(p) = &st.prover {
            line.push_str(&format!("  [{p}, {} ms]", st.ms));
        } else if st.is_obligation() {
            line.push_str(&format!("  [{} ms]", st.ms));
        }
        s.push_str(line.trim_end());
        s.push('\n');
        if let Some(m) = &st.message {
            s.push_str(&indent(m));
        }
        if let Some(m) = &st.model {
            s.push_str("      countermodel:\n");
            s.push_str(&indent(m));
        }
        if verbose {
            if let Some(t) = &st.tptp {
                s.push_str(&indent(t));
            }
        }
    }
    let verdict = if report.verified { paint("verified", Color::Green, color) } else { paint("not verified", Color::Red, color) };
    s.push_str(&format!("{name}: {verdict}\n"));
    s
}

fn indent(text: &str) -> String {
    text.lines().map(|l| format!("        {l}\n")).collect()
}
