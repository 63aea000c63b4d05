//! Command-line driver: `check`, `emit`, `run`, `equiv` and `corpus`.
//!
//! Exit status is 0 when every requested action succeeds, 1 when one
//! fails, and 2 on a usage error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::interp::value::parse_value;
use crate::interp::{equiv_check, eval_fo, eval_fo_traced, eval_ho, Value, DEFAULT_FUEL};
use crate::vcgen::{parse_expectations, run_solver, solver_path, Answer};
use crate::{compile, entry_pragma, verification_conditions, Compiled};

#[derive(Parser, Debug)]
#[command(name = "defun-verify", version, about = "Defunctionalize annotated higher-order programs into WhyML and SMT-LIB")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Whyml,
    Smt2,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse and type-check a program.
    Check { file: PathBuf },
    /// Write the defunctionalized program as WhyML, or its verification
    /// conditions as SMT-LIB2 scripts.
    Emit {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "whyml")]
        format: Format,
        #[arg(short = 'o', long = "out", default_value = ".")]
        out: PathBuf,
        /// Also run the solver from SMT_SOLVER on every script.
        #[arg(long)]
        solve: bool,
        /// Per-script solver timeout in seconds.
        #[arg(long, default_value_t = 5)]
        timeout: u64,
    },
    /// Evaluate a definition on literal arguments.
    Run {
        file: PathBuf,
        /// Defaults to the file's `(* entry: NAME *)` comment.
        #[arg(long)]
        entry: Option<String>,
        #[arg(long = "arg", allow_hyphen_values = true)]
        args: Vec<String>,
        /// Run the defunctionalized program instead of the source.
        #[arg(long)]
        target: bool,
        /// Print every call of the defunctionalized program.
        #[arg(long)]
        trace: bool,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: u64,
    },
    /// Compare source and defunctionalized program on random inputs.
    Equiv {
        file: PathBuf,
        #[arg(long)]
        entry: Option<String>,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: u64,
    },
    /// Check, emit and compare every `.mlg` program of a directory.
    Corpus {
        dir: PathBuf,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write each program's WhyML and SMT-LIB output under this directory.
        #[arg(short = 'o', long = "out")]
        out: Option<PathBuf>,
        /// Run the solver and compare with `NAME.vcexpect` sidecars.
        #[arg(long)]
        solve: bool,
        #[arg(long, default_value_t = 5)]
        timeout: u64,
        /// Print the summary as JSON.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{file}:{detail}")]
    Pipeline { file: String, detail: String },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failed(String),
}

type CResult<T> = Result<T, CliError>;

fn read(path: &Path) -> CResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })
}

fn write_file(path: &Path, text: &str) -> CResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.into(), source })?;
    }
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.into(), source })
}

fn load(path: &Path) -> CResult<(String, Compiled)> {
    let src = read(path)?;
    let c = compile(&src).map_err(|e| CliError::Pipeline { file: path.display().to_string(), detail: e.detail() })?;
    Ok((src, c))
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into())
}

fn entry_of(path: &Path, src: &str, given: Option<String>) -> CResult<String> {
    given
        .or_else(|| entry_pragma(src))
        .ok_or_else(|| CliError::Usage(format!("{}: no --entry given and no `(* entry: NAME *)` comment", path.display())))
}

fn expectations(file: &Path) -> std::collections::HashMap<String, String> {
    std::fs::read_to_string(file.with_extension("vcexpect")).map(|t| parse_expectations(&t)).unwrap_or_default()
}

/// Writes `vc_*.smt2` scripts and a `manifest.txt` listing name, file and
/// expected status (`-` when unknown) into `dir`.
fn write_smt_dir(file: &Path, c: &Compiled, dir: &Path) -> CResult<Vec<(String, String)>> {
    let vcs = verification_conditions(c)
        .map_err(|e| CliError::Pipeline { file: file.display().to_string(), detail: e.detail() })?;
    let expect = expectations(file);
    let mut manifest = String::new();
    let mut scripts = Vec::new();
    for (vc, text) in vcs {
        let name = format!("{}.smt2", vc.name);
        write_file(&dir.join(&name), &text)?;
        let status = expect.get(&vc.name).map(String::as_str).unwrap_or("-");
        manifest.push_str(&format!("{}\t{name}\t{status}\n", vc.name));
        scripts.push((vc.name, text));
    }
    write_file(&dir.join("manifest.txt"), &manifest)?;
    Ok(scripts)
}

/// Runs the solver on each script; returns the number of answers that
/// miss their expectation (`unsat` by default).
fn solve(
    file: &Path,
    scripts: &[(String, String)],
    timeout: Duration,
    out: &mut dyn Write,
) -> CResult<usize> {
    let solver = solver_path().ok_or_else(|| CliError::Usage("no solver: set SMT_SOLVER".into()))?;
    let expect = expectations(file);
    let mut misses = 0;
    for (name, text) in scripts {
        let want = expect.get(name).map(String::as_str).unwrap_or("unsat");
        let got = run_solver(&solver, text, timeout);
        let ok = got.meets(want);
        misses += usize::from(!ok);
        let detail = match &got {
            Answer::Error(e) => format!(" ({e})"),
            _ => String::new(),
        };
        let _ = writeln!(
            out,
            "{}/{name}: {}{detail} (expected {want}){}",
            stem(file),
            got.as_str(),
            if ok { "" } else { "  MISMATCH" }
        );
    }
    Ok(misses)
}

fn cmd_check(file: &Path, out: &mut dyn Write) -> CResult<()> {
    let src = read(file)?;
    let tp = crate::check_source(&src)
        .map_err(|e| CliError::Pipeline { file: file.display().to_string(), detail: e.detail() })?;
    let _ = writeln!(out, "{}: ok ({} definitions)", file.display(), tp.program.defs().count());
    Ok(())
}

fn cmd_emit(file: &Path, format: Format, dir: &Path, solve_too: bool, timeout: u64, out: &mut dyn Write) -> CResult<()> {
    let (_, c) = load(file)?;
    match format {
        Format::Whyml => {
            let path = dir.join(format!("{}.mlw", stem(file)));
            write_file(&path, &crate::emit::emit_whyml(&c.target))?;
            let _ = writeln!(out, "wrote {}", path.display());
        }
        Format::Smt2 => {
            let scripts = write_smt_dir(file, &c, dir)?;
            let _ = writeln!(out, "wrote {} scripts to {}", scripts.len(), dir.display());
            if solve_too {
                let misses = solve(file, &scripts, Duration::from_secs(timeout), out)?;
                if misses > 0 {
                    return Err(CliError::Failed(format!("{misses} solver answer(s) differ from expectations")));
                }
            }
        }
    }
    Ok(())
}

fn cmd_run(
    file: &Path,
    entry: Option<String>,
    args: &[String],
    target: bool,
    trace: bool,
    fuel: u64,
    out: &mut dyn Write,
) -> CResult<()> {
    if trace && !target {
        return Err(CliError::Usage("--trace requires --target".into()));
    }
    let (src, c) = load(file)?;
    let entry = entry_of(file, &src, entry)?;
    let values = args
        .iter()
        .map(|a| parse_value(a).map_err(|e| CliError::Usage(format!("--arg {a}: {e}"))))
        .collect::<CResult<Vec<Value>>>()?;
    let result = if trace {
        let (r, lines) = eval_fo_traced(&c.target, &entry, &values, fuel);
        for l in lines {
            let _ = writeln!(out, "{l}");
        }
        r
    } else if target {
        eval_fo(&c.target, &entry, &values, fuel)
    } else {
        eval_ho(&c.typed, &entry, &values, fuel)
    };
    match result {
        Ok(v) => {
            let _ = writeln!(out, "{v}");
            Ok(())
        }
        Err(e) => Err(CliError::Failed(format!("{}: {e}", file.display()))),
    }
}

fn cmd_equiv(file: &Path, entry: Option<String>, trials: u64, seed: u64, fuel: u64, out: &mut dyn Write) -> CResult<()> {
    let (src, c) = load(file)?;
    let entry = entry_of(file, &src, entry)?;
    let r = equiv_check(&c, &entry, seed, trials, fuel).map_err(|e| CliError::Failed(format!("{}: {e}", file.display())))?;
    let _ = writeln!(
        out,
        "{entry}: {} trials, {} agreed, {} inconclusive, {} filtered; postconditions checked on {}, failed on {}",
        r.trials, r.agreed, r.inconclusive, r.filtered, r.ensures_checked, r.ensures_failed
    );
    if let Some(cx) = &r.counterexample {
        return Err(CliError::Failed(format!("mismatch: {cx}")));
    }
    if r.ensures_failed > 0 {
        return Err(CliError::Failed(format!("{} trial(s) violate a postcondition of `{entry}`", r.ensures_failed)));
    }
    Ok(())
}

#[derive(Debug, Default, Serialize)]
pub struct CorpusRow {
    pub program: String,
    pub entry: String,
    pub check: bool,
    pub families: usize,
    pub vcs: usize,
    /// Solver answers differing from the sidecar; `None` when not solved.
    pub solver_misses: Option<usize>,
    pub equiv: bool,
    pub millis: u128,
    pub error: Option<String>,
}

impl CorpusRow {
    pub fn ok(&self) -> bool {
        self.check && self.equiv && self.error.is_none() && self.solver_misses.unwrap_or(0) == 0
    }
}

struct CorpusOpts {
    trials: u64,
    seed: u64,
    out: Option<PathBuf>,
    solve: bool,
    timeout: u64,
}

fn corpus_row(file: &Path, o: &CorpusOpts, log: &mut dyn Write) -> CorpusRow {
    let start = Instant::now();
    let mut row = CorpusRow { program: stem(file), ..Default::default() };
    let result = (|| -> CResult<()> {
        let (src, c) = load(file)?;
        row.check = true;
        row.entry = entry_of(file, &src, None)?;
        row.families = c.target.families.len();
        let whyml = crate::emit::emit_whyml(&c.target);
        let scripts = match &o.out {
            Some(dir) => {
                write_file(&dir.join(format!("{}.mlw", row.program)), &whyml)?;
                write_smt_dir(file, &c, &dir.join(&row.program))?
            }
            None => verification_conditions(&c)
                .map_err(|e| CliError::Pipeline { file: file.display().to_string(), detail: e.detail() })?
                .into_iter()
                .map(|(vc, s)| (vc.name, s))
                .collect(),
        };
        row.vcs = scripts.len();
        let r = equiv_check(&c, &row.entry, o.seed, o.trials, DEFAULT_FUEL)
            .map_err(|e| CliError::Failed(e.to_string()))?;
        row.equiv = r.passed();
        if let Some(cx) = r.counterexample {
            row.error = Some(format!("mismatch: {cx}"));
        }
        if o.solve {
            row.solver_misses = Some(solve(file, &scripts, Duration::from_secs(o.timeout), log)?);
        }
        Ok(())
    })();
    if let Err(e) = result {
        row.error = Some(e.to_string());
    }
    row.millis = start.elapsed().as_millis();
    row
}

fn cmd_corpus(dir: &Path, o: CorpusOpts, json: bool, out: &mut dyn Write) -> CResult<()> {
    let entries = std::fs::read_dir(dir).map_err(|source| CliError::Io { path: dir.into(), source })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "mlg"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::Usage(format!("{}: no .mlg files", dir.display())));
    }
    let mut log = Vec::new();
    let rows: Vec<CorpusRow> = files.iter().map(|f| corpus_row(f, &o, &mut log)).collect();
    if json {
        let _ = writeln!(out, "{}", serde_json::to_string_pretty(&rows).expect("rows serialize"));
    } else {
        let _ = out.write_all(&log);
        let _ = writeln!(out, "{:<12} {:<18} {:<6} {:>8} {:>4} {:<7} {:<6} {:>8}", "program", "entry", "check", "families", "vcs", "solver", "equiv", "ms");
        for r in &rows {
            let solver = match r.solver_misses {
                None => "-".to_string(),
                Some(0) => "ok".to_string(),
                Some(n) => format!("{n} off"),
            };
            let _ = writeln!(
                out,
                "{:<12} {:<18} {:<6} {:>8} {:>4} {:<7} {:<6} {:>8}",
                r.program,
                r.entry,
                if r.check { "ok" } else { "FAIL" },
                r.families,
                r.vcs,
                solver,
                if r.equiv { "ok" } else { "FAIL" },
                r.millis
            );
            if let Some(e) = &r.error {
                let _ = writeln!(out, "  {e}");
            }
        }
    }
    let failed = rows.iter().filter(|r| !r.ok()).count();
    if failed > 0 {
        return Err(CliError::Failed(format!("{failed} of {} programs failed", rows.len())));
    }
    Ok(())
}

/// Runs the command line `args` (program name first), writing normal output
/// to `out` and diagnostics to `err`; returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Check { file } => cmd_check(&file, out),
        Command::Emit { file, format, out: dir, solve, timeout } => cmd_emit(&file, format, &dir, solve, timeout, out),
        Command::Run { file, entry, args, target, trace, fuel } => cmd_run(&file, entry, &args, target, trace, fuel, out),
        Command::Equiv { file, entry, trials, seed, fuel } => cmd_equiv(&file, entry, trials, seed, fuel, out),
        Command::Corpus { dir, trials, seed, out: dest, solve, timeout, json } => {
            cmd_corpus(&dir, CorpusOpts { trials, seed, out: dest, solve, timeout }, json, out)
        }
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                CliError::Usage(_) => 2,
                _ => 1,
            }
        }
    }
}
