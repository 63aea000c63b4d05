//! Running an external SMT solver on emitted scripts.

use std::io::Read as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

/// Environment variable naming the solver executable.
pub const SOLVER_ENV: &str = "SMT_SOLVER";
const FALLBACK_SOLVER: &str = "/usr/local/bin/z3";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Answer {
    Unsat,
    Sat,
    Unknown,
    Timeout,
    Error(String),
}

impl Answer {
    pub fn as_str(&self) -> &str {
        match self {
            Answer::Unsat => "unsat",
            Answer::Sat => "sat",
            Answer::Unknown => "unknown",
            Answer::Timeout => "timeout",
            Answer::Error(_) => "error",
        }
    }

    /// Whether the answer meets an expected status: `unknown` accepts any
    /// answer short of `unsat`, since solvers differ on hard goals.
    pub fn meets(&self, expected: &str) -> bool {
        match expected {
            "unknown" => !matches!(self, Answer::Unsat | Answer::Error(_)),
            e => self.as_str() == e,
        }
    }
}

/// The solver named by `SMT_SOLVER`, else a z3 installed in the usual
/// place.
pub fn solver_path() -> Option<PathBuf> {
    if let Some(p) = std::env::var_os(SOLVER_ENV).filter(|p| !p.is_empty()) {
        return Some(PathBuf::from(p));
    }
    let p = Path::new(FALLBACK_SOLVER);
    p.exists().then(|| p.to_path_buf())
}

static SCRIPT_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Runs `solver` on `script`, killing it after `timeout`.
pub fn run_solver(solver: &Path, script: &str, timeout: Duration) -> Answer {
    let n = SCRIPT_COUNTER.fetch_add(1, Ordering::Relaxed);
    let file = std::env::temp_dir().join(format!("defun-verify-{}-{n}.smt2", std::process::id()));
    if let Err(e) = std::fs::write(&file, script) {
        return Answer::Error(format!("writing {}: {e}", file.display()));
    }
    let answer = run_file(solver, &file, timeout);
    let _ = std::fs::remove_file(&file);
    answer
}

fn run_file(solver: &Path, file: &Path, timeout: Duration) -> Answer {
    let mut child = match Command::new(solver).arg(file).stdout(Stdio::piped()).stderr(Stdio::piped()).spawn() {
        Ok(c) => c,
        Err(e) => return Answer::Error(format!("starting {}: {e}", solver.display())),
    };
    let start = Instant::now();
    loop {
        match child.try_wait() {
            Ok(Some(_)) => break,
            Ok(None) if start.elapsed() >= timeout => {
                let _ = child.kill();
                let _ = child.wait();
                return Answer::Timeout;
            }
            Ok(None) => std::thread::sleep(Duration::from_millis(5)),
            Err(e) => return Answer::Error(e.to_string()),
        }
    }
    let mut out = String::new();
    if let Some(mut s) = child.stdout.take() {
        let _ = s.read_to_string(&mut out);
    }
    match out.lines().map(str::trim).find(|l| !l.is_empty()) {
        Some("unsat") => Answer::Unsat,
        Some("sat") => Answer::Sat,
        Some("unknown") => Answer::Unknown,
        Some(other) => Answer::Error(other.to_string()),
        None => {
            let mut err = String::new();
            if let Some(mut s) = child.stderr.take() {
                let _ = s.read_to_string(&mut err);
            }
            Answer::Error(format!("no answer: {}", err.trim()))
        }
    }
}
