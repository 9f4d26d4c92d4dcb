//! Command-line front end: `check`, `interp`, `wfs` and `pv`.
//!
//! Exit status is 0 when every check passes, 1 when some check fails, 2 on
//! unreadable or unparsable input and 3 when an internal invariant breaks.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use crate::checker::{check_file, read_header, CheckReport};
use crate::dspace::{analyze, from_pv, parse_pv, render};
use crate::fincat::{FinCat, FinCatError, Functor, GrothTotal, Library, DEFAULT_NODE_CAP, MAX_OBJECTS};
use crate::interp::{load_scenario, verify_soundness, InterpError, VerifyOptions};
use crate::parser::{parse_dtt, parse_fincat};
use crate::wfs::{alpha_iso, brute_force_lifts, elimination_problem, factor, opfib_lift, Flavor, WfsError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Human,
    /// One tab-separated line per check: check-id, subject, verdict, detail.
    Records,
}

#[derive(Debug, Parser)]
#[command(name = "dhott", version, about = "Directed type theory checker and finite-category semantics")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Run the exhaustive cross-checks as well.
    #[arg(long, global = true)]
    pub oracle: bool,
    /// Largest category, in objects, handed to an exhaustive search.
    #[arg(long, global = true, default_value_t = MAX_OBJECTS)]
    pub size_cap: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    pub format: Format,
    /// Where relative inputs are looked up when they are not found as given.
    #[arg(long, global = true, env = "DHOTT_CORPUS")]
    pub corpus: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Typecheck `.dtt` files.
    Check {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Pass when the verdict matches the file's `# expect` header.
        #[arg(long)]
        expect: bool,
    },
    /// Interpret scenarios into finite categories and verify them.
    Interp {
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
    },
    /// Factorizations, opfibration lifts and the α isomorphism for a category library,
    /// and elimination squares for scenarios.
    Wfs {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Reachable, safe and deadlocked states of PV programs.
    Pv {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Line {
    pub check: String,
    pub subject: String,
    pub pass: bool,
    pub detail: String,
}

/// Accumulated output and the worst outcome so far.
#[derive(Debug, Default)]
pub struct Report {
    pub lines: Vec<Line>,
    /// Free text shown in human format only.
    pub text: String,
    pub status: i32,
}

impl Report {
    fn push(&mut self, check: &str, subject: impl Into<String>, pass: bool, detail: impl Into<String>) {
        let line = Line {
            check: check.into(),
            subject: subject.into(),
            pass,
            detail: detail.into(),
        };
        let _ = writeln!(
            self.text,
            "  {} {} {}{}",
            line.subject,
            line.check,
            if pass { "OK" } else { "FAIL" },
            if line.detail.is_empty() { String::new() } else { format!(" {}", line.detail) }
        );
        if !pass {
            self.raise(EXIT_FAIL);
        }
        self.lines.push(line);
    }

    fn raise(&mut self, status: i32) {
        self.status = self.status.max(status);
    }

    fn input_error(&mut self, path: &Path, msg: impl std::fmt::Display) {
        let _ = writeln!(self.text, "{}: error: {msg}", path.display());
        self.lines.push(Line {
            check: "input".into(),
            subject: path.display().to_string(),
            pass: false,
            detail: msg.to_string(),
        });
        self.raise(EXIT_INPUT);
    }

    fn internal(&mut self, subject: &str, msg: impl std::fmt::Display) {
        let _ = writeln!(self.text, "  {subject} internal error: {msg}");
        self.lines.push(Line {
            check: "internal".into(),
            subject: subject.into(),
            pass: false,
            detail: msg.to_string(),
        });
        self.raise(EXIT_INTERNAL);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Human => self.text.clone(),
            Format::Records => self
                .lines
                .iter()
                .map(|l| {
                    let verdict = if l.pass { "ok" } else { "fail" };
                    format!("{}\t{}\t{}\t{}\n", l.check, l.subject, verdict, l.detail.replace(['\t', '\n'], " "))
                })
                .collect(),
        }
    }
}

impl RunConfig {
    fn resolve(&self, path: &Path) -> PathBuf {
        if path.exists() || path.is_absolute() {
            return path.to_path_buf();
        }
        match &self.corpus {
            Some(root) if root.join(path).exists() => root.join(path),
            _ => path.to_path_buf(),
        }
    }

    fn verify_options(&self) -> VerifyOptions {
        VerifyOptions {
            size_cap: self.size_cap,
            ..VerifyOptions::default()
        }
    }
}

/// Run a parsed command line.
pub fn run(config: &RunConfig) -> Report {
    let mut report = Report::default();
    if config.size_cap > MAX_OBJECTS {
        let _ = writeln!(report.text, "error: --size-cap may not exceed {MAX_OBJECTS}");
        report.raise(EXIT_INPUT);
        return report;
    }
    match &config.command {
        Command::Check { files, expect } => {
            for f in files {
                check_one(config, &config.resolve(f), *expect, &mut report);
            }
        }
        Command::Interp { scenarios } => {
            for s in scenarios {
                interp_one(config, &config.resolve(s), &mut report);
            }
        }
        Command::Wfs { inputs } => {
            for i in inputs {
                let path = config.resolve(i);
                if path.extension().is_some_and(|e| e == "scn") {
                    wfs_scenario(config, &path, &mut report);
                } else {
                    wfs_library(config, &path, &mut report);
                }
            }
        }
        Command::Pv { files } => {
            for f in files {
                pv_one(config, &config.resolve(f), &mut report);
            }
        }
    }
    report
}

fn read(path: &Path, report: &mut Report) -> Option<String> {
    match std::fs::read_to_string(path) {
        Ok(t) => Some(t),
        Err(e) => {
            report.input_error(path, e);
            None
        }
    }
}

fn check_one(_config: &RunConfig, path: &Path, expect: bool, report: &mut Report) {
    let Some(text) = read(path, report) else { return };
    let src = match parse_dtt(&text) {
        Ok(s) => s,
        Err(e) => return report.input_error(path, format!("{}:{}: {e}", e.pos.line, e.pos.col)),
    };
    let _ = writeln!(report.text, "{}", path.display());
    let checked = check_file(&src);
    if expect {
        let header = match read_header(&text) {
            Ok(h) => h,
            Err(e) => return report.input_error(path, e),
        };
        let want = header.expect.unwrap_or(crate::checker::Expectation::Ok);
        let got = checked.verdict();
        let detail = format!("expected {want}, got {got}");
        report.push("expect", path.display().to_string(), got == want, detail);
        return;
    }
    push_decls(&checked, report);
}

fn push_decls(checked: &CheckReport, report: &mut Report) {
    for rec in &checked.records {
        match &rec.outcome {
            Ok(ok) => {
                let _ = writeln!(report.text, "  {} : {} OK", rec.label, ok.ty);
                report.lines.push(Line {
                    check: "check".into(),
                    subject: rec.label.clone(),
                    pass: true,
                    detail: ok.ty.clone(),
                });
            }
            Err(e) => {
                let _ = writeln!(report.text, "  {} FAIL line {}: {e}", rec.label, rec.line);
                report.lines.push(Line {
                    check: "check".into(),
                    subject: rec.label.clone(),
                    pass: false,
                    detail: format!("line {}: {e}", rec.line),
                });
                report.raise(EXIT_FAIL);
            }
        }
    }
}

fn load(path: &Path, report: &mut Report) -> Option<crate::interp::Loaded> {
    match load_scenario(path) {
        Ok(l) => Some(l),
        Err(e) => {
            report.input_error(path, e);
            None
        }
    }
}

fn interp_error(subject: &str, e: InterpError, report: &mut Report) {
    match e {
        InterpError::Incoherent(_) => report.internal(subject, e),
        _ => report.push("interp", subject, false, e.to_string()),
    }
}

fn interp_one(config: &RunConfig, path: &Path, report: &mut Report) {
    let Some(loaded) = load(path, report) else { return };
    let _ = writeln!(report.text, "{}", path.display());
    if !loaded.report.all_ok() {
        push_decls(&loaded.report, report);
        return;
    }
    let interp = match loaded.interpreter() {
        Ok(i) => i,
        Err(e) => return interp_error(&path.display().to_string(), e, report),
    };
    for rec in verify_soundness(&interp, &loaded.source, &config.verify_options()) {
        report.push(&rec.check.to_string(), rec.subject, rec.pass, rec.detail);
    }
    elimination_squares(config, &interp, report);
}

fn elimination_squares(config: &RunConfig, interp: &crate::interp::Interpreter, report: &mut Report) {
    for (k, inst) in interp.take_elims().iter().enumerate() {
        let subject = format!("elim#{} ({:?})", k + 1, inst.side);
        let (prob, lift) = match elimination_problem(inst) {
            Ok(x) => x,
            Err(WfsError::FinCat(FinCatError::TooLarge { objects, .. })) => {
                let _ = writeln!(report.text, "  {subject} lift skipped: total category has {objects} objects");
                continue;
            }
            Err(e) => {
                report.internal(&subject, e);
                continue;
            }
        };
        match lift.verify(&prob) {
            Ok(()) => report.push("lift", subject.clone(), true, ""),
            Err(e) => report.push("lift", subject.clone(), false, e.to_string()),
        }
        if config.oracle {
            if prob.i.target.object_count() > config.size_cap || prob.p.source.object_count() > config.size_cap {
                let _ = writeln!(report.text, "  {subject} lift-oracle skipped: above the size cap");
                continue;
            }
            match brute_force_lifts(&prob, DEFAULT_NODE_CAP) {
                Ok(all) => {
                    let found = all.contains(&lift);
                    report.push("lift-oracle", subject, found, format!("{} lifts", all.len()));
                }
                Err(e) => report.push("lift-oracle", subject, false, e.to_string()),
            }
        }
    }
}

fn wfs_scenario(config: &RunConfig, path: &Path, report: &mut Report) {
    let Some(loaded) = load(path, report) else { return };
    let _ = writeln!(report.text, "{}", path.display());
    let interp = match loaded.interpreter() {
        Ok(i) => i,
        Err(e) => return interp_error(&path.display().to_string(), e, report),
    };
    // Interpreting the declarations records their eliminator instances.
    let _ = verify_soundness(&interp, &loaded.source, &VerifyOptions { pullback_samples: 0, ..config.verify_options() });
    elimination_squares(config, &interp, report);
}

fn wfs_library(config: &RunConfig, path: &Path, report: &mut Report) {
    let Some(text) = read(path, report) else { return };
    let lib = match parse_fincat(&text) {
        Ok(file) => match Library::from_file(&file) {
            Ok(l) => l,
            Err(e) => return report.input_error(path, e),
        },
        Err(e) => return report.input_error(path, format!("{}:{}: {e}", e.pos.line, e.pos.col)),
    };
    let _ = writeln!(report.text, "{}", path.display());
    let mut functors: Vec<(String, Functor)> = lib
        .categories
        .iter()
        .map(|(n, c)| (format!("id_{n}"), Functor::identity(c)))
        .collect();
    let mut named: Vec<_> = lib.functors.iter().collect();
    named.sort_by(|a, b| a.0.cmp(b.0));
    functors.extend(named.into_iter().map(|(n, f)| (n.clone(), f.clone())));
    for (name, f) in &functors {
        for flavor in [Flavor::Arrow, Flavor::Iso] {
            match factor(f, flavor).verify() {
                Ok(()) => report.push("factor", format!("{name} {flavor}"), true, ""),
                Err(e) => report.internal(name, e),
            }
        }
    }
    let mut families: Vec<_> = lib.families.iter().collect();
    families.sort_by(|a, b| a.0.cmp(b.0));
    for (name, fam) in families {
        let total = match GrothTotal::new(fam) {
            Ok(t) => t,
            Err(e) => {
                report.push("opfib-lift", name.clone(), false, e.to_string());
                continue;
            }
        };
        match opfib_lift(&total.projection) {
            Ok((prob, lift)) => {
                report.push("opfib-lift", name.clone(), true, "");
                if config.oracle && prob.i.target.object_count() <= config.size_cap {
                    match brute_force_lifts(&prob, DEFAULT_NODE_CAP) {
                        Ok(all) => report.push("lift-oracle", name.clone(), all.contains(&lift), format!("{} lifts", all.len())),
                        Err(e) => report.push("lift-oracle", name.clone(), false, e.to_string()),
                    }
                }
            }
            Err(e @ WfsError::Triangle(_)) => report.internal(name, e),
            Err(e) => report.push("opfib-lift", name.clone(), false, e.to_string()),
        }
    }
    for (name, c) in &lib.categories {
        alpha_one(name, c, report);
    }
}

fn alpha_one(name: &str, c: &Arc<FinCat>, report: &mut Report) {
    match alpha_iso(c) {
        Ok((_, r)) if r.ok() => report.push("alpha", name, true, "α ∘ 1_• = left leg"),
        Ok((_, r)) => report.internal(name, format!("α verification failed: {r:?}")),
        Err(e) => report.push("alpha", name, false, e.to_string()),
    }
}

fn pv_one(_config: &RunConfig, path: &Path, report: &mut Report) {
    let Some(text) = read(path, report) else { return };
    let prog = match parse_pv(&text) {
        Ok(p) => p,
        Err(e) => return report.input_error(path, e),
    };
    let space = match from_pv(&prog) {
        Ok(s) => s,
        Err(e) => return report.input_error(path, e),
    };
    let analysis = analyze(&space);
    let _ = writeln!(report.text, "{}", path.display());
    report.text.push_str(&render(&space, &analysis));
    let subject = path.display().to_string();
    let list = |xs: &[Vec<usize>]| {
        xs.iter()
            .map(|x| format!("({})", x.iter().map(usize::to_string).collect::<Vec<_>>().join(",")))
            .collect::<Vec<_>>()
            .join(" ")
    };
    for (check, states) in [
        ("unreachable", &analysis.unreachable),
        ("unsafe", &analysis.unsafe_states),
        ("deadlock", &analysis.deadlocks),
    ] {
        report.lines.push(Line {
            check: check.into(),
            subject: subject.clone(),
            pass: true,
            detail: list(states),
        });
    }
}

/// Entry point for the binary: parse, run, print, and return the exit status.
/// A panic inside a check is reported as an internal error.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let outcome = std::panic::catch_unwind(|| run(&config));
    match outcome {
        Ok(report) => {
            print!("{}", report.render(config.format));
            report.status
        }
        Err(_) => {
            eprintln!("internal error: a check panicked");
            EXIT_INTERNAL
        }
    }
}
