//! The `refinery` command line.

use std::ffi::OsString;
use std::fs;
use std::io::{self, IsTerminal, Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use refinery_core::enumerate::{enumerate_refined, term_pool};
use refinery_core::error::Loc;

use crate::ast::Style;
use crate::elab::{load, Directive, ElabError, Mode, Module, RefineOpts, Refinement};
use crate::emit::emit;
use crate::lemmas::{check_lemmas, shapes};
use crate::run::verify;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "refinery",
    version,
    about = "Derives refined inductive types from algebras"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Refine a type by an algebra and print the result.
    Refine {
        #[command(flatten)]
        target: Target,
        /// Output style: agda-like or internal.
        #[arg(long, default_value = "agda-like", value_parser = parse_style)]
        emit: Style,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a refinement against its algebra on all terms up to a size.
    Verify {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value_t = 5)]
        bound: usize,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Also write one tab-separated record per index class here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run the randomized lemma checks on finite families.
    CheckLemmas {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Check the plain types of this file too.
        #[arg(long)]
        spec: Option<String>,
    },
    /// List the terms of a type, or of a refinement with their indices.
    Enumerate {
        #[arg(long)]
        spec: String,
        #[arg(long = "type")]
        ty: String,
        #[arg(long, default_value_t = 3)]
        bound: usize,
    },
    /// Execute the verify and emit directives of a file.
    Run {
        #[arg(long)]
        spec: String,
        #[arg(long, default_value_t = 5)]
        bound: usize,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
}

#[derive(Args, Debug)]
struct Target {
    /// The .rfn file, or `-` for stdin.
    #[arg(long)]
    spec: String,
    #[arg(long = "type")]
    ty: String,
    #[arg(long)]
    algebra: String,
    /// The algebra is partial.
    #[arg(long, conflicts_with_all = ["zygo", "mode"])]
    partial: bool,
    /// The algebra is a zygomorphism; optionally replace its helpers,
    /// as `alg` or `name=alg,name=alg`.
    #[arg(long, num_args = 0..=1, default_missing_value = "", conflicts_with = "mode")]
    zygo: Option<String>,
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,
    /// Name of the refined type.
    #[arg(long)]
    name: Option<String>,
}

fn parse_style(s: &str) -> Result<Style, String> {
    Style::parse(s).ok_or_else(|| format!("unknown style {s}; use agda-like or internal"))
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    match s {
        "total" => Ok(Mode::Total),
        "partial" => Ok(Mode::Partial),
        "zygo" => Ok(Mode::Zygo),
        _ => Err(format!("unknown mode {s}; use total, partial or zygo")),
    }
}

#[derive(Clone, Copy)]
struct Paint(bool);

impl Paint {
    fn from_env(stream_is_tty: bool) -> Paint {
        match std::env::var("REFINERY_COLOR").as_deref() {
            Ok("always") => Paint(true),
            Ok("never") => Paint(false),
            _ => Paint(stream_is_tty),
        }
    }

    fn red(self, s: &str) -> String {
        self.wrap("31;1", s)
    }

    fn green(self, s: &str) -> String {
        self.wrap("32;1", s)
    }

    fn wrap(self, code: &str, s: &str) -> String {
        if self.0 {
            format!("\x1b[{code}m{s}\x1b[0m")
        } else {
            s.to_string()
        }
    }
}

/// A failure to report; the code is the exit status.
struct Failure {
    code: i32,
    text: String,
}

impl Failure {
    fn usage(text: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            text: text.into(),
        }
    }
}

struct Source {
    name: String,
    text: String,
}

impl Source {
    fn read(path: &str) -> Result<Source, Failure> {
        let text = if path == "-" {
            let mut s = String::new();
            io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| Failure::usage(format!("cannot read stdin: {e}")))?;
            s
        } else {
            fs::read_to_string(path)
                .map_err(|e| Failure::usage(format!("cannot read {path}: {e}")))?
        };
        Ok(Source {
            name: if path == "-" {
                "<stdin>".into()
            } else {
                path.into()
            },
            text,
        })
    }

    fn load(&self, paint: Paint) -> Result<Module, Failure> {
        load(&self.text).map_err(|e| Failure::usage(self.render(&e, paint)))
    }

    /// The error with the offending line and a caret under its column.
    fn render(&self, e: &ElabError, paint: Paint) -> String {
        let mut s = format!(
            "{}: {}:{}:{}: {}: {}",
            paint.red("error"),
            self.name,
            e.line,
            e.col,
            e.kind,
            e.message
        );
        if let Some(line) = self.text.lines().nth(e.line.saturating_sub(1) as usize) {
            let pad: String = line
                .chars()
                .take(e.col.saturating_sub(1) as usize)
                .map(|c| if c == '\t' { '\t' } else { ' ' })
                .collect();
            s.push_str(&format!("\n  | {line}\n  | {pad}^"));
        }
        s
    }

    /// An error about the command line flags rather than the file.
    fn render_flags(&self, e: &ElabError, paint: Paint) -> String {
        format!(
            "{}: {}: {}: {}",
            paint.red("error"),
            self.name,
            e.kind,
            e.message
        )
    }
}

fn refinement(m: &Module, t: &Target) -> Result<Refinement, ElabError> {
    let helpers = match t.zygo.as_deref() {
        None | Some("") => None,
        Some(spec) => Some(
            spec.split(',')
                .map(|h| match h.split_once('=') {
                    Some((n, a)) => (n.trim().to_string(), a.trim().to_string()),
                    None => ("forget".to_string(), h.trim().to_string()),
                })
                .collect(),
        ),
    };
    let mode = if t.partial {
        Some(Mode::Partial)
    } else if t.zygo.is_some() {
        Some(Mode::Zygo)
    } else {
        t.mode
    };
    let opts = RefineOpts {
        mode,
        helpers,
        name: t.name.clone(),
    };
    m.refine(&t.ty, &t.algebra, &opts, Loc::new(1, 1))
}

fn write_out(path: &Option<PathBuf>, text: &str, out: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| Failure::usage(format!("cannot write {}: {e}", p.display()))),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Failure::usage(format!("cannot write output: {e}"))),
    }
}

/// Runs the command line `args` (without the program name) and returns
/// the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv = std::iter::once(OsString::from("refinery")).chain(args.into_iter().map(Into::into));
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if code == EXIT_OK {
                write!(out, "{e}")
            } else {
                write!(err, "{e}")
            };
            return code;
        }
    };
    let paint = Paint::from_env(io::stderr().is_terminal());
    match dispatch(cli.cmd, out, paint) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "{}", f.text);
            f.code
        }
    }
}

fn dispatch(cmd: Cmd, out: &mut dyn Write, paint: Paint) -> Result<i32, Failure> {
    let status = |pass: bool| if pass { EXIT_OK } else { EXIT_FAIL };
    match cmd {
        Cmd::Refine {
            target,
            emit: style,
            out: path,
        } => {
            let src = Source::read(&target.spec)?;
            let m = src.load(paint)?;
            let r =
                refinement(&m, &target).map_err(|e| Failure::usage(src.render_flags(&e, paint)))?;
            write_out(&path, &emit(&m, &r, style), out)?;
            Ok(EXIT_OK)
        }
        Cmd::Verify {
            target,
            bound,
            workers,
            report,
        } => {
            let src = Source::read(&target.spec)?;
            let m = src.load(paint)?;
            let r =
                refinement(&m, &target).map_err(|e| Failure::usage(src.render_flags(&e, paint)))?;
            let rep = verify(&r, bound, workers)
                .map_err(|e| Failure::usage(format!("{}: {e}", paint.red("error"))))?;
            writeln!(out, "{} = {} by {}", r.name, target.ty, target.algebra).ok();
            writeln!(out, "{rep}").ok();
            if let Some(p) = report {
                fs::write(&p, rep.records())
                    .map_err(|e| Failure::usage(format!("cannot write {}: {e}", p.display())))?;
            }
            Ok(status(rep.pass()))
        }
        Cmd::CheckLemmas { seed, trials, spec } => {
            let mut codes = shapes();
            if let Some(path) = spec {
                let src = Source::read(&path)?;
                let m = src.load(paint)?;
                codes.extend(
                    m.codes
                        .iter()
                        .filter(|c| !m.refinements.iter().any(|r| r.name == c.name))
                        .cloned(),
                );
            }
            let rep = check_lemmas(&codes, seed, trials);
            writeln!(out, "{rep}").ok();
            Ok(status(rep.pass()))
        }
        Cmd::Enumerate { spec, ty, bound } => {
            let src = Source::read(&spec)?;
            let m = src.load(paint)?;
            let fail = |e: refinery_core::error::Error| {
                Failure::usage(format!("{}: {e}", paint.red("error")))
            };
            if let Some(r) = m.refinement(&ty) {
                let pool = enumerate_refined(&r.data.code, &r.forget, bound).map_err(fail)?;
                for t in pool.iter() {
                    writeln!(out, "{}\t{}\t{}", t.size(), t.ann.index, t.strip()).ok();
                }
            } else {
                let code = m.code(&ty).ok_or_else(|| {
                    Failure::usage(format!("{}: unknown type {ty}", paint.red("error")))
                })?;
                for t in term_pool(code, bound).map_err(fail)?.iter() {
                    writeln!(out, "{}\t{t}", t.size()).ok();
                }
            }
            Ok(EXIT_OK)
        }
        Cmd::Run {
            spec,
            bound,
            workers,
        } => {
            let src = Source::read(&spec)?;
            let m = src.load(paint)?;
            let mut pass = true;
            for d in &m.directives {
                match d {
                    Directive::Verify { name, bound: b, .. } => {
                        let r = m.refinement(name).expect("checked by elaboration");
                        let rep = verify(r, b.unwrap_or(bound), workers).map_err(|e| {
                            Failure::usage(format!("{}: {name}: {e}", paint.red("error")))
                        })?;
                        let verdict = if rep.pass() {
                            paint.green("pass")
                        } else {
                            paint.red("FAIL")
                        };
                        writeln!(out, "verify {name}: {verdict}\n{rep}\n").ok();
                        pass &= rep.pass();
                    }
                    Directive::Emit { name, style, .. } => {
                        let r = m.refinement(name).expect("checked by elaboration");
                        writeln!(out, "{}", emit(&m, r, *style)).ok();
                    }
                }
            }
            Ok(status(pass))
        }
    }
}
