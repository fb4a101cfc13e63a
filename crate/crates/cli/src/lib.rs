//! Library half of the `gpt-lab` command-line tool: argument handling,
//! JSON documents, reports and their verification.

pub mod args;
pub mod codec;
pub mod commands;
mod error;
pub mod report;
pub mod specs;
pub mod verify;

use std::io::Write;
use std::time::Instant;

use clap::Parser;
use gptlab_core::geometry::with_eps;
use gptlab_core::{Flt, Rat, Scalar, ScalarMode};
use serde_json::Value;

use args::{Cli, Command};
use commands::{Ctx, TeleportMode};
pub use error::{CliError, CliResult};

/// Arguments worth echoing in a report: everything except where the output
/// goes and whether timing is recorded.
fn command_echo(argv: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut skip = false;
    for a in argv {
        if std::mem::take(&mut skip) {
            continue;
        }
        match a.as_str() {
            "--out" | "--csv" => skip = true,
            "--timing" => {}
            s if s.starts_with("--out=") || s.starts_with("--csv=") => {}
            s => out.push(s.to_string()),
        }
    }
    out
}

/// Runs the tool on `argv` (without the program name), writing documents to
/// `out` and diagnostics to `err`. Returns the exit code.
pub fn run(argv: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(std::iter::once("gpt-lab".to_string()).chain(argv.iter().cloned())) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(&cli, argv, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli, argv: &[String], out: &mut dyn Write, err: &mut dyn Write) -> CliResult<i32> {
    let mode: ScalarMode = cli.scalar.into();
    if let Command::Verify { file } = &cli.command {
        let text = std::fs::read_to_string(file).map_err(|e| CliError::io(file.display().to_string(), e))?;
        let doc = codec::parse_document(&text)?;
        let lines = verify::verify_document(&doc, &cli.eps)?;
        let mut summary = String::new();
        for l in &lines {
            summary.push_str(&l.render());
            summary.push('\n');
        }
        emit(cli, &summary, out)?;
        return match lines.iter().find_map(|l| l.failure.clone()) {
            Some(why) => Err(CliError::Verification(why)),
            None => Ok(0),
        };
    }
    if cli.eps.len() > 1 {
        return Err(CliError::Usage("--eps may be repeated only for `verify`".into()));
    }
    let eps = cli.eps.first().copied();
    if eps.is_some() && mode == ScalarMode::Exact {
        return Err(CliError::Usage("--eps applies to --scalar float only".into()));
    }
    let ctx = Ctx {
        command: command_echo(argv),
        seed: cli.seed,
        budget: cli.budget,
        eps,
    };
    let start = Instant::now();
    let body = || match mode {
        ScalarMode::Exact => execute::<Rat>(cli, &ctx),
        ScalarMode::Float => execute::<Flt>(cli, &ctx),
    };
    let (mut doc, csv) = match eps {
        Some(e) => with_eps(e, body)??,
        None => body()?,
    };
    if cli.timing && doc.get("kind").and_then(Value::as_str) == Some("report") {
        doc["timing_ms"] = serde_json::json!(start.elapsed().as_millis() as u64);
    }
    if let Some((dest, text)) = csv {
        if dest.as_os_str() == "-" {
            if cli.out.is_none() {
                return Err(CliError::Usage("--csv - needs --out for the report".into()));
            }
            out.write_all(text.as_bytes()).map_err(|e| CliError::io("stdout", e))?;
        } else {
            commands::write_text(&dest, &text)?;
        }
    }
    emit(cli, &codec::render(&doc), out)?;
    let verdict = doc.get("verdict").and_then(Value::as_str).unwrap_or("");
    if verdict == "failed" {
        let _ = writeln!(err, "error: protocol verification failed");
        return Ok(1);
    }
    Ok(0)
}

fn emit(cli: &Cli, text: &str, out: &mut dyn Write) -> CliResult<()> {
    match &cli.out {
        Some(path) => commands::write_text(path, text),
        None => out.write_all(text.as_bytes()).map_err(|e| CliError::io("stdout", e)),
    }
}

type Produced = (Value, Option<(std::path::PathBuf, String)>);

fn execute<S: Scalar>(cli: &Cli, ctx: &Ctx) -> CliResult<Produced> {
    let report = match &cli.command {
        Command::Space { kind, param, dual } => {
            return Ok((commands::cmd_space::<S>(kind, param.as_deref(), *dual)?, None))
        }
        Command::Tensor {
            a,
            b,
            kind,
            entanglement,
        } => commands::cmd_tensor::<S>(ctx, a, b, *kind, *entanglement)?,
        Command::Distinguish { space, states } => commands::cmd_distinguish::<S>(ctx, space, states)?,
        Command::Broadcast { space, states, extra } => commands::cmd_broadcast::<S>(ctx, space, states, extra)?,
        Command::Nondisturb { space, map } => commands::cmd_nondisturb::<S>(ctx, space, map.as_deref())?,
        Command::Bitcommit {
            space,
            n,
            runs,
            subsystems,
            hiding,
            csv,
        } => {
            let r = commands::cmd_bitcommit::<S>(ctx, space, n, *runs, *subsystems, *hiding)?;
            let csv = match csv {
                Some(dest) => Some((dest.clone(), commands::binding_csv(&r)?)),
                None => None,
            };
            return Ok((r.to_document(), csv));
        }
        Command::Teleport {
            space,
            group,
            conclusive,
            necessity,
        } => {
            let mode = match (group, conclusive, necessity) {
                (Some(g), _, _) => TeleportMode::Group(g),
                (None, true, _) => TeleportMode::Conclusive,
                (None, false, true) => TeleportMode::Necessity,
                _ => {
                    return Err(CliError::Usage(
                        "teleport needs --group, --conclusive or --necessity".into(),
                    ))
                }
            };
            commands::cmd_teleport::<S>(ctx, space, mode)?
        }
        Command::Verify { .. } => unreachable!("handled before dispatch"),
    };
    Ok((report.to_document(), None))
}

/// Convenience for tests and embedding: runs and captures both streams.
pub fn run_captured(argv: &[&str]) -> (i32, String, String) {
    let argv: Vec<String> = argv.iter().map(|s| s.to_string()).collect();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(&argv, &mut out, &mut err);
    (
        code,
        String::from_utf8_lossy(&out).into_owned(),
        String::from_utf8_lossy(&err).into_owned(),
    )
}
