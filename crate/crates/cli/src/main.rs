mod commands;
mod config;

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use heegner_lab::Error;
use serde_json::json;

use crate::commands::{dispatch, Report};
use crate::config::{resolve, Cli, Format, RunConfig, SCHEMA_VERSION};

const EXIT_VIOLATION: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn render(cfg: &RunConfig, report: &Report, format: Format) -> String {
    match format {
        Format::Json => {
            // serde_json maps are ordered, so keys come out sorted
            let doc = json!({
                "schema_version": SCHEMA_VERSION,
                "config": cfg,
                "ok": report.ok,
                "result": report.result,
            });
            let mut s = serde_json::to_string_pretty(&doc).expect("json");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&report.table.header).expect("in-memory write");
            for row in &report.table.rows {
                w.write_record(row).expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Certificate(_) | Error::Io(_) => EXIT_VIOLATION,
        Error::InvalidInput(_) | Error::Hypothesis(_) | Error::BoundExceeded(_) | Error::Parse(_) => EXIT_USAGE,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let (cfg, output) = match resolve(cli) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if let Some(w) = output.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("error: worker pool: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let report = match dispatch(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code_for(&e));
        }
    };
    let to_stdout = output.out.as_deref() == Some(Path::new("-"));
    for line in &report.summary {
        if to_stdout {
            eprintln!("{line}");
        } else {
            println!("{line}");
        }
    }
    if let Some(path) = &output.out {
        let text = render(&cfg, &report, output.format);
        let written = if to_stdout {
            std::io::stdout().write_all(text.as_bytes())
        } else {
            std::fs::write(path, text)
        };
        if let Err(e) = written {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(EXIT_VIOLATION);
        }
    }
    if report.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VIOLATION)
    }
}
