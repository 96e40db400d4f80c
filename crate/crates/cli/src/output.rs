use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use dicore::experiment::Report;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Record wall-clock time in the JSON envelope. Off by default so that
    /// repeated runs produce identical files.
    #[arg(long)]
    pub timing: bool,
}

/// Where results go, plus the clock started when the command began.
pub struct Sink {
    args: OutputArgs,
    started: Instant,
}

impl Sink {
    pub fn new(args: OutputArgs) -> Self {
        Self { args, started: Instant::now() }
    }

    pub fn format(&self) -> Format {
        self.args.format
    }

    fn open(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.args.out {
            Some(path) => Box::new(BufWriter::new(
                File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
            )),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }

    /// Writes `f`'s output to the destination and flushes it.
    pub fn raw(&self, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
        let mut w = self.open()?;
        f(&mut w).context("write failed")?;
        w.flush().context("write failed")
    }

    pub fn json<C: Serialize, R: Serialize>(&self, config: C, results: R) -> Result<()> {
        let mut report = Report::new(config, results);
        if self.args.timing {
            report.elapsed_seconds = Some(self.started.elapsed().as_secs_f64());
        }
        self.raw(|w| {
            serde_json::to_writer_pretty(&mut *w, &report)?;
            writeln!(w)
        })
    }

    /// A header row followed by data rows.
    pub fn csv(&self, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
        self.raw(|w| {
            let mut out = csv::Writer::from_writer(w);
            out.write_record(header)?;
            for row in rows {
                out.write_record(&row)?;
            }
            out.flush()
        })
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}
