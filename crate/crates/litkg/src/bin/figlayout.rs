//! `figlayout <in.json> [-o out.json]`: aligns figure panels with their
//! subcaptions and writes the resulting subfigure records.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Parser;
use litkg_core::figure::{process_layout, Layout};

#[derive(Debug, Parser)]
#[command(name = "figlayout", version, about = "Figure panel and subcaption alignment")]
struct Args {
    input: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn main() -> Result<()> {
    let args = Args::parse();
    let bytes = std::fs::read(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let layout = Layout::parse(&bytes)?;
    let alignment = process_layout(&layout, None)?;
    for (letter, text) in &alignment.leftovers {
        eprintln!("unmatched caption part ({letter}): {text}");
    }
    let mut json = serde_json::to_string_pretty(&alignment.subfigures)?;
    json.push('\n');
    match args.output {
        Some(p) => std::fs::write(&p, json).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{json}"),
    }
    Ok(())
}
