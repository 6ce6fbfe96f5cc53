//! Reference process for the model line protocol, with deliberate failure
//! modes for conformance tests.
//!
//! `bridge-ref [--mode M] [--inputs N] [--outputs M]`
//!
//! * `rule`: linear = 2·mean(ranges) − 1, angular = 2·s − 1 where s is the
//!   second-to-last state entry;
//!   further outputs repeat 0
//! * `constant`: all outputs 0
//! * `bad-hello`: announces only the input count
//! * `malformed`: answers every request with non-numeric text
//! * `hang`: reads requests and never answers
//! * `die`: exits on the first request

use std::io::{self, BufRead, Write};

use clap::{Parser, ValueEnum};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Rule,
    Constant,
    BadHello,
    Malformed,
    Hang,
    Die,
}

#[derive(Parser, Debug)]
struct Args {
    #[arg(long, value_enum, default_value = "rule")]
    mode: Mode,
    #[arg(long, default_value_t = 183)]
    inputs: usize,
    #[arg(long, default_value_t = 2)]
    outputs: usize,
}

fn answer(state: &[f64], outputs: usize) -> Vec<f64> {
    let lidar = &state[..state.len().saturating_sub(3)];
    let mean = lidar.iter().sum::<f64>() / lidar.len().max(1) as f64;
    let sin = state.get(state.len().wrapping_sub(2)).map_or(0.0, |s| 2.0 * s - 1.0);
    let mut out = vec![(2.0 * mean - 1.0).clamp(-1.0, 1.0), sin.clamp(-1.0, 1.0)];
    out.resize(outputs, 0.0);
    out
}

fn main() -> io::Result<()> {
    let args = Args::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match args.mode {
        Mode::BadHello => writeln!(out, "HELLO {}", args.inputs)?,
        _ => writeln!(out, "HELLO {} {}", args.inputs, args.outputs)?,
    }
    out.flush()?;
    for line in io::stdin().lock().lines() {
        let line = line?;
        let reply = match args.mode {
            Mode::Die => std::process::exit(1),
            Mode::Hang => continue,
            Mode::Malformed => "not a number".to_string(),
            Mode::Constant | Mode::BadHello => vec!["0"; args.outputs].join(" "),
            Mode::Rule => {
                let state: Vec<f64> = line.split_whitespace().filter_map(|t| t.parse().ok()).collect();
                answer(&state, args.outputs).iter().map(f64::to_string).collect::<Vec<_>>().join(" ")
            }
        };
        writeln!(out, "{reply}")?;
        out.flush()?;
    }
    Ok(())
}
