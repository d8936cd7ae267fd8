//! Frame agent for tests speaking the EVAL/QVALUES line protocol. Without
//! options every frame gets the same values; `--pixel N` makes `fire` worth
//! three times the intensity of byte N.

use std::io::{self, BufRead, Write};

use clap::Parser;
use sarfa_agents::{Reply, Request};

#[derive(Debug, Parser)]
struct Args {
    #[arg(long)]
    pixel: Option<usize>,
}

fn main() -> io::Result<()> {
    let args = Args::parse();
    let mut out = io::stdout().lock();
    for line in io::stdin().lock().lines() {
        let reply = match Request::parse(&line?) {
            Err(e) => Reply::Error(e.to_string()),
            Ok(Request::Eval(bytes)) => {
                let fire = match args.pixel {
                    None => 1.0,
                    Some(i) => match bytes.get(i) {
                        Some(b) => 3.0 * *b as f64 / 255.0,
                        None => {
                            writeln!(out, "{}", Reply::Error(format!("frame has no byte {i}")).to_line())?;
                            out.flush()?;
                            continue;
                        }
                    },
                };
                Reply::QValues(vec![("noop".into(), 0.0), ("fire".into(), fire), ("left".into(), 0.5)])
            }
        };
        writeln!(out, "{}", reply.to_line())?;
        out.flush()?;
    }
    Ok(())
}
