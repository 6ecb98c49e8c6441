use std::process::ExitCode;

use clap::Parser;
use ski_tail_cli::{main_with, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = std::io::stdout().lock();
    main_with(cli, &mut out)
}
