use clap::Parser;

use qesa_core::cli::{run, Cli};

fn main() {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    if let Err(err) = run(cli, argv) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
