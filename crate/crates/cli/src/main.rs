use clap::Parser;

use optpred_cli::{init_threads, run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = init_threads().and_then(|()| run(&cli)) {
        eprintln!("{}", e.record());
        std::process::exit(e.exit_code());
    }
}
