use clap::Parser;
use tvroute_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli.command) {
        eprintln!("{}", e.to_json());
        std::process::exit(e.exit_code());
    }
}
