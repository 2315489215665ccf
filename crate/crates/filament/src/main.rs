use clap::Parser;
use filament::Cli;

fn main() {
    let cli = Cli::parse();
    if let Err(e) = filament::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
