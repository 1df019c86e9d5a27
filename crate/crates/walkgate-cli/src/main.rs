use clap::Parser;

fn main() {
    let cli = walkgate_cli::Cli::parse();
    std::process::exit(walkgate_cli::run(cli));
}
