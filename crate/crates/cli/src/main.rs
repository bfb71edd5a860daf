use clap::Parser;

fn main() {
    let cli = merton_cli::Cli::parse();
    std::process::exit(merton_cli::run(&cli));
}
