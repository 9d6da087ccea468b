use clap::Parser;

fn main() {
    let cli = jointburr_cli::cli::Cli::parse();
    std::process::exit(jointburr_cli::cli::run(cli));
}
