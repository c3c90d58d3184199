use clap::Parser;

fn main() {
    let cli = kscal::cli::Cli::parse();
    std::process::exit(kscal::cli::run(cli));
}
