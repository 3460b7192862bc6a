use clap::Parser;

fn main() {
    let cli = mca::cli::Cli::parse();
    std::process::exit(mca::cli::run(cli));
}
