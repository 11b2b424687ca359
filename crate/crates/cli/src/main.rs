use clap::Parser;

fn main() {
    let cli = mhjump_cli::Cli::parse();
    std::process::exit(mhjump_cli::run(&cli));
}
