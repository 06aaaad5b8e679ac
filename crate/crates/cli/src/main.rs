use clap::Parser;

fn main() {
    let cli = selfdiff_cli::Cli::parse();
    std::process::exit(selfdiff_cli::run(cli));
}
