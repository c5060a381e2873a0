use clap::Parser;

fn main() {
    let args = udemd::cli::Cli::parse();
    std::process::exit(udemd::cli::main_with(args));
}
