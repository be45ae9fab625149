use clap::Parser;
use horotomo::cli::{init_threads, run, Cli};

fn main() {
    init_threads();
    std::process::exit(run(Cli::parse()));
}
