use clap::Parser;
use fpt_core::cli::{self, Cli};

fn main() {
    // FPT_THREADS caps the worker count; results are identical for any value.
    if let Ok(threads) = std::env::var("FPT_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
    let cli = Cli::parse();
    if let Err(e) = cli::run(cli) {
        eprintln!("{e}");
        std::process::exit(cli::exit_code(&e));
    }
}
