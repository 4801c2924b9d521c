use clap::error::ErrorKind;
use clap::Parser;
use stripe_sim::cli::{run, Cli};

/// Exit codes: 0 success, 1 usage error, 2 runtime error.
fn main() {
    if let Ok(threads) = std::env::var("STRIPE_SIM_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("stripe-sim: ignoring invalid STRIPE_SIM_THREADS={threads}");
            }
        }
    }

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            std::process::exit(0);
        }
        Err(e) => {
            eprint!("{e}");
            std::process::exit(1);
        }
    };

    if let Err(e) = run(cli) {
        eprintln!("stripe-sim: error: {e:#}");
        std::process::exit(2);
    }
}
