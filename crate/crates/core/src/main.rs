use std::process::ExitCode;

use clap::Parser;

use channelspin::cli::{self, Cli};

fn configure_threads() {
    let Ok(raw) = std::env::var("CHANNELSPIN_THREADS") else {
        return;
    };
    match raw.trim().parse::<usize>() {
        // 0 leaves rayon's default
        Ok(0) => {}
        Ok(n) => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                log::warn!("could not size thread pool: {e}");
            }
        }
        Err(_) => log::warn!("ignoring CHANNELSPIN_THREADS={raw:?}"),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Cli::parse();
    configure_threads();
    match cli::run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
