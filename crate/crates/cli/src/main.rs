use std::io::Write;

use clap::Parser;
use storm_cli::{main_with, Cli, Context};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let level = match Cli::try_parse_from(&args).map(|c| c.verbose).unwrap_or(0) {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let ctx = Context::system();
    let mut out = std::io::stdout().lock();
    let mut err = std::io::stderr().lock();
    let code = main_with(args, &ctx, &mut out, &mut err);
    let _ = out.flush();
    std::process::exit(code);
}
