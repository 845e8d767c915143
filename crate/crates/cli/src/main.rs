use clap::Parser;

use adainject_cli::args::Cli;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    std::process::exit(adainject_cli::run(cli));
}
