use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ARWA_LOG", "warn")).init();
    let cli = arwa::cli::Cli::parse();
    std::process::exit(arwa::cli::run(cli));
}
