fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RETURNCTL_LOG", "warn")).init();
    std::process::exit(returnctl::cli::run(std::env::args_os()));
}
