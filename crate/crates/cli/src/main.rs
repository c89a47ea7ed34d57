fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter("ENDGRID_LOG")).init();
    std::process::exit(endgrid::run_from(std::env::args_os()));
}
