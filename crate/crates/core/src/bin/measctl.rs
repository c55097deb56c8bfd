fn main() {
    std::process::exit(measure_control::experiments::run_cli(std::env::args_os()));
}
