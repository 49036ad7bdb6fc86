fn main() {
    std::process::exit(subderiv::bench::cli::run_cli(std::env::args_os()));
}
