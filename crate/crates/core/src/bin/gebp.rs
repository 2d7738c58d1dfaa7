fn main() {
    std::process::exit(gebp::harness::cli::run(std::env::args_os()));
}
