fn main() {
    std::process::exit(hyperrank_cli::run_with_args(std::env::args_os()));
}
