fn main() {
    std::process::exit(lmnpt::cli::run_cli(std::env::args_os()));
}
