fn main() {
    std::process::exit(mpnls_cli::run_command(std::env::args_os()));
}
