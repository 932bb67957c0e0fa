fn main() {
    std::process::exit(wb_core::cli::run_cli(std::env::args_os()));
}
