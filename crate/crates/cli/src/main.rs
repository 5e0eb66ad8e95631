fn main() {
    std::process::exit(flrw_cli::main_with_args(std::env::args_os()));
}
