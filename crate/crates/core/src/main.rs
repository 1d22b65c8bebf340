fn main() {
    std::process::exit(corrmap::cli::main_with_args(std::env::args_os()));
}
