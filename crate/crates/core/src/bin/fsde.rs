fn main() {
    std::process::exit(fsde::cli::main_with_args(std::env::args_os()));
}
