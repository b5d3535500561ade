fn main() {
    std::process::exit(atsnc::cli::main_with_args(std::env::args_os()));
}
