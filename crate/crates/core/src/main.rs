fn main() {
    std::process::exit(capmodel::cli::main_with_args(std::env::args_os()));
}
