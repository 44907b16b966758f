fn main() {
    std::process::exit(fppb::cli::main_with_args(std::env::args_os()));
}
