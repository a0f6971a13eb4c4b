fn main() {
    std::process::exit(circumnav::cli::main_with_args(std::env::args_os()));
}
