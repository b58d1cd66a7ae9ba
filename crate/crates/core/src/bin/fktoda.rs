fn main() {
    std::process::exit(fktoda::cli::main_with_args(std::env::args_os()));
}
