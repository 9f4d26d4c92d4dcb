fn main() {
    std::process::exit(dhott::cli::main_with_args(std::env::args_os()));
}
