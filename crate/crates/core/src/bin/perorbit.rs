fn main() {
    std::process::exit(perorbit::cli::main_with_args(std::env::args_os()));
}
