fn main() {
    std::process::exit(specclass::cli::main_with_args(std::env::args_os()));
}
