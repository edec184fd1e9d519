fn main() {
    std::process::exit(walsh_cli::main_with_args(std::env::args_os()));
}
