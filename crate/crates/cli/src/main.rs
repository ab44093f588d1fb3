fn main() {
    std::process::exit(nevorder_cli::main_with_args(std::env::args_os()));
}
