fn main() {
    std::process::exit(dynbound::cli::main_with_args(std::env::args_os()));
}
