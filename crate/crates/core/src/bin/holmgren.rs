fn main() {
    std::process::exit(holmgren_core::cli::main_with_args(std::env::args_os()));
}
