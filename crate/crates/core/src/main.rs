fn main() {
    std::process::exit(dciga::cli::main_with_args(std::env::args_os()));
}
