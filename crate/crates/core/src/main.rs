fn main() {
    std::process::exit(nematic_kit::cli::main_with_args(std::env::args_os()));
}
