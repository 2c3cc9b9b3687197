fn main() {
    std::process::exit(lcsm::cli::main_with_args(std::env::args_os()));
}
