fn main() {
    std::process::exit(brentlab::cli::main_with(std::env::args_os()));
}
