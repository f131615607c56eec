fn main() {
    std::process::exit(maass_universality::cli::main_with_args(std::env::args_os()));
}
