fn main() {
    std::process::exit(fractrans::cli::main_with(std::env::args_os(), std::env::vars()));
}
