fn main() {
    std::process::exit(gbtmark::cli::main_with(std::env::args_os()));
}
