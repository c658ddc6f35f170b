fn main() {
    std::process::exit(isneak_cli::main_with(std::env::args_os()));
}
