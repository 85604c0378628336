fn main() {
    std::process::exit(indefinite_sl::cli::main_with_args(std::env::args_os()));
}
