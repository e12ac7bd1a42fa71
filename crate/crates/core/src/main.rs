fn main() {
    std::process::exit(mvhom::cli::main_with_args(std::env::args_os()));
}
