fn main() {
    std::process::exit(roadmarkov_cli::main_with_args(std::env::args_os().collect()));
}
