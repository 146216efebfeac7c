fn main() {
    std::process::exit(cutlab_cli::main_with_args(std::env::args_os().skip(1)));
}
