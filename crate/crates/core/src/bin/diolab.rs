fn main() {
    std::process::exit(diolab::cli::main_with_args(std::env::args_os().collect()));
}
