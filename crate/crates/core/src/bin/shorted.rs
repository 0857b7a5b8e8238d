fn main() {
    std::process::exit(shorted_ops::cli::main_with_args(std::env::args_os()));
}
