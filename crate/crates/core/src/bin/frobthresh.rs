fn main() {
    std::process::exit(frobthresh::cli::main_with_args(std::env::args_os()));
}
