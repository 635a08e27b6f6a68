fn main() {
    std::process::exit(inflab::cli::run(std::env::args_os()));
}
