fn main() {
    std::process::exit(volentropy::cli::run(std::env::args_os()));
}
