fn main() {
    std::process::exit(cls::cli::run(std::env::args_os()));
}
