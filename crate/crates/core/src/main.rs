fn main() {
    std::process::exit(cpsum::cli::run(std::env::args_os()));
}
