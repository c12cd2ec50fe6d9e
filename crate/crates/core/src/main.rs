fn main() {
    std::process::exit(circeq::cli::run(std::env::args_os()));
}
