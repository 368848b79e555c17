fn main() {
    std::process::exit(qdisk::cli::run_from(std::env::args_os()));
}
