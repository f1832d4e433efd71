fn main() {
    std::process::exit(cvtel::cli::run_from_env());
}
