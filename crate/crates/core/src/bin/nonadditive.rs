fn main() {
    std::process::exit(nonadditive::cli::run(std::env::args().collect()));
}
