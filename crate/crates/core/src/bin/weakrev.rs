fn main() {
    std::process::exit(weakrev::harness::cli::run(std::env::args_os()));
}
