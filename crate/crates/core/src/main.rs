fn main() {
    std::process::exit(loopwcs::cli::run());
}
