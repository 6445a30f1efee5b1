fn main() {
    std::process::exit(starheat::cli::run());
}
