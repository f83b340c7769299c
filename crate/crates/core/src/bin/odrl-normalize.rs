fn main() {
    std::process::exit(odrl_normalize::cli::run());
}
