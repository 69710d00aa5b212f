fn main() {
    std::process::exit(blaschke_forge::cli::run(std::env::args_os()));
}
