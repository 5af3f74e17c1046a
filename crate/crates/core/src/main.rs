fn main() {
    std::process::exit(tsmon::cli::run(std::env::args_os()));
}
