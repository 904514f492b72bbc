fn main() {
    std::process::exit(raussendorf_purify::cli::run(std::env::args_os()));
}
