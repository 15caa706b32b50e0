fn main() {
    std::process::exit(wordgroup::cli::run(std::env::args_os()));
}
