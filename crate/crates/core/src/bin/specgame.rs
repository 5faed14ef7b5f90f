fn main() {
    std::process::exit(specgame::cli::run(std::env::args_os()));
}
