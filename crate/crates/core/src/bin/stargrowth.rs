fn main() {
    std::process::exit(stargrowth::cli::run(std::env::args_os()));
}
