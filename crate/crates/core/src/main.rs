fn main() {
    std::process::exit(specdec::cli::run(std::env::args_os()));
}
