fn main() {
    std::process::exit(lvsim::cli::run(std::env::args_os()));
}
