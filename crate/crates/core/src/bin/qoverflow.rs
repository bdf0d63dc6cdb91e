fn main() {
    std::process::exit(qoverflow::cli::run(std::env::args_os()));
}
