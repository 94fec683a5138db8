fn main() {
    std::process::exit(qpdx::cli::run(std::env::args_os()));
}
