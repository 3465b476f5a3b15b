fn main() {
    std::process::exit(qrs::cli::run(std::env::args_os()));
}
