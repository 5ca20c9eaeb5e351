fn main() {
    std::process::exit(recapit::cli::run(std::env::args_os()));
}
