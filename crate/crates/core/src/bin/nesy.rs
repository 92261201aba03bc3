fn main() {
    std::process::exit(nesy_reasoning::cli::run(std::env::args_os()));
}
