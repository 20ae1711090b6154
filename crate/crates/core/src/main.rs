fn main() {
    std::process::exit(causal_shift::cli::run(std::env::args_os()));
}
