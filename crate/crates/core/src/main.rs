fn main() {
    std::process::exit(llmfrac::cli::run(std::env::args_os()));
}
