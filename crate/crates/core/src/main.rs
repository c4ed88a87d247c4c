fn main() {
    std::process::exit(qcausal::cli::run(std::env::args_os()));
}
