fn main() {
    std::process::exit(dkhac::cli::run(std::env::args_os()));
}
