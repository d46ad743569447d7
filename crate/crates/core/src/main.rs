fn main() {
    std::process::exit(squeezelab::cli::run(std::env::args_os()));
}
