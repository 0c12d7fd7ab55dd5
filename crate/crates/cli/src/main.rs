fn main() {
    std::process::exit(noisemt_cli::run(std::env::args_os()));
}
