fn main() {
    std::process::exit(bony_cli::run(std::env::args_os()));
}
