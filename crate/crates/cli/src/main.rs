fn main() {
    std::process::exit(mdmvfif_cli::run(std::env::args_os()));
}
