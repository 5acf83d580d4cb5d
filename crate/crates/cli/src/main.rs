fn main() {
    std::process::exit(dopkit_cli::commands::run(std::env::args_os()));
}
