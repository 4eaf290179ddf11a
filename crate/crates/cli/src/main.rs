fn main() {
    std::process::exit(cavity_forge_cli::run(std::env::args_os()));
}
