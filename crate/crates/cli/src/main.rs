fn main() {
    std::process::exit(burnnet_cli::run_cli(std::env::args_os()));
}
